"""Independent brute-force oracle for Gamma_0(N)-classes of Heegner forms.

Generators of Gamma_0(N) come from Schreier's lemma on the coset action of
S and T on P^1(Z/N); classes are connected components of the graph of forms
in a coefficient box joined by those generators. The box is doubled until the
number of components meeting a finite core set stops changing.
"""

from math import gcd, isqrt

S = ((0, -1), (1, 0))
T = ((1, 1), (0, 1))
Tinv = ((1, -1), (0, 1))


def mul(g, h):
    return (
        (g[0][0] * h[0][0] + g[0][1] * h[1][0], g[0][0] * h[0][1] + g[0][1] * h[1][1]),
        (g[1][0] * h[0][0] + g[1][1] * h[1][0], g[1][0] * h[0][1] + g[1][1] * h[1][1]),
    )


def inv(g):
    (a, b), (c, d) = g
    return ((d, -b), (-c, a))


def coset_key(g, N):
    # Gamma_0(N) g is determined by the bottom row up to units mod N
    c, d = g[1][0] % N, g[1][1] % N
    best = None
    for u in range(1, N + 1):
        if gcd(u, N) == 1:
            cand = ((u * c) % N, (u * d) % N)
            best = cand if best is None or cand < best else best
    return best


def right_cosets(N):
    """Representatives g of Gamma_0(N) \\ SL_2(Z), found by BFS on bottom rows."""
    I = ((1, 0), (0, 1))
    reps = {coset_key(I, N): I}
    queue = [I]
    while queue:
        g = queue.pop()
        for s in (S, T, Tinv):
            h = mul(g, s)
            key = coset_key(h, N)
            if key not in reps:
                reps[key] = h
                queue.append(h)
    return reps


def gamma0_generators(N):
    if N == 1:
        return [S, T]
    I = ((1, 0), (0, 1))
    reps = right_cosets(N)
    gens = set()
    for g in reps.values():
        for s in (S, T):
            h = mul(g, s)
            gen = mul(h, inv(reps[coset_key(h, N)]))
            assert gen[1][0] % N == 0
            if gen != I:
                gens.add(gen)
    return sorted(gens)


def act(Q, g):
    A, B, C = Q
    (a, b), (c, d) = g
    return (
        A * a * a + B * a * c + C * c * c,
        2 * A * a * b + B * (a * d + b * c) + 2 * C * c * d,
        A * b * b + B * b * d + C * d * d,
    )


def heegner_box(Delta, N, delta, K):
    forms = set()
    for B in range(-K, K + 1):
        if (B - delta) % N or (B * B - Delta) % 4:
            continue
        m = (B * B - Delta) // 4  # = A C
        if m == 0:
            continue
        for A in range(-K, K + 1):
            if A == 0 or A % N or m % A:
                continue
            C = m // A
            if abs(C) <= K and gcd(gcd(A, B), C) == 1:
                forms.add((A, B, C))
    return forms


def core_forms(Delta, N, delta):
    """Every SL_2(Z)-class has a form R with A C < 0; writing Q = R|(r h) with h in
    Gamma_0(N) and r a left coset representative shows Q ~ R|r."""
    lefts = [inv(g) for g in right_cosets(N).values()]
    out = set()
    for f in heegner_box(Delta, 1, Delta % 2, Delta):
        if f[0] * f[2] < 0:
            for r in lefts:
                h = act(f, r)
                if h[0] % N == 0 and (h[1] - delta) % N == 0:
                    out.add(h)
    return out


def count_classes(Delta, N, delta, K):
    gens = gamma0_generators(N)
    gens = gens + [inv(g) for g in gens]
    core = core_forms(Delta, N, delta)
    K = max([K] + [abs(x) for f in core for x in f])
    forms = heegner_box(Delta, N, delta, K)
    parent = {f: f for f in forms}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in forms:
        for g in gens:
            h = act(f, g)
            if h in parent:
                a, b = find(f), find(h)
                if a != b:
                    parent[a] = b
    return len({find(f) for f in core})


def brute_force_class_count(Delta, N, delta):
    K = 4 * N * (isqrt(Delta) + 2)
    prev = None
    while True:
        n = count_classes(Delta, N, delta, K)
        if n == prev:
            return n
        prev = n
        K *= 2
