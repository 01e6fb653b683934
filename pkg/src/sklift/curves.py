"""Point counts on Weierstrass curves, used to pin newforms by their a_p."""

from __future__ import annotations

from .arith import kronecker


def ap_from_curve(coeffs, p: int) -> int:
    """a_p = p + 1 - #E(F_p) for y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6,
    counted naively; p must be a prime of good reduction."""
    a1, a2, a3, a4, a6 = coeffs
    if p == 2:
        count = 1
        for x in range(2):
            for y in range(2):
                if (y * y + a1 * x * y + a3 * y - (x**3 + a2 * x * x + a4 * x + a6)) % 2 == 0:
                    count += 1
        return p + 1 - count
    # complete the square: (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    total = 0
    for x in range(p):
        total += kronecker((4 * x**3 + b2 * x * x + 2 * b4 * x + b6) % p, p)
    return -total


def read_curves_tsv(path) -> list[dict]:
    """Rows of label, conductor, a1, a2, a3, a4, a6 (tab separated, # comments)."""
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t") if "\t" in line else line.split()
            label, cond, *a = parts
            rows.append({"label": label, "conductor": int(cond), "coeffs": tuple(int(x) for x in a)})
    return rows
