"""Command line front end: sklift <command> [options]."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction

from . import maass
from .arith import ConstraintError, HalfIntegralMatrix, MissingDataError, factorize, fundamental_decompose
from .modsym import MissingEigenlineError, ModularSymbolSpace, newform_slot
from .padic import DEFAULT_PRECISION, WeightSeries
from .shintani import J_sum, ShintaniTable, classify_discriminant

log = logging.getLogger("sklift")

EXIT_OK, EXIT_CONSTRAINT, EXIT_MISSING = 0, 2, 3

DEFAULTS = {
    "precision": str(DEFAULT_PRECISION),
    "cache_dir": "",
    "t0_bound": "2000",
    "newform": "0",
    "format": "text",
}


def read_config(path: str | None) -> dict:
    """key = value lines; '#' starts a comment."""
    cfg = dict(DEFAULTS)
    if not path:
        return cfg
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConstraintError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg[key] = value.strip('"')
    return cfg


# -- helpers ------------------------------------------------------------------------------


def _split_level(level: int, p: int | None) -> tuple[int, int]:
    if level < 2:
        raise ConstraintError(f"level {level} has no prime divisor p")
    primes = sorted(factorize(level))
    if p is None:
        p = primes[-1]
    if level % p or (level // p) % p == 0:
        raise ConstraintError(f"p = {p} must divide the level {level} exactly once")
    return level // p, p


def _slot(level: int, cfg: dict):
    return newform_slot(ModularSymbolSpace(level), int(cfg["newform"]))


def _table(slot, p: int, cfg: dict) -> ShintaniTable:
    table = ShintaniTable(slot, p)
    if cfg["cache_dir"]:
        n = table.load(table.cache_path(cfg["cache_dir"]))
        log.info("loaded %d cached coefficients", n)
    return table


def _save(table: ShintaniTable, cfg: dict) -> None:
    if cfg["cache_dir"]:
        os.makedirs(cfg["cache_dir"], exist_ok=True)
        table.save(table.cache_path(cfg["cache_dir"]))


def _text_table(rows: list[dict]) -> str:
    if not rows:
        return "(no rows)\n"
    cols = list(rows[0])
    cells = [[_cell(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip()]
    lines += ["  ".join(x.rjust(w) if _numeric(x) else x.ljust(w) for x, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _numeric(x: str) -> bool:
    try:
        Fraction(x)
        return True
    except ValueError:
        return False


def _cell(x) -> str:
    if isinstance(x, list):
        return " ".join(map(str, x)) if x else "-"
    return "-" if x is None else str(x)


def _csv(rows: list[dict]) -> str:
    import csv
    import io

    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]))
        w.writeheader()
        for r in rows:
            w.writerow({k: _cell(v) for k, v in r.items()})
    return buf.getvalue()


def emit(rows, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if isinstance(rows, dict):
        rows = [rows]
    if fmt == "json":
        out.write(json.dumps(rows if len(rows) != 1 else rows[0], indent=1, default=str) + "\n")
    elif fmt == "csv":
        out.write(_csv(rows))
    else:
        out.write(_text_table(rows))


# -- commands -----------------------------------------------------------------------------


def cmd_decompose(args, cfg):
    dec = fundamental_decompose(args.D)
    return {"d": dec.d, "f": dec.f}


def cmd_classify(args, cfg):
    _, p = _split_level(args.level, args.p)
    slot = _slot(args.level, cfg)
    kind = classify_discriminant(args.d, slot, p)
    return {"level": args.level, "p": p, "d": args.d, "type": kind.value,
            "signs": " ".join(f"w{l}={w:+d}" for l, w in sorted(slot.atkin_lehner.items()))}


def cmd_shintani(args, cfg):
    _, p = _split_level(args.level, args.p)
    slot = _slot(args.level, cfg)
    table = _table(slot, p, cfg)
    coeffs = table.extend(args.dmax)
    _save(table, cfg)
    return [{"D": D, "c_D": str(v)} for D, v in coeffs.items() if (-D) % 4 in (0, 1)]


def _provider(args, cfg):
    N, p = _split_level(args.level, args.p)
    if args.weights:
        prov = maass.ingest_weights(args.weights)
        if (prov.N, prov.p) != (N, p):
            raise ConstraintError(f"weights file is for N={prov.N}, p={prov.p}, not N={N}, p={p}")
        return prov, None
    slot = _slot(args.level, cfg)
    table = _table(slot, p, cfg)
    return maass.ComputedProvider(table, N, p), table


def cmd_sk(args, cfg):
    prov, table = _provider(args, cfg)
    ks = prov.weights
    out = []
    for k in ks:
        T0 = maass.select_T0(prov, k, int(cfg["t0_bound"]))
        log.info("k=%d: T0 = %s, D_T0 = %d", k, T0.as_tuple(), T0.disc)
        Ts = [T for T in maass.matrices_up_to(args.tmax) if abs(T.v) <= T.u <= T.w]
        Ts.sort(key=lambda T: (T.disc, T.content, T.as_tuple()))
        for T in Ts:
            rec = maass.sk_record(prov, T, T0, k).as_dict()
            rec["T0"] = list(T0.as_tuple())
            out.append(rec)
    if table is not None:
        _save(table, cfg)
    return out


def _weight_series(prov, forms) -> dict:
    data = {}
    for Q, vals in forms.items():
        samples = dict(vals)
        # J(2, Q) carries the vanishing Euler factor
        samples.setdefault(2, Fraction(0))
        data[Q] = WeightSeries(prov.p, sorted(samples.items()))
    return data


def cmd_jsum(args, cfg):
    N, p = _split_level(args.level, args.p)
    slot = _slot(args.level, cfg)
    weight_data = None
    if args.weights:
        prov = maass.ingest_weights(args.weights)
        weight_data = _weight_series(prov, prov.forms)
    res = J_sum(slot, p, args.d, args.dprime, weight_data)
    return res.as_dict()


def cmd_lreport(args, cfg):
    from .lseries import reports

    _, p = _split_level(args.level, args.p)
    slot = _slot(args.level, cfg)
    reps = reports(slot, p, args.dmax, numeric=not args.exact_only)
    if args.format == "json":
        # JSON lines
        sys.stdout.write("".join(r.to_json() + "\n" for r in reps))
        return None
    return [r.as_dict() for r in reps]


def cmd_selftest(args, cfg):
    from .selftest import run

    results = run(quick=not args.full)
    rows = [{"check": name, "status": "pass" if ok else "FAIL", "detail": detail} for name, ok, detail in results]
    if not all(ok for _, ok, _ in results):
        emit(rows, args.format)
        raise SelfTestFailure()
    return rows


class SelfTestFailure(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    def common(parser, default):
        parser.add_argument("--config", default=default, help="key = value configuration file")
        parser.add_argument("--format", choices=["json", "csv", "text"], default=default)
        parser.add_argument("--cache-dir", dest="cache_dir", default=default)
        parser.add_argument("--newform", type=int, default=default, help="index of the rational newform at the level")
        parser.add_argument("-v", "--verbose", action="store_true", default=default or False)

    ap = argparse.ArgumentParser(prog="sklift", description="Saito-Kurokawa coefficients of weight-2 newforms")
    common(ap, None)
    # the same options are accepted after the command name
    shared = argparse.ArgumentParser(add_help=False)
    common(shared, argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[shared], **kw)

    sub.add_parser = add_parser

    s = sub.add_parser("decompose", help="fundamental decomposition D = d f^2")
    s.add_argument("D", type=int)
    s.set_defaults(func=cmd_decompose)

    def level_args(s):
        s.add_argument("--level", type=int, required=True, help="level Np")
        s.add_argument("--p", type=int, default=None, help="distinguished prime (default: largest prime factor)")

    s = sub.add_parser("classify", help="type I / II of a discriminant")
    level_args(s)
    s.add_argument("--d", type=int, required=True)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("shintani", help="build the c_D(2) table")
    level_args(s)
    s.add_argument("--dmax", type=int, required=True)
    s.set_defaults(func=cmd_shintani)

    s = sub.add_parser("sk", help="Saito-Kurokawa coefficient records")
    level_args(s)
    s.add_argument("--tmax", type=int, required=True, help="bound on the entries of reduced T")
    s.add_argument("--weights", default=None, help="ingested multi-weight data")
    s.set_defaults(func=cmd_sk)

    s = sub.add_parser("jsum", help="genus-character J sum")
    level_args(s)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--dprime", type=int, required=True)
    s.add_argument("--weights", default=None)
    s.set_defaults(func=cmd_jsum)

    s = sub.add_parser("lreport", help="L-function vanishing reports for type II discriminants")
    level_args(s)
    s.add_argument("--dmax", type=int, required=True)
    s.add_argument("--exact-only", action="store_true", help="skip the numeric derivative")
    s.set_defaults(func=cmd_lreport)

    s = sub.add_parser("selftest", help="run the invariant checks on the built-in fixtures")
    s.add_argument("--full", action="store_true")
    s.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = read_config(args.config)
        for key in ("format", "cache_dir", "newform"):
            if getattr(args, key) is not None:
                cfg[key] = str(getattr(args, key))
        args.format = cfg["format"]
        result = args.func(args, cfg)
        if result is not None:
            emit(result, args.format)
    except (ConstraintError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (MissingDataError, MissingEigenlineError, FileNotFoundError) as exc:
        print(f"missing data: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except SelfTestFailure:
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
