"""Command-line front end.

Subcommands:
    simplify    parse an expression and print its canonical form
    verify      run the relation-certification suite from a config
    cohomology  run the gauge-correction pipeline on a gauge table
    schur       one-off scalar extraction (commutator pair or expression)
    eval        evaluate an expression to a matrix and export it

Reports are JSON with sorted keys and no timestamps, so identical inputs
produce byte-identical output.  Exit codes: 0 all checks pass, 1 a check
failed, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
from dataclasses import replace

from resalg import cohomology, fock, symplectic, verify
from resalg.expr import DomainError, ParseError, parse, simplify


def _eprint(message: str):
    print(message, file=sys.stderr)


def _emit(args, payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2 if args.pretty else None)
    if getattr(args, "out", None):
        pathlib.Path(args.out).write_text(text + "\n")
    else:
        print(text)


def _parse_trunc(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise verify.ConfigError(f"bad truncation list {text!r}") from exc


def _load_config(args) -> verify.Config:
    if getattr(args, "config", None):
        path = pathlib.Path(args.config)
        if not path.exists():
            raise verify.ConfigError(f"config file not found: {path}")
        config = verify.Config.from_json(path.read_text())
    else:
        config = verify.Config()
    overrides = {}
    if getattr(args, "trunc", None):
        overrides["truncations"] = _parse_trunc(args.trunc)
    if getattr(args, "compress", None) is not None:
        overrides["compression"] = args.compress
    if getattr(args, "tol", None) is not None:
        overrides["tolerance"] = args.tol
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if overrides:
        config = replace(config, **overrides)
    return config


def _parse_vector(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise verify.ConfigError(f"bad vector {text!r}") from exc


# ---------------------------------------------------------------------------
# subcommands


def cmd_simplify(args) -> int:
    try:
        canonical = simplify(parse(args.expression))
    except (ParseError, DomainError) as exc:
        _eprint(f"error: {exc}")
        return 2
    if args.json or args.out:
        _emit(args, {
            "schema_version": 1,
            "input": args.expression,
            "canonical": str(canonical),
        })
    else:
        print(str(canonical))
    return 0


def cmd_verify(args) -> int:
    try:
        config = _load_config(args)
    except verify.ConfigError as exc:
        _eprint(f"config error: {exc}")
        return 2
    try:
        result = verify.run_suite(config)
    except RuntimeError as exc:
        _eprint(f"suite failed: {exc}")
        return 1
    _emit(args, result.to_report())
    if not result.all_pass:
        failed = sorted({c.relation for c in result if not c.verdict})
        _eprint(f"failed families: {', '.join(failed)}")
        return 1
    return 0


def cmd_cohomology(args) -> int:
    try:
        config = _load_config(args)
    except verify.ConfigError as exc:
        _eprint(f"config error: {exc}")
        return 2
    if args.gauge:
        path = pathlib.Path(args.gauge)
        if not path.exists():
            _eprint(f"config error: gauge file not found: {path}")
            return 2
        try:
            gauge = cohomology.gauge_from_json(path.read_text())
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            _eprint(f"config error: bad gauge file: {exc}")
            return 2
    else:
        gauge = cohomology.zero_gauge(2 * config.modes, cohomology.DEFAULT_BOX)
    if gauge.dim != 2 * config.modes:
        _eprint(
            f"config error: gauge dimension {gauge.dim} does not match "
            f"{config.modes} mode(s)"
        )
        return 2
    rep = fock.build_rep(config.modes, config.truncations[0], config.max_dim)
    report = cohomology.run_pipeline(
        rep,
        gauge,
        cutoff=config.compression,
        seed=config.seed,
        corrupt_pair=args.corrupt_xi,
    )
    _emit(args, report)
    if not report["all_pass"]:
        failed = [name for name, st in report["stages"].items() if not st["ok"]]
        _eprint(f"failed stages: {', '.join(failed)}")
        return 1
    return 0


def cmd_schur(args) -> int:
    try:
        config = _load_config(args)
    except verify.ConfigError as exc:
        _eprint(f"config error: {exc}")
        return 2
    rep = fock.build_rep(config.modes, config.truncations[0], config.max_dim)
    payload = {
        "schema_version": 1,
        "truncation": rep.levels,
        "compression": config.compression,
        "seed": config.seed,
    }
    if args.pair:
        try:
            left, right = args.pair.split(";")
            f, g = _parse_vector(left), _parse_vector(right)
            gf, gg = fock.generator(rep, f), fock.generator(rep, g)
        except (verify.ConfigError, ValueError) as exc:
            _eprint(f"error: {exc}")
            return 2
        prod = gf @ gg
        k = -1j * (prod - prod.conj().T)
        target = symplectic.pair(rep.space, f, g)
        payload["mode"] = "commutator"
        payload["pairing"] = target
    else:
        try:
            expr = parse(args.expression)
            k = fock.evaluate(rep, expr)
        except (ParseError, DomainError) as exc:
            _eprint(f"error: {exc}")
            return 2
        target = None
        payload["mode"] = "expression"
        payload["expression"] = str(expr)
    report = fock.schur_constant(
        rep, k, cutoff=config.compression, seed=config.seed
    )
    payload.update(
        {
            "mean": [report.mean.real, report.mean.imag],
            "max_deviation": report.max_deviation,
            "probes_used": report.probes_used,
            "is_scalar": report.is_scalar,
        }
    )
    ok = report.is_scalar
    if target is not None:
        gap = abs(report.mean - target)
        payload["pairing_gap"] = gap
        ok = ok and gap <= verify.SIGMA_CROSS_TOL
    _emit(args, payload)
    return 0 if ok else 1


def cmd_eval(args) -> int:
    try:
        config = _load_config(args)
    except verify.ConfigError as exc:
        _eprint(f"config error: {exc}")
        return 2
    try:
        expr = parse(args.expression)
    except (ParseError, DomainError) as exc:
        _eprint(f"error: {exc}")
        return 2
    rep = fock.build_rep(config.modes, config.truncations[0], config.max_dim)
    try:
        matrix = fock.evaluate(rep, expr)
    except DomainError as exc:
        _eprint(f"error: {exc}")
        return 2
    if args.out and not args.json:
        fock.save_matrix(args.out, matrix)
    else:
        _emit(args, {
            "schema_version": 1,
            "expression": str(expr),
            "truncation": rep.levels,
            "modes": rep.modes,
            "matrix": fock.matrix_to_json(matrix),
        })
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resalg",
        description="Resolvent-family algebra toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_out=True):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trunc", help="comma-separated truncation levels")
        p.add_argument("--compress", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--json", action="store_true", help="force JSON output")
        p.add_argument("--pretty", action="store_true", help="indent JSON output")
        if with_out:
            p.add_argument("--out", help="write the report to this path")

    p = sub.add_parser("simplify", help="canonicalize an expression")
    p.add_argument("expression")
    common(p)
    p.set_defaults(func=cmd_simplify)

    p = sub.add_parser("verify", help="run the relation suite")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cohomology", help="run the correction pipeline")
    p.add_argument("--gauge", help="JSON gauge table; omitted means zero gauge")
    p.add_argument(
        "--corrupt-xi",
        action="store_true",
        help="inject a fault into the pair table (self-test of failure path)",
    )
    common(p)
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("schur", help="extract a scalar from an operator")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("expression", nargs="?", help="expression to probe")
    group.add_argument("--pair", help='two vectors "f1,f2;g1,g2" for a commutator')
    common(p)
    p.set_defaults(func=cmd_schur)

    p = sub.add_parser("eval", help="evaluate an expression to a matrix")
    p.add_argument("expression")
    common(p)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
