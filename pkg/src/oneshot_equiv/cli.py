"""Command-line entry point.

    oneshot-equiv gen-state --seed 1 --n 2 --out state.json
    oneshot-equiv entropy state.json --quantity hmax --target A --side E
    oneshot-equiv verify all --seed 42 --out report.json

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields

from . import entropies as ent
from .algorithms import AlgorithmInstance, InstanceConfig, random_instance
from .quantum import QOperator
from .suite import CHECKS, RunConfig, dumps_report, report_document, run, summary_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


# ------------------------------------------------------------------ gen-state


def cmd_gen_state(args) -> int:
    try:
        cfg = InstanceConfig(args.n, args.m, e_qubits=args.e_qubits, trace=args.trace)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    inst = random_instance(args.seed, cfg)
    doc = {"config": {"seed": args.seed, **cfg.__dict__}, "instance": inst.to_json()}
    _write(args.out, json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


def load_state(path: str, which: str = "rho_ZAE") -> QOperator:
    """Operator from a state file: a bare operator or one member of a generated instance."""
    doc = _load_json(path)
    try:
        if "matrix" in doc:
            return QOperator.from_json(doc)
        inst = AlgorithmInstance.from_json(doc.get("instance", doc))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed state file {path}: {exc}") from exc
    if which == "standard_form":
        return inst.standard_form.density()
    return getattr(inst, which)


# ------------------------------------------------------------------ entropy


def cmd_entropy(args) -> int:
    s = load_state(args.state, args.which)
    target = args.target.split(",")
    side = [n for n in args.side.split(",") if n] if args.side else [n for n in s.names if n not in target]
    unknown = [n for n in target + side if n not in s.names]
    if unknown:
        raise UsageError(f"unknown register(s) {unknown}; state has {list(s.names)}")
    try:
        if args.quantity == "hmin":
            out = ent.hmin(s, target, side).to_json()
        elif args.quantity == "hmax":
            res = ent.hmax(s, target, side, method=args.method)
            out = res.to_json()
        else:
            if len(target) != 1:
                raise UsageError("pguess needs a single target register")
            out = {"value": ent.pguess(s, target[0], side)}
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out["quantity"] = args.quantity
    out["target"], out["side"] = target, side
    print(json.dumps(out, sort_keys=True))
    return EXIT_OK


# ------------------------------------------------------------------ verify


def resolve_config(args) -> RunConfig:
    """Defaults, then the optional JSON config file, then explicit flags."""
    values: dict = {}
    if args.config:
        values.update(_load_json(args.config))
    names = {f.name for f in fields(RunConfig)}
    unknown = set(values) - names
    if unknown:
        raise UsageError(f"unknown config key(s): {sorted(unknown)}")
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    values["checks"] = [args.check]
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_verify(args) -> int:
    cfg = resolve_config(args)
    reports = run(cfg)
    doc = report_document(cfg, reports)
    try:
        if cfg.out:
            _write(cfg.out, dumps_report(doc))
            _write(cfg.csv or cfg.out.rsplit(".", 1)[0] + ".csv", summary_csv(reports))
        elif cfg.csv:
            _write(cfg.csv, summary_csv(reports))
    except OSError as exc:
        raise UsageError(f"cannot write report: {exc}") from exc
    for row in doc["summary"]:
        print(f"{'PASS' if row['passed'] else 'FAIL'}  {row['check']:<32} n={row['instances']:<3} "
              f"min_slack={row['min_slack']!r:<24} max_spread={row['max_spread']!r}")
    failed = [r for r in reports if not r.passed]
    for r in failed:
        print(f"failed: {r.check} {json.dumps(r.instance, sort_keys=True)} lhs={float(r.lhs)!r} rhs={float(r.rhs)!r}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oneshot-equiv", description="hashing and decoding index toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-state", help="write a seeded random standard-form instance")
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--n", type=int, default=1)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--e-qubits", type=int, default=1)
    g.add_argument("--trace", type=float, default=1.0)
    g.add_argument("--out", default=None, help="output path (stdout if omitted)")
    g.set_defaults(func=cmd_gen_state)

    e = sub.add_parser("entropy", help="evaluate an entropic quantity of a state file")
    e.add_argument("state")
    e.add_argument("--quantity", choices=["hmin", "hmax", "pguess"], default="hmin")
    e.add_argument("--target", default="A", help="comma-separated target registers")
    e.add_argument("--side", default=None, help="comma-separated side registers (default: the rest)")
    e.add_argument("--which", choices=["rho_ZAE", "rho_XAB", "standard_form"], default="rho_ZAE")
    e.add_argument("--method", choices=["both", "direct", "duality"], default="both")
    e.set_defaults(func=cmd_entropy)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("check", choices=["all", *CHECKS])
    v.add_argument("--seed", type=int)
    v.add_argument("--n", type=int)
    v.add_argument("--m", type=int)
    v.add_argument("--family", choices=["all-linear", "toeplitz"])
    v.add_argument("--delta-family", dest="delta_family", help="HashFamily JSON used by the almost-universal checks")
    v.add_argument("--count", type=int, help="instances per check")
    v.add_argument("--out", help="JSON report path (CSV summary written next to it)")
    v.add_argument("--csv", help="CSV summary path")
    v.add_argument("--jobs", type=int)
    v.add_argument("--tol", type=float, help="tolerance override for floating-point checks")
    v.add_argument("--config", help="JSON file of RunConfig fields; flags take precedence")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
