"""Command line entry point: ``torusnodal <experiment> [options]``.

Exit status is 1 when a hard invariant fails, 2 on bad input, 0 otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import TorusNodalError
from .lab import EXPERIMENTS, ExperimentConfig, run

HELP = {
    "lattice": "lattice-point census over E <= N with exact verifiers",
    "widths": "nodal extraction, regular arcs and width scaling scan",
    "functheory": "Jensen gaps, doubling exponents, Turan and Remez checks",
    "appendix": "implicit derivatives along the nearly straight nodal branch",
    "plot": "SVG of a nodal set",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torusnodal", description="Nodal-line experiments on the flat torus.")
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name, help=HELP[name])
        s.add_argument("--config", type=Path, help="JSON config; keys as in ExperimentConfig")
        s.add_argument("--out", type=Path, help="output directory (default: out/<experiment>)")
        s.add_argument("--seed", type=int, help="base seed")
        s.add_argument("--jobs", type=int, help="worker processes")
        s.add_argument("--svg", action="store_true", default=None, help="also write SVG plots")
        s.add_argument("--set", action="append", default=[], metavar="KEY=JSON",
                       help="override one config key, e.g. --set N=1000 or --set 'energies=[25,65]'")
        if name == "plot":
            s.add_argument("--function", help="smooth65, crossing65, or an eigenfunction JSON file")
    return p


def _override(text: str) -> tuple[str, object]:
    key, sep, raw = text.partition("=")
    if not sep:
        raise TorusNodalError(f"--set expects KEY=VALUE, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def make_config(args) -> ExperimentConfig:
    doc = json.loads(args.config.read_text()) if args.config else {}
    if doc.get("experiment", args.experiment) != args.experiment:
        raise TorusNodalError(f"config is for {doc['experiment']!r}, not {args.experiment!r}")
    doc["experiment"] = args.experiment
    for item in args.set:
        k, v = _override(item)
        doc[k] = v
    for key in ("seed", "jobs", "svg", "function"):
        v = getattr(args, key, None)
        if v is not None:
            doc[key] = v
    if args.out is not None:
        doc["out"] = str(args.out)
    return ExperimentConfig.from_dict(doc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = make_config(args)
        report = run(cfg)
    except (TorusNodalError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg.out) if cfg.out else Path("out") / cfg.experiment
    report.write(out)
    for name, inv in sorted(report.invariants.items()):
        tag = "ok  " if inv["passed"] else ("FAIL" if inv["hard"] else "warn")
        kind = "hard" if inv["hard"] else "soft"
        print(f"{tag} [{kind}] {name}" + (f"  ({inv['detail']})" if inv["detail"] and not inv["passed"] else ""))
    print(f"report written to {out / 'report.json'}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
