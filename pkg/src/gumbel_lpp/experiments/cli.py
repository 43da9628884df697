"""Command line entry point.

    gumbel-lpp run theorem1.ini [more.ini | manifest.json ...] [--seed S] [--samples K] [--out DIR]
    gumbel-lpp theorem1_match --n 2,5,10 --samples 50000 --seed 7
    gumbel-lpp tw-table --out tw.tsv

Exit status: 0 when every verdict passes, 1 on any statistical rejection,
2 on configuration, input or I/O errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import EXPERIMENTS, ConfigError, ExperimentConfig, _floats, _ints, _pairs, apply_overrides, parse_config
from .report import emit_report, load_manifest
from .runner import run

EXIT_OK, EXIT_REJECT, EXIT_ERROR = 0, 1, 2


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--samples", type=int, help="samples per case (overrides the config)")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--workers", type=int, help="worker threads for sampling")
    p.add_argument("--alpha", type=float, help="significance level")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gumbel-lpp",
                                 description="Monte Carlo checks for Gumbel LPP and the log-gamma polymer.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run experiments from config files or a manifest")
    p.add_argument("configs", nargs="+", help="config file(s) or manifest.json")
    _common(p)

    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run {name} with flags instead of a config file")
        p.add_argument("--m", type=_ints, default=[])
        p.add_argument("--n", type=_ints, default=[])
        p.add_argument("--N", type=_ints, default=[])
        p.add_argument("--gamma", type=float, default=1.0)
        p.add_argument("--convention", default="rate_N_minus_i")
        p.add_argument("--z1", type=_floats, default=[])
        p.add_argument("--z2", type=_floats, default=[])
        p.add_argument("--schedule", type=_pairs, default=[], help="n:N pairs, e.g. 16:10,32:100")
        p.add_argument("--bins", type=int, default=60)
        _common(p)

    p = sub.add_parser("tw-table", help="export F_GUE on a grid as TSV")
    p.add_argument("--lo", type=float, default=-8.0)
    p.add_argument("--hi", type=float, default=6.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--out", help="file to write (default stdout)")
    return ap


def _load(path: str) -> list[ExperimentConfig]:
    text = Path(path).read_text(encoding="utf-8")
    try:
        json.loads(text)
    except ValueError:
        try:
            return [parse_config(text, validate_fields=False)]
        except ConfigError as e:
            raise ConfigError([f"{path}: {p}" for p in e.problems]) from None
    return load_manifest(path)


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in ("seed", "samples", "out", "workers", "alpha")}


def _configs(args) -> list[ExperimentConfig]:
    if args.command == "run":
        cfgs = [c for path in args.configs for c in _load(path)]
    else:
        cfgs = [ExperimentConfig(experiment=args.command, m=args.m, n=args.n, N=args.N,
                                 gamma=args.gamma, convention=args.convention, z1=args.z1,
                                 z2=args.z2, schedule=args.schedule, bins=args.bins)]
    out = []
    for k, c in enumerate(cfgs):
        ov = _overrides(args)
        if ov["out"] is not None and len(cfgs) > 1:
            ov["out"] = str(Path(ov["out"]) / f"{k}_{c.experiment}")
        out.append(apply_overrides(c, **ov))
    return out


def _tw_table(args) -> int:
    from ..asymptotics import TwTable

    rows = TwTable(args.lo, args.hi, args.step).rows()
    text = "r\tF_GUE\n" + "".join(f"{r:.17g}\t{f:.17g}\n" for r, f in rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "tw-table":
            return _tw_table(args)
        cfgs = _configs(args)  # everything validated before any sampling
        status = EXIT_OK
        for cfg in cfgs:
            rep = run(cfg)
            emit_report(rep, cfg.output_dir)
            verdicts = rep.as_dict()["verdicts"]
            print(f"{cfg.experiment}: seed={cfg.master_seed} samples={cfg.samples} "
                  f"time={rep.wall_clock:.1f}s -> {cfg.output_dir}")
            for c in rep.cases:
                ks = c.ks
                print(f"  {c.name:24s} D={ks.statistic:.5f} p={ks.p_value:.4g}")
            for k, v in verdicts.items():
                print(f"  [{v or 'data only'}] {k}")
            if not rep.passed:
                status = EXIT_REJECT
        return status
    except ConfigError as e:
        for p in e.problems:
            print(f"config error: {p}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
