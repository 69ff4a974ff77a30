"""Command-line driver.

    bdqms verify       run every invariant suite, write a JSON report
    bdqms stage-table  per-stage constants as CSV
    bdqms baire        chained bounds for pairs of sequences
    bdqms kantorovich  state-pair distances on a toy space

Exit codes: 0 all checks pass, 1 some check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bunce_deddens import boxtimes, stage_constants
from .config import ConfigError, ExperimentConfig, load_config
from .ou_core import (
    DegenerateLipNormError,
    StateFunctional,
    finite_commutative_space,
    kantorovich,
    kantorovich_exact_finite,
    stage_space,
    state_net,
)
from .suites import _toy_distances, run_suites
from .tunnels import baire_lipschitz_check, tail_constant

__all__ = ["cmd_baire", "cmd_kantorovich", "cmd_stage_table", "cmd_verify", "main"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, Fraction, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def to_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _table(header, rows, fmt):
    if fmt == "csv":
        return to_csv(header, rows)
    return to_json([dict(zip(header, r)) for r in rows])


def cmd_verify(cfg: ExperimentConfig) -> tuple[int, str]:
    records = run_suites(cfg)
    for r in records:
        r["slack"] = r["threshold"] - r["measured"]
    passed = all(r["passed"] for r in records)
    report = {"config": cfg.to_dict(), "checks": records, "passed": passed,
              "failed": [r["name"] for r in records if not r["passed"]]}
    if cfg.format == "csv":
        text = to_csv(["name", "passed", "measured", "threshold", "slack"],
                      [[r["name"], r["passed"], r["measured"], r["threshold"], r["slack"]] for r in records])
    else:
        text = to_json(report)
    return (EXIT_OK if passed else EXIT_FAIL), text


STAGE_COLUMNS = ["m", "order", "lip_U_prev", "k_m", "kappa_m", "beta_m", "consecutive_bound", "tail_bound"]


def cmd_stage_table(cfg: ExperimentConfig) -> tuple[int, str]:
    rows = []
    for m in range(cfg.max_stage + 1):
        c = stage_constants(cfg.sigma, m, cfg.grid)
        rows.append([m, boxtimes(cfg.sigma, m), c.lU, c.k_m, c.kappa_m, Fraction(1, 2 ** m),
                     Fraction(4, 2 ** m), tail_constant(m)])
    return EXIT_OK, _table(STAGE_COLUMNS, rows, cfg.format)


BAIRE_COLUMNS = ["x", "y", "first_difference", "d_N", "chain_bound", "32_d_N", "ratio", "prefix_equal", "holds"]


def cmd_baire(cfg: ExperimentConfig) -> tuple[int, str]:
    rows, ok = [], True
    for x, y in cfg.baire_pairs:
        res = baire_lipschitz_check(x, y, samples=2, seed=cfg.seed, cutoff=1, gp=cfg.grid)
        d = res["distance"]
        holds = res["bound"] <= res["lipschitz_bound"] and res["max_discrepancy"] < 1e-9
        ok &= holds
        rows.append([" ".join(map(str, x)), " ".join(map(str, y)), d.first_difference, d.value, res["bound"],
                     res["lipschitz_bound"], res["ratio"], d.prefix_equal, holds])
    return (EXIT_OK if ok else EXIT_FAIL), _table(BAIRE_COLUMNS, rows, cfg.format)


KANT_COLUMNS = ["phi", "psi", "value", "oracle", "abs_error", "bound", "error"]


def cmd_kantorovich(cfg: ExperimentConfig) -> tuple[int, str]:
    kp = cfg.kantorovich_params
    toy = cfg.toy
    rows, ok = [], True
    if toy["kind"] == "finite":
        D = _toy_distances(cfg)
        space = finite_commutative_space(D)
        states = list(state_net(space, cfg.net_params))
        pairs = [(p, q) for i, p in enumerate(states) for q in states[i:]]
        bound = space.diameter_bound
    else:
        space = stage_space(cfg.sigma, toy.get("stage", 1), min(cfg.cutoff, 1), cfg.grid)
        states = list(state_net(space, cfg.net_params))
        tau = StateFunctional(space.reference.copy(), "tau")
        pairs = [(p, tau) for p in states]
        bound = 1.0
        D = None
        # stage Lip-norms cost milliseconds per call; cap the search
        kp = replace(kp, restarts=min(kp.restarts, 4), iterations=min(kp.iterations, 100),
                     polish_iterations=min(kp.polish_iterations, 50))
    for p, q in pairs:
        try:
            val = kantorovich(space, p, q, kp).value
        except DegenerateLipNormError as exc:
            rows.append([p.label, q.label, None, None, None, bound, str(exc)])
            ok = False
            continue
        oracle = kantorovich_exact_finite(D, p.weights, q.weights) if D is not None else None
        err = abs(val - oracle) if oracle is not None else None
        ok &= val <= bound + 1e-6 and (err is None or err <= 1e-3 * max(oracle, 1e-12) + 1e-9)
        rows.append([p.label, q.label, val, oracle, err, bound, ""])
    return (EXIT_OK if ok else EXIT_FAIL), _table(KANT_COLUMNS, rows, cfg.format)


COMMANDS = {"verify": cmd_verify, "stage-table": cmd_stage_table, "baire": cmd_baire, "kantorovich": cmd_kantorovich}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bdqms", description="Bunce-Deddens quantum metric experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", type=Path, help="write the report here instead of stdout")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-stage", type=int)
        p.add_argument("--cutoff", type=int)
        p.add_argument("--format", choices=["csv", "json"])
        if name == "verify":
            p.add_argument("--uncorrected-unitary-bound", action="store_true", default=None,
                           help="check l(U_m) against the bound without the 2 pi factor")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, max_stage=args.max_stage, cutoff=args.cutoff,
                          format=args.format,
                          uncorrected_unitary_bound=getattr(args, "uncorrected_unitary_bound", None))
    except ConfigError as exc:
        print(f"bdqms: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if cfg.format is None:
        cfg = replace(cfg, format="json" if args.command == "verify" else "csv")
    code, text = COMMANDS[args.command](cfg)
    out = args.out or (Path(cfg.output) if cfg.output else None)
    if out:
        out.write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
