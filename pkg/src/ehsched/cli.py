"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 solver failure.  Results go to
``--out`` (or ``$EHSCHED_OUTPUT_DIR``, else ``./results``) as a CSV time
series plus a JSON summary; the summary is also printed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import presets
from .curves import discretize
from .deadline import DeadlineQuery, min_completion_time
from .multihop import (
    MultiHopSolution,
    Scenario,
    minimize_source_energy,
    solve_throughput,
)
from .online import run_online
from .oracle import brute_force_two_hop, scenario_from_slotted, slot_from_scenario
from .p2p import Schedule
from .scenario_file import RunConfig, ScenarioError, dump_scenario, load_scenario

log = logging.getLogger("ehsched")

OUTPUT_ENV = "EHSCHED_OUTPUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 2, 3


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _round(obj):
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, (np.floating, np.integer)):
        return _round(obj.item())
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(OUTPUT_ENV) or "results"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_fmt(v) for v in row])


def _write_summary(path: Path, summary: dict) -> None:
    text = json.dumps(_round(summary), indent=2, sort_keys=True)
    path.write_text(text + "\n", encoding="utf-8")
    print(text)


def _cell_power(s: Schedule) -> np.ndarray:
    # power of the cell starting at each grid point; the last row repeats
    return np.append(s.power, s.power[-1] if s.power.size else 0.0)


def schedule_table(sc: Scenario, schedules) -> tuple[list[str], list[np.ndarray]]:
    """Header and columns of the standard time-series CSV."""
    t = schedules[0].t
    n = len(schedules)
    header = ["t"]
    header += [f"p_node{i}" for i in range(n)]
    header += [f"E_tx_node{i}" for i in range(n)]
    header += [f"B_tx_node{i}" for i in range(n)]
    header += [f"E_in_node{i}" for i in range(n)]
    header += ["B_in_source"]
    cols = [t]
    cols += [_cell_power(s) for s in schedules]
    cols += [s.energy for s in schedules]
    cols += [s.data for s in schedules]
    cols += [np.asarray(E(t), dtype=float) for E in sc.energy]
    cols += [np.asarray(sc.arrival(t), dtype=float)]
    return header, cols


# ---------------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------------
def _load(args) -> RunConfig:
    source = args.scenario
    if source.startswith("builtin:"):
        cfg = presets.get(source.split(":", 1)[1])
    else:
        cfg = load_scenario(source)
    sc = cfg.scenario
    if getattr(args, "deadline", None) is not None:
        if not args.deadline > 0 or args.deadline > sc.horizon * (1 + 1e-12):
            raise ScenarioError(f"--deadline must lie in (0, {sc.horizon:g}]")
        sc = sc.with_deadline(args.deadline)
    if getattr(args, "discretize", None) is not None:
        if args.discretize < 1:
            raise ScenarioError("--discretize needs at least one epoch")
        T = sc.deadline
        sc = sc.with_curves([discretize(c, args.discretize, T) for c in sc.energy],
                            discretize(sc.arrival, args.discretize, T))
    cfg = RunConfig(sc, cfg.cells, cfg.epsilon, cfg.target_bits, cfg.t_max, cfg.out_dir)
    if getattr(args, "dt", None) is not None:
        cfg = cfg.with_dt(args.dt)
    if getattr(args, "epsilon", None) is not None:
        if not args.epsilon > 0:
            raise ScenarioError("--epsilon must be positive")
        cfg = RunConfig(sc, cfg.cells, args.epsilon, cfg.target_bits, cfg.t_max, cfg.out_dir)
    if args.out is None and cfg.out_dir and not os.environ.get(OUTPUT_ENV):
        args.out = cfg.out_dir
    return cfg


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------
def _solution_summary(sol: MultiHopSolution, sc: Scenario) -> dict:
    return {
        "deadline": sc.deadline,
        "throughput_bits": sol.throughput,
        "energy_J": sol.energies,
        "unminimized_energy_J": [s.total_energy for s in sol.unminimized],
        "transmitted_bits": [s.throughput for s in sol.schedules],
        "unminimized_transmitted_bits": [s.throughput for s in sol.unminimized],
        "tangents": [None if tg is None else {"slope": tg.slope, "T1": tg.T1} for tg in sol.tangents],
        "nodes": list(sc.names),
    }


def cmd_solve_offline(args, cfg: RunConfig) -> dict:
    sc = cfg.scenario
    sol = solve_throughput(sc, cells=cfg.cells, minimize_energy=args.min_source_energy)
    out = _out_dir(args)
    header, cols = schedule_table(sc, sol.schedules)
    _write_csv(out / "solve-offline.csv", header, cols)
    summary = {"subcommand": "solve-offline", "cells": cfg.cells, "discretize": args.discretize,
               "min_source_energy": args.min_source_energy, **_solution_summary(sol, sc)}
    _write_summary(out / "solve-offline.summary.json", summary)
    return summary


def cmd_solve_online(args, cfg: RunConfig) -> dict:
    sc = cfg.scenario
    res = run_online(sc, cfg.epsilon, args.variant, cells=cfg.cells)
    out = _out_dir(args)
    header, cols = schedule_table(sc, res.schedules)
    _write_csv(out / "solve-online.csv", header, cols)
    summary = {
        "subcommand": "solve-online",
        "variant": res.variant,
        "epsilon": res.epsilon,
        "deadline": sc.deadline,
        "cells": cfg.cells,
        "delivered_bits": res.delivered,
        "energy_J": [s.total_energy for s in res.schedules],
        "harvested_J": [float(E(sc.deadline)) for E in sc.energy],
        "switch_times": [list(s) for s in res.switch_times],
    }
    _write_summary(out / "solve-online.summary.json", summary)
    return summary


def cmd_min_time(args, cfg: RunConfig) -> dict:
    sc = cfg.scenario
    target = args.target_bits if args.target_bits is not None else cfg.target_bits
    t_max = args.t_max if args.t_max is not None else (cfg.t_max or sc.horizon)
    if target is None:
        raise ScenarioError("min-time needs --target-bits (or target_bits in the scenario)")
    try:
        q = DeadlineQuery(sc, target, t_max, time_tol=args.time_tol, cells=cfg.cells)
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    t_off, sol = min_completion_time(q)
    sc_off = sc.with_deadline(t_off)
    out = _out_dir(args)
    header, cols = schedule_table(sc_off, sol.schedules)
    _write_csv(out / "min-time.csv", header, cols)
    summary = {"subcommand": "min-time", "target_bits": target, "t_max": t_max, "T_off": t_off,
               "cells": cfg.cells, **_solution_summary(sol, sc_off)}
    _write_summary(out / "min-time.summary.json", summary)
    return summary


def cmd_compare(args, cfg: RunConfig) -> dict:
    sc = cfg.scenario
    off = solve_throughput(sc, cells=cfg.cells)
    prop = run_online(sc, cfg.epsilon, "proposed", cells=cfg.cells)
    bench = run_online(sc, cfg.epsilon, "benchmark", cells=cfg.cells)
    last = sc.hops - 1
    out = _out_dir(args)
    header = ["t", "B_offline", "B_online_proposed", "B_online_benchmark",
              "E_offline", "E_online_proposed", "E_online_benchmark"]
    cols = [off.t, off.schedules[last].data, prop.schedules[last].data, bench.schedules[last].data,
            off.schedules[last].energy, prop.schedules[last].energy, bench.schedules[last].energy]
    _write_csv(out / "compare.csv", header, cols)
    summary = {
        "subcommand": "compare",
        "deadline": sc.deadline,
        "epsilon": prop.epsilon,
        "cells": cfg.cells,
        "delivered_bits": {"offline": off.throughput, "proposed": prop.delivered, "benchmark": bench.delivered},
        "last_node_energy_J": {"offline": off.schedules[last].total_energy,
                               "proposed": prop.schedules[last].total_energy,
                               "benchmark": bench.schedules[last].total_energy},
        "last_node_harvested_J": float(sc.energy[last](sc.deadline)),
    }
    _write_summary(out / "compare.summary.json", summary)
    return summary


def cmd_oracle_check(args, cfg: RunConfig) -> dict:
    sc = cfg.scenario
    if sc.hops != 2:
        raise ScenarioError("oracle-check handles two-hop scenarios only")
    inst = slot_from_scenario(sc, args.slots, args.levels)
    orc = brute_force_two_hop(inst, sc.rates[0], sc.rates[1])
    slotted = scenario_from_slotted(inst, sc.rates)
    sol = solve_throughput(slotted, cells=cfg.cells, minimize_energy=False)
    slack = 1e-6 * max(1.0, orc.delivered)
    trimmed = minimize_source_energy(sol.schedules[0], orc.delivered, sc.rates[0]) if orc.delivered > 0 else None
    trimmed_energy = trimmed.total_energy if trimmed is not None else 0.0
    ok_throughput = sol.throughput >= orc.delivered - slack
    ok_energy = orc.min_source_energy >= trimmed_energy - 1e-6 * max(1.0, trimmed_energy)
    out = _out_dir(args)
    summary = {
        "subcommand": "oracle-check",
        "slots": args.slots,
        "levels": int(inst.powers.size),
        "oracle_delivered_bits": orc.delivered,
        "solver_delivered_bits": sol.throughput,
        "oracle_min_source_energy_J": orc.min_source_energy,
        "solver_source_energy_at_oracle_level_J": trimmed_energy,
        "oracle_powers": [v.tolist() for v in orc.powers],
        "throughput_certified": ok_throughput,
        "energy_certified": ok_energy,
    }
    _write_summary(out / "oracle-check.summary.json", summary)
    if not (ok_throughput and ok_energy):
        raise RuntimeError("oracle certification failed")
    return summary


def cmd_builtin(args) -> dict:
    cfg = presets.get(args.name)
    out = _out_dir(args)
    path = out / f"{args.name}.yaml"
    path.write_text(dump_scenario(cfg), encoding="utf-8")
    print(path)
    return {"path": str(path)}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ehsched", description="Energy-harvesting relay chain scheduling.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("scenario", help="scenario YAML file, or builtin:ex1|ex2|ex3")
        p.add_argument("--dt", type=float, help="grid step (default deadline/4000)")
        p.add_argument("--deadline", type=float, help="override the scenario deadline")
        p.add_argument("--discretize", type=int, metavar="EPOCHS", help="replace every curve by a staircase")
        p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./results)")
        return p

    p = scenario_cmd("solve-offline", "offline throughput-optimal schedule")
    p.add_argument("--min-source-energy", action="store_true",
                   help="trim upstream nodes to the least energy that keeps throughput")
    p.set_defaults(func=cmd_solve_offline)

    p = scenario_cmd("solve-online", "causal policy simulation")
    p.add_argument("--variant", choices=("proposed", "benchmark"), default="proposed")
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_solve_online)

    p = scenario_cmd("min-time", "minimum completion time for a data target")
    p.add_argument("--target-bits", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--time-tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_min_time)

    p = scenario_cmd("compare", "offline vs proposed online vs benchmark online")
    p.add_argument("--epsilon", type=float)
    p.set_defaults(func=cmd_compare)

    p = scenario_cmd("oracle-check", "certify the solver against exhaustive search on a slotted copy")
    p.add_argument("--slots", type=int, default=3)
    p.add_argument("--levels", type=int, default=9)
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("builtin", help="write a built-in scenario file")
    p.add_argument("name", choices=sorted(presets.PRESETS))
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "builtin":
        cmd_builtin(args)
        return EXIT_OK
    try:
        cfg = _load(args)
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        args.func(args, cfg)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
