"""Command-line entry point: ``thermal-ballast <subcommand> ...``.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import _json
from .comfort import ComfortInput, classify, pmv
from .controller import ControllerConfig, ForecastWindow, alpha_star
from .exceptions import MissingKey, ParseError, PathNotFound, ThermalBallastError
from .project import load_envelope, load_project, read_training_csv
from .report import (
    comfort_assessment,
    report,
    write_cells_csv,
    write_heatmap_csv,
)
from .simulator import run
from .thermal_model import identify
from .tuner import SweepSpec, heatmap_data, pareto_front, select_optimum, sweep

__all__ = ["main", "build_parser"]


def _cmd_identify(args):
    X, y, step = read_training_csv(args.data)
    model, rep = identify(X, y, order=args.order, split_fraction=args.split, ts=step, mode=args.mode)
    model.save(args.output)
    payload = {"model": str(args.output), **rep.to_dict()}
    if args.report:
        _json.dump(payload, args.report)
    print(f"R2 {rep.r2:.4f}  nMAE {rep.nmae_percent:.3f} %  (order {rep.order}, "
          f"{rep.n_validation} validation samples)")
    return 0


def _cmd_envelope(args):
    summary = load_envelope(args.definition)
    for name, kappa, area, cap in summary.rows():
        print(f"{name:<24s} kappa {kappa:9.3f} kJ/(m2 K)  area {area:8.2f} m2  C {cap:10.2f} kJ/K")
    print(f"{'total':<24s} {summary.total:.2f} kJ/K")
    if args.output:
        _json.dump({"components": [dict(name=n, kappa=k, area=a, capacity=c) for n, k, a, c in summary.rows()],
                    "total_kj_per_k": summary.total}, args.output)
    return 0


def _cmd_decide(args):
    path = Path(args.window)
    if not path.is_file():
        raise PathNotFound(f"window: {path} does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    fw = ForecastWindow.from_dict(raw)
    cfg = ControllerConfig(omega=args.omega, horizon=fw.m, step=args.step, gamma=args.gamma,
                           eta=1 if args.mode == "heating" else -1, c_th=args.c_th)
    decision = alpha_star(cfg, fw)
    print(_json.dumps(decision.to_dict()))
    return 0


def _project_and_scenario(path, output):
    project = load_project(path)
    out_dir = Path(output) if output else project.output_dir
    return project, project.scenario(), out_dir


def _cmd_simulate(args):
    project, scenario, out_dir = _project_and_scenario(args.scenario, args.output)
    result = run(scenario, controlled=args.controlled)
    prefix = "controlled_" if args.controlled else "baseline_"
    report(result, out_dir, figure_data=args.figure_data and args.controlled, prefix=prefix)
    _print_result(result)
    return 0


def _print_result(result):
    print(f"baseline   {result.baseline_emissions_kg:.3f} kgCO2  {result.baseline_energy_kwh:.3f} kWh")
    if result.controlled:
        print(f"controlled {result.controlled_emissions_kg:.3f} kgCO2  {result.controlled_energy_kwh:.3f} kWh")
        print(f"reduction  {result.emissions_reduction_percent:.2f} %  "
              f"{result.avg_daily_saving:.2f} g/day  dT avg {result.avg_daily_deltaT:.3f} K "
              f"max {result.max_daily_deltaT:.3f} K")


def _cmd_report(args):
    project, scenario, out_dir = _project_and_scenario(args.scenario, args.output)
    result = run(scenario, controlled=True)
    comfort = comfort_assessment(result, project.work_setpoints())
    report(result, out_dir, comfort=comfort, figure_data=args.figure_data)
    _print_result(result)
    for mode, entry in comfort.items():
        b, c = entry["baseline"], entry["controlled"]
        print(f"{mode}: PMV {b['pmv']:+.2f} -> {c['pmv']:+.2f} "
              f"(existing {'ok' if c['within_existing'] else 'out'}, new {'ok' if c['within_new'] else 'out'})")
    return 0


def _cmd_tune(args):
    spec_path = Path(args.spec)
    if not spec_path.is_file():
        raise PathNotFound(f"spec: {spec_path} does not exist")
    try:
        raw = json.loads(spec_path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{spec_path}: {exc}") from exc
    if "project" not in raw:
        raise MissingKey("project")
    project_path = Path(raw["project"])
    if not project_path.is_absolute():
        project_path = spec_path.resolve().parent / project_path
    try:
        spec = SweepSpec.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{spec_path}: {exc}") from exc
    project, scenario, out_dir = _project_and_scenario(project_path, args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = sweep(scenario, spec, n_jobs=args.jobs)
    front = pareto_front(result.cells)
    write_cells_csv(result.cells, out_dir / "cells.csv")
    write_cells_csv(front, out_dir / "pareto.csv")
    payload = {"spec": spec.to_dict(),
               "skipped": [dict(m=m, ts=ts, reason=r) for m, ts, r in result.skipped],
               "failed": [dict(m=m, ts=ts, omega=om, error=e) for m, ts, om, e in result.failed]}
    try:
        best = select_optimum(front, spec.comfort_bound)
        payload["optimum"] = best.to_dict()
        print(f"optimum m={best.m:g} h ts={best.ts:g} min omega={best.omega:.3g}: "
              f"{best.emissions_reduction_percent:.2f} %  max dT {best.max_daily_deltaT:.3f} K")
    except ThermalBallastError as exc:
        payload["optimum"] = None
        print(f"no feasible cell: {exc}")
    _json.dump(payload, out_dir / "optimum.json")
    if args.heatmap_data:
        data = heatmap_data(result.cells, spec.horizons, spec.steps, spec.comfort_bound)
        write_heatmap_csv(data, out_dir / "heatmap_reduction.csv", "reduction")
        write_heatmap_csv(data, out_dir / "heatmap_max_deltaT.csv", "max_deltaT")
    print(f"{len(result.cells)} cells, {len(result.skipped)} skipped, {len(result.failed)} failed, "
          f"{len(front)} on the Pareto front")
    return 0


def _cmd_pmv(args):
    inp = ComfortInput(args.ta, args.tr, args.v, args.rh, args.met, args.clo,
                       relative_speed=args.relative_speed)
    res = pmv(inp)
    print(f"PMV {res.pmv:+.2f}  PPD {res.ppd:.1f} %  "
          f"existing {'ok' if classify(res, 'existing') else 'out'}  new {'ok' if classify(res, 'new') else 'out'}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="thermal-ballast",
                                description="Carbon-aware setpoint control using building thermal mass.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("identify", help="fit a state-space surrogate from a training CSV")
    s.add_argument("--data", required=True, help="CSV with timestamp,t_ref,n_occ,t_ext,power")
    s.add_argument("--mode", choices=("heating", "cooling"), default="heating")
    s.add_argument("--order", type=int, default=2, choices=(1, 2, 3))
    s.add_argument("--split", type=float, default=0.7)
    s.add_argument("--output", required=True, help="model JSON to write")
    s.add_argument("--report", help="optional fit-report JSON")
    s.set_defaults(func=_cmd_identify)

    s = sub.add_parser("envelope", help="areal heat capacities and total thermal mass")
    s.add_argument("--definition", required=True)
    s.add_argument("--output")
    s.set_defaults(func=_cmd_envelope)

    s = sub.add_parser("decide", help="closed-form decision for one forecast window")
    s.add_argument("--window", required=True, help="JSON with e_pred, e_solar, ci lists")
    s.add_argument("--omega", type=float, default=1e6)
    s.add_argument("--c-th", type=float, default=6531.77)
    s.add_argument("--gamma", type=float, default=1.0)
    s.add_argument("--step", type=float, default=60.0)
    s.add_argument("--mode", choices=("heating", "cooling"), default="heating")
    s.set_defaults(func=_cmd_decide)

    s = sub.add_parser("simulate", help="run a scenario and write its ledger and summary")
    s.add_argument("--scenario", required=True, help="project JSON")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--controlled", dest="controlled", action="store_true", default=True)
    g.add_argument("--baseline", dest="controlled", action="store_false")
    s.add_argument("--output", help="output directory (default: project output_dir)")
    s.add_argument("--figure-data", action="store_true")
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("tune", help="sweep (m, ts, omega) and pick the optimum")
    s.add_argument("--spec", required=True)
    s.add_argument("--output")
    s.add_argument("--heatmap-data", action="store_true")
    s.add_argument("--jobs", type=int, default=None, help="parallel workers (default from THERMAL_BALLAST_THREADS)")
    s.set_defaults(func=_cmd_tune)

    s = sub.add_parser("pmv", help="Fanger PMV/PPD for one set of conditions")
    s.add_argument("--ta", type=float, required=True)
    s.add_argument("--tr", type=float, default=None)
    s.add_argument("--v", type=float, default=0.1)
    s.add_argument("--rh", type=float, default=50.0)
    s.add_argument("--met", type=float, default=1.2)
    s.add_argument("--clo", type=float, default=1.0)
    s.add_argument("--relative-speed", action="store_true", help="treat --v as relative air speed")
    s.set_defaults(func=_cmd_pmv)

    s = sub.add_parser("report", help="controlled run with comfort check and figure data")
    s.add_argument("--scenario", required=True)
    s.add_argument("--output")
    s.add_argument("--figure-data", action="store_true")
    s.set_defaults(func=_cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except ThermalBallastError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
