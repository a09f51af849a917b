"""Command-line front end.

Exit codes: 0 success, 1 runtime failure (I/O, unreadable input, solver
divergence), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from svcmsi.io import (
    ConfigError,
    FormatError,
    ScenarioSpec,
    load_config,
    read_coefficients_json,
    read_motion_csv,
    read_stimulus_csv,
    sinusoid_profile,
    write_coefficients_json,
    write_json,
    write_motion_csv,
    write_msi_svg,
    write_stimulus_csv,
    write_trace_csv,
)
from svcmsi.optimize import OptimizerConfigError, fit_coefficients, optimize_trajectory
from svcmsi.simulate import CoverageError, SimulationDivergence, SimulationPlan, simulate
from svcmsi.stimulus import CoefficientStimulus

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _common(parser: argparse.ArgumentParser, out_help: str):
    parser.add_argument("--config", type=Path, help="JSON run config")
    parser.add_argument("--seed", type=int, help="optimizer seed")
    parser.add_argument("--dt", type=float, help="step size in seconds")
    parser.add_argument("-o", "--out", type=Path, help=out_help)
    parser.add_argument("--svg", type=Path, help="also write an MSI-vs-time SVG plot")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="svcmsi", description="Motion sickness prediction and visual stimulus optimization")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a fore-aft sinusoid motion CSV")
    _common(gen, "motion CSV to write")
    gen.add_argument("--A", type=float, help="amplitude, m/s^2 (default 0.5)")
    gen.add_argument("--f", type=float, help="frequency, Hz (default 0.25)")
    gen.add_argument("--duration", type=float, help="duration, s (default 1800)")

    sim = sub.add_parser("simulate", help="predict MSI for a motion and visual stimulus")
    _common(sim, "trace CSV to write")
    sim.add_argument("motion", nargs="?", type=Path, help="motion CSV (default: config motion or scenario)")
    sim.add_argument("--stimulus", default="zero", help="'zero', coefficients JSON, or stimulus trajectory CSV")
    sim.add_argument("--full-state", action="store_true", help="include state columns in the trace")

    opt = sub.add_parser("optimize", help="fit a stimulus that minimizes predicted MSI")
    _common(opt, "coefficients JSON (coeffs) or stimulus CSV (trajectory) to write")
    opt.add_argument("motion", nargs="?", type=Path)
    opt.add_argument("--mode", choices=("coeffs", "trajectory"), default="coeffs")
    opt.add_argument("--n", type=int, help="regression order N (default 10)")
    opt.add_argument("--budget", type=int, help="maximum objective evaluations")
    opt.add_argument("--knot-dt", type=float, help="trajectory knot spacing, s")
    opt.add_argument("--bound", type=float, help="trajectory amplitude bound, rad/s")

    cmp_ = sub.add_parser("compare", help="zero stimulus vs fitted stimulus")
    _common(cmp_, "output directory")
    cmp_.add_argument("motion", nargs="?", type=Path)
    cmp_.add_argument("--n", type=int)
    cmp_.add_argument("--budget", type=int)
    return parser


def _settings(args):
    config = load_config(args.config)
    if args.dt is not None and args.command != "generate":
        if not args.dt > 0:
            raise UsageError("--dt must be positive")
        config = dataclasses.replace(config, sim_dt=args.dt)
    minimize = config.optimizer.minimize
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "budget", None) is not None:
        overrides["max_evaluations"] = args.budget
    if overrides:
        try:
            minimize = dataclasses.replace(minimize, **overrides)
        except ValueError as err:
            raise UsageError(str(err)) from None
    return config, minimize


def _motion(args, config):
    path = args.motion or config.motion
    if path is not None:
        return read_motion_csv(path)
    if config.scenario is not None:
        return sinusoid_profile(config.scenario)
    raise UsageError("no motion given: pass a motion CSV or a config with a scenario")


def _out(args, config, default: str) -> Path:
    return args.out or config.out or Path(default)


def cmd_generate(args) -> list[Path]:
    config, _ = _settings(args)
    base = config.scenario or ScenarioSpec()
    values = {
        "A": args.A if args.A is not None else base.A,
        "f_hz": args.f if args.f is not None else base.f_hz,
        "duration": args.duration if args.duration is not None else base.duration,
        "dt": args.dt if args.dt is not None else base.dt,
    }
    try:
        spec = ScenarioSpec(**values)
    except ValueError as err:
        raise UsageError(str(err)) from None
    profile = sinusoid_profile(spec)
    out = _out(args, config, "motion.csv")
    write_motion_csv(profile, out)
    print(f"wrote {len(profile)} samples ({spec.duration:g} s, A={spec.A:g} m/s^2, f={spec.f_hz:g} Hz) to {out}")
    return [out]


def _load_stimulus(arg: str):
    if arg == "zero":
        return None
    path = Path(arg)
    if path.suffix.lower() == ".json":
        coeffs, axis = read_coefficients_json(path)
        return CoefficientStimulus(coeffs, axis)
    if path.suffix.lower() == ".csv":
        return read_stimulus_csv(path)
    raise UsageError(f"--stimulus must be 'zero', a .json or a .csv file, got {arg!r}")


def cmd_simulate(args) -> list[Path]:
    config, _ = _settings(args)
    profile = _motion(args, config)
    stimulus = _load_stimulus(args.stimulus)
    trace = simulate(profile, stimulus, config.params, config.sim_dt)
    out = _out(args, config, "trace.csv")
    write_trace_csv(trace, out, full_state=args.full_state)
    written = [out]
    svg = args.svg or config.svg
    if svg:
        write_msi_svg({"MSI": trace}, svg)
        written.append(svg)
    print(f"terminal MSI: {trace.final_msi:.6f} %")
    return written


def cmd_optimize(args) -> list[Path]:
    config, minimize = _settings(args)
    profile = _motion(args, config)
    opt = config.optimizer
    if args.mode == "coeffs":
        n_terms = args.n if args.n is not None else opt.n_terms
        result = fit_coefficients(profile, config.params, n_terms, minimize, config.sim_dt)
        out = _out(args, config, "coefficients.json")
        write_coefficients_json(result.coefficients, out)
        print(
            f"terminal MSI: {result.objective:.6f} % (baseline {result.baseline_objective:.6f} %, "
            f"ratio {result.reduction_ratio:.4f}, {result.evaluations} evaluations)"
        )
        return [out]
    knot_dt = args.knot_dt if args.knot_dt is not None else opt.knot_dt
    bound = args.bound if args.bound is not None else opt.bound
    result = optimize_trajectory(profile, config.params, knot_dt, bound, minimize, config.sim_dt)
    out = _out(args, config, "stimulus.csv")
    write_stimulus_csv(result.stimulus, out)
    print(
        f"summed MSI: {result.cost:.6f} (baseline {result.baseline_cost:.6f}, "
        f"{len(result.knots)} knots, {result.evaluations} evaluations)"
    )
    return [out]


def cmd_compare(args) -> list[Path]:
    config, minimize = _settings(args)
    profile = _motion(args, config)
    n_terms = args.n if args.n is not None else config.optimizer.n_terms
    fit = fit_coefficients(profile, config.params, n_terms, minimize, config.sim_dt)
    plan = SimulationPlan(profile, config.params, config.sim_dt)
    baseline = plan.run(plan.stimulus_on_grid(None))
    optimized = plan.run(plan.stimulus_on_grid(CoefficientStimulus(fit.coefficients)))

    out_dir = _out(args, config, "compare")
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "baseline": out_dir / "baseline_trace.csv",
        "optimized": out_dir / "optimized_trace.csv",
        "coefficients": out_dir / "coefficients.json",
        "report": out_dir / "report.json",
    }
    write_trace_csv(baseline, paths["baseline"])
    write_trace_csv(optimized, paths["optimized"])
    write_coefficients_json(fit.coefficients, paths["coefficients"])
    base_msi, opt_msi = baseline.final_msi, optimized.final_msi
    if base_msi == 0:
        ratio, note = 1.0, "baseline terminal MSI is zero; ratio reported as 1.0 by convention"
    else:
        ratio, note = opt_msi / base_msi, None
    write_json(
        {
            "baseline_msi_T": base_msi,
            "optimized_msi_T": opt_msi,
            "reduction_ratio": ratio,
            "note": note,
            "n_terms": n_terms,
            "evaluations": fit.evaluations,
        },
        paths["report"],
    )
    written = list(paths.values())
    svg = args.svg or config.svg
    if svg:
        write_msi_svg({"zero stimulus": baseline, "optimized": optimized}, svg)
        written.append(svg)
    print(f"baseline MSI(T): {base_msi:.6f} %")
    print(f"optimized MSI(T): {opt_msi:.6f} %")
    print(f"reduction ratio: {ratio!r}")
    return written


COMMANDS = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "compare": cmd_compare,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (OSError, FormatError, CoverageError, SimulationDivergence) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except (UsageError, ConfigError, OptimizerConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
