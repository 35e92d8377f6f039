"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 infeasible parameters (the
report is still written), 3 numerical failure or insufficient counts.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from .analysis import SecurityReport, analyze, required_signature_length
from .config import ConfigParseError, RunConfig, load_config
from .errors import ConfigurationError, EstimationError, InfeasibleError, InsufficientCountsError, QDSError
from .montecarlo import (
    HonestConfig,
    run_forgery_scenario,
    run_honest_scenario,
    run_repudiation_scenario,
    wilson_interval,
)
from .security import AdversaryStrategy, honest_abort_bound, repudiation_strategy_bounds

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 1, 2, 3

#: Sweepable parameters and the config setting each one changes.
SWEEP_PARAMS = {
    "distance_km": ("channel", "distance_km"),
    "qx": ("channel", "optical_error_x"),
    "qz": ("channel", "optical_error_z"),
    "dark_count_prob": ("channel", "dark_count_prob"),
    "n_pulses": ("analysis", "n_pulses"),
    "f_ec": ("analysis", "f_ec"),
}

REPORT_COLUMNS = (
    "n_pulses",
    "L",
    "k",
    "n",
    "expected_x_raw",
    "observed_ex",
    "e_x_upper",
    "s_x0_lower",
    "s_x1_lower",
    "phi_x1_upper",
    "h_min",
    "p_e",
    "feasible",
    "s_a",
    "s_v",
    "p_abort",
    "p_abort_log2",
    "p_forge",
    "p_forge_log2",
    "p_repud",
    "p_repud_log2",
    "qkd_key_length",
    "status",
    "warnings",
)
SWEEP_COLUMNS = ("param", "value") + REPORT_COLUMNS
COMPARE_COLUMNS = ("param", "value", "feasible_qds", "qkd_key_length", "classification", "p_e", "e_x_upper", "status")
SIMULATE_COLUMNS = (
    "scenario",
    "event",
    "trials",
    "events",
    "frequency",
    "ci_low",
    "ci_high",
    "analytic_bound",
    "analytic_bound_log2",
    "seed",
)


def tool_version() -> str:
    try:
        return version("qds")
    except PackageNotFoundError:
        return "unknown"


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (list, tuple)):
        return ";".join(str(v) for v in value)
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _csv(columns, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buffer.getvalue()


# --------------------------------------------------------------------------
# analysis


def run_analysis(config: RunConfig, strict: bool = True) -> SecurityReport:
    """Fixed-length report, or the report at the minimal length in search mode."""
    if config.mode == "fixed":
        return analyze(config.channel, config.decoy, config.security, config.n_pulses, config.options, strict=strict)
    _, _, report = required_signature_length(config.channel, config.decoy, config.security, config.options)
    return report


def build_report(config: RunConfig, report: SecurityReport, seed: int | None = None) -> dict:
    return _json_safe(
        {
            "config": config.to_dict(),
            "report": report.as_dict(),
            "provenance": {
                "tool": "qds",
                "version": tool_version(),
                "seed": seed,
                "mode": config.mode,
                "sifting_convention": config.options.sifting_convention,
                "estimation_convention": config.options.estimation_convention,
                "clamp_gamma": config.options.clamp_gamma,
                "warnings": list(report.warnings),
            },
        }
    )


def cmd_analyze(config: RunConfig, out: str | None, seed: int | None = None) -> int:
    try:
        report = run_analysis(config)
    except InfeasibleError as exc:
        print(f"qds: infeasible: {exc}", file=sys.stderr)
        report = analyze(
            config.channel, config.decoy, config.security, 1e14, config.options, strict=False
        ) if config.mode == "search" else None
        if report is None:
            return EXIT_INFEASIBLE
        _write(json.dumps(build_report(config, report, seed), indent=2) + "\n", out)
        return EXIT_INFEASIBLE
    _write(json.dumps(build_report(config, report, seed), indent=2) + "\n", out)
    if not report.feasible:
        print("qds: parameters are infeasible for signatures", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


# --------------------------------------------------------------------------
# sweeps


def grid(start: float, stop: float, step: float) -> list[float]:
    """``start, start + step, ...`` up to and including ``stop``; empty when the range is empty."""
    if step == 0 or not all(math.isfinite(v) for v in (start, stop, step)):
        raise ConfigurationError("--step must be a non-zero finite number")
    count = math.floor((stop - start) / step + 1e-9)
    if count < 0:
        return []
    return [start + i * step for i in range(count + 1)]


def _point_config(config: RunConfig, param: str, value: float) -> RunConfig:
    section, key = SWEEP_PARAMS[param]
    if key == "n_pulses":
        value = int(round(value))
    return config.replace(section, key, value)


def _report_row(param: str, value: float, report: SecurityReport) -> dict:
    row = report.as_dict()
    row.update(param=param, value=value)
    return row


def _sweep_point(config: RunConfig, param: str, value: float) -> dict:
    point = _point_config(config, param, value)
    try:
        report = run_analysis(point, strict=False)
    except InfeasibleError:
        report = analyze(point.channel, point.decoy, point.security, 1e14, point.options, strict=False)
    return _report_row(param, value, report)


def _map_points(fn, config: RunConfig, param: str, values: list[float], workers: int) -> list:
    if workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, [config] * len(values), [param] * len(values), values))
    return [fn(config, param, v) for v in values]


def _check_param(param: str) -> None:
    if param not in SWEEP_PARAMS:
        raise ConfigurationError(f"unknown sweep parameter {param!r}; choose from {', '.join(SWEEP_PARAMS)}")


def cmd_sweep(config: RunConfig, param: str, start: float, stop: float, step: float, out: str | None, workers: int = 1) -> int:
    _check_param(param)
    values = grid(start, stop, step)
    for v in values:
        _point_config(config, param, v)
    rows = _map_points(_sweep_point, config, param, values, workers)
    _write(_csv(SWEEP_COLUMNS, rows), out)
    return EXIT_OK


def classify(feasible_qds: bool, qkd_key_length: float) -> str:
    qkd = qkd_key_length > 0
    if feasible_qds and qkd:
        return "both"
    if feasible_qds:
        return "qds_only"
    return "qkd_only" if qkd else "neither"


def _compare_point(config: RunConfig, param: str, value: float) -> dict:
    point = _point_config(config, param, value)
    report = analyze(point.channel, point.decoy, point.security, point.n_pulses, point.options, strict=False)
    return {
        "param": param,
        "value": value,
        "feasible_qds": report.feasible,
        "qkd_key_length": report.qkd_key_length,
        "classification": classify(report.feasible, report.qkd_key_length),
        "p_e": report.p_e,
        "e_x_upper": report.e_x_upper,
        "status": report.status,
    }


def cmd_compare_qkd(config: RunConfig, param: str, start: float, stop: float, step: float, out: str | None, workers: int = 1) -> int:
    _check_param(param)
    if config.mode != "fixed" and param != "n_pulses":
        raise ConfigurationError("compare-qkd needs analysis.n_pulses")
    values = grid(start, stop, step)
    for v in values:
        _point_config(config, param, v)
    rows = _map_points(_compare_point, config, param, values, workers)
    _write(_csv(COMPARE_COLUMNS, rows), out)
    return EXIT_OK


# --------------------------------------------------------------------------
# simulation


@dataclass(frozen=True)
class SimRow:
    scenario: str
    event: str
    trials: int
    events: int
    bound_log2: float | None
    seed: int

    def as_dict(self) -> dict:
        low, high = wilson_interval(self.events, self.trials)
        bound = None if self.bound_log2 is None else min(2.0**self.bound_log2, 1.0)
        return {
            "scenario": self.scenario,
            "event": self.event,
            "trials": self.trials,
            "events": self.events,
            "frequency": self.events / self.trials,
            "ci_low": low,
            "ci_high": high,
            "analytic_bound": bound,
            "analytic_bound_log2": self.bound_log2,
            "seed": self.seed,
        }


def _log2_exp(exponent: float) -> float:
    return exponent / math.log(2.0)


def _honest_rows(config: RunConfig, trials: int, seed: int, workers: int) -> list[SimRow]:
    sim = config.sim
    L, s_a, s_v = sim.L, sim.s_a, sim.s_v
    if sim.mismatch_rate is None and None in (L, s_a, s_v):
        report = run_analysis(config)
        if not report.feasible:
            raise InfeasibleError("configured channel is infeasible; no thresholds to simulate with")
        L = report.L if L is None else L
        s_a = report.s_a if s_a is None else s_a
        s_v = report.s_v if s_v is None else s_v
    if None in (L, s_a, s_v):
        raise ConfigurationError("honest simulation needs sim.L, sim.s_a and sim.s_v")
    n_pulses = sim.n_pulses if sim.n_pulses is not None else config.n_pulses
    honest = HonestConfig(
        L=L,
        s_a=s_a,
        s_v=s_v,
        mismatch_rate=sim.mismatch_rate,
        channel=config.channel,
        decoy=config.decoy,
        n_pulses=n_pulses,
    )
    tally = run_honest_scenario(honest, seed, trials, workers)
    if sim.mismatch_rate is None:
        abort_bound = honest_abort_bound(config.security.eps_pe)
    else:
        # Hoeffding on each of the four verified halves of L/2 bits.
        e = sim.mismatch_rate
        if e >= s_a:
            abort_bound = 0.0
        else:
            abort_bound = min(
                0.0,
                1.0 + math.log2(math.exp(-L * (s_a - e) ** 2) + math.exp(-L * (s_v - e) ** 2)),
            )
    return [
        SimRow("honest", "accepted", trials, tally.get("accepted"), None, seed),
        SimRow("honest", "transferred", trials, tally.get("transferred"), None, seed),
        SimRow("honest", "aborted", trials, tally.get("aborted"), abort_bound, seed),
    ]


def _repudiation_rows(config: RunConfig, trials: int, seed: int, workers: int) -> list[SimRow]:
    sim = config.sim
    if None in (sim.L, sim.s_a, sim.s_v):
        raise ConfigurationError("repudiation simulation needs sim.L, sim.s_a and sim.s_v")
    strategy = AdversaryStrategy("repudiating_alice", e_b=sim.e_b, e_c=sim.e_c)
    estimate, _ = run_repudiation_scenario(strategy, sim.L, sim.s_a, sim.s_v, trials, seed, workers)
    bound = repudiation_strategy_bounds(strategy, sim.s_a, sim.s_v, sim.L)
    return [SimRow("repudiation", "repudiated", trials, estimate.events, bound, seed)]


def _forgery_rows(config: RunConfig, trials: int, seed: int, workers: int) -> list[SimRow]:
    sim = config.sim
    if None in (sim.L, sim.s_v):
        raise ConfigurationError("forgery simulation needs sim.L and sim.s_v")
    q = sim.forger_error_rate
    estimate, _ = run_forgery_scenario(q, sim.L, sim.s_v, trials, seed, workers)
    # Hoeffding on the L/2 guessed bits.
    bound = _log2_exp(-sim.L * (q - sim.s_v) ** 2) if q > sim.s_v else 0.0
    return [SimRow("forgery", "forged", trials, estimate.events, bound, seed)]


SCENARIOS = {"honest": _honest_rows, "repudiation": _repudiation_rows, "forgery": _forgery_rows}


def cmd_simulate(config: RunConfig, scenario: str, trials: int | None, seed: int, out: str | None, workers: int | None = None) -> int:
    if scenario not in SCENARIOS:
        raise ConfigurationError(f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}")
    trials = config.sim.trials if trials is None else trials
    if trials < 1:
        raise ConfigurationError("--trials must be positive")
    workers = config.sim.workers if workers is None else workers
    rows = SCENARIOS[scenario](config, trials, seed, workers)
    _write(_csv(SIMULATE_COLUMNS, [r.as_dict() for r in rows]), out)
    return EXIT_OK


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qds", description="Quantum digital signature security analysis and simulation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {tool_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="text config or JSON report from 'qds analyze'")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--seed", type=int, help="master random seed")
        p.add_argument("--workers", type=int, default=None, help="worker processes (default 1)")

    def ranged(p):
        p.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
        p.add_argument("--from", dest="start", type=float, required=True)
        p.add_argument("--to", dest="stop", type=float, required=True)
        p.add_argument("--step", type=float, required=True)

    common(sub.add_parser("analyze", help="security report for one configuration (JSON)"))
    p = sub.add_parser("sweep", help="security report across a parameter range (CSV)")
    common(p)
    ranged(p)
    p = sub.add_parser("compare-qkd", help="classify points by QDS and QKD feasibility (CSV)")
    common(p)
    ranged(p)
    p = sub.add_parser("simulate", help="Monte Carlo protocol scenario (CSV)")
    common(p)
    p.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    p.add_argument("--trials", type=int)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        config = load_config(args.config)
        workers = args.workers
        if workers is not None and workers < 1:
            raise ConfigurationError("--workers must be at least 1")
        if args.out is not None:
            Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        if args.command == "analyze":
            return cmd_analyze(config, args.out, args.seed)
        if args.command == "sweep":
            return cmd_sweep(config, args.param, args.start, args.stop, args.step, args.out, workers or 1)
        if args.command == "compare-qkd":
            return cmd_compare_qkd(config, args.param, args.start, args.stop, args.step, args.out, workers or 1)
        if args.seed is None:
            raise ConfigurationError("simulate requires --seed")
        return cmd_simulate(config, args.scenario, args.trials, args.seed, args.out, workers)
    except (ConfigParseError, ConfigurationError) as exc:
        print(f"qds: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"qds: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (EstimationError, InsufficientCountsError, ZeroDivisionError, OverflowError) as exc:
        print(f"qds: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QDSError as exc:
        print(f"qds: error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
