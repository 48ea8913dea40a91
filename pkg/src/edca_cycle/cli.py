"""Command line entry point: analyze, simulate, compare and sweep scenarios to CSV."""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from pathlib import Path

from .config import ConfigError, RunSpec, load_preset, parse_config, parse_seeds, sweep_points
from .cycle import ModelError, PerformanceReport, analyze
from .fixed_point import ConvergenceError, SolverConfig
from .model import Scenario, ScenarioError
from .sim import SimSummary, simulate_seeds

log = logging.getLogger("edca_cycle")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_IO = 4

COLUMNS = ["scenario_id", "mode", "class_index", "N", "aifsn", "cw_min", "throughput",
           "service_time_us", "drop_prob", "p_c", "tau", "t_suc_us", "t_col_us",
           "t_idle_us", "seed", "residual", "iterations"]
TRAILER = ["source"]   # preset name or config path
SIMULATE_EXTRA = ["throughput_ci", "service_time_ci_us", "drop_prob_ci"]
COMPARE_EXTRA = ["sim_throughput", "sim_throughput_ci", "sim_service_time_us",
                 "sim_service_time_ci_us", "sim_drop_prob", "sim_drop_prob_ci", "sim_p_c",
                 "throughput_rel_err", "service_time_rel_err", "drop_prob_rel_err"]


class PartialRun(Exception):
    def __init__(self, rows, reason):
        super().__init__(reason)
        self.rows = rows


def rel_err(predicted: float, measured: float) -> float:
    """(predicted - measured) / measured; 0 when both agree exactly."""
    if predicted == measured:
        return 0.0
    if measured == 0:
        return math.inf
    return (predicted - measured) / measured


def _solver_cfg(spec: RunSpec) -> SolverConfig:
    return SolverConfig(tolerance=spec.tolerance, max_iterations=spec.max_iterations,
                        damping=spec.damping)


def _simulate(scenario: Scenario, spec: RunSpec) -> SimSummary:
    warm = None if spec.warmup_s is None else spec.warmup_s * 1e6
    return simulate_seeds(scenario, spec.seeds, spec.duration_s * 1e6, warm,
                          workers=spec.workers)


def _base_rows(scenario_id: str, mode: str, scenario: Scenario, report: PerformanceReport,
               seed: str, source: str) -> list[dict]:
    rows = []
    for c, m in zip(scenario.classes, report.classes):
        rows.append({
            "scenario_id": scenario_id, "mode": mode, "class_index": c.index,
            "N": c.population, "aifsn": c.aifsn, "cw_min": c.cw_min,
            "throughput": m.throughput, "service_time_us": m.service_time,
            "drop_prob": m.drop_prob, "p_c": m.p_c, "tau": m.tau, "t_suc_us": m.t_suc,
            "t_col_us": m.t_col, "t_idle_us": m.t_idle, "seed": seed,
            "residual": report.provenance.get("residual", ""),
            "iterations": report.provenance.get("iterations", ""),
            "source": source,
        })
    return rows


def evaluate(kind: str, scenario_id: str, scenario: Scenario, spec: RunSpec,
             mode_label: str | None = None) -> list[dict]:
    """Rows (one per class) for one scenario evaluated as ``kind``."""
    label = mode_label or kind
    seeds = ";".join(map(str, spec.seeds))
    if kind == "analyze":
        return _base_rows(scenario_id, label, scenario, analyze(scenario, _solver_cfg(spec)),
                          "analytic", spec.source)
    if kind == "simulate":
        summary = _simulate(scenario, spec)
        rows = _base_rows(scenario_id, label, scenario, summary.mean, seeds, spec.source)
        for row, ci in zip(rows, summary.ci):
            row.update(throughput_ci=ci["throughput"], service_time_ci_us=ci["service_time"],
                       drop_prob_ci=ci["drop_prob"])
        return rows
    if kind == "compare":
        report = analyze(scenario, _solver_cfg(spec))
        summary = _simulate(scenario, spec)
        rows = _base_rows(scenario_id, label, scenario, report, seeds, spec.source)
        for row, a, m, ci in zip(rows, report.classes, summary.mean.classes, summary.ci):
            row.update(
                sim_throughput=m.throughput, sim_throughput_ci=ci["throughput"],
                sim_service_time_us=m.service_time, sim_service_time_ci_us=ci["service_time"],
                sim_drop_prob=m.drop_prob, sim_drop_prob_ci=ci["drop_prob"], sim_p_c=m.p_c,
                throughput_rel_err=rel_err(a.throughput, m.throughput),
                service_time_rel_err=rel_err(a.service_time, m.service_time),
                drop_prob_rel_err=rel_err(a.drop_prob, m.drop_prob))
        return rows
    raise ValueError(f"unknown evaluation {kind!r}")


def columns_for(spec: RunSpec) -> list[str]:
    kind = spec.sweep_evaluate if spec.mode == "sweep" else spec.mode
    extra = {"simulate": SIMULATE_EXTRA, "compare": COMPARE_EXTRA}.get(kind, [])
    return COLUMNS + extra + TRAILER


def collect(scenario: Scenario, spec: RunSpec) -> list[dict]:
    """All output rows for ``spec``; raises PartialRun carrying the rows done so far."""
    if spec.mode != "sweep":
        try:
            return evaluate(spec.mode, spec.scenario_id, scenario, spec)
        except (ConvergenceError, ModelError) as exc:
            raise PartialRun([], f"{spec.scenario_id}: {exc}") from exc
    rows: list[dict] = []
    label = "sweep" if spec.sweep_evaluate == "analyze" else f"sweep-{spec.sweep_evaluate}"
    for point, sc in sweep_points(scenario, spec.axes):
        sid = f"{spec.scenario_id}:{point}"
        log.info("sweep point %s", sid)
        try:
            rows.extend(evaluate(spec.sweep_evaluate, sid, sc, spec, mode_label=label))
        except (ConvergenceError, ModelError) as exc:
            raise PartialRun(rows, f"{sid}: {exc}") from exc
    return rows


def _fmt(value, precision: int) -> str:
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    return str(value)


def write_rows(stream, rows: list[dict], columns: list[str], precision: int) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, ""), precision) for c in columns])


def run(scenario: Scenario, spec: RunSpec, stream=None) -> int:
    """Execute ``spec`` and write CSV to ``spec.out`` (or ``stream``/stdout).

    Returns the process exit status.
    """
    try:
        out = open(spec.out, "w", newline="") if spec.out else None
    except OSError as exc:
        print(f"error: cannot write {spec.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    target = out or stream or sys.stdout
    columns = columns_for(spec)
    status = EXIT_OK
    try:
        try:
            rows = collect(scenario, spec)
        except PartialRun as exc:
            rows = exc.rows
            status = EXIT_CONVERGENCE
            print(f"error: {exc}", file=sys.stderr)
        buf = io.StringIO()
        write_rows(buf, rows, columns, spec.precision)
        if status != EXIT_OK:
            buf.write(f"# PARTIAL RESULTS: {len(rows)} rows written before failure\n")
        target.write(buf.getvalue())
    except OSError as exc:
        print(f"error: writing output failed: {exc}", file=sys.stderr)
        return EXIT_IO
    finally:
        if out:
            out.close()
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="edca-cycle",
        description="Saturation throughput, service time and drop probability of "
                    "802.11e EDCA access categories (analytic model and simulator).")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="TOML scenario/run file")
    src.add_argument("--preset", help="built-in scenario: paper-fig3, paper-fig5, paper-fig6")
    p.add_argument("--mode", choices=["analyze", "simulate", "compare", "sweep"])
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--seeds", help="seed count N (seeds 1..N) or comma list, e.g. 3,7,11")
    p.add_argument("--duration-s", type=float, help="simulated seconds per run")
    p.add_argument("--warmup-s", type=float, help="discarded warm-up seconds (default 5%%)")
    p.add_argument("--tolerance", type=float, help="fixed-point tolerance on max |dtau|")
    p.add_argument("--max-iter", type=int, help="fixed-point iteration limit")
    p.add_argument("--workers", type=int, help="parallel simulation processes")
    p.add_argument("--precision", type=int, help="significant digits in CSV")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _seeds_arg(text: str) -> tuple[int, ...]:
    try:
        if "," in text:
            return parse_seeds([int(x) for x in text.split(",") if x.strip()])
        return parse_seeds(int(text))
    except ValueError:
        raise ConfigError(f"--seeds: expected a count or comma list, got {text!r}") from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.preset:
            scenario, spec = load_preset(args.preset)
        else:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
                return EXIT_IO
            scenario, spec = parse_config(text, source=args.config)
        overrides = {
            "mode": args.mode, "out": args.out, "duration_s": args.duration_s,
            "warmup_s": args.warmup_s, "tolerance": args.tolerance,
            "max_iterations": args.max_iter, "workers": args.workers,
            "precision": args.precision,
            "seeds": _seeds_arg(args.seeds) if args.seeds else None,
        }
        spec = spec.replace(**{k: v for k, v in overrides.items() if v is not None})
        _solver_cfg(spec)
    except (ConfigError, ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(scenario, spec)


if __name__ == "__main__":
    sys.exit(main())
