"""Command-line interface: solve, heatmap, sweep and phase-noise runs.

Every command writes its artifacts plus a ``manifest.json`` recording the
command line, scenario digest, seed, tool version, output list and wall
time, even on controlled failure. Exit codes: 0 ok, 1 configuration error,
2 numerical failure (artifacts still written, flagged in the manifest).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__, beamform, experiments, metrics
from .channel import los_channel
from .scenario import (
    GridSpec, Scenario, default_techtile_scenario, load_scenario,
    scenario_digest,
)

_BEAMFORMER_CHOICES = ("po-mrt", "azf", "azf-amplitude")


@dataclass
class RunManifest:
    """Reproducibility record written next to every command's artifacts."""

    command: list[str]
    scenario_digest: str | None
    seed: int
    version: str
    outputs: list[str] = field(default_factory=list)
    duration_s: float = 0.0
    status: str = "ok"
    error: str | None = None

    def write(self, out_dir: Path) -> None:
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")


class _CliError(Exception):
    """Configuration problem; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _CliError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="nullbeam", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", help="scenario JSON path (default: built-in room)")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=0)

    solve = sub.add_parser("solve", help="compute weights and metrics")
    common(solve)
    solve.add_argument("--beamformer", choices=_BEAMFORMER_CHOICES, default="azf")

    heatmap = sub.add_parser("heatmap", help="scan direct-link power over a grid")
    common(heatmap)
    heatmap.add_argument("--beamformer", choices=_BEAMFORMER_CHOICES, default="azf")
    heatmap.add_argument("--step", type=float, default=0.025, help="grid step (m)")
    heatmap.add_argument("--extent", type=float, nargs=2, default=[1.25, 1.25],
                         metavar=("W", "H"), help="scan extent (m)")
    heatmap.add_argument("--diff", help="heatmap CSV to subtract (emits a dB map)")

    sweep = sub.add_parser("sweep", help="metrics versus number of active emitters")
    common(sweep)
    sweep.add_argument("--k", default="10,20,30,40,42",
                       help="comma-separated emitter counts")
    sweep.add_argument("--order", choices=("strongest", "weakest"),
                       default="strongest")
    sweep.add_argument("--beamformer",
                       choices=_BEAMFORMER_CHOICES + ("all",), default="all")

    noise = sub.add_parser("phase-noise",
                           help="suppression statistics under phase jitter")
    common(noise)
    noise.add_argument("--phase-noise-deg", default="0,1,2,5,10",
                       help="comma-separated phase noise stds (degrees)")
    noise.add_argument("--trials", type=int, default=50)
    return parser


def _load_scenario_arg(path_arg: str | None) -> Scenario:
    if path_arg is None:
        return default_techtile_scenario()
    path = Path(path_arg)
    if not path.is_file():
        raise _CliError(f"scenario file not found: {path}")
    try:
        return load_scenario(path.read_text())
    except ValueError as exc:
        raise _CliError(f"invalid scenario {path}: {exc}") from exc


def _solve_artifacts(scenario, beamformer, out_dir, manifest):
    """Weights, solve report and metrics shared by solve and heatmap commands."""
    channels = los_channel(scenario)
    weights, report = beamform.weights_for_strategy(
        beamformer, channels.h_c, channels.h_dl
    )
    baseline = None
    if beamformer != "po-mrt":
        mrt_report = metrics.evaluate(scenario, channels, beamform.po_mrt(channels.h_c))
        baseline = metrics.total_dbm(mrt_report.p_r_dbm)
    report_metrics = metrics.evaluate(scenario, channels, weights,
                                      baseline_p_r_dbm=baseline)

    beamform.export_weights_csv(weights, out_dir / "weights.csv")
    (out_dir / "solve_report.json").write_text(
        json.dumps(asdict(report), indent=2) + "\n"
    )
    metrics.write_metrics_csv(report_metrics, out_dir / "metrics.csv")
    manifest.outputs += ["weights.csv", "solve_report.json", "metrics.csv"]
    if not report.converged:
        manifest.status = "solver-not-converged"
    return channels, weights, report


def _cmd_solve(args, out_dir, manifest) -> int:
    scenario = _load_scenario_arg(args.scenario)
    manifest.scenario_digest = scenario_digest(scenario)
    _, _, report = _solve_artifacts(scenario, args.beamformer, out_dir, manifest)
    return 0 if report.converged else 2


def _cmd_heatmap(args, out_dir, manifest) -> int:
    scenario = _load_scenario_arg(args.scenario)
    manifest.scenario_digest = scenario_digest(scenario)
    if args.step <= 0:
        raise _CliError("--step must be positive")
    reader = scenario.reader_positions[0]
    grid = GridSpec.centered((reader[0], reader[1]), extent=tuple(args.extent),
                             step=args.step, plane_height=reader[2])

    _, weights, report = _solve_artifacts(scenario, args.beamformer, out_dir, manifest)
    heatmap = experiments.power_map_for_weights(
        scenario, weights, grid, label=args.beamformer.replace("-", "_")
    )
    experiments.write_heatmap_csv(heatmap, out_dir / "heatmap.csv")
    experiments.write_heatmap_pgm(heatmap, out_dir / "heatmap.pgm")
    manifest.outputs += ["heatmap.csv", "heatmap.pgm"]

    if args.diff:
        other_path = Path(args.diff)
        if not other_path.is_file():
            raise _CliError(f"diff heatmap not found: {other_path}")
        try:
            other = experiments.read_heatmap_csv(other_path, grid, label="reference")
        except ValueError as exc:
            raise _CliError(f"diff heatmap {other_path}: {exc}") from exc
        diff = experiments.differential_map(heatmap, other)
        experiments.write_heatmap_csv(diff, out_dir / "heatmap_diff.csv")
        experiments.write_heatmap_pgm(diff, out_dir / "heatmap_diff.pgm")
        manifest.outputs += ["heatmap_diff.csv", "heatmap_diff.pgm"]
    return 0 if report.converged else 2


def _cmd_sweep(args, out_dir, manifest) -> int:
    scenario = _load_scenario_arg(args.scenario)
    manifest.scenario_digest = scenario_digest(scenario)
    try:
        k_values = [int(part) for part in args.k.split(",") if part.strip()]
    except ValueError as exc:
        raise _CliError(f"--k must be a comma-separated integer list: {exc}") from exc
    if args.beamformer == "all":
        beamformers = experiments.BEAMFORMERS
    else:
        beamformers = (args.beamformer.replace("-", "_"),)

    try:
        result = experiments.run_k_sweep(scenario, k_values, args.order, beamformers)
    except ValueError as exc:
        raise _CliError(str(exc)) from exc

    for beamformer in beamformers:
        name = f"sweep_{result.selection_order}_{beamformer}.csv"
        experiments.write_sweep_csv(result, beamformer, out_dir / name)
        manifest.outputs.append(name)
    errors = [r for r in result.records if r.error is not None]
    if errors:
        with open(out_dir / "sweep_errors.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["K", "order", "beamformer", "error"])
            for r in errors:
                writer.writerow([r.k, result.selection_order, r.beamformer, r.error])
        manifest.outputs.append("sweep_errors.csv")
    return 0


def _cmd_phase_noise(args, out_dir, manifest) -> int:
    scenario = _load_scenario_arg(args.scenario)
    manifest.scenario_digest = scenario_digest(scenario)
    try:
        stds_deg = [float(part) for part in args.phase_noise_deg.split(",")
                    if part.strip()]
    except ValueError as exc:
        raise _CliError(f"--phase-noise-deg must be numeric: {exc}") from exc
    if args.trials < 1:
        raise _CliError("--trials must be >= 1")

    records = experiments.run_phase_noise_sweep(
        scenario, [math.radians(d) for d in stds_deg], args.trials, seed=args.seed
    )
    with open(out_dir / "phase_noise.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["std_deg", "std_rad", "mean_suppression_db",
                         "p10_suppression_db", "p90_suppression_db", "trials"])
        for deg, record in zip(stds_deg, records):
            writer.writerow([
                repr(deg), repr(record.std_rad),
                repr(record.mean_suppression_db),
                repr(record.p10_suppression_db),
                repr(record.p90_suppression_db),
                record.trials,
            ])
    manifest.outputs.append("phase_noise.csv")
    return 0


_COMMANDS = {
    "solve": _cmd_solve,
    "heatmap": _cmd_heatmap,
    "sweep": _cmd_sweep,
    "phase-noise": _cmd_phase_noise,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory {out_dir}: {exc}",
              file=sys.stderr)
        return 1

    manifest = RunManifest(
        command=["nullbeam"] + argv, scenario_digest=None,
        seed=args.seed, version=__version__,
    )
    start = time.perf_counter()
    try:
        code = _COMMANDS[args.command](args, out_dir, manifest)
    except _CliError as exc:
        manifest.status = "config-error"
        manifest.error = str(exc)
        print(f"error: {exc}", file=sys.stderr)
        code = 1
    finally:
        manifest.duration_s = time.perf_counter() - start
        manifest.write(out_dir)
    return code


if __name__ == "__main__":
    sys.exit(main())
