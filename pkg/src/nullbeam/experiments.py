"""Simulated experiment pipelines: spatial power maps, emitter-count sweeps
and phase-noise robustness runs.

Each pipeline computes weights once from the scenario's nominal reader
position, then evaluates them against the true geometry, optionally through
impairment models. All results are deterministic functions of the inputs
and the seed, written in a fixed cell/trial order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import beamform, metrics
from .channel import (
    ImpairmentSpec, apply_csi_error, apply_phase_noise, free_space_gains,
    los_channel,
)
from .scenario import GridSpec, Scenario

BEAMFORMERS = ("po_mrt", "azf", "azf_amplitude")

_ORDER_ALIASES = {
    "strongest_first": "strongest_first",
    "strongest": "strongest_first",
    "weakest_first": "weakest_first",
    "weakest": "weakest_first",
}


@dataclass(frozen=True)
class Heatmap:
    """Scalar field sampled on a GridSpec.

    ``values[iy, ix]`` belongs to grid point (x_coords[ix], y_coords[iy]).
    Power maps carry microwatts (units "uW"); differential maps carry dB.
    """

    grid: GridSpec
    values: np.ndarray
    beamformer_label: str
    reader_marker: tuple[float, float]
    units: str = "uW"

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != (self.grid.ny, self.grid.nx):
            raise ValueError(
                f"values shape {values.shape} does not match grid "
                f"({self.grid.ny}, {self.grid.nx})"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("heatmap contains a non-finite value")
        values.setflags(write=False)

    def min_cell(self) -> tuple[int, int]:
        """(ix, iy) of the smallest value."""
        iy, ix = np.unravel_index(int(np.argmin(self.values)), self.values.shape)
        return int(ix), int(iy)

    def max_cell(self) -> tuple[int, int]:
        iy, ix = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return int(ix), int(iy)


def power_map_for_weights(scenario: Scenario, weights: beamform.BeamWeights,
                          grid: GridSpec, chunk_cells: int | None = None,
                          label: str | None = None) -> Heatmap:
    """Received direct-link power (uW) over the grid for fixed weights.

    For each grid point a fresh emitter-to-point channel row is synthesized
    from the true geometry and the power P_max |s|^2 |row . x|^2 recorded.
    The per-point field accumulates over emitters in a fixed order, so the
    result is bit-identical for any ``chunk_cells`` partitioning.
    """
    xs, ys = grid.x_coords, grid.y_coords
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    points = np.column_stack(
        [gx.ravel(), gy.ravel(), np.full(gx.size, grid.plane_height)]
    )
    lam = scenario.wavelength_m
    x = weights.x
    total = points.shape[0]
    chunk = total if chunk_cells is None else max(1, int(chunk_cells))

    field = np.empty(total, dtype=complex)
    for start in range(0, total, chunk):
        block = points[start:start + chunk]
        acc = np.zeros(block.shape[0], dtype=complex)
        for m in range(scenario.num_emitters):
            acc += free_space_gains(block, scenario.emitter_positions[m], lam) * x[m]
        field[start:start + chunk] = acc

    scale = scenario.per_emitter_power_w * scenario.symbol_power
    values_uw = (scale * np.abs(field) ** 2 * 1e6).reshape(grid.ny, grid.nx)
    return Heatmap(
        grid=grid,
        values=values_uw,
        beamformer_label=label or weights.label,
        reader_marker=(float(scenario.reader_positions[0, 0]),
                       float(scenario.reader_positions[0, 1])),
    )


def run_heatmap(scenario: Scenario, beamformer: str, grid: GridSpec,
                impairments: ImpairmentSpec | None = None,
                chunk_cells: int | None = None) -> Heatmap:
    """Spatial power scan with weights computed once from the nominal reader.

    CSI error (if any) perturbs the channels the weights are computed from;
    phase noise (if any) perturbs the applied weights. The scan itself
    always uses the true geometry.
    """
    weights, _ = _impaired_weights(scenario, beamformer, los_channel(scenario),
                                   impairments)
    return power_map_for_weights(scenario, weights, grid,
                                 chunk_cells=chunk_cells, label=beamformer)


def _impaired_weights(scenario, beamformer, true_channels, impairments):
    estimated = true_channels
    if impairments is not None and impairments.csi_error_rel_std > 0:
        estimated = apply_csi_error(estimated, impairments)
    weights, report = beamform.weights_for_strategy(
        beamformer, estimated.h_c, estimated.h_dl
    )
    if impairments is not None and impairments.phase_noise_std_rad > 0:
        weights = apply_phase_noise(weights, impairments)
    return weights, report


def differential_map(a: Heatmap, b: Heatmap) -> Heatmap:
    """Cellwise 10 log10(a / b) in dB with the usual +/-300 dB capping."""
    if a.grid != b.grid:
        raise ValueError("heatmaps live on different grids")
    if a.units != b.units:
        raise ValueError(f"heatmap units differ: {a.units!r} vs {b.units!r}")
    av, bv = a.values, b.values
    with np.errstate(divide="ignore", invalid="ignore"):
        db = 10.0 * np.log10(av / bv)
    db = np.clip(db, -metrics.DB_CAP, metrics.DB_CAP)
    db = np.where((bv == 0.0) & (av > 0.0), metrics.DB_CAP, db)
    db = np.where((av == 0.0) & (bv > 0.0), -metrics.DB_CAP, db)
    db = np.where((av == 0.0) & (bv == 0.0), 0.0, db)
    return Heatmap(
        grid=a.grid,
        values=db,
        beamformer_label=f"{a.beamformer_label}_vs_{b.beamformer_label}",
        reader_marker=a.reader_marker,
        units="dB",
    )


@dataclass(frozen=True)
class SweepRecord:
    """Metrics for one (K, beamformer) point; ``error`` set when the solve failed."""

    k: int
    beamformer: str
    p_bd_dbm: float
    p_r_dbm: float
    delta_db: float
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    k_values: tuple[int, ...]
    selection_order: str
    records: tuple[SweepRecord, ...]

    def records_for(self, beamformer: str) -> list[SweepRecord]:
        return [r for r in self.records if r.beamformer == beamformer]


def run_k_sweep(scenario: Scenario, k_values, order: str,
                beamformers=BEAMFORMERS,
                impairments: ImpairmentSpec | None = None) -> SweepResult:
    """Metrics versus number of active emitters under ordered selection.

    Emitters are ranked by estimated BD-link power |h_c,m|^2 and the first K
    retained (strongest_first or weakest_first). Weights are recomputed from
    the selected sub-channel; unselected emitters stay silent (zero weight).
    A K too small for null steering is recorded as a per-K error and the
    sweep continues.
    """
    order = _ORDER_ALIASES.get(order)
    if order is None:
        raise ValueError("order must be 'strongest_first' or 'weakest_first'")
    ks = [int(k) for k in k_values]
    if ks != sorted(ks) or len(set(ks)) != len(ks):
        raise ValueError("k_values must be strictly increasing")
    m = scenario.num_emitters
    if ks and (ks[0] < 1 or ks[-1] > m):
        raise ValueError(f"k_values must lie in [1, {m}]")

    true_channels = los_channel(scenario)
    estimated = true_channels
    if impairments is not None and impairments.csi_error_rel_std > 0:
        estimated = apply_csi_error(estimated, impairments)

    ranking = np.argsort(np.abs(estimated.h_c) ** 2, kind="stable")
    if order == "strongest_first":
        ranking = ranking[::-1]

    records = []
    for k in ks:
        selected = np.sort(ranking[:k])
        for beamformer in beamformers:
            try:
                sub_weights, _ = beamform.weights_for_strategy(
                    beamformer, estimated.h_c[selected],
                    estimated.h_dl[:, selected],
                )
            except ValueError as exc:
                records.append(SweepRecord(
                    k=k, beamformer=beamformer, p_bd_dbm=float("nan"),
                    p_r_dbm=float("nan"), delta_db=float("nan"), error=str(exc),
                ))
                continue
            full = np.zeros(m, dtype=complex)
            full[selected] = sub_weights.x
            weights = beamform.BeamWeights(
                x=full, label=sub_weights.label,
                zeroed_entries=sub_weights.zeroed_entries + (m - k),
            )
            if impairments is not None and impairments.phase_noise_std_rad > 0:
                weights = apply_phase_noise(weights, impairments)
            report = metrics.evaluate(scenario, true_channels, weights)
            records.append(SweepRecord(
                k=k, beamformer=beamformer,
                p_bd_dbm=report.p_bd_dbm,
                p_r_dbm=metrics.total_dbm(report.p_r_dbm),
                delta_db=report.delta_db,
            ))
    return SweepResult(
        k_values=tuple(ks), selection_order=order, records=tuple(records)
    )


@dataclass(frozen=True)
class PhaseNoiseRecord:
    std_rad: float
    mean_suppression_db: float
    p10_suppression_db: float
    p90_suppression_db: float
    trials: int


def run_phase_noise_sweep(scenario: Scenario, stds_rad, trials: int,
                          seed: int = 0) -> list[PhaseNoiseRecord]:
    """Suppression of phase-only null steering vs conjugate-phase transmission
    under per-antenna phase jitter.

    Weights are solved once with exact CSI; each trial draws fresh phase
    noise for both beamformers and records the difference of their
    direct-link powers in dB. Returns mean and 10th/90th percentiles per
    noise level. Deterministic given the seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    channels = los_channel(scenario)
    mrt = beamform.po_mrt(channels.h_c)
    optimal, _ = beamform.azf_solve(channels.h_c, channels.h_dl)
    phase_only = beamform.azf_phase_only(optimal)

    records = []
    for si, std in enumerate(stds_rad):
        std = float(std)
        suppressions = np.empty(trials)
        for t in range(trials):
            child = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, si, t])
            seeds = child.generate_state(2)
            noisy_mrt = apply_phase_noise(
                mrt, ImpairmentSpec(phase_noise_std_rad=std, rng_seed=int(seeds[0]))
            )
            noisy_azf = apply_phase_noise(
                phase_only,
                ImpairmentSpec(phase_noise_std_rad=std, rng_seed=int(seeds[1])),
            )
            p_r_mrt = metrics.evaluate(scenario, channels, noisy_mrt).p_r_dbm
            p_r_azf = metrics.evaluate(scenario, channels, noisy_azf).p_r_dbm
            suppressions[t] = metrics.suppression_between(
                metrics.total_dbm(p_r_mrt), metrics.total_dbm(p_r_azf)
            )
        records.append(PhaseNoiseRecord(
            std_rad=std,
            mean_suppression_db=float(suppressions.mean()),
            p10_suppression_db=float(np.percentile(suppressions, 10)),
            p90_suppression_db=float(np.percentile(suppressions, 90)),
            trials=trials,
        ))
    return records


def write_heatmap_csv(heatmap: Heatmap, path) -> None:
    """Rows ``x_m,y_m,power`` in row-major order (x varies fastest)."""
    xs, ys = heatmap.grid.x_coords, heatmap.grid.y_coords
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x_m", "y_m", "power"])
        for iy in range(heatmap.grid.ny):
            for ix in range(heatmap.grid.nx):
                writer.writerow(
                    [repr(float(xs[ix])), repr(float(ys[iy])),
                     repr(float(heatmap.values[iy, ix]))]
                )


def read_heatmap_csv(path, grid: GridSpec, label: str = "custom",
                     units: str = "uW") -> Heatmap:
    """Load a heatmap CSV written by :func:`write_heatmap_csv` onto a known grid."""
    values = np.empty((grid.ny, grid.nx))
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["x_m", "y_m", "power"]:
            raise ValueError(f"unexpected heatmap CSV header: {header}")
        rows = list(reader)
    if len(rows) != grid.num_cells:
        raise ValueError(
            f"heatmap CSV has {len(rows)} cells, grid expects {grid.num_cells}"
        )
    xs, ys = grid.x_coords, grid.y_coords
    for i, row in enumerate(rows):
        iy, ix = divmod(i, grid.nx)
        x, y, value = (float(c) for c in row)
        if x != float(xs[ix]) or y != float(ys[iy]):
            raise ValueError(
                f"heatmap CSV row {i} at ({x}, {y}) does not match the grid"
            )
        values[iy, ix] = value
    return Heatmap(grid=grid, values=values, beamformer_label=label,
                   reader_marker=(float("nan"), float("nan")), units=units)


def write_heatmap_pgm(heatmap: Heatmap, path) -> None:
    """16-bit binary portable graymap, min-max normalized, top row = largest y."""
    v = heatmap.values
    span = float(v.max() - v.min())
    if span > 0:
        normalized = (v - v.min()) / span
    else:
        normalized = np.zeros_like(v)
    pixels = np.round(normalized * 65535.0).astype(">u2")[::-1, :]
    with open(path, "wb") as fh:
        fh.write(f"P5\n{heatmap.grid.nx} {heatmap.grid.ny}\n65535\n".encode("ascii"))
        fh.write(pixels.tobytes())


SWEEP_CSV_HEADER = ["K", "order", "beamformer", "p_bd_dbm", "p_r_dbm", "delta_db"]


def write_sweep_csv(result: SweepResult, beamformer: str, path) -> None:
    """One CSV of successful records for a single beamformer."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_CSV_HEADER)
        for record in result.records_for(beamformer):
            if record.error is not None:
                continue
            writer.writerow([
                record.k, result.selection_order, record.beamformer,
                repr(record.p_bd_dbm), repr(record.p_r_dbm),
                repr(record.delta_db),
            ])
