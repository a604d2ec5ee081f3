"""Received-power metrics and received-signal synthesis.

Conventions: dBm is 10 log10(P / 1 mW); ratio dB is 10 log10. Ratios whose
denominator underflows are capped at +300 dB and dBm values are floored at
-300 dBm so every report stays finite and sortable.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .beamform import BeamWeights
from .channel import ChannelSet, _complex_normal, _rng
from .scenario import Scenario

DB_CAP = 300.0
DBM_FLOOR = -300.0


def linear_to_db(value: float) -> float:
    return 10.0 * np.log10(value)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def watts_to_dbm(power_w: float, floor_dbm: float = DBM_FLOOR) -> float:
    """dBm of a power in watts, floored so zero power stays finite."""
    if power_w <= 0.0:
        return floor_dbm
    return max(float(linear_to_db(power_w / 1e-3)), floor_dbm)


def total_dbm(per_reader_dbm) -> float:
    """Total power in dBm from per-reader dBm values."""
    return watts_to_dbm(sum(db_to_linear(v) * 1e-3 for v in per_reader_dbm))


def _capped_ratio_db(numerator: float, denominator: float) -> float:
    if denominator <= 0.0:
        return DB_CAP if numerator > 0.0 else 0.0
    if numerator <= 0.0:
        return -DB_CAP
    return float(np.clip(linear_to_db(numerator / denominator), -DB_CAP, DB_CAP))


@dataclass(frozen=True)
class MetricsReport:
    """Power metrics for one (scenario, channels, weights) triple.

    ``p_r_dbm`` carries one value per reader; ``delta_db`` and the SIR proxy
    use the total direct-link power over all readers.
    """

    p_bd_dbm: float
    p_r_dbm: tuple[float, ...]
    delta_db: float
    sir_proxy_db: float
    suppression_db: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.delta_db) or not np.isfinite(self.sir_proxy_db):
            raise ValueError("delta_db and sir_proxy_db must be finite after capping")


METRICS_CSV_HEADER = [
    "p_bd_dbm", "p_r_dbm", "delta_db", "sir_proxy_db", "suppression_db"
]


def evaluate(scenario: Scenario, channels: ChannelSet, weights: BeamWeights,
             baseline_p_r_dbm: float | None = None) -> MetricsReport:
    """Compute BD illumination, per-reader DLI power, their ratio and the SIR proxy.

    Powers are P_max |s|^2 times the squared field amplitude. When
    ``baseline_p_r_dbm`` is given, ``suppression_db`` is that baseline minus
    this run's total direct-link power in dB.
    """
    x = weights.x
    if x.size != channels.num_emitters:
        raise ValueError(
            f"weights have {x.size} entries but channels have "
            f"{channels.num_emitters} emitters"
        )
    scale = scenario.per_emitter_power_w * scenario.symbol_power
    bd_amp_sq = float(np.abs(channels.h_c @ x) ** 2)
    dli = channels.h_dl @ x
    dli_amp_sq = np.abs(dli) ** 2
    dli_total = float(dli_amp_sq.sum())

    # The transmit scale multiplies both powers, so the power ratio equals
    # the field-level SIR proxy exactly.
    ratio_db = _capped_ratio_db(bd_amp_sq, dli_total)
    p_r_total_dbm = watts_to_dbm(scale * dli_total)
    return MetricsReport(
        p_bd_dbm=watts_to_dbm(scale * bd_amp_sq),
        p_r_dbm=tuple(watts_to_dbm(scale * v) for v in dli_amp_sq),
        delta_db=ratio_db,
        sir_proxy_db=ratio_db,
        suppression_db=(
            None if baseline_p_r_dbm is None
            else float(baseline_p_r_dbm) - p_r_total_dbm
        ),
    )


def suppression_between(p_r_a_dbm: float, p_r_b_dbm: float) -> float:
    """Suppression in dB going from level a to level b (positive when b is lower)."""
    return float(p_r_a_dbm) - float(p_r_b_dbm)


def adc_headroom_bits(delta_db: float) -> float:
    """Bits of converter headroom for a power ratio, at about 6 dB per bit."""
    return float(delta_db) / 6.02


@dataclass(frozen=True)
class SignalRealization:
    """One synthesized received vector and its additive components.

    ``y_r`` equals ``dli_term + backscatter_term + noise_term`` bit for bit.
    """

    y_r: np.ndarray
    dli_term: np.ndarray
    backscatter_term: np.ndarray
    noise_term: np.ndarray
    bd_symbol: complex
    reflection_efficiency: float


def synthesize_signal(scenario: Scenario, channels: ChannelSet,
                      weights: BeamWeights, bd_symbol: complex = 1.0 + 0.0j,
                      noise_power: float = 0.0, seed: int = 0
                      ) -> SignalRealization:
    """Received vector at the readers: direct link + modulated backscatter + noise.

    The carrier symbol is real with squared magnitude ``scenario.symbol_power``;
    the BD reflects ``eta * b`` of the incident field. Noise is circularly
    symmetric with per-entry variance ``noise_power`` (default noise-free).
    """
    if abs(bd_symbol) > 1.0 + 1e-12:
        raise ValueError("bd_symbol must satisfy |b| <= 1")
    if noise_power < 0.0:
        raise ValueError("noise_power must be >= 0")
    if channels.h_r is None:
        raise ValueError("signal synthesis requires the BD-to-reader channel h_r")

    excitation = np.sqrt(scenario.per_emitter_power_w) * weights.x \
        * np.sqrt(scenario.symbol_power)
    dli_term = channels.h_dl @ excitation
    eta = scenario.reflection_efficiency
    backscatter_term = eta * bd_symbol * channels.h_r * (channels.h_c @ excitation)
    if noise_power > 0.0:
        noise_term = np.sqrt(noise_power) * _complex_normal(
            _rng(seed, 3), channels.num_readers
        )
    else:
        noise_term = np.zeros(channels.num_readers, dtype=complex)
    return SignalRealization(
        y_r=dli_term + backscatter_term + noise_term,
        dli_term=dli_term,
        backscatter_term=backscatter_term,
        noise_term=noise_term,
        bd_symbol=complex(bd_symbol),
        reflection_efficiency=eta,
    )


def write_metrics_csv(report: MetricsReport, path) -> None:
    """Serialize one report as a single CSV row under METRICS_CSV_HEADER.

    Per-reader powers are joined with ';' in the p_r_dbm column; a missing
    suppression value is left empty.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_CSV_HEADER)
        writer.writerow([
            repr(report.p_bd_dbm),
            ";".join(repr(v) for v in report.p_r_dbm),
            repr(report.delta_db),
            repr(report.sir_proxy_db),
            "" if report.suppression_db is None else repr(report.suppression_db),
        ])
