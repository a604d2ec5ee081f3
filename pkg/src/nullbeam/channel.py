"""Complex baseband channel synthesis and impairment models.

Line-of-sight links use the free-space amplitude model

    g(d) = (lambda / (4 pi d)) * exp(-j 2 pi d / lambda)

so a channel entry is a dimensionless amplitude gain. Stochastic variants
(Rician fading, CSI estimation error, per-antenna phase jitter on applied
weights) are pure functions of their inputs and an integer seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .beamform import BeamWeights
from .scenario import Scenario


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization for a scenario.

    h_c:  (M,) emitter-to-BD gains.
    h_dl: (N, M) emitter-to-reader direct-link gains, one row per reader.
    h_r:  (N,) BD-to-reader gains, or None when not synthesized.
    """

    h_c: np.ndarray
    h_dl: np.ndarray
    h_r: np.ndarray | None = None

    def __post_init__(self):
        h_c = np.asarray(self.h_c, dtype=complex)
        h_dl = np.atleast_2d(np.asarray(self.h_dl, dtype=complex))
        object.__setattr__(self, "h_c", h_c)
        object.__setattr__(self, "h_dl", h_dl)
        if h_c.ndim != 1 or h_c.size < 1:
            raise ValueError("h_c must be a non-empty vector")
        if h_dl.shape[1] != h_c.size:
            raise ValueError(
                f"h_dl has {h_dl.shape[1]} columns but h_c has {h_c.size} entries"
            )
        if self.h_r is not None:
            h_r = np.asarray(self.h_r, dtype=complex).ravel()
            if h_r.size != h_dl.shape[0]:
                raise ValueError(
                    f"h_r has {h_r.size} entries but h_dl has {h_dl.shape[0]} rows"
                )
            object.__setattr__(self, "h_r", h_r)
        for name in ("h_c", "h_dl", "h_r"):
            arr = getattr(self, name)
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains a non-finite entry")

    @property
    def num_emitters(self) -> int:
        return self.h_c.size

    @property
    def num_readers(self) -> int:
        return self.h_dl.shape[0]

    def cascade_matrix(self) -> np.ndarray:
        """Rank-one backscatter cascade, outer product of h_r and h_c (N x M)."""
        if self.h_r is None:
            raise ValueError("cascade matrix requires h_r; this channel set has none")
        return np.outer(self.h_r, self.h_c)


@dataclass(frozen=True)
class ImpairmentSpec:
    """Impairment magnitudes plus the seed all impairment draws flow from.

    csi_error_rel_std: per-entry relative std of complex channel estimation
    error. phase_noise_std_rad: std of per-antenna phase jitter applied to
    beamforming weights.
    """

    csi_error_rel_std: float = 0.0
    phase_noise_std_rad: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.csi_error_rel_std < 0:
            raise ValueError("csi_error_rel_std must be >= 0")
        if self.phase_noise_std_rad < 0:
            raise ValueError("phase_noise_std_rad must be >= 0")


def _rng(seed: int, *tags: int) -> np.random.Generator:
    # Tags split one user seed into decorrelated per-purpose streams.
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(t) & 0xFFFFFFFF for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric unit-variance complex Gaussian draws."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def free_space_gains(positions, reference, wavelength_m: float) -> np.ndarray:
    """Free-space gains between each of ``positions`` (k, 3) and ``reference`` (3,)."""
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    ref = np.asarray(reference, dtype=float)
    d = np.sqrt(((pos - ref) ** 2).sum(axis=1))
    if np.any(d <= 0):
        raise ValueError("zero-distance link has no defined gain")
    return (wavelength_m / (4.0 * np.pi * d)) * np.exp(-2j * np.pi * d / wavelength_m)


def los_channel(scenario: Scenario) -> ChannelSet:
    """Deterministic line-of-sight channels for every link in the scenario."""
    lam = scenario.wavelength_m
    h_c = free_space_gains(scenario.emitter_positions, scenario.bd_position, lam)
    h_dl = np.vstack(
        [free_space_gains(scenario.emitter_positions, reader, lam)
         for reader in scenario.reader_positions]
    )
    h_r = free_space_gains(scenario.reader_positions, scenario.bd_position, lam)
    return ChannelSet(h_c=h_c, h_dl=h_dl, h_r=h_r)


def rician_channel(scenario: Scenario, k_factor: float, seed: int) -> ChannelSet:
    """Rician fading around the line-of-sight channel.

    Each entry is sqrt(K/(K+1)) h_los + sqrt(1/(K+1)) w with w drawn
    circularly-symmetric complex Gaussian of per-entry variance |h_los|^2,
    so the mean entry power is preserved for every K. k_factor = 0 gives
    pure Rayleigh fading; large K approaches the LoS channel.
    """
    if not np.isfinite(k_factor) or k_factor < 0:
        raise ValueError("k_factor must be finite and >= 0")
    los = los_channel(scenario)
    rng = _rng(seed, 0)
    los_weight = np.sqrt(k_factor / (k_factor + 1.0))
    diffuse_weight = np.sqrt(1.0 / (k_factor + 1.0))

    def fade(h: np.ndarray) -> np.ndarray:
        w = np.abs(h) * _complex_normal(rng, h.shape)
        return los_weight * h + diffuse_weight * w

    return ChannelSet(h_c=fade(los.h_c), h_dl=fade(los.h_dl), h_r=fade(los.h_r))


def apply_csi_error(channels: ChannelSet, spec: ImpairmentSpec) -> ChannelSet:
    """Add per-entry relative complex Gaussian estimation error.

    Every entry h becomes h + e with e circularly symmetric of std
    ``csi_error_rel_std * |h|``. Deterministic given ``spec.rng_seed``.
    """
    rng = _rng(spec.rng_seed, 1)
    rel = spec.csi_error_rel_std

    def perturb(h: np.ndarray | None) -> np.ndarray | None:
        if h is None:
            return None
        return h + rel * np.abs(h) * _complex_normal(rng, h.shape)

    return ChannelSet(
        h_c=perturb(channels.h_c),
        h_dl=perturb(channels.h_dl),
        h_r=perturb(channels.h_r),
    )


def apply_phase_noise(weights: BeamWeights, spec: ImpairmentSpec) -> BeamWeights:
    """Rotate each weight by an independent Normal(0, std^2) phase.

    Models residual per-antenna calibration error in the applied weights;
    moduli are preserved. Deterministic given ``spec.rng_seed``.
    """
    rng = _rng(spec.rng_seed, 2)
    phases = rng.normal(0.0, spec.phase_noise_std_rad, size=weights.x.shape)
    return BeamWeights(
        x=weights.x * np.exp(1j * phases),
        label=weights.label,
        zeroed_entries=weights.zeroed_entries,
    )


def export_channels_csv(channels: ChannelSet, path) -> None:
    """Write all channel entries as (link_type, reader_index, emitter_index, re, im)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["link_type", "reader_index", "emitter_index", "re", "im"])
        for m, v in enumerate(channels.h_c):
            writer.writerow(["h_c", "", m, repr(float(v.real)), repr(float(v.imag))])
        for n in range(channels.num_readers):
            for m in range(channels.num_emitters):
                v = channels.h_dl[n, m]
                writer.writerow(["h_dl", n, m, repr(float(v.real)), repr(float(v.imag))])
        if channels.h_r is not None:
            for n, v in enumerate(channels.h_r):
                writer.writerow(["h_r", n, "", repr(float(v.real)), repr(float(v.imag))])
