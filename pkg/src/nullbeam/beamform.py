"""Beamforming weight design for BD illumination with reader nulling.

Two families of weight vectors, both under the per-antenna power constraint
|x_m|^2 <= 1:

* conjugate-phase transmission (``po_mrt``), which maximizes the field at
  the BD and ignores the readers, and
* the null-steered design (``azf_solve``), the solution of the convex
  program

      maximize  Re(h_c^T x)
      s.t.      h_dl @ x = 0  and  |x_m| <= 1 for all m

  solved by projected gradient ascent with Dykstra's alternating
  projections onto the intersection of the nullspace and the unit disks,
  plus its phase-only projection (``azf_phase_only``).

Independent oracles (``azf_closed_form_dim1``, ``azf_bruteforce``) verify
the solver on instances small enough to solve exhaustively.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

_POWER_TOL = 1e-12          # slack on the per-antenna power invariant
_UNIT_MODULUS_TOL = 1e-9    # slack on |x_m| = 1 for phase-only labels
_PHASE_ONLY_EPS = 1e-9      # relative modulus below which entries are zeroed

_LABELS = ("po_mrt", "azf_optimal", "azf_phase_only", "custom")


@dataclass(frozen=True)
class BeamWeights:
    """Per-antenna complex weights with feasibility checks at construction.

    ``zeroed_entries`` counts entries that a degenerate-input rule forced to
    a fixed value (zeroed in phase-only output, unit-defaulted in
    conjugate-phase output).
    """

    x: np.ndarray
    label: str = "custom"
    zeroed_entries: int = 0

    def __post_init__(self):
        x = np.asarray(self.x, dtype=complex).ravel()
        object.__setattr__(self, "x", x)
        if x.size == 0:
            raise ValueError("weight vector is empty")
        if self.label not in _LABELS:
            raise ValueError(f"unknown weight label {self.label!r}")
        mags_sq = np.abs(x) ** 2
        if np.any(mags_sq > 1.0 + _POWER_TOL):
            worst = int(np.argmax(mags_sq))
            raise ValueError(
                f"per-antenna power violated: |x_{worst}|^2 = {mags_sq[worst]:.15g} > 1"
            )
        if self.label in ("po_mrt", "azf_phase_only"):
            mags = np.sqrt(mags_sq)
            off = (mags > _POWER_TOL) & (np.abs(mags - 1.0) > _UNIT_MODULUS_TOL)
            if np.any(off):
                worst = int(np.argmax(np.abs(mags - 1.0)))
                raise ValueError(
                    f"label {self.label!r} requires unit-modulus entries, "
                    f"got |x_{worst}| = {mags[worst]:.15g}"
                )
        x.setflags(write=False)

    @property
    def num_emitters(self) -> int:
        return self.x.size


@dataclass(frozen=True)
class SolverOptions:
    """Stopping rules for ``azf_solve``.

    The ascent step is ``step_scale / ||h_c||``. The outer loop stops once
    the relative objective improvement stays below ``improvement_rel_tol``
    for ``stall_iterations`` consecutive iterations.
    """

    step_scale: float = 0.5
    max_outer_iterations: int = 10_000
    improvement_rel_tol: float = 1e-12
    stall_iterations: int = 15
    dykstra_tol: float = 1e-10
    dykstra_max_iterations: int = 2000


@dataclass(frozen=True)
class SolveReport:
    """Solver diagnostics for one null-steering solve."""

    objective: float
    null_residual: float
    outer_iterations: int
    inner_projection_iterations_total: int
    modulus_min: float
    modulus_max: float
    converged: bool

    def __post_init__(self):
        if self.objective < 0:
            raise ValueError("objective must be >= 0")
        if self.null_residual < 0:
            raise ValueError("null_residual must be >= 0")


def po_mrt(h_c) -> BeamWeights:
    """Conjugate-phase weights: x_m = conj(h_c,m) / |h_c,m|.

    Entries with |h_c,m| below 1e-300 get weight 1 + 0j and are counted in
    ``zeroed_entries`` (their channel contributes nothing either way).
    """
    h = np.asarray(h_c, dtype=complex).ravel()
    if h.size == 0:
        raise ValueError("channel vector is empty")
    mags = np.abs(h)
    degenerate = mags < 1e-300
    x = np.ones(h.size, dtype=complex)
    ok = ~degenerate
    x[ok] = np.conj(h[ok]) / mags[ok]
    return BeamWeights(x=x, label="po_mrt", zeroed_entries=int(degenerate.sum()))


def nullspace_basis(h_dl) -> np.ndarray:
    """Orthonormal basis of {x : h_dl @ x = 0}, as an M x (M - rank) matrix."""
    a = np.atleast_2d(np.asarray(h_dl, dtype=complex))
    n, m = a.shape
    if m == 0:
        raise ValueError("direct-link matrix has no columns")
    _, s, vh = np.linalg.svd(a)
    tol = max(n, m) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    if rank >= m:
        raise ValueError("null space is trivial; need more emitters than readers")
    return vh[rank:].conj().T


def _clip_unit_disks(x: np.ndarray) -> np.ndarray:
    """Per-entry projection onto the unit disk; interior entries pass through exactly."""
    return x / np.maximum(np.abs(x), 1.0)


def dykstra_project(y, nullspace_projector, tol: float = 1e-10,
                    max_iterations: int = 2000) -> tuple[np.ndarray, int]:
    """Project onto {x : P x = x} intersected with the per-antenna unit disks.

    Dykstra's alternation between the orthogonal projector ``P`` and the
    disk clipping, with one correction term per set. Stops once the iterate
    moves by less than ``tol`` in every entry AND lies within ``tol`` of the
    nullspace (the iterate change alone underestimates the remaining
    distance when the alternation converges slowly). Returns
    (point, iterations); the point satisfies the disk constraints exactly
    and the nullspace constraint up to the stopping tolerance.
    """
    x = np.asarray(y, dtype=complex).ravel()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        mid = nullspace_projector @ (x + p)
        p = x + p - mid
        clipped = _clip_unit_disks(mid + q)
        q = mid + q - clipped
        delta = float(np.max(np.abs(clipped - x)))
        x = clipped
        if delta < tol:
            violation = float(np.max(np.abs(x - nullspace_projector @ x)))
            if violation < tol:
                break
    return x, iterations


def _null_residual(h_dl: np.ndarray, x: np.ndarray) -> float:
    denom = float(np.linalg.norm(h_dl)) * max(float(np.linalg.norm(x)), 1.0)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(h_dl @ x)) / denom


def azf_solve(h_c, h_dl, options: SolverOptions | None = None
              ) -> tuple[BeamWeights, SolveReport]:
    """Solve the null-steering problem for optimal amplitude-phase weights.

    Projected gradient ascent on Re(h_c^T x) with ascent direction
    conj(h_c), projecting each iterate onto the feasible set with
    :func:`dykstra_project`. The final iterate is re-projected onto the
    nullspace exactly and uniformly rescaled into the per-antenna disks,
    then rotated by a global phase so h_c^T x is real and non-negative
    (a global phase changes neither objective magnitude nor feasibility).

    Returns the weights (label ``azf_optimal``) and a :class:`SolveReport`.
    Raises ValueError when the nullspace is trivial. A channel with no
    component in the nullspace yields the zero vector, flagged and
    converged, since every feasible vector then scores zero.
    """
    opts = options or SolverOptions()
    h = np.asarray(h_c, dtype=complex).ravel()
    a = np.atleast_2d(np.asarray(h_dl, dtype=complex))
    if a.shape[1] != h.size:
        raise ValueError(
            f"h_dl has {a.shape[1]} columns but h_c has {h.size} entries"
        )
    basis = nullspace_basis(a)
    h_norm = float(np.linalg.norm(h))
    reachable = float(np.linalg.norm(basis.T @ h))
    if h_norm == 0.0 or reachable <= 1e-14 * h_norm:
        x = np.zeros(h.size, dtype=complex)
        report = SolveReport(
            objective=0.0, null_residual=0.0, outer_iterations=0,
            inner_projection_iterations_total=0, modulus_min=0.0,
            modulus_max=0.0, converged=True,
        )
        return BeamWeights(x=x, label="azf_optimal", zeroed_entries=h.size), report

    projector = basis @ basis.conj().T
    gradient = np.conj(h)
    step = opts.step_scale / h_norm

    # Warm start aligned with the objective. The clipped projection is not
    # necessarily feasible (clipping leaves the nullspace), so only the
    # projected iterates below may become the returned solution.
    x = _clip_unit_disks(projector @ po_mrt(h).x)
    objective = float(np.real(h @ x))
    best_x, best_objective = None, -np.inf
    inner_total = 0
    stall = 0
    converged = False
    outer = 0
    for outer in range(1, opts.max_outer_iterations + 1):
        x, inner = dykstra_project(
            x + step * gradient, projector,
            tol=opts.dykstra_tol, max_iterations=opts.dykstra_max_iterations,
        )
        inner_total += inner
        new_objective = float(np.real(h @ x))
        if new_objective > best_objective:
            best_x, best_objective = x, new_objective
        improvement = (new_objective - objective) / max(abs(new_objective), 1e-300)
        stall = stall + 1 if improvement < opts.improvement_rel_tol else 0
        objective = new_objective
        if stall >= opts.stall_iterations:
            converged = True
            break

    # Exact-null polish: back onto the nullspace, then uniformly into the
    # disks, then align the global phase so the objective is real.
    x = projector @ (best_x if best_x is not None else x)
    x = x / max(1.0, float(np.abs(x).max()))
    inner_product = complex(h @ x)
    if abs(inner_product) > 0.0:
        x = x * (np.conj(inner_product) / abs(inner_product))

    mags = np.abs(x)
    report = SolveReport(
        objective=max(float(np.real(h @ x)), 0.0),
        null_residual=_null_residual(a, x),
        outer_iterations=outer,
        inner_projection_iterations_total=inner_total,
        modulus_min=float(mags.min()),
        modulus_max=float(mags.max()),
        converged=converged,
    )
    return BeamWeights(x=x, label="azf_optimal"), report


def azf_phase_only(x_star: BeamWeights) -> BeamWeights:
    """Keep only the phase of each entry: x_m -> x_m / |x_m|.

    Entries with modulus below 1e-9 of the largest are zeroed instead of
    being given an arbitrary phase (which could misplace the transmit
    null); the count lands in ``zeroed_entries``. Raises ValueError when
    every entry is that small.
    """
    x = x_star.x
    mags = np.abs(x)
    peak = float(mags.max())
    if peak <= 0.0:
        raise ValueError("degenerate solution: all weight moduli are zero")
    keep = mags > _PHASE_ONLY_EPS * peak
    if not keep.any():
        raise ValueError("degenerate solution: all weight moduli are zero")
    if float(mags.min()) < 0.1 * peak:
        warnings.warn(
            "weight moduli span more than a factor of 10; the phase-only "
            "projection may noticeably degrade the transmit null",
            RuntimeWarning,
            stacklevel=2,
        )
    out = np.zeros_like(x)
    out[keep] = x[keep] / mags[keep]
    return BeamWeights(
        x=out, label="azf_phase_only", zeroed_entries=int((~keep).sum())
    )


def azf_closed_form_dim1(h_c, h_dl) -> BeamWeights:
    """Exact null-steering optimum when the nullspace is one-dimensional.

    With a single nullspace direction v the feasible set is a disk in one
    complex coordinate, so a linear objective peaks on its boundary at the
    phase aligned with h_c^T v:  x = v exp(-j arg(h_c^T v)) / max_m |v_m|.
    """
    h = np.asarray(h_c, dtype=complex).ravel()
    basis = nullspace_basis(h_dl)
    if basis.shape[1] != 1:
        raise ValueError(
            f"nullspace dimension is {basis.shape[1]}, closed form needs exactly 1"
        )
    v = basis[:, 0]
    peak = float(np.abs(v).max())
    c = complex(h @ v)
    phase = np.exp(-1j * np.angle(c)) if abs(c) > 0.0 else 1.0 + 0.0j
    return BeamWeights(x=v * (phase / peak), label="azf_optimal")


def azf_bruteforce(h_c, h_dl, directions: int = 1_000_000) -> float:
    """Grid-search lower bound on the null-steering optimum |h_c^T x|.

    Sweeps unit directions u over the complex sphere of the nullspace
    (modulo the irrelevant global phase), scales each candidate
    x(u) = V u / max_m |(V u)_m| onto the per-antenna boundary and returns
    the best objective. Converges to the optimum as the grid refines.
    Restricted to nullspace dimension <= 2 to keep runtime bounded.
    """
    h = np.asarray(h_c, dtype=complex).ravel()
    basis = nullspace_basis(h_dl)
    dim = basis.shape[1]
    if dim > 2:
        raise ValueError("oracle restricted to small instances (nullspace dim <= 2)")
    if directions < 1:
        raise ValueError("directions must be >= 1")

    if dim == 1:
        phases = np.linspace(0.0, 2.0 * np.pi, num=directions, endpoint=False)
        best, _ = _bruteforce_eval(h, basis, np.exp(1j * phases)[None, :])
        return best

    # Directions modulo global phase: u = (cos mix, sin mix * e^{j phase}).
    # Coarse sweep with equal angular resolution on both axes, then a few
    # fixed zoom rounds around the best sample. Every sampled direction is
    # feasible, so the result stays a lower bound on the optimum.
    n_mix = max(2, math.ceil(math.sqrt(directions / 4.0)))
    n_phase = max(2, math.ceil(directions / n_mix))
    mix_span = np.pi / 2.0
    phase_span = 2.0 * np.pi
    best = 0.0
    center = (mix_span / 2.0, np.pi)
    spans = (mix_span, phase_span)
    for level in range(5):
        if level == 0:
            mix = np.linspace(0.0, mix_span, num=n_mix)
            rel_phase = np.linspace(0.0, phase_span, num=n_phase, endpoint=False)
        else:
            spans = (spans[0] / 8.0, spans[1] / 8.0)
            mix = np.clip(
                np.linspace(center[0] - spans[0], center[0] + spans[0], num=33),
                0.0, mix_span,
            )
            rel_phase = np.linspace(center[1] - spans[1], center[1] + spans[1], num=33)
        mix_grid, phase_grid = np.meshgrid(mix, rel_phase, indexing="ij")
        u = np.stack(
            [np.cos(mix_grid).ravel().astype(complex),
             np.sin(mix_grid).ravel() * np.exp(1j * phase_grid.ravel())]
        )
        value, arg = _bruteforce_eval(h, basis, u)
        if value > best:
            best = value
            center = (mix_grid.ravel()[arg], phase_grid.ravel()[arg])
    return best


def _bruteforce_eval(h, basis, u) -> tuple[float, int]:
    """Best objective over direction columns of u, with its column index."""
    best = -1.0
    best_arg = 0
    chunk = 1 << 16
    for start in range(0, u.shape[1], chunk):
        block = basis @ u[:, start:start + chunk]
        peaks = np.abs(block).max(axis=0)
        values = np.abs(h @ block) / peaks
        arg = int(values.argmax())
        if values[arg] > best:
            best = float(values[arg])
            best_arg = start + arg
    return best, best_arg


def weights_for_strategy(strategy: str, h_c, h_dl,
                         options: SolverOptions | None = None
                         ) -> tuple[BeamWeights, SolveReport]:
    """Weights plus diagnostics for one of the named transmit strategies.

    ``po_mrt`` ignores the readers; ``azf`` is the phase-only projection of
    the null-steering optimum (the vector a constant-envelope transmitter
    deploys); ``azf_amplitude`` is the amplitude-phase optimum itself.
    """
    name = strategy.replace("-", "_")
    if name == "po_mrt":
        x = po_mrt(h_c)
        return x, diagnostics_for_weights(h_c, h_dl, x)
    if name == "azf":
        optimal, report = azf_solve(h_c, h_dl, options)
        return azf_phase_only(optimal), report
    if name == "azf_amplitude":
        return azf_solve(h_c, h_dl, options)
    raise ValueError(
        f"unknown beamformer {strategy!r}; expected po_mrt, azf or azf_amplitude"
    )


def diagnostics_for_weights(h_c, h_dl, weights: BeamWeights) -> SolveReport:
    """SolveReport-shaped diagnostics for weights not produced by the solver."""
    h = np.asarray(h_c, dtype=complex).ravel()
    a = np.atleast_2d(np.asarray(h_dl, dtype=complex))
    mags = np.abs(weights.x)
    return SolveReport(
        objective=abs(complex(h @ weights.x)),
        null_residual=_null_residual(a, weights.x),
        outer_iterations=0,
        inner_projection_iterations_total=0,
        modulus_min=float(mags.min()),
        modulus_max=float(mags.max()),
        converged=True,
    )


def export_weights_csv(weights: BeamWeights, path) -> None:
    """Write weights as (emitter_index, re, im, modulus, phase_rad) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["emitter_index", "re", "im", "modulus", "phase_rad"])
        for m, v in enumerate(weights.x):
            writer.writerow(
                [m, repr(float(v.real)), repr(float(v.imag)),
                 repr(float(np.abs(v))), repr(float(np.angle(v)))]
            )
