"""Room geometry, device placements, and RF parameters.

A Scenario fixes everything the channel synthesizer needs: emitter positions
on the ceiling, the backscatter device (BD) position, reader positions, the
carrier frequency and the per-emitter power budget. Scenarios are immutable
and safe to share across parallel workers.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT_M_S = 299_792_458.0

# Two device positions closer than this are treated as coincident (a link of
# zero length has no defined gain).
MIN_SEPARATION_M = 1e-9

_ROOM_WIDTH_M = 4.0
_ROOM_LENGTH_M = 8.0
_CEILING_HEIGHT_M = 2.4


def _as_point(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3D point [x, y, z], got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains a non-finite coordinate")
    return arr


def _as_points(value, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
        raise ValueError(
            f"{name} must be a non-empty list of 3D points, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains a non-finite coordinate")
    return arr


@dataclass(frozen=True, eq=False)
class Scenario:
    """Immutable description of one deployment.

    Lengths are in meters, powers in dBm. ``symbol_power`` is the squared
    magnitude of the transmitted carrier symbol; ``reflection_efficiency``
    is the BD reflection efficiency in (0, 1].
    """

    emitter_positions: np.ndarray
    bd_position: np.ndarray
    reader_positions: np.ndarray
    carrier_frequency_hz: float = 920e6
    per_emitter_power_dbm: float = 11.0
    symbol_power: float = 0.8
    reflection_efficiency: float = 0.5

    def __post_init__(self):
        object.__setattr__(
            self, "emitter_positions", _as_points(self.emitter_positions, "emitters")
        )
        object.__setattr__(self, "bd_position", _as_point(self.bd_position, "bd"))
        object.__setattr__(
            self, "reader_positions", _as_points(self.reader_positions, "readers")
        )
        for name in ("carrier_frequency_hz", "per_emitter_power_dbm",
                     "symbol_power", "reflection_efficiency"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value)):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.carrier_frequency_hz <= 0:
            raise ValueError("carrier_frequency_hz must be positive")
        if self.symbol_power <= 0:
            raise ValueError("symbol_power must be positive")
        if not 0 < self.reflection_efficiency <= 1:
            raise ValueError("reflection_efficiency must lie in (0, 1]")
        self._check_separation()
        for arr in (self.emitter_positions, self.bd_position, self.reader_positions):
            arr.setflags(write=False)

    def _check_separation(self):
        pts = np.vstack([self.emitter_positions, [self.bd_position], self.reader_positions])
        diff = pts[:, None, :] - pts[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        if dist.min() < MIN_SEPARATION_M:
            i, j = np.unravel_index(int(dist.argmin()), dist.shape)
            raise ValueError(
                f"positions {i} and {j} coincide (all device positions must be distinct)"
            )

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            np.array_equal(self.emitter_positions, other.emitter_positions)
            and np.array_equal(self.bd_position, other.bd_position)
            and np.array_equal(self.reader_positions, other.reader_positions)
            and self.carrier_frequency_hz == other.carrier_frequency_hz
            and self.per_emitter_power_dbm == other.per_emitter_power_dbm
            and self.symbol_power == other.symbol_power
            and self.reflection_efficiency == other.reflection_efficiency
        )

    @property
    def num_emitters(self) -> int:
        return self.emitter_positions.shape[0]

    @property
    def num_readers(self) -> int:
        return self.reader_positions.shape[0]

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT_M_S / self.carrier_frequency_hz

    @property
    def per_emitter_power_w(self) -> float:
        return 1e-3 * 10.0 ** (self.per_emitter_power_dbm / 10.0)


@dataclass(frozen=True)
class GridSpec:
    """Planar scan grid: samples at ``origin + i * step`` on both axes.

    Both extent endpoints are sampled, so an axis of extent ``w`` carries
    ``floor(w / step) + 1`` sample points (a step larger than the extent
    leaves a single point). ``plane_height`` is the z coordinate of the
    scan plane.
    """

    origin: tuple[float, float]
    extent: tuple[float, float]
    step: float
    plane_height: float

    def __post_init__(self):
        ox, oy = self.origin
        w, h = self.extent
        object.__setattr__(self, "origin", (float(ox), float(oy)))
        object.__setattr__(self, "extent", (float(w), float(h)))
        object.__setattr__(self, "step", float(self.step))
        object.__setattr__(self, "plane_height", float(self.plane_height))
        if self.step <= 0:
            raise ValueError("grid step must be positive")
        if w <= 0 or h <= 0:
            raise ValueError("grid extent dimensions must be positive")

    @classmethod
    def centered(cls, center_xy, extent=(1.25, 1.25), step=0.025,
                 plane_height=1.0) -> "GridSpec":
        cx, cy = float(center_xy[0]), float(center_xy[1])
        w, h = float(extent[0]), float(extent[1])
        return cls(origin=(cx - w / 2, cy - h / 2), extent=(w, h), step=step,
                   plane_height=plane_height)

    @staticmethod
    def _axis_count(extent: float, step: float) -> int:
        # Nudge so an extent that is an exact multiple of the step keeps its
        # endpoint sample despite float rounding.
        return int(math.floor(extent / step + 1e-9)) + 1

    @property
    def nx(self) -> int:
        return self._axis_count(self.extent[0], self.step)

    @property
    def ny(self) -> int:
        return self._axis_count(self.extent[1], self.step)

    @property
    def num_cells(self) -> int:
        return self.nx * self.ny

    @property
    def x_coords(self) -> np.ndarray:
        return self.origin[0] + self.step * np.arange(self.nx)

    @property
    def y_coords(self) -> np.ndarray:
        return self.origin[1] + self.step * np.arange(self.ny)

    def cell_of(self, point_xy) -> tuple[int, int]:
        """Indices (ix, iy) of the grid cell containing the given xy point."""
        ix = int(round((float(point_xy[0]) - self.origin[0]) / self.step))
        iy = int(round((float(point_xy[1]) - self.origin[1]) / self.step))
        return (min(max(ix, 0), self.nx - 1), min(max(iy, 0), self.ny - 1))


def default_techtile_scenario(bd_position=(3.4, 1.8, 1.0)) -> Scenario:
    """Built-in room: 42 ceiling emitters over a 4 m x 8 m footprint.

    The emitters sit on a regular 6 x 7 grid of tile centers at 2.4 m height.
    One reader at (2.86, 1.226, 1.0); the BD position is overridable.
    """
    xs = (np.arange(6) + 0.5) * (_ROOM_WIDTH_M / 6)
    ys = (np.arange(7) + 0.5) * (_ROOM_LENGTH_M / 7)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    emitters = np.column_stack(
        [gx.ravel(), gy.ravel(), np.full(gx.size, _CEILING_HEIGHT_M)]
    )
    return Scenario(
        emitter_positions=emitters,
        bd_position=np.asarray(bd_position, dtype=float),
        reader_positions=np.array([[2.86, 1.226, 1.0]]),
    )


_SCALAR_KEYS = {
    "fc_hz": "carrier_frequency_hz",
    "p_dbm": "per_emitter_power_dbm",
    "s2": "symbol_power",
    "eta": "reflection_efficiency",
}
_POINT_KEYS = {"emitters", "bd", "readers"}


def load_scenario(config_text: str) -> Scenario:
    """Build a Scenario from a JSON document.

    Recognized keys: ``emitters`` (array of [x, y, z]), ``bd``, ``readers``,
    ``fc_hz``, ``p_dbm``, ``s2``, ``eta``. Missing keys fall back to the
    default room; an empty document yields ``default_techtile_scenario()``.
    """
    text = config_text.strip()
    if not text:
        doc = {}
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"scenario document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("scenario document must be a JSON object")

    unknown = set(doc) - _POINT_KEYS - set(_SCALAR_KEYS)
    if unknown:
        raise ValueError(f"unknown scenario field '{sorted(unknown)[0]}'")

    base = default_techtile_scenario()
    kwargs = {
        "emitter_positions": base.emitter_positions,
        "bd_position": base.bd_position,
        "reader_positions": base.reader_positions,
        "carrier_frequency_hz": base.carrier_frequency_hz,
        "per_emitter_power_dbm": base.per_emitter_power_dbm,
        "symbol_power": base.symbol_power,
        "reflection_efficiency": base.reflection_efficiency,
    }
    if "emitters" in doc:
        kwargs["emitter_positions"] = _parse_points(doc["emitters"], "emitters")
    if "bd" in doc:
        kwargs["bd_position"] = _parse_point(doc["bd"], "bd")
    if "readers" in doc:
        kwargs["reader_positions"] = _parse_points(doc["readers"], "readers")
    for key, attr in _SCALAR_KEYS.items():
        if key in doc:
            value = doc[key]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValueError(f"field '{key}' must be a number, got {value!r}")
            kwargs[attr] = float(value)
    return Scenario(**kwargs)


def _parse_point(value, name: str) -> np.ndarray:
    if (not isinstance(value, (list, tuple)) or len(value) != 3
            or not all(isinstance(c, (int, float)) and not isinstance(c, bool)
                       for c in value)):
        raise ValueError(f"field '{name}' must be a 3-element numeric array")
    return np.asarray(value, dtype=float)


def _parse_points(value, name: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValueError(f"field '{name}' must be a non-empty array of points")
    return np.vstack([_parse_point(p, name) for p in value])


def serialize_scenario(scenario: Scenario) -> str:
    """Serialize to the JSON schema accepted by :func:`load_scenario`."""
    doc = {
        "emitters": [[float(c) for c in row] for row in scenario.emitter_positions],
        "bd": [float(c) for c in scenario.bd_position],
        "readers": [[float(c) for c in row] for row in scenario.reader_positions],
        "fc_hz": scenario.carrier_frequency_hz,
        "p_dbm": scenario.per_emitter_power_dbm,
        "s2": scenario.symbol_power,
        "eta": scenario.reflection_efficiency,
    }
    return json.dumps(doc, indent=2)


def scenario_digest(scenario: Scenario) -> str:
    """Content hash of a scenario, stable across platforms."""
    doc = json.loads(serialize_scenario(scenario))
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
