"""KPZ-scaled view of the unscaled model.

The scaling map sends the unscaled plane to scaled coordinates in which
horizontal displacement is measured in units of 2n^{2/3} and height in units
of n. Staircases become zigzags, geodesics become polymers, and centered
energies become weights of order one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lpp import (Staircase, UnscaledPoint, constrained_sweep, geodesic,
                  level_contributions, sweep_values)
from .noise import NoiseField, grid_x, snap_index

__all__ = [
    "CompatibleTriple",
    "PolymerPath",
    "ScaledPoint",
    "Zigzag",
    "admissible",
    "constrained_max_weight",
    "fluc",
    "make_zigzag",
    "polymer",
    "polymer_at",
    "scale_point",
    "shear_transform",
    "snap_route",
    "subpath_weight",
    "unscale_point",
    "weight",
]

_LATTICE_TOL = 1e-9

WEIGHT_PREFACTOR = 2.0 ** -0.5


@dataclass(frozen=True, slots=True)
class CompatibleTriple:
    """Route frame (n, s1, s2): n·s1 and n·s2 must sit on the integer lattice
    so that the heights s1, s2 are occupied by noise levels."""

    n: int
    s1: float
    s2: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        for s in (self.s1, self.s2):
            if abs(self.n * s - round(self.n * s)) > _LATTICE_TOL:
                raise ValueError(f"height {s} is not a multiple of 1/{self.n}")
        if not self.s1 < self.s2:
            raise ValueError(f"need s1 < s2, got {self.s1} >= {self.s2}")

    @property
    def s12(self) -> float:
        return self.s2 - self.s1

    @property
    def level_lo(self) -> int:
        return round(self.n * self.s1)

    @property
    def level_hi(self) -> int:
        return round(self.n * self.s2)


@dataclass(frozen=True, slots=True)
class ScaledPoint:
    x: float
    t: float


def scale_point(n: int, p) -> ScaledPoint:
    """Apply (v1, v2) -> (2^{-1}n^{-2/3}(v1 - v2), v2/n).

    Accepts an UnscaledPoint or any (v1, v2) pair.
    """
    if isinstance(p, UnscaledPoint):
        v1, v2 = p.x, float(p.level)
    else:
        v1, v2 = p
    return ScaledPoint(0.5 * n ** (-2 / 3) * (v1 - v2), v2 / n)


def unscale_point(n: int, p: ScaledPoint) -> tuple[float, float]:
    """Inverse map: (x, t) -> (nt + 2n^{2/3}x, nt)."""
    v2 = n * p.t
    return (v2 + 2.0 * n ** (2 / 3) * p.x, v2)


def shear_transform(K: float, p: ScaledPoint) -> ScaledPoint:
    return ScaledPoint(p.x + K * p.t, p.t)


def admissible(triple: CompatibleTriple, x: float, y: float) -> bool:
    """A route (x, s1) -> (y, s2) carries a zigzag iff the unscaled endpoints
    are horizontally ordered, i.e. y - x >= -2^{-1}n^{1/3}s12."""
    return y - x >= -0.5 * triple.n ** (1 / 3) * triple.s12 * (1 + 1e-12) - 1e-12


def snap_route(field: NoiseField, triple: CompatibleTriple, x: float,
               y: float) -> tuple[UnscaledPoint, UnscaledPoint, float, float, float]:
    """Map scaled endpoints to grid-aligned unscaled points.

    Returns (start, end, x_eff, y_eff, snap_dist): the snapped unscaled
    endpoints, their exact scaled abscissae, and the larger of the two scaled
    snap displacements (the discretization audit trail).
    """
    if not admissible(triple, x, y):
        raise ValueError(
            f"inadmissible endpoints: y - x = {y - x} < "
            f"{-0.5 * triple.n ** (1 / 3) * triple.s12}"
        )
    n = triple.n
    i, j = triple.level_lo, triple.level_hi
    u_start = i + 2.0 * n ** (2 / 3) * x
    u_end = j + 2.0 * n ** (2 / 3) * y
    si = snap_index(field, u_start)
    ei = snap_index(field, u_end)
    if ei < si:
        ei = si  # snapping must not break horizontal ordering
    start = UnscaledPoint(grid_x(field, si), i)
    end = UnscaledPoint(grid_x(field, ei), j)
    x_eff = 0.5 * n ** (-2 / 3) * (start.x - i)
    y_eff = 0.5 * n ** (-2 / 3) * (end.x - j)
    snap_dist = max(abs(x_eff - x), abs(y_eff - y))
    return start, end, x_eff, y_eff, snap_dist


def _energy_to_weight(n: int, s12: float, energy: float, x: float, y: float) -> float:
    centering = 2.0 * n * s12 + 2.0 * n ** (2 / 3) * (y - x)
    return WEIGHT_PREFACTOR * n ** (-1 / 3) * (energy - centering)


def weight(field: NoiseField, triple: CompatibleTriple, x: float, y: float,
           parabolic: bool = False) -> float:
    """Scaled weight of the route (x, s1) -> (y, s2).

    The centering 2ns12 + 2n^{2/3}(y - x) and the prefactor 2^{-1/2}n^{-1/3}
    use the post-snap scaled endpoints, keeping algebraic identities exact on
    the grid. parabolic=True adds 2^{-1/2}(y - x)^2 / s12.
    """
    start, end, x_eff, y_eff, _ = snap_route(field, triple, x, y)
    si = snap_index(field, start.x)
    ei = snap_index(field, end.x)
    f = sweep_values(field.samples, si, start.level, end.level)
    w = _energy_to_weight(triple.n, triple.s12, float(f[ei]), x_eff, y_eff)
    if parabolic:
        w += WEIGHT_PREFACTOR * (y_eff - x_eff) ** 2 / triple.s12
    return w


@dataclass(frozen=True, eq=False, slots=True)
class Zigzag:
    """Scaled image of a staircase with its height-indexed location table.

    departure[k] is the scaled abscissa sup{x : (x, h_k) in zigzag} at height
    h_k = (level_lo + k)/n; entry[k] is the inf. The sup convention is the one
    every height-indexed statistic uses. energy_cum[k], when present, is the
    running energy collected through level level_lo + k, which makes realized
    subpath energies O(1) lookups.
    """

    staircase: Staircase
    n: int
    heights: np.ndarray
    entry: np.ndarray
    departure: np.ndarray
    energy_cum: np.ndarray | None = None

    @property
    def s1(self) -> float:
        return self.staircase.start.level / self.n

    @property
    def s2(self) -> float:
        return self.staircase.end.level / self.n


def make_zigzag(n: int, sc: Staircase,
                contributions: np.ndarray | None = None) -> Zigzag:
    z = sc.junctions()
    levels = np.arange(sc.start.level, sc.end.level + 1)
    factor = 0.5 * n ** (-2 / 3)
    entry = factor * (z[:-1] - levels)
    departure = factor * (z[1:] - levels)
    heights = levels / n
    cum = None if contributions is None else np.cumsum(contributions)
    for arr in (heights, entry, departure) + (() if cum is None else (cum,)):
        arr.setflags(write=False)
    return Zigzag(sc, n, heights, entry, departure, cum)


def _height_slot(zz: Zigzag, s: float) -> int:
    k = round(s * zz.n)
    if abs(s * zz.n - k) > _LATTICE_TOL * zz.n:
        raise ValueError(f"height {s} is off the 1/{zz.n} lattice")
    slot = k - zz.staircase.start.level
    if not 0 <= slot < zz.heights.size:
        raise ValueError(f"height {s} outside lifetime [{zz.s1}, {zz.s2}]")
    return slot


@dataclass(frozen=True, eq=False, slots=True)
class PolymerPath:
    """A maximizing zigzag together with its route frame and weight."""

    zigzag: Zigzag
    triple: CompatibleTriple
    x: float
    y: float
    weight: float


def polymer_at(p: PolymerPath | Zigzag, s: float) -> float:
    """Location of the path at height s, sup convention."""
    zz = p.zigzag if isinstance(p, PolymerPath) else p
    return float(zz.departure[_height_slot(zz, s)])


def polymer(field: NoiseField, triple: CompatibleTriple, x: float,
            y: float) -> PolymerPath:
    """Leftmost maximizing zigzag for the route (x, s1) -> (y, s2)."""
    start, end, x_eff, y_eff, _ = snap_route(field, triple, x, y)
    sc = geodesic(field, start, end)
    contrib = level_contributions(field, sc)
    w = _energy_to_weight(triple.n, triple.s12, float(np.sum(contrib)),
                          x_eff, y_eff)
    return PolymerPath(make_zigzag(triple.n, sc, contrib), triple,
                       x_eff, y_eff, w)


def subpath_weight(p: PolymerPath, h1: float, h2: float) -> float:
    """Weight of the realized path between its own points at heights h1 < h2.

    A subpath of a maximizing path is itself maximizing between its
    endpoints (replacing it with anything better would improve the whole),
    so this equals weight() for the route joining (phi(h1), h1) to
    (phi(h2), h2) while costing one subtraction.
    """
    zz = p.zigzag
    if zz.energy_cum is None:
        raise ValueError("path carries no energy table")
    a = _height_slot(zz, h1)
    b = _height_slot(zz, h2)
    if not a < b:
        raise ValueError(f"need h1 < h2, got {h1}, {h2}")
    n = zz.n
    s12 = (b - a) / n
    u = float(zz.departure[a])
    v = float(zz.departure[b])
    e_sub = float(zz.energy_cum[b] - zz.energy_cum[a])
    return _energy_to_weight(n, s12, e_sub, u, v)


def fluc(p: PolymerPath, h: float) -> float:
    """Horizontal deviation at height h from the straight endpoint chord.

    The path occupies a scaled interval at each height; the sup of the
    deviation over that interval is attained at one of its two ends, so both
    are evaluated.
    """
    zz = p.zigzag
    slot = _height_slot(zz, h)
    t = p.triple
    interp = ((t.s2 - h) * p.x + (h - t.s1) * p.y) / t.s12
    return max(abs(float(zz.departure[slot]) - interp),
               abs(float(zz.entry[slot]) - interp))


def _reference_table(reference, n: int, level_lo: int, level_hi: int) -> np.ndarray:
    """Per-level scaled reference locations ref(k/n) for k in [level_lo, level_hi]."""
    levels = np.arange(level_lo, level_hi + 1)
    if isinstance(reference, PolymerPath):
        reference = reference.zigzag
    if isinstance(reference, Zigzag):
        base = reference.staircase.start.level
        slots = levels - base
        if slots[0] < 0 or slots[-1] >= reference.heights.size:
            raise ValueError("reference zigzag does not cover the route heights")
        return np.asarray(reference.departure)[slots]
    table = np.asarray(reference, dtype=float)
    if table.shape != levels.shape:
        raise ValueError(
            f"reference table must have one entry per level, "
            f"expected {levels.size}, got {table.shape}"
        )
    return table


def constrained_max_weight(field: NoiseField, triple: CompatibleTriple, x: float,
                           y: float, reference, theta: float,
                           chi: float) -> float | None:
    """Best weight among zigzags staying within s12^{2/3}·theta of the
    reference at all but a chi fraction of their levels.

    The tube test applies at the sup-convention location of each level;
    endpoint levels must satisfy it outright, and at most
    floor(chi·(level count)) interior levels may not. Returns None when no
    zigzag meets the constraint. theta = inf removes the tube entirely.
    """
    if not 0.0 <= chi <= 1.0:
        raise ValueError(f"chi must lie in [0, 1], got {chi}")
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    start, end, x_eff, y_eff, _ = snap_route(field, triple, x, y)
    si = snap_index(field, start.x)
    ei = snap_index(field, end.x)
    n = triple.n
    lo, hi = triple.level_lo, triple.level_hi
    count = hi - lo + 1
    budget = min(math.floor(chi * count + _LATTICE_TOL), max(count - 2, 0))
    ref = _reference_table(reference, n, lo, hi)
    if math.isinf(theta):
        in_tube = np.ones((count, field.grid_size), dtype=bool)
    else:
        half = 2.0 * n ** (2 / 3) * triple.s12 ** (2 / 3) * theta
        levels = np.arange(lo, hi + 1, dtype=float)
        centers = levels + 2.0 * n ** (2 / 3) * ref
        u = field.x_min + field.step * np.arange(field.grid_size)
        in_tube = np.abs(u[None, :] - centers[:, None]) <= half
    energy = constrained_sweep(field.samples, si, lo, hi, in_tube, budget)[ei]
    if energy == -np.inf:
        return None
    return _energy_to_weight(n, triple.s12, float(energy), x_eff, y_eff)
