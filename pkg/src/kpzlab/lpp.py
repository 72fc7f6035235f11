"""Unscaled last passage percolation.

Staircase energies, one-sweep maximum-energy profiles via a running prefix
maximum, geodesic backtracking with leftmost tie-breaks, and the
tube-constrained sweep with a violation budget.

The sweep kernels operate on a raw sample matrix rather than a NoiseField so
that reflected views (used for backward profiles) can reuse the same code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise import NoiseField, grid_x, snap_index

__all__ = [
    "EnergyProfile",
    "Staircase",
    "UnscaledPoint",
    "aligned_index",
    "constrained_sweep",
    "geodesic",
    "level_contributions",
    "max_energy_profile",
    "profile_value",
    "staircase_energy",
    "sweep_values",
    "sweep_with_records",
]

_ALIGN_TOL = 1e-6  # fraction of one grid step


@dataclass(frozen=True, slots=True)
class UnscaledPoint:
    x: float
    level: int


@dataclass(frozen=True, slots=True)
class Staircase:
    """Monotone jump list: level k is occupied on [z_k, z_{k+1}] with the
    conventions z_i = start.x and z_{j+1} = end.x."""

    start: UnscaledPoint
    end: UnscaledPoint
    jumps: tuple[float, ...]

    def junctions(self) -> np.ndarray:
        """Full abscissa list z_i .. z_{j+1} including both endpoint pins."""
        return np.concatenate([[self.start.x], self.jumps, [self.end.x]])


@dataclass(frozen=True, eq=False, slots=True)
class EnergyProfile:
    """Grid-sampled y -> M[start -> (y, target_level)]; -inf left of start."""

    start: UnscaledPoint
    target_level: int
    values: np.ndarray


def aligned_index(field: NoiseField, x: float) -> int:
    """Grid index of x, insisting x actually is a grid point."""
    idx = snap_index(field, x)
    if abs(x - grid_x(field, idx)) > _ALIGN_TOL * field.step:
        raise ValueError(f"abscissa {x} is not grid-aligned (step {field.step})")
    return idx


def level_contributions(field: NoiseField, sc: Staircase) -> np.ndarray:
    """Increment collected on each level: B(z_{k+1}, k) - B(z_k, k)."""
    if sc.end.level < sc.start.level:
        raise ValueError("staircase runs downward")
    if len(sc.jumps) != sc.end.level - sc.start.level:
        raise ValueError(
            f"staircase over {sc.end.level - sc.start.level} level steps needs "
            f"that many jumps, got {len(sc.jumps)}"
        )
    z = sc.junctions()
    if np.any(np.diff(z) < -_ALIGN_TOL * field.step):
        raise ValueError("staircase jumps must be nondecreasing")
    idx = np.array([aligned_index(field, v) for v in z])
    levels = np.arange(sc.start.level, sc.end.level + 1)
    rows = field.samples[levels]
    gather = np.arange(levels.size)
    return rows[gather, idx[1:]] - rows[gather, idx[:-1]]


def staircase_energy(field: NoiseField, sc: Staircase) -> float:
    """Sum of the increments collected along the staircase, level by level."""
    return float(np.sum(level_contributions(field, sc)))


def sweep_values(samples: np.ndarray, start_idx: int, level_lo: int,
                 level_hi: int) -> np.ndarray:
    """Profile f(y) = max energy from (start_idx, level_lo) to (y, level_hi).

    One prefix-maximum pass per level: f <- prefmax(f - B) + B. Entries left
    of start_idx stay -inf.
    """
    row = samples[level_lo]
    f = np.full(samples.shape[1], -np.inf)
    f[start_idx:] = row[start_idx:] - row[start_idx]
    for k in range(level_lo + 1, level_hi + 1):
        b = samples[k]
        np.subtract(f, b, out=f)
        np.maximum.accumulate(f, out=f)
        np.add(f, b, out=f)
    return f


def sweep_with_records(samples: np.ndarray, start_idx: int, level_lo: int,
                       level_hi: int) -> tuple[np.ndarray, np.ndarray]:
    """sweep_values plus one argmax record row per level transition.

    records[t][y] is the leftmost z <= y maximizing f_t(z) - B_{t+1}(z): ties
    are not strict records, so the earliest index survives the running max.
    """
    grid = samples.shape[1]
    idx = np.arange(grid, dtype=np.int64)
    row = samples[level_lo]
    f = np.full(grid, -np.inf)
    f[start_idx:] = row[start_idx:] - row[start_idx]
    records = np.empty((level_hi - level_lo, grid), dtype=np.int64)
    for t, k in enumerate(range(level_lo + 1, level_hi + 1)):
        b = samples[k]
        g = f - b
        acc = np.maximum.accumulate(g)
        is_rec = np.empty(grid, dtype=bool)
        is_rec[0] = True
        np.greater(g[1:], acc[:-1], out=is_rec[1:])
        rec_idx = np.where(is_rec, idx, 0)
        np.maximum.accumulate(rec_idx, out=rec_idx)
        records[t] = rec_idx
        f = acc + b
    return f, records


def max_energy_profile(field: NoiseField, start: UnscaledPoint,
                       target_level: int) -> EnergyProfile:
    if target_level < start.level:
        raise ValueError(
            f"target level {target_level} below start level {start.level}"
        )
    if not 0 <= start.level <= target_level < field.level_count:
        raise ValueError("levels outside the field")
    start_idx = aligned_index(field, start.x)
    values = sweep_values(field.samples, start_idx, start.level, target_level)
    values.setflags(write=False)
    return EnergyProfile(start, target_level, values)


def profile_value(field: NoiseField, profile: EnergyProfile, y: float) -> float:
    v = float(profile.values[aligned_index(field, y)])
    if v == -np.inf:
        raise ValueError(f"y={y} lies left of the profile start")
    return v


def geodesic(field: NoiseField, start: UnscaledPoint, end: UnscaledPoint) -> Staircase:
    """Leftmost maximizing staircase from start to end, by DP backtracking."""
    if end.level < start.level or end.x < start.x - _ALIGN_TOL * field.step:
        raise ValueError(f"incompatible endpoints {start} -> {end}")
    start_idx = aligned_index(field, start.x)
    end_idx = aligned_index(field, end.x)
    if end.level == start.level:
        return Staircase(start, end, ())
    _, records = sweep_with_records(field.samples, start_idx, start.level, end.level)
    cur = end_idx
    rev: list[int] = []
    for t in range(end.level - start.level - 1, -1, -1):
        cur = int(records[t][cur])
        rev.append(cur)
    jumps = tuple(grid_x(field, i) for i in reversed(rev))
    return Staircase(start, end, jumps)


def constrained_sweep(samples: np.ndarray, start_idx: int, level_lo: int,
                      level_hi: int, in_tube: np.ndarray, budget: int) -> np.ndarray:
    """Budgeted variant of sweep_values.

    in_tube[t][y] says whether departing level level_lo+t at grid index y
    respects the tube. Departures from the first and last level are hard
    constraints; every other out-of-tube departure consumes one unit of
    budget. Returns the final-level profile maximized over spent budget,
    with -inf where no admissible staircase exists.
    """
    steps = level_hi - level_lo
    if in_tube.shape != (steps + 1, samples.shape[1]):
        raise ValueError(
            f"in_tube must be {(steps + 1, samples.shape[1])}, got {in_tube.shape}"
        )
    if budget < 0:
        raise ValueError(f"budget must be >= 0, got {budget}")
    grid = samples.shape[1]
    row = samples[level_lo]
    base = np.full(grid, -np.inf)
    base[start_idx:] = row[start_idx:] - row[start_idx]
    # Endpoint level: no violation allowed at the departure from level_lo.
    f = np.full((budget + 1, grid), -np.inf)
    f[0] = np.where(in_tube[0], base, -np.inf)
    for t in range(1, steps + 1):
        b = samples[level_lo + t]
        g = f - b[None, :]
        np.maximum.accumulate(g, axis=1, out=g)
        new_f = np.full_like(f, -np.inf)
        mask = in_tube[t]
        if t == steps:
            # Endpoint level: out-of-tube departures are inadmissible, not billable.
            for v in range(budget + 1):
                new_f[v] = np.where(mask, g[v], -np.inf)
        else:
            new_f[0] = np.where(mask, g[0], -np.inf)
            for v in range(1, budget + 1):
                new_f[v] = np.where(mask, g[v], g[v - 1])
        new_f += b[None, :]
        f = new_f
    out = np.max(f, axis=0)
    return out
