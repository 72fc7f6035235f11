"""Exhaustive reference solvers for tiny staircase instances.

Everything here enumerates candidate paths explicitly, on purpose: the
production sweeps share no code with this module, so agreement between the
two is evidence rather than tautology.  Instance sizes are guarded because
the candidate count is a binomial coefficient and explodes quickly.
"""

from __future__ import annotations

import math
from itertools import combinations_with_replacement

import numpy as np

__all__ = [
    "MAX_CANDIDATES",
    "path_energy",
    "best_energy",
    "best_constrained_energy",
]

MAX_CANDIDATES = 2_000_000


def _candidate_count(columns: int, steps: int) -> int:
    return math.comb(columns + steps - 1, steps)


def _guard(samples: np.ndarray, start_col: int, end_col: int,
           level_lo: int, level_hi: int) -> int:
    samples = np.asarray(samples)
    assert samples.ndim == 2
    rows, cols = samples.shape
    if not (0 <= level_lo <= level_hi < rows):
        raise ValueError(f"level window [{level_lo}, {level_hi}] off the table")
    if not (0 <= start_col <= end_col < cols):
        raise ValueError(f"column window [{start_col}, {end_col}] off the table")
    steps = level_hi - level_lo
    total = _candidate_count(end_col - start_col + 1, steps)
    if total > MAX_CANDIDATES:
        raise ValueError(f"{total} candidates; instance too large to enumerate")
    return steps


def path_energy(samples: np.ndarray, junctions, level_lo: int) -> float:
    """Energy of one explicit staircase.

    ``junctions`` lists the occupied column interval boundaries
    z_lo <= z_{lo+1} <= ... <= z_{hi+1}: the path collects the increment of
    line k over [z_k, z_{k+1}] for each level k it visits.
    """
    junctions = tuple(junctions)
    assert len(junctions) >= 2
    assert all(a <= b for a, b in zip(junctions, junctions[1:]))
    e = 0.0
    for t in range(len(junctions) - 1):
        row = samples[level_lo + t]
        e += row[junctions[t + 1]] - row[junctions[t]]
    return float(e)


def best_energy(samples: np.ndarray, start_col: int, end_col: int,
                level_lo: int, level_hi: int):
    """Maximal staircase energy by full enumeration.

    Returns ``(energy, jumps)`` where ``jumps`` holds the interior junction
    columns (z_{lo+1}, ..., z_hi).  Candidates arrive in lexicographic order
    and ties keep the first one seen, which is exactly the leftmost rule the
    sweep is supposed to implement.
    """
    steps = _guard(samples, start_col, end_col, level_lo, level_hi)
    best = -math.inf
    best_jumps = None
    span = range(start_col, end_col + 1)
    for mids in combinations_with_replacement(span, steps):
        cols = (start_col,) + mids + (end_col,)
        e = path_energy(samples, cols, level_lo)
        if e > best:
            best, best_jumps = e, mids
    return best, best_jumps


def best_constrained_energy(samples: np.ndarray, start_col: int, end_col: int,
                            level_lo: int, level_hi: int,
                            in_tube: np.ndarray, budget: int):
    """Constrained maximum: departures outside the tube spend the budget.

    ``in_tube[t][y]`` marks column y as admissible for the departure of level
    ``level_lo + t`` (the junction where the path leaves that level; the last
    level departs at ``end_col``).  The first and last departures are hard:
    missing either disqualifies the path outright.  Interior misses each cost
    one budget unit.  Returns ``(energy, jumps)`` or ``(None, None)`` when no
    path is feasible.
    """
    steps = _guard(samples, start_col, end_col, level_lo, level_hi)
    in_tube = np.asarray(in_tube, dtype=bool)
    assert in_tube.shape == (steps + 1, np.asarray(samples).shape[1])
    assert budget >= 0
    if steps == 0:
        if in_tube[0][end_col]:
            return path_energy(samples, (start_col, end_col), level_lo), ()
        return None, None
    if not in_tube[steps][end_col]:
        return None, None
    best = -math.inf
    best_jumps = None
    span = range(start_col, end_col + 1)
    for mids in combinations_with_replacement(span, steps):
        if not in_tube[0][mids[0]]:
            continue
        spent = sum(1 for t in range(1, steps) if not in_tube[t][mids[t]])
        if spent > budget:
            continue
        cols = (start_col,) + mids + (end_col,)
        e = path_energy(samples, cols, level_lo)
        if e > best:
            best, best_jumps = e, mids
    if best_jumps is None:
        return None, None
    return best, best_jumps
