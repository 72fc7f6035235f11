"""Hand-checkable instances for the exhaustive staircase enumerator.

Everything downstream leans on this module as the reference answer, so the
expected values here are worked out with pencil and paper, not computed.
"""

import numpy as np
import pytest

from kpzlab import bruteforce as bf


# Rows are levels, columns are grid sites.  Increment of level k over
# [z_k, z_{k+1}] is row[k][z_{k+1}] - row[k][z_k].
SAMPLES = np.array([
    [0.0, 1.0, 5.0],
    [2.0, 0.0, 1.0],
    [3.0, 1.0, 4.0],
])


def test_path_energy_hand_values():
    # (1 - 0) on level 0 plus (1 - 0) on level 1
    assert bf.path_energy(SAMPLES, (0, 1, 2), 0) == pytest.approx(2.0)
    # jump straight to the last column before leaving level 0
    assert bf.path_energy(SAMPLES, (0, 2, 2), 0) == pytest.approx(5.0)
    # single level, no jump at all
    assert bf.path_energy(SAMPLES, (1, 2), 2) == pytest.approx(3.0)


def test_path_energy_rejects_decreasing_junctions():
    with pytest.raises(AssertionError):
        bf.path_energy(SAMPLES, (0, 2, 1), 0)


def test_best_energy_two_levels():
    # candidates: mid=0 -> -1, mid=1 -> 2, mid=2 -> 5
    e, jumps = bf.best_energy(SAMPLES, 0, 2, 0, 1)
    assert e == pytest.approx(5.0)
    assert jumps == (2,)


def test_best_energy_three_levels():
    # (2,2) collects the full 5.0 of level 0 and nothing after
    e, jumps = bf.best_energy(SAMPLES, 0, 2, 0, 2)
    assert e == pytest.approx(5.0)
    assert jumps == (2, 2)


def test_best_energy_tie_keeps_leftmost():
    samples = np.array([
        [0.0, 1.0, 1.0],
        [0.0, 0.0, 0.0],
    ])
    e, jumps = bf.best_energy(samples, 0, 2, 0, 1)
    assert e == pytest.approx(1.0)
    # mid=1 and mid=2 tie at 1.0; lexicographic order must keep mid=1
    assert jumps == (1,)


def test_candidate_guard_trips():
    wide = np.zeros((9, 60))
    with pytest.raises(ValueError):
        bf.best_energy(wide, 0, 59, 0, 8)


def test_constrained_full_tube_matches_unconstrained():
    rng = np.random.default_rng(7)
    samples = rng.normal(size=(4, 6))
    tube = np.ones((4, 6), dtype=bool)
    for budget in (0, 3):
        e, jumps = bf.best_constrained_energy(samples, 0, 5, 0, 3, tube, budget)
        e0, jumps0 = bf.best_energy(samples, 0, 5, 0, 3)
        assert e == pytest.approx(e0, abs=0.0)
        assert jumps == jumps0


def test_constrained_hard_endpoints():
    rng = np.random.default_rng(11)
    samples = rng.normal(size=(3, 5))
    tube = np.ones((3, 5), dtype=bool)
    # last departure is pinned at end_col; close it and nothing survives,
    # no matter the budget
    tube[2, 4] = False
    assert bf.best_constrained_energy(samples, 0, 4, 0, 2, tube, 99) == (None, None)
    tube[2, 4] = True
    tube[0, :] = False
    assert bf.best_constrained_energy(samples, 0, 4, 0, 2, tube, 99) == (None, None)


def test_constrained_budget_buys_interior_misses():
    rng = np.random.default_rng(3)
    samples = rng.normal(size=(4, 5))
    free, free_jumps = bf.best_energy(samples, 0, 4, 0, 3)
    # forbid the free optimum's interior departures one at a time
    tube = np.ones((4, 5), dtype=bool)
    tube[1, free_jumps[1]] = False
    tube[2, free_jumps[2]] = False
    strict, _ = bf.best_constrained_energy(samples, 0, 4, 0, 3, tube, 0)
    loose, loose_jumps = bf.best_constrained_energy(samples, 0, 4, 0, 3, tube, 2)
    assert strict is None or strict <= free
    assert loose == pytest.approx(free, abs=0.0)
    assert loose_jumps == free_jumps


def test_constrained_zero_steps():
    samples = np.array([[0.0, 2.0, 7.0]])
    tube = np.ones((1, 3), dtype=bool)
    e, jumps = bf.best_constrained_energy(samples, 1, 2, 0, 0, tube, 0)
    assert e == pytest.approx(5.0)
    assert jumps == ()
    tube[0, 2] = False
    assert bf.best_constrained_energy(samples, 1, 2, 0, 0, tube, 0) == (None, None)
