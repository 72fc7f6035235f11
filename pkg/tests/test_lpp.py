"""Sweep kernels against exhaustive enumeration, plus structural identities."""

import numpy as np
import pytest

from kpzlab import bruteforce as bf
from kpzlab import lpp, noise
from kpzlab.lpp import Staircase, UnscaledPoint


def test_sweep_matches_enumerator_randomized():
    rng = np.random.default_rng(42)
    checked = 0
    for trial in range(25):
        levels = int(rng.integers(2, 5))
        cols = int(rng.integers(4, 7))
        samples = rng.normal(size=(levels, cols))
        start = int(rng.integers(0, cols - 1))
        f = lpp.sweep_values(samples, start, 0, levels - 1)
        assert np.all(np.isneginf(f[:start]))
        for end in range(start, cols):
            e, _ = bf.best_energy(samples, start, end, 0, levels - 1)
            assert f[end] == pytest.approx(e, abs=1e-12)
            checked += 1
    assert checked > 50


def test_single_level_sweep_is_increment():
    samples = np.array([[0.0, 3.0, 1.0, 4.0]])
    f = lpp.sweep_values(samples, 1, 0, 0)
    assert np.isneginf(f[0])
    assert f[1] == 0.0
    assert f[2] == pytest.approx(-2.0)
    assert f[3] == pytest.approx(1.0)


def test_geodesic_matches_enumerator():
    field = noise.generate_field(5, 0.0, 2.0, 0.5, 13, 0)
    start = UnscaledPoint(0.0, 0)
    end = UnscaledPoint(2.0, 4)
    geo = lpp.geodesic(field, start, end)
    e_best, mids = bf.best_energy(field.samples, 0, 4, 0, 4)
    assert lpp.staircase_energy(field, geo) == pytest.approx(e_best, abs=1e-12)
    assert tuple(lpp.aligned_index(field, j) for j in geo.jumps) == mids


def test_geodesic_on_flat_field_hugs_the_start():
    flat = np.zeros((3, 5))
    flat.setflags(write=False)
    field = noise.NoiseField(3, 0.0, 1.0, 0.25, flat, 1, 0)
    geo = lpp.geodesic(field, UnscaledPoint(0.25, 0), UnscaledPoint(1.0, 2))
    # every candidate ties at zero energy; leftmost rule pins all jumps at start
    assert geo.jumps == (0.25, 0.25)


def test_staircase_energy_telescopes():
    field = noise.generate_field(3, 0.0, 1.0, 0.25, 7, 0)
    sc = Staircase(UnscaledPoint(0.0, 0), UnscaledPoint(1.0, 2), (0.25, 0.75))
    contrib = lpp.level_contributions(field, sc)
    s = field.samples
    expect = [s[0, 1] - s[0, 0], s[1, 3] - s[1, 1], s[2, 4] - s[2, 3]]
    assert contrib == pytest.approx(expect, abs=0.0)
    assert lpp.staircase_energy(field, sc) == pytest.approx(sum(expect))


def test_staircase_validation():
    field = noise.generate_field(3, 0.0, 1.0, 0.25, 7, 0)
    a, b = UnscaledPoint(0.0, 0), UnscaledPoint(1.0, 2)
    with pytest.raises(ValueError):
        lpp.level_contributions(field, Staircase(a, b, (0.25,)))  # too few jumps
    with pytest.raises(ValueError):
        lpp.level_contributions(field, Staircase(a, b, (0.75, 0.25)))  # decreasing
    with pytest.raises(ValueError):
        lpp.level_contributions(field, Staircase(a, b, (0.25, 0.8)))  # off grid
    with pytest.raises(ValueError):
        lpp.level_contributions(field, Staircase(b, a, ()))  # runs downward
    with pytest.raises(ValueError):
        lpp.geodesic(field, UnscaledPoint(0.75, 1), UnscaledPoint(0.25, 2))


def test_profile_superadditivity():
    field = noise.generate_field(4, 0.0, 2.0, 0.1, 19, 0)
    s = field.samples
    full = lpp.sweep_values(s, 0, 0, 3)
    for k, z in [(1, 4), (1, 13), (2, 8), (2, 20)]:
        first = lpp.sweep_values(s, 0, 0, k)
        second = lpp.sweep_values(s, z, k, 3)
        glued = first[z] + second[-1]
        assert full[-1] >= glued - 1e-12


def test_profile_value_guards():
    field = noise.generate_field(3, 0.0, 1.0, 0.25, 11, 0)
    prof = lpp.max_energy_profile(field, UnscaledPoint(0.5, 0), 2)
    assert np.isfinite(lpp.profile_value(field, prof, 0.5))
    with pytest.raises(ValueError):
        lpp.profile_value(field, prof, 0.25)
    with pytest.raises(ValueError):
        lpp.max_energy_profile(field, UnscaledPoint(0.0, 2), 1)
    with pytest.raises(ValueError):
        lpp.max_energy_profile(field, UnscaledPoint(0.0, 0), 5)


def test_records_keep_leftmost_on_ties():
    samples = np.zeros((2, 6))
    _, records = lpp.sweep_with_records(samples, 2, 0, 1)
    assert records.shape == (1, 6)
    assert np.all(records[0][2:] == 2)


def random_tube(rng, levels, cols, start, end):
    tube = rng.random((levels, cols)) < 0.6
    # keep the hard endpoint departures open so something is feasible
    tube[0, start:end + 1] |= rng.random(end + 1 - start) < 0.5
    tube[0, start] = True
    tube[-1, end] = True
    return tube


def test_constrained_sweep_matches_enumerator():
    rng = np.random.default_rng(101)
    checked = 0
    for trial in range(40):
        levels = int(rng.integers(2, 4))
        cols = int(rng.integers(4, 6))
        samples = rng.normal(size=(levels, cols))
        start = int(rng.integers(0, 2))
        tube = random_tube(rng, levels, cols, start, cols - 1)
        for budget in (0, 1, 2):
            f = lpp.constrained_sweep(samples, start, 0, levels - 1, tube, budget)
            for end in range(start, cols):
                # the enumerator reads the final tube row only at end_col, so
                # the same mask serves every endpoint
                e, _ = bf.best_constrained_energy(samples, start, end, 0,
                                                  levels - 1, tube, budget)
                if e is None:
                    assert np.isneginf(f[end])
                else:
                    assert f[end] == pytest.approx(e, abs=1e-9)
                checked += 1
    assert checked >= 300


def test_constrained_budget_is_monotone():
    rng = np.random.default_rng(55)
    samples = rng.normal(size=(4, 6))
    tube = rng.random((4, 6)) < 0.5
    tube[0, 0] = tube[-1, -1] = True
    prev = lpp.constrained_sweep(samples, 0, 0, 3, tube, 0)
    for budget in (1, 2, 3):
        cur = lpp.constrained_sweep(samples, 0, 0, 3, tube, budget)
        ok = np.isneginf(prev) | (cur >= prev - 1e-12)
        assert np.all(ok)
        prev = cur


def test_constrained_full_tube_equals_free_sweep():
    rng = np.random.default_rng(77)
    samples = rng.normal(size=(3, 7))
    tube = np.ones((3, 7), dtype=bool)
    free = lpp.sweep_values(samples, 1, 0, 2)
    gated = lpp.constrained_sweep(samples, 1, 0, 2, tube, 0)
    assert np.array_equal(free, gated)


def test_constrained_sweep_validation():
    samples = np.zeros((3, 4))
    with pytest.raises(ValueError):
        lpp.constrained_sweep(samples, 0, 0, 2, np.ones((2, 4), dtype=bool), 0)
    with pytest.raises(ValueError):
        lpp.constrained_sweep(samples, 0, 0, 2, np.ones((3, 4), dtype=bool), -1)
