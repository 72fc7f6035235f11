import numpy as np
import pytest

from kpzlab import bruteforce as bf
from kpzlab import noise, routed
from kpzlab.scaled import WEIGHT_PREFACTOR, CompatibleTriple, polymer, polymer_at, weight


def full_window(n):
    horiz = 2.0 * n ** (2 / 3)
    return -round(n * 0.5) / horiz, (n - round(n * 0.5)) / horiz


def test_split_shift_value():
    assert routed.split_shift(8) == pytest.approx(2 ** -0.5 * 8 ** (-1 / 3))


def test_profile_max_is_route_weight_plus_shift():
    field = noise.generate_field(7, 0.0, 6.0, 0.25, 43, 0)
    n = 6
    lo, hi = full_window(n)
    prof = routed.routed_profile(field, n, 0.5, lo, hi)
    w = weight(field, CompatibleTriple(n, 0.0, 1.0), 0.0, 0.0)
    assert prof.max_value == pytest.approx(w + routed.split_shift(n), abs=1e-12)


def test_argmax_sits_on_polymer_departure():
    field = noise.generate_field(7, 0.0, 6.0, 0.25, 43, 0)
    n = 6
    lo, hi = full_window(n)
    prof = routed.routed_profile(field, n, 0.5, lo, hi)
    p = polymer(field, CompatibleTriple(n, 0.0, 1.0), 0.0, 0.0)
    assert prof.argmax_x == pytest.approx(polymer_at(p, 0.5), abs=1e-12)


def test_z_values_match_two_leg_enumeration():
    field = noise.generate_field(5, 0.0, 4.0, 0.5, 23, 0)
    n, a = 4, 0.5
    na = 2
    lo, hi = full_window(n)
    prof = routed.routed_profile(field, n, a, lo, hi)
    end = field.grid_size - 1
    for j, u in enumerate(prof.u_grid):
        col = round((u - field.x_min) / field.step)
        e_fwd, _ = bf.best_energy(field.samples, 0, col, 0, na)
        e_bwd, _ = bf.best_energy(field.samples, col, end, na + 1, n)
        expect = WEIGHT_PREFACTOR * n ** (-1 / 3) * (e_fwd + e_bwd - (2 * n - 1))
        assert prof.z_values[j] == pytest.approx(expect, abs=1e-12)


def test_decomposition_residual_and_negative_control():
    field = noise.generate_field(9, 0.0, 8.0, 0.25, 67, 0)
    n = 8
    lo, hi = full_window(n)
    prof = routed.routed_profile(field, n, 0.5, lo, hi)
    resid = routed.normalized_decomposition_check(field, prof)
    assert resid <= 1e-12
    broken = routed.normalized_decomposition_check(field, prof, perturb=1e-3)
    assert broken > max(1e-7, 10.0 * resid)


def test_profile_stride_subsamples_the_same_values():
    field = noise.generate_field(7, 0.0, 6.0, 0.25, 43, 0)
    n = 6
    lo, hi = full_window(n)
    dense = routed.routed_profile(field, n, 0.5, lo, hi)
    coarse = routed.routed_profile(field, n, 0.5, lo, hi, x_step=0.3)
    assert coarse.u_grid.size < dense.u_grid.size
    pos = {u: k for k, u in enumerate(dense.u_grid)}
    for j, u in enumerate(coarse.u_grid):
        assert u in pos
        assert coarse.z_values[j] == dense.z_values[pos[u]]


def test_routed_profile_validation():
    field = noise.generate_field(7, 0.0, 6.0, 0.25, 43, 0)
    with pytest.raises(ValueError):
        routed.routed_profile(field, 6, 0.21, -0.1, 0.1)  # off-lattice a
    with pytest.raises(ValueError):
        routed.routed_profile(field, 6, 0.0, -0.1, 0.1)  # not interior
    with pytest.raises(ValueError):
        routed.routed_profile(field, 8, 0.5, -0.1, 0.1)  # field too short
    with pytest.raises(ValueError):
        routed.routed_profile(field, 6, 0.5, 0.1, -0.1)  # empty window
    with pytest.raises(ValueError):
        routed.routed_profile(field, 6, 0.5, -5.0, 0.0)  # unscales below 0


# ----------------------------------------------------------------- twin peaks

def hand_profile(xg, z, n=200, a=0.5):
    z = np.asarray(z, dtype=float)
    best = int(np.argmax(z))
    u = round(n * a) + 2.0 * n ** (2 / 3) * xg
    zeros = np.zeros_like(z)
    return routed.RoutedProfile(n, a, xg, u, zeros, zeros, z,
                                float(xg[best]), float(u[best]), float(z[best]))


def test_twin_peak_estimate_on_planted_profiles():
    xg = np.linspace(-1.0, 1.0, 201)
    z = -np.abs(xg)
    # planted near-touch at x = 0.2 needing sigma just under 0.1
    z[120] = -0.0999 * np.sqrt(abs(xg[120]))
    planted = hand_profile(xg, z)
    # centered-peak gate: argmax at 0.9 is outside |x| <= ell/3
    off = hand_profile(xg, -np.abs(xg - 0.9))
    rows = routed.twin_peak_estimate([planted, off], 0.0, 1.0, 0.6, 0.05,
                                     [0.05, 0.1, 0.2])
    by_sigma = {r["sigma"]: r for r in rows}
    # the planted point needs sigma >= gap/sqrt(dist) = 0.1 exactly
    assert by_sigma[0.05]["hits"] == 0
    assert by_sigma[0.1]["hits"] == 1
    assert by_sigma[0.2]["hits"] == 1
    for r in rows:
        assert r["mid_hits"] == 1
        assert r["replicas"] == 2
        assert r["ci_lo"] <= r["p"] <= r["ci_hi"]


def test_twin_peak_estimate_validation():
    xg = np.linspace(-1.0, 1.0, 201)
    prof = hand_profile(xg, -np.abs(xg))
    with pytest.raises(ValueError):
        routed.twin_peak_estimate([], 0.0, 1.0, 0.6, 0.05, [0.1])
    with pytest.raises(ValueError):
        routed.twin_peak_estimate([prof], 0.0, 1.0, 0.14, 0.05, [0.1])
    with pytest.raises(ValueError):
        routed.twin_peak_estimate([prof], 0.0, 0.5, 0.6, 0.05, [0.1])


# ---------------------------------------------------------------- brownianity

def synthetic_null_ensemble(count=400, seed=19, n=200, a=0.5):
    # Z with exact rate-2 Brownian increments and zero drift (R = 0)
    rng = np.random.default_rng(seed)
    xg = np.linspace(-0.75, 0.75, 301)
    dx = xg[1] - xg[0]
    out = []
    for _ in range(count):
        steps = rng.normal(0.0, np.sqrt(2.0 * dx), xg.size - 1)
        z = np.concatenate([[0.0], np.cumsum(steps)])
        out.append(hand_profile(xg, z, n=n, a=a))
    return out


def test_brownianity_null_calibration():
    ens = synthetic_null_ensemble()
    res = routed.brownianity_stats(ens, 0.5, 0.0, 0.25, (-0.75, 0.75))
    assert res["replicas"] == 400
    assert res["increment_length"] == pytest.approx(0.25, abs=0.01)
    assert res["drift"] == 0.0
    ratio = res["variance"] / res["target_variance"]
    assert 0.8 < ratio < 1.2
    assert res["ks_p"] > 0.05
    assert abs(res["mean"]) < 0.15


def test_brownianity_guards():
    ens = synthetic_null_ensemble(count=120)
    with pytest.raises(ValueError):
        routed.brownianity_stats(ens[:99], 0.5, 0.0, 0.25, (-0.75, 0.75))
    with pytest.raises(ValueError):
        routed.brownianity_stats(ens, 0.5, 0.0, 0.25, (-2.0, 2.0))
    with pytest.raises(ValueError):
        routed.brownianity_stats(ens, 0.5, 0.0, 1e-9, (-0.75, 0.75))
