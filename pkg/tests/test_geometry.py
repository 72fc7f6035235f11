"""Census, steadiness, modulus, deviation, and slender-tube statistics."""

import math

import numpy as np
import pytest

from kpzlab import geometry, noise
from kpzlab.lpp import Staircase, UnscaledPoint
from kpzlab.scaled import WEIGHT_PREFACTOR, CompatibleTriple, make_zigzag, polymer


def unit_polymer(n=16, seed=7, step=0.25, pad=0.0):
    field = noise.generate_field(n + 1, 0.0 - pad, n + pad, step, seed, 0)
    return field, polymer(field, CompatibleTriple(n, 0.0, 1.0), 0.0, 0.0)


# ---------------------------------------------------------------- cliff census

def test_cliff_census_hand_instance():
    jumps = (0.5, 3.2, 3.4, 3.9, 4.2, 6.8, 7.0, 7.1, 8.9)
    sc = Staircase(UnscaledPoint(0.0, 0), UnscaledPoint(9.0, 9), jumps)
    c = geometry.cliff_census(sc, 2)
    assert c.m == 4
    assert c.X == (0.5, 3.4, 4.2, 7.0, 8.9, 9.0)
    assert c.Z == (0, 3, 4, 7, 8, 9)
    assert c.Psi == (3, 1, 3, 1, 1)
    assert c.I == (1, 3, 4)
    assert c.fraction == pytest.approx(0.75)


def test_cliff_census_validation():
    sc = Staircase(UnscaledPoint(0.0, 0), UnscaledPoint(9.0, 9), (1.0,) * 9)
    with pytest.raises(ValueError):
        geometry.cliff_census(sc, 0)
    with pytest.raises(ValueError):
        geometry.cliff_census(sc, 9)
    shifted = Staircase(UnscaledPoint(1.0, 0), UnscaledPoint(9.0, 9), (1.0,) * 9)
    with pytest.raises(ValueError):
        geometry.cliff_census(shifted, 2)


# ------------------------------------------------------------------ steadiness

def test_steadiness_ledger_identities():
    n = 16
    _, p = unit_polymer(n=n)
    s = geometry.steadiness(p, beta1=0.1)
    assert np.all(s["omega"] >= -1e-12)
    assert s["scaled_sum"] == pytest.approx(0.5 * n ** (1 / 3), abs=1e-9)
    assert s["scaled_residual"] < 1e-9
    assert s["unscaled_sum"] == pytest.approx(float(n), abs=1e-9)
    assert s["unscaled_residual"] < 1e-9
    assert s["count"] == int(np.sum(s["omega"] >= 0.1 * n ** (-2 / 3)))
    # loosening the advance bar can only add qualifying levels
    assert s["omega"].size >= geometry.steadiness(p, 0.0)["count"] >= s["count"]


# ------------------------------------------------------------------ regularity

def test_regularity_hand_instance():
    sc = Staircase(UnscaledPoint(0.0, 0), UnscaledPoint(4.0, 4), (1.0, 1.0, 3.0, 3.0))
    zz = make_zigzag(4, sc)
    res = geometry.regularity_check(zz, 0.5)
    assert res["worst_ratio"] == pytest.approx(2.0 ** (-2 / 3), abs=1e-12)
    assert not res["holds"]
    assert geometry.regularity_check(zz, 0.7)["holds"]


# --------------------------------------------------------------------- modulus

def test_modcon_geometry_matches_direct_loop():
    n = 16
    _, p1 = unit_polymer(n=n, seed=7)
    _, p2 = unit_polymer(n=n, seed=8)
    k = 1
    ens = [p1, p2]
    got = geometry.modcon_geometry_stat(ens, k)
    best = -math.inf
    for p in ens:
        dep = np.asarray(p.zigzag.departure)
        for i in range(dep.size):
            for j in range(i + 1, dep.size):
                h = (j - i) / n
                if not 2.0 ** (-k - 1) < h <= 2.0 ** -k:
                    continue
                norm = h ** (2 / 3) * math.log1p(1.0 / h) ** (1 / 3)
                best = max(best, abs(float(dep[j] - dep[i])) / norm)
    assert got == pytest.approx(best, abs=1e-12)
    # sup over an ensemble is the max of the member sups
    assert got == pytest.approx(max(geometry.modcon_geometry_stat([p1], k),
                                    geometry.modcon_geometry_stat([p2], k)),
                                abs=0.0)


def test_modcon_weight_matches_direct_loop():
    n = 16
    _, p = unit_polymer(n=n, seed=9)
    k = 2
    got = geometry.modcon_weight_stat([p], k)
    zz = p.zigzag
    dep = np.asarray(zz.departure)
    cum = np.asarray(zz.energy_cum)
    best = -math.inf
    for i in range(dep.size):
        for j in range(i + 1, dep.size):
            h = (j - i) / n
            if not 2.0 ** (-k - 1) < h <= 2.0 ** -k:
                continue
            w = WEIGHT_PREFACTOR * n ** (-1 / 3) * (
                float(cum[j] - cum[i]) - 2.0 * n * h
                - 2.0 * n ** (2 / 3) * float(dep[j] - dep[i]))
            norm = h ** (1 / 3) * math.log(1.0 / h) ** (2 / 3)
            best = max(best, abs(w) / norm)
    assert got == pytest.approx(best, abs=1e-12)


def test_modcon_guards():
    n = 16
    _, p = unit_polymer(n=n)
    with pytest.raises(ValueError):
        geometry.modcon_geometry_stat([], 1)
    with pytest.raises(ValueError):
        geometry.modcon_weight_stat([p], 0)
    with pytest.raises(ValueError):
        geometry.modcon_geometry_stat([p], 5)  # no lattice pair that short
    bare = make_zigzag(n, p.zigzag.staircase)
    with pytest.raises(ValueError):
        geometry.modcon_weight_stat([bare], 1)


# ------------------------------------------------------------------- deviation

def test_deviation_stat_extremes():
    ens = [unit_polymer(n=16, seed=s)[1] for s in (21, 22, 23)]
    calm = geometry.deviation_stat(ens, 0.25, r=50.0)
    assert calm["frequency"] == 0.0
    assert calm["hits"] == 0
    wild = geometry.deviation_stat(ens, 0.25, r=1e-9)
    assert wild["frequency"] == 1.0
    assert wild["ci_lo"] <= wild["frequency"] <= wild["ci_hi"]
    assert wild["replicas"] == 3


def test_deviation_stat_validation():
    ens = [unit_polymer(n=16)[1]]
    with pytest.raises(ValueError):
        geometry.deviation_stat(ens, 0.3, 1.0)
    with pytest.raises(ValueError):
        geometry.deviation_stat(ens, 0.0, 1.0)
    with pytest.raises(ValueError):
        geometry.deviation_stat([], 0.25, 1.0)


# --------------------------------------------------------------------- slender

def test_slender_shortfall_structure_and_nesting():
    field = noise.generate_field(9, 0.0, 8.0, 0.25, 3, 0)
    thetas = (0.25, 0.5, 1.0)
    res = geometry.slender_shortfall(field, 8, 1, thetas, chi=0.34)
    assert set(res) == {"sups", "regular_for", "worst_ratio", "threshold",
                        "exceeds", "hypothesis_met", "pairs"}
    assert res["pairs"] == [(0.25, 0.75), (0.375, 0.875), (0.5, 1.0)]
    sups = res["sups"]
    assert set(sups) == {0.25, 0.5, 1.0, math.inf}
    # shared endpoint grid makes the feasible classes nested in theta
    chain = [sups[t] if sups[t] is not None else -math.inf for t in
             (0.25, 0.5, 1.0, math.inf)]
    assert chain == sorted(chain)
    for t in thetas:
        assert res["threshold"][t] == pytest.approx(-0.5 / t)
        if sups[t] is not None:
            assert res["exceeds"][t] == (sups[t] > -0.5 / t)
    # the asymptotic hypothesis never holds at this size; recorded, not faked
    assert res["hypothesis_met"] is False


def test_slender_shortfall_lattice_guard():
    field = noise.generate_field(11, 0.0, 10.0, 0.25, 3, 0)
    with pytest.raises(ValueError):
        geometry.slender_shortfall(field, 10, 2, (0.5,), chi=0.34)
