"""Routed weight profiles.

Z_n(x, a) is the best weight of a (0,0) -> (0,1) zigzag forced to depart
level na at scaled abscissa x. It splits into independent forward and
backward weight profiles joined at the shared unscaled departure abscissa;
the backward profile is computed by reflecting the field (levels reversed,
abscissae negated, values negated) and running the forward sweep, which is
an exact identity of the telescoped energy, not an approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .lpp import aligned_index, sweep_values
from .noise import NoiseField, snap_index
from .scaled import WEIGHT_PREFACTOR
from .stats import ks_one_sample, proportion_ci

__all__ = [
    "RoutedProfile",
    "brownianity_stats",
    "normalized_decomposition_check",
    "routed_profile",
    "split_shift",
    "twin_peak_estimate",
]


def split_shift(n: int) -> float:
    """Exact gap between the profile maximum and the direct route weight.

    Splitting the direct route's centering 2n across the two legs leaves
    2n·a + 2n(1 - a - 1/n) + 1 = 2n - 1, so
    max_x Z_n(x, a) = Wgt_n[(0,0)->(0,1)] + 2^{-1/2}n^{-1/3} exactly
    whenever the grid window contains the departure junction.
    """
    return WEIGHT_PREFACTOR * n ** (-1 / 3)


@dataclass(frozen=True, eq=False, slots=True)
class RoutedProfile:
    n: int
    a: float
    x_grid: np.ndarray
    u_grid: np.ndarray
    forward: np.ndarray
    backward: np.ndarray
    z_values: np.ndarray
    argmax_x: float
    argmax_u: float
    max_value: float


def routed_profile(field: NoiseField, n: int, a: float, x_lo: float, x_hi: float,
                   x_step: float | None = None) -> RoutedProfile:
    """Sample Z_n(·, a) on grid-image abscissae in [x_lo, x_hi].

    x_step = None reads every field column in the window; otherwise requested
    spacing is rounded to a whole number of columns so profile points stay on
    the unscaled grid (no resampling bias).
    """
    na = round(n * a)
    if abs(n * a - na) > 1e-9 or not 0 < na < n:
        raise ValueError(f"a must be an interior multiple of 1/{n}, got {a}")
    if n + 1 > field.level_count:
        raise ValueError(
            f"field has {field.level_count} levels, route needs {n + 1}"
        )
    if x_hi < x_lo:
        raise ValueError(f"empty window [{x_lo}, {x_hi}]")
    horiz = 2.0 * n ** (2 / 3)
    u_lo = na + horiz * x_lo
    u_hi = na + horiz * x_hi
    if u_lo < 0.0 or u_hi > n:
        raise ValueError(
            f"window unscales to [{u_lo}, {u_hi}], outside the route span [0, {n}]"
        )
    c_lo = snap_index(field, u_lo)
    if field.x_min + field.step * c_lo < u_lo - 1e-6 * field.step:
        c_lo += 1
    c_hi = snap_index(field, u_hi)
    if c_hi < c_lo:
        raise ValueError("window narrower than one grid column")
    stride = 1
    if x_step is not None:
        stride = max(1, round(x_step * horiz / field.step))
    cols = np.arange(c_lo, c_hi + 1, stride)

    start = aligned_index(field, 0.0)
    end = aligned_index(field, float(n))
    grid = field.grid_size
    f_fwd = sweep_values(field.samples, start, 0, na)
    reflected = -field.samples[na + 1:n + 1][::-1, ::-1]
    f_bwd = sweep_values(reflected, grid - 1 - end, 0, n - na - 1)[::-1]

    u = field.x_min + field.step * cols
    x = 0.5 * n ** (-2 / 3) * (u - na)
    a_plus = a + 1.0 / n
    x_minus = x - 0.5 * n ** (-2 / 3)
    forward = WEIGHT_PREFACTOR * n ** (-1 / 3) * (
        f_fwd[cols] - 2.0 * n * a - horiz * x)
    backward = WEIGHT_PREFACTOR * n ** (-1 / 3) * (
        f_bwd[cols] - 2.0 * n * (1.0 - a_plus) - horiz * (0.0 - x_minus))
    z = forward + backward
    best = int(np.argmax(z))  # leftmost on ties
    for arr in (x, u, forward, backward, z):
        arr.setflags(write=False)
    return RoutedProfile(n, a, x, u, forward, backward, z,
                         float(x[best]), float(u[best]), float(z[best]))


def normalized_decomposition_check(field: NoiseField, profile: RoutedProfile,
                                   perturb: float = 0.0) -> float:
    """Re-derive z_values from the two normalized unit-lifetime profiles.

    The forward leg of lifetime a is a^{1/3} times the weight of the same
    route in the n·a frame (and likewise backward with 1 - a_+), evaluated
    here through genuinely different arithmetic. Returns the max of
    |residual| / (1 + |z|); the identity holds to float rounding, so the
    caller compares against 1e-9. perturb != 0 deliberately mis-scales the
    forward factor (negative control).
    """
    n, a = profile.n, profile.a
    na = round(n * a)
    a_plus = a + 1.0 / n
    m_f = na
    m_b = n - na - 1
    x = profile.x_grid
    x_minus = x - 0.5 * n ** (-2 / 3)

    # Fresh sweeps, read at the profile's columns.
    cols = np.round((profile.u_grid - field.x_min) / field.step).astype(np.int64)
    start = aligned_index(field, 0.0)
    end = aligned_index(field, float(n))
    grid = field.grid_size
    e_fwd = sweep_values(field.samples, start, 0, na)[cols]
    reflected = -field.samples[na + 1:n + 1][::-1, ::-1]
    e_bwd = sweep_values(reflected, grid - 1 - end, 0, n - na - 1)[::-1][cols]

    w_f = a ** (-2 / 3) * x
    up = WEIGHT_PREFACTOR * m_f ** (-1 / 3) * (
        e_fwd - 2.0 * m_f - 2.0 * m_f ** (2 / 3) * w_f)
    w_b = (1.0 - a_plus) ** (-2 / 3) * x_minus
    down = WEIGHT_PREFACTOR * m_b ** (-1 / 3) * (
        e_bwd - 2.0 * m_b + 2.0 * m_b ** (2 / 3) * w_b)
    rebuilt = ((1.0 + perturb) * a ** (1 / 3) * up
               + (1.0 - a_plus) ** (1 / 3) * down)
    return float(np.max(np.abs(rebuilt - profile.z_values)
                        / (1.0 + np.abs(profile.z_values))))


def twin_peak_estimate(ensemble: list[RoutedProfile], R: float, ell: float,
                       ell_prime: float, eps: float, sigmas,
                       level: float = 0.95) -> list[dict]:
    """Frequency, per sigma, of a centered maximizer with a near-touching
    second peak: |M - R| <= ell/3 and some x with |x - M| in [eps, ell'/3]
    where Z(x) + sigma·|x - M|^{1/2} >= Z(M).
    """
    if not ensemble:
        raise ValueError("empty ensemble")
    if not 3.0 * eps < ell_prime <= ell:
        raise ValueError(
            f"need 3·eps < ell_prime <= ell, got eps={eps}, "
            f"ell_prime={ell_prime}, ell={ell}"
        )
    sigmas = sorted(float(s) for s in sigmas)
    hits = {s: 0 for s in sigmas}
    mid_hits = 0
    for prof in ensemble:
        m = prof.argmax_x
        if abs(m - R) > ell / 3.0:
            continue
        mid_hits += 1
        dist = np.abs(prof.x_grid - m)
        band = (dist >= eps) & (dist <= ell_prime / 3.0)
        if not band.any():
            continue
        gap = prof.max_value - prof.z_values[band]  # >= 0 by maximality
        root = np.sqrt(dist[band])
        need = gap / root  # smallest sigma making this x a near-touch
        least = float(need.min())
        for s in sigmas:
            if s >= least:
                hits[s] += 1
    out = []
    for s in sigmas:
        lo, hi = proportion_ci(hits[s], len(ensemble), level)
        out.append({"sigma": s, "p": hits[s] / len(ensemble),
                    "ci_lo": lo, "ci_hi": hi,
                    "hits": hits[s], "mid_hits": mid_hits,
                    "replicas": len(ensemble)})
    return out


def brownianity_stats(ensemble: list[RoutedProfile], a: float, R: float,
                      delta: float, window: tuple[float, float]) -> dict:
    """Variance and KS diagnostics for one drift-adjusted profile increment
    per replica, taken across the fixed pair R ± delta/2.

    The theorem writes the local description Z_n(x, a) = (Brownian of rate 2)
    - (2^{1/2}(a(1-a))^{-1}R + eps)·x near R, so increments of
    X(x) = Z(x) + drift·x should be N(0, 2·delta). The pair is snapped to the
    profile grid and the snapped length is the one used in the reference
    variance.
    """
    if len(ensemble) < 100:
        raise ValueError(f"power guard: need >= 100 replicas, got {len(ensemble)}")
    lo, hi = window
    first = ensemble[0]
    n = first.n
    if lo < first.x_grid[0] - 1e-12 or hi > first.x_grid[-1] + 1e-12:
        raise ValueError(f"window {window} outside profile grid")
    eps_drift = math.sqrt(2.0) * R / ((1.0 - a - 1.0 / n) * (1.0 - a)) / n
    drift = math.sqrt(2.0) * R / (a * (1.0 - a)) + eps_drift

    targets = (R - delta / 2.0, R + delta / 2.0)
    if not lo <= targets[0] < targets[1] <= hi:
        raise ValueError(f"increment pair {targets} outside window {window}")
    i1 = int(np.argmin(np.abs(first.x_grid - targets[0])))
    i2 = int(np.argmin(np.abs(first.x_grid - targets[1])))
    if i1 == i2:
        raise ValueError("delta below grid resolution")
    x1, x2 = float(first.x_grid[i1]), float(first.x_grid[i2])
    length = x2 - x1

    incs = np.empty(len(ensemble))
    for r, prof in enumerate(ensemble):
        assert prof.n == n and prof.x_grid.size == first.x_grid.size
        z1, z2 = prof.z_values[i1], prof.z_values[i2]
        incs[r] = (z2 + drift * x2) - (z1 + drift * x1)

    target_var = 2.0 * length
    sd = math.sqrt(target_var)
    cdf = NormalDist(0.0, sd).cdf
    ks = ks_one_sample(incs, lambda v: [cdf(t) for t in v])
    return {
        "replicas": incs.size,
        "increment_length": length,
        "drift": drift,
        "variance": float(np.var(incs, ddof=1)),
        "target_variance": target_var,
        "mean": float(np.mean(incs)),
        "ks_distance": ks.distance,
        "ks_p": ks.p_value,
    }
