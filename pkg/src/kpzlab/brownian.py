"""Conditioned Brownian bridge sampling and a drifted twin-peak reference.

The target law is a Brownian bridge from 0 to y on [0, s], conditioned to stay
negative. Negativity is imposed at interior grid points only, so the step size
is part of the law being sampled; callers compare like with like by fixing the
step. Two samplers are provided:

* rejection: draw whole bridges until one is negative at every interior point;

* resampler: draw a bridge, split it on [1, 5] into the values outside that
  window, the two standard bridges over [1, 3] and [3, 5], and the relative
  midpoint height at 3; replace that height with a fresh standard Gaussian
  (its variance is (5 - 1)/4 = 1, and it is independent of the other pieces);
  accept when the rebuilt path is negative at every interior point.

Because the midpoint height enters the rebuilt path linearly through a hat
function supported on [1, 5], acceptance tilts the retained pieces by exactly
the Gaussian mass the negativity constraint assigns them, so both methods
sample the same conditioned law. The test suite checks this equality by KS.

Attempts are keyed by (seed, chunk index), so any prefix of the candidate
stream is reproducible no matter how many chunks a run ends up consuming.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stats import proportion_ci

__all__ = [
    "BridgeSample",
    "RETRY_CAP",
    "acceptance_rate",
    "conditioned_bridge_ensemble",
    "near_touch_prob",
    "raw_bridge_ensemble",
    "sample_conditioned_bridge",
    "twin_peaks_reference",
]

# Normalization radius used by the resampler window [r0, 5 r0] = [1, 5];
# preconditions ask s >= 3 * _WINDOW_R so the window fits with room.
_WINDOW_R = 2.0

# Consecutive failed attempts tolerated before declaring a stall. The
# conditioned law has a uniform acceptance floor, so hitting this indicates
# a bug (or a pathological y), not bad luck.
RETRY_CAP = 1_000_000

# Candidate bridges drawn per RNG chunk.
_CHUNK = 4096

_GRID_TOL = 1e-9


@dataclass(frozen=True, eq=False, slots=True)
class BridgeSample:
    """One accepted path on the uniform grid over [0, s].

    values[i] sits at time i*step; values[0] = 0 and values[-1] = y exactly,
    and every interior value is strictly negative.
    """

    s: float
    y: float
    step: float
    values: np.ndarray
    method: str
    attempts: int

    def __post_init__(self) -> None:
        assert self.values[0] == 0.0
        assert self.values[-1] == self.y
        assert np.all(self.values[1:-1] < 0.0)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.values.size) * self.step


def _grid_count(s: float, step: float) -> int:
    if step <= 0.0:
        raise ValueError(f"step must be positive, got {step}")
    m = round(s / step)
    if m < 2 or abs(m * step - s) > _GRID_TOL * max(1.0, s):
        raise ValueError(f"step {step} does not divide the domain length {s}")
    return m


def _on_grid(t: float, step: float) -> int:
    idx = round(t / step)
    if abs(idx * step - t) > _GRID_TOL:
        raise ValueError(f"resampler window point {t} is off the step-{step} grid")
    return idx


def _check_conditioning_args(s: float, y: float, step: float) -> None:
    if s < 3.0 * _WINDOW_R:
        raise ValueError(f"domain length {s} is below the minimum {3.0 * _WINDOW_R}")
    if y > 0.0:
        raise ValueError(f"terminal value must be <= 0, got {y}")
    if step > 0.01 + _GRID_TOL:
        raise ValueError(f"step {step} is too coarse; the law needs step <= 0.01")


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, chunk])))


def _raw_chunk(rng: np.random.Generator, s: float, y: float, step: float,
               count: int) -> np.ndarray:
    """Unconditioned bridges, one per row; endpoint pins set exactly."""
    m = _grid_count(s, step)
    walk = np.cumsum(rng.standard_normal((count, m)) * math.sqrt(step), axis=1)
    frac = np.arange(1, m + 1) * (step / s)
    vals = np.empty((count, m + 1))
    vals[:, 0] = 0.0
    vals[:, 1:] = walk + frac * (y - walk[:, -1:])
    vals[:, -1] = y
    return vals


def raw_bridge_ensemble(s: float, y: float, count: int, step: float = 0.01,
                        seed: int = 0) -> np.ndarray:
    """Stack of `count` unconditioned bridge paths, shape (count, grid)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    out = []
    done = 0
    for chunk in range((count + _CHUNK - 1) // _CHUNK):
        take = min(_CHUNK, count - done)
        out.append(_raw_chunk(_chunk_rng(seed, chunk), s, y, step, take))
        done += take
    return np.vstack(out)


def _accepted_chunks(s: float, y: float, step: float, seed: int, method: str):
    """Yield (accepted_rows, attempts_in_chunk) forever; raises on a stall."""
    if method not in ("rejection", "resampler"):
        raise ValueError(f"unknown method {method!r}")
    _check_conditioning_args(s, y, step)
    if method == "resampler":
        i1 = _on_grid(_WINDOW_R / 2.0, step)
        i3 = _on_grid(3.0 * _WINDOW_R / 2.0, step)
        i5 = _on_grid(5.0 * _WINDOW_R / 2.0, step)
        m = _grid_count(s, step)
        t = np.arange(m + 1) * step
        hat = np.maximum(0.0, 1.0 - np.abs(t - step * i3) / _WINDOW_R)
    chunk = 0
    dry_spell = 0
    accepted_total = 0
    attempts_total = 0
    while True:
        rng = _chunk_rng(seed, chunk)
        vals = _raw_chunk(rng, s, y, step, _CHUNK)
        if method == "resampler":
            mid = vals[:, i3] - 0.5 * (vals[:, i1] + vals[:, i5])
            fresh = rng.standard_normal(_CHUNK)
            vals = vals + (fresh - mid)[:, None] * hat[None, :]
            vals[:, 0] = 0.0
            vals[:, -1] = y
        keep = np.all(vals[:, 1:-1] < 0.0, axis=1)
        hits = int(np.count_nonzero(keep))
        attempts_total += _CHUNK
        accepted_total += hits
        dry_spell = 0 if hits else dry_spell + _CHUNK
        if dry_spell >= RETRY_CAP:
            rate = accepted_total / attempts_total
            raise RuntimeError(
                f"conditioned-bridge sampler stalled: {dry_spell} consecutive "
                f"rejections (overall acceptance {rate:.3e} over "
                f"{attempts_total} attempts; s={s}, y={y}, step={step}, "
                f"method={method})"
            )
        yield vals[keep], _CHUNK
        chunk += 1


def conditioned_bridge_ensemble(s: float, y: float, count: int, step: float = 0.01,
                                seed: int = 0, method: str = "rejection") -> np.ndarray:
    """Stack of `count` conditioned paths, shape (count, grid)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rows = []
    have = 0
    for vals, _ in _accepted_chunks(s, y, step, seed, method):
        if vals.shape[0]:
            rows.append(vals)
            have += vals.shape[0]
        if have >= count:
            break
    return np.vstack(rows)[:count]


def sample_conditioned_bridge(s: float, y: float, step: float = 0.01, seed: int = 0,
                              method: str = "rejection") -> BridgeSample:
    """First accepted path of the (seed, method) candidate stream.

    :param s: domain length, at least 6.
    :param y: terminal value, at most 0.
    :param step: grid spacing; must divide s and be at most 0.01.
    :param method: "rejection" or "resampler".
    :raises RuntimeError: if RETRY_CAP consecutive candidates are rejected.
    """
    attempts = 0
    for vals, drawn in _accepted_chunks(s, y, step, seed, method):
        attempts += drawn
        if vals.shape[0]:
            row = vals[0].copy()
            row.flags.writeable = False
            return BridgeSample(s, y, step, row, method, attempts)
    raise AssertionError("unreachable")


def acceptance_rate(s: float, y: float, attempts: int, step: float = 0.01,
                    seed: int = 0, method: str = "resampler") -> float:
    """Fraction of `attempts` candidate paths accepted."""
    if attempts < _CHUNK:
        raise ValueError(f"attempts must be >= {_CHUNK} for a stable estimate")
    done = 0
    accepted = 0
    for vals, drawn in _accepted_chunks(s, y, step, seed, method):
        done += drawn
        accepted += vals.shape[0]
        if done >= attempts:
            break
    return accepted / done


def near_touch_prob(s: float, y: float, eps, replicas: int, r: float = _WINDOW_R,
                    step: float = 0.01, seed: int = 0, method: str = "rejection",
                    level: float = 0.95) -> list[dict]:
    """Frequency, per threshold, of the conditioned path rising above -sqrt(r)*eps
    somewhere on [r, 2r].

    Returns one row per eps value: {"eps", "p", "ci_lo", "ci_hi", "replicas"},
    with a Wilson interval at `level`. Paths are consumed in chunks so only the
    window suprema are retained.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if not 0.0 < 2.0 * r < s:
        raise ValueError(f"window [r, 2r] with r={r} must sit inside (0, {s})")
    eps = [float(e) for e in eps]
    if any(e < 0.0 for e in eps):
        raise ValueError("eps values must be >= 0")
    lo = _on_grid(r, step)
    hi = _on_grid(2.0 * r, step)
    sups = np.empty(replicas)
    have = 0
    for vals, _ in _accepted_chunks(s, y, step, seed, method):
        if vals.shape[0]:
            take = min(vals.shape[0], replicas - have)
            sups[have:have + take] = np.max(vals[:take, lo:hi + 1], axis=1)
            have += take
        if have >= replicas:
            break
    rows = []
    scale = math.sqrt(r)
    for e in eps:
        hits = int(np.count_nonzero(sups >= -scale * e))
        ci_lo, ci_hi = proportion_ci(hits, replicas, level)
        rows.append({"eps": e, "p": hits / replicas, "ci_lo": ci_lo,
                     "ci_hi": ci_hi, "replicas": replicas})
    return rows


def twin_peaks_reference(K: float, r: float, eps: float, sigmas, replicas: int,
                         step: float = 0.01, seed: int = 0,
                         level: float = 0.95) -> list[dict]:
    """Twin-peak frequencies for drifted Brownian motion W(x) = B(x) + K*x on [-r, r].

    A replica scores for sigma when the grid argmax M lands in the middle third
    and some grid point at distance [eps, 2*eps] from M reaches within
    sigma*sqrt(eps) of the maximum. The per-replica score is monotone in sigma
    by construction: it compares one retained gap against sigma*sqrt(eps).

    Returns one row per sigma: {"sigma", "p", "ci_lo", "ci_hi", "mid_rate",
    "replicas"}.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if K < 0.0:
        raise ValueError("drift K must be >= 0")
    if not 0.0 < eps < r / 6.0:
        raise ValueError(f"eps must lie in (0, r/6) = (0, {r / 6.0})")
    sigmas = [float(sg) for sg in sigmas]
    if any(not 0.0 < sg < 1.0 for sg in sigmas):
        raise ValueError("sigma values must lie in (0, 1)")
    m = _grid_count(r, step)
    x = (np.arange(2 * m + 1) - m) * step
    d_lo = max(1, math.ceil(eps / step - _GRID_TOL))
    d_hi = math.floor(2.0 * eps / step + _GRID_TOL)
    offsets = np.concatenate([np.arange(-d_hi, -d_lo + 1), np.arange(d_lo, d_hi + 1)])

    gaps = np.full(replicas, np.inf)
    mid = np.zeros(replicas, dtype=bool)
    done = 0
    chunk = 0
    while done < replicas:
        take = min(_CHUNK, replicas - done)
        rng = _chunk_rng(seed, chunk)
        incs = rng.standard_normal((take, 2 * m)) * math.sqrt(step)
        w = np.empty((take, 2 * m + 1))
        w[:, m] = 0.0
        w[:, m + 1:] = np.cumsum(incs[:, m:], axis=1)
        w[:, m - 1::-1] = np.cumsum(incs[:, :m], axis=1)
        w += K * x[None, :]
        top = np.argmax(w, axis=1)
        in_mid = np.abs(x[top]) <= r / 3.0 + _GRID_TOL
        # The annulus never leaves the grid when the maximizer is mid-third.
        rows_in = np.nonzero(in_mid)[0]
        if rows_in.size:
            around = w[rows_in[:, None], top[rows_in, None] + offsets[None, :]]
            peak = w[rows_in, top[rows_in]]
            gaps[done + rows_in] = peak - np.max(around, axis=1)
        mid[done:done + take] = in_mid
        done += take
        chunk += 1

    rows = []
    mid_hits = int(np.count_nonzero(mid))
    for sg in sigmas:
        hits = int(np.count_nonzero(mid & (gaps <= sg * math.sqrt(eps))))
        ci_lo, ci_hi = proportion_ci(hits, replicas, level)
        rows.append({"sigma": sg, "p": hits / replicas, "ci_lo": ci_lo,
                     "ci_hi": ci_hi, "mid_rate": mid_hits / replicas,
                     "replicas": replicas})
    return rows
