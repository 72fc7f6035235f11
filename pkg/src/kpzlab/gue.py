"""Largest-eigenvalue sampler for the Gaussian unitary ensemble.

Entry-variance convention: with variance s, diagonal entries are real
N(0, s) and each off-diagonal entry is complex with independent real and
imaginary parts of variance s/2 (total variance s). Under this convention a
1x1 draw is a standard Gaussian at s = 1 and the top eigenvalue grows like
2*sqrt(m*s).

Sampling runs through the beta = 2 tridiagonal reduction: diagonal N(0, s),
off-diagonal chi_{2k}*sqrt(s/2) for k = m-1..1, with only the top eigenvalue
requested from the banded solver. A dense Hermitian construction is kept as a
cross-check for small m. Both paths draw at variance 1 and post-scale by
sqrt(s), so changing s rescales samples bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .lpp import UnscaledPoint, max_energy_profile, profile_value
from .stats import KsResult, ks_two_sample, rule_param

__all__ = [
    "GueSpec",
    "DENSE_MAX_DIM",
    "gue_weight_samples",
    "lpp_gue_ks",
    "sample_lambda_max",
    "sample_lambda_max_dense",
]

# The dense path is a validation oracle, not a production sampler.
DENSE_MAX_DIM = 8


@dataclass(frozen=True, slots=True)
class GueSpec:
    """Ensemble parameters: dimension m, entry variance, master seed."""

    m: int
    entry_variance: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"matrix dimension must be >= 1, got {self.m}")
        if self.entry_variance <= 0.0:
            raise ValueError(f"entry variance must be > 0, got {self.entry_variance}")


def _rng(spec: GueSpec) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([spec.seed, spec.m])))


def sample_lambda_max(spec: GueSpec, count: int) -> np.ndarray:
    """i.i.d. top-eigenvalue draws, shape (count,).

    :raises RuntimeError: if the banded eigensolver fails to converge; the
        message carries the offending tridiagonal entries.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = _rng(spec)
    m = spec.m
    out = np.empty(count)
    if m == 1:
        out[:] = rng.standard_normal(count)
    else:
        ks = np.arange(m - 1, 0, -1, dtype=float)
        for i in range(count):
            diag = rng.standard_normal(m)
            off = np.sqrt(rng.chisquare(2.0 * ks) * 0.5)
            try:
                top = eigh_tridiagonal(diag, off, eigvals_only=True,
                                       select="i", select_range=(m - 1, m - 1),
                                       lapack_driver="stebz")
            except np.linalg.LinAlgError as exc:
                raise RuntimeError(
                    f"tridiagonal eigensolver failed: {exc}; diag={diag!r} off={off!r}"
                ) from exc
            out[i] = top[0]
    return out * math.sqrt(spec.entry_variance)


def sample_lambda_max_dense(spec: GueSpec, count: int) -> np.ndarray:
    """Top eigenvalues from explicit Hermitian matrices; small m only."""
    if count < 1:
        raise ValueError("count must be >= 1")
    m = spec.m
    if m > DENSE_MAX_DIM:
        raise ValueError(f"dense path is capped at m <= {DENSE_MAX_DIM}, got {m}")
    rng = _rng(spec)
    out = np.empty(count)
    half = math.sqrt(0.5)
    for i in range(count):
        h = np.zeros((m, m), dtype=complex)
        np.fill_diagonal(h, rng.standard_normal(m))
        iu, ju = np.triu_indices(m, k=1)
        upper = half * (rng.standard_normal(iu.size) + 1j * rng.standard_normal(iu.size))
        h[iu, ju] = upper
        h[ju, iu] = np.conj(upper)
        out[i] = np.linalg.eigvalsh(h)[-1]
    return out * math.sqrt(spec.entry_variance)


def gue_weight_samples(n: int, count: int, seed: int = 0) -> np.ndarray:
    """Spectral-side draws of the scaled unit-route weight law.

    The height-1 route from the origin back to scaled abscissa 0 has energy
    equal in law to sqrt(n) times a top eigenvalue of dimension n + 1 at
    variance 1; centering by 2n and dividing by sqrt(2) n^(1/3) gives the
    weight. Used as the exact side of the negative-mean check.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    lam = sample_lambda_max(GueSpec(n + 1, 1.0, seed), count)
    return (math.sqrt(n) * lam - 2.0 * n) / (math.sqrt(2.0) * n ** (1.0 / 3.0))


def lpp_energy(field, m1: int, m2: int) -> float:
    """Point-to-point staircase energy from (0, 0) to (m1, m2) on one field."""
    if m1 < 1:
        raise ValueError("m1 must be >= 1")
    profile = max_energy_profile(field, UnscaledPoint(0.0, 0), m2)
    return profile_value(field, profile, float(m1))


def lpp_gue_ks(fields, m1: int, m2: int, gue_seed: int = 0) -> dict:
    """Two-sample KS between point-to-point energies and scaled eigenvalues.

    :param fields: iterable of noise environments; one energy is read per
        field, and the eigenvalue side is drawn to the same count at dimension
        m2 + 1, scaled by sqrt(m1).
    :returns: {"ks", "p", "count", "lpp_mean", "gue_mean"}.
    :raises ValueError: below the power-guard count.
    """
    energies = np.asarray([lpp_energy(f, m1, m2) for f in fields], dtype=float)
    count = energies.size
    floor = rule_param("P.lpp_gue", "min_count")
    if count < floor:
        raise ValueError(f"spectral comparison needs >= {floor} fields, got {count}")
    lam = sample_lambda_max(GueSpec(m2 + 1, 1.0, gue_seed), count)
    spectral = math.sqrt(m1) * lam
    res: KsResult = ks_two_sample(energies, spectral)
    return {"ks": res.distance, "p": res.p_value, "count": count,
            "lpp_mean": float(np.mean(energies)), "gue_mean": float(np.mean(spectral))}
