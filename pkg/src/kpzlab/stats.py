"""Shared statistical plumbing.

Empirical CDF comparisons, Wilson proportion intervals, log-log slope fits,
replica orchestration, the acceptance-threshold registry, and the report
container every experiment emits.

Determinism contract: experiments collect per-replica values keyed by replica
index (ReplicaTable) and reduce them in index order during finalization, so
thread scheduling cannot change any reported number.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

__all__ = [
    "ACCEPTANCE",
    "ExperimentReport",
    "ExponentFit",
    "KsResult",
    "ReplicaTable",
    "Rule",
    "StatRecord",
    "exponent_fit",
    "ks_one_sample",
    "ks_two_sample",
    "median_ci",
    "parallel_map",
    "proportion_ci",
    "rule_param",
]

_NORMAL = NormalDist()

# Two-sample KS below this per-side count has essentially no power.
MIN_KS_SIDE = 20


@dataclass(frozen=True, slots=True)
class KsResult:
    distance: float
    p_value: float


def _kolmogorov_sf(lam: float) -> float:
    """Asymptotic Kolmogorov survival function 2*sum (-1)^(j-1) exp(-2 j^2 lam^2)."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    for j in range(1, 101):
        term = 2.0 * (-1.0) ** (j - 1) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return min(1.0, max(0.0, total))


def ks_two_sample(a, b) -> KsResult:
    """Classical two-sample Kolmogorov-Smirnov distance with asymptotic p-value.

    Both sides need at least MIN_KS_SIDE observations; the p-value uses the
    standard effective size n1*n2/(n1+n2) and is therefore approximate.
    """
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    n1, n2 = a.size, b.size
    if n1 < MIN_KS_SIDE or n2 < MIN_KS_SIDE:
        raise ValueError(
            f"ks_two_sample needs >= {MIN_KS_SIDE} samples per side, got {n1} and {n2}"
        )
    grid = np.concatenate([a, b])
    cdf1 = np.searchsorted(a, grid, side="right") / n1
    cdf2 = np.searchsorted(b, grid, side="right") / n2
    dist = float(np.max(np.abs(cdf1 - cdf2)))
    n_eff = n1 * n2 / (n1 + n2)
    return KsResult(dist, _kolmogorov_sf(dist * math.sqrt(n_eff)))


def ks_one_sample(samples, cdf) -> KsResult:
    """One-sample KS distance of `samples` against the callable CDF `cdf`."""
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < MIN_KS_SIDE:
        raise ValueError(f"ks_one_sample needs >= {MIN_KS_SIDE} samples, got {n}")
    f = np.asarray(cdf(x), dtype=float)
    hi = np.max(np.arange(1, n + 1) / n - f)
    lo = np.max(f - np.arange(0, n) / n)
    dist = float(max(hi, lo))
    return KsResult(dist, _kolmogorov_sf(dist * math.sqrt(n)))


def proportion_ci(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f"invalid counts ({successes}, {trials})")
    z = _NORMAL.inv_cdf(0.5 + level / 2.0)
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    # center - half is 0 (or center + half is 1) in exact arithmetic at the
    # boundary counts; clamp so the interval always contains p.
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def mean_ci(values, level: float = 0.99) -> tuple[float, float, float]:
    """Normal-theory confidence interval for a mean: (mean, lo, hi)."""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ValueError("mean_ci needs at least 2 values")
    m = float(np.mean(x))
    se = float(np.std(x, ddof=1)) / math.sqrt(x.size)
    z = _NORMAL.inv_cdf(0.5 + level / 2.0)
    return m, m - z * se, m + z * se


def median_ci(values, level: float = 0.95) -> tuple[float, float, float]:
    """Distribution-free median interval from binomial order statistics."""
    x = np.sort(np.asarray(values, dtype=float))
    n = x.size
    if n < 8:
        raise ValueError("median_ci needs at least 8 values")
    z = _NORMAL.inv_cdf(0.5 + level / 2.0)
    half = z * math.sqrt(n) / 2.0
    lo = max(0, int(math.floor(n / 2.0 - half)))
    hi = min(n - 1, int(math.ceil(n / 2.0 + half)))
    return float(np.median(x)), float(x[lo]), float(x[hi])


@dataclass(frozen=True, slots=True)
class ExponentFit:
    scales: tuple[float, ...]
    values: tuple[float, ...]
    slope: float
    intercept: float
    residual: float


def exponent_fit(scales, values) -> ExponentFit:
    """Least-squares slope of log(value) against log(scale).

    :param scales: at least 3 positive abscissae.
    :param values: matching positive ordinates.
    :returns: ExponentFit with the fitted slope and the RMS log-residual.
    """
    s = np.asarray(scales, dtype=float)
    v = np.asarray(values, dtype=float)
    if s.size < 3 or s.size != v.size:
        raise ValueError("exponent_fit needs >= 3 matched scales and values")
    if np.any(s <= 0) or np.any(v <= 0):
        raise ValueError("exponent_fit inputs must be positive")
    ls, lv = np.log(s), np.log(v)
    a = np.vstack([ls, np.ones_like(ls)]).T
    (slope, intercept), *_ = np.linalg.lstsq(a, lv, rcond=None)
    resid = float(np.sqrt(np.mean((lv - slope * ls - intercept) ** 2)))
    return ExponentFit(tuple(map(float, s)), tuple(map(float, v)), float(slope), float(intercept), resid)


class ReplicaTable:
    """Per-replica value store whose reduction order is fixed by replica index.

    put() records one row per replica; merge() combines disjoint tables (any
    order, associative); rows()/values() return data sorted by index, so every
    downstream statistic is identical no matter how work was scheduled.
    """

    def __init__(self) -> None:
        self._rows: dict[int, object] = {}

    def put(self, index: int, value) -> None:
        if index in self._rows:
            raise ValueError(f"replica {index} already recorded")
        self._rows[index] = value

    def merge(self, other: "ReplicaTable") -> "ReplicaTable":
        overlap = self._rows.keys() & other._rows.keys()
        if overlap:
            raise ValueError(f"replica tables overlap on {sorted(overlap)[:5]}")
        merged = ReplicaTable()
        merged._rows = {**self._rows, **other._rows}
        return merged

    def indices(self) -> list[int]:
        return sorted(self._rows)

    def rows(self) -> list:
        return [self._rows[i] for i in sorted(self._rows)]

    def values(self) -> np.ndarray:
        return np.asarray(self.rows(), dtype=float)

    def __len__(self) -> int:
        return len(self._rows)


def parallel_map(fn, count: int, threads: int = 1) -> list:
    """Run fn(0..count-1), optionally on a thread pool, results in index order."""
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


# ---------------------------------------------------------------------------
# Acceptance thresholds. Experiments never hardcode a tolerance: every flagged
# statistic cites one of these rule ids, and the acceptance test suite reads
# the same table.
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Rule:
    rule_id: str
    description: str
    params: dict


ACCEPTANCE: dict[str, Rule] = {
    "A1": Rule("A1", "exact geodesic/DP agreement plus brute-force micro instances",
               {"rel_tol": 1e-9, "replicas": 100, "n": 50, "delta": 1e-2,
                "micro_instances": 50}),
    "A2": Rule("A2", "normalized decomposition residual",
               {"rel_tol": 1e-9, "replicas": 100, "n": 100, "a": 0.5}),
    "A3": Rule("A3", "horizontal length conservation, unscaled and scaled",
               {"rel_tol": 1e-9}),
    "A4": Rule("A4", "point-to-point energy versus spectral oracle",
               {"ks": 0.05, "refine_shift": 0.02, "m1": 10, "m2": 10,
                "delta": 1e-3, "count": 2000}),
    # delta here is finer than elsewhere: the grid eats ~0.32*sqrt(delta) of
    # energy per junction, and the CI-overlap clause cannot absorb that at 1e-3.
    "A5": Rule("A5", "negative mean of the unit-route weight",
               {"level": 0.99, "n": 100, "replicas": 1000, "delta": 1e-4,
                "gue_count": 1000}),
    "A6": Rule("A6", "rate-2 increments of the drift-adjusted routed profile",
               {"var_lo": 0.8, "var_hi": 1.2, "ks": 0.05, "n": 200, "a": 0.5,
                "increment": 0.25, "center": 0.0, "replicas": 2000}),
    "A7": Rule("A7", "transversal and weight fluctuation exponents",
               {"geometry_lo": 0.55, "geometry_hi": 0.80,
                "weight_lo": 0.22, "weight_hi": 0.45,
                "n": 256, "replicas": 300, "scales": (0.25, 0.125, 0.0625, 0.03125, 0.015625)}),
    "A8": Rule("A8", "twin peak rarity: monotone in sigma, near-linear ratio",
               {"ratio_max": 10.0, "sigmas": (0.05, 0.1, 0.2, 0.4),
                "n": 100, "a": 0.5, "replicas": 500}),
    "A9": Rule("A9", "conditioned-bridge oracle: near-touch linearity and resampler law",
               {"ratio_max": 5.0, "eps": (0.01, 0.02, 0.05, 0.1), "samples": 100_000,
                "ks": 0.05, "ks_samples": 2000,
                "accept_floor": 0.25 * _NORMAL.cdf(-1.0) * math.exp(-2.0)}),
    "A10": Rule("A10", "cliff census fraction bounded away from 1",
                {"mean_max": 0.95, "ci_max": 0.99, "ci_level": 0.99,
                 "n": 200, "strip": 8, "replicas": 200}),
    "A11": Rule("A11", "slender shortfall monotone in theta; constraint binds",
                {"thetas": (0.5, 0.25, 0.125), "replicas": 100}),
    "A12": Rule("A12", "routed-profile argmax sits on the polymer departure",
                {"replicas": 100, "n": 100, "a": 0.5}),
    "A13": Rule("A13", "shear law of the departure point",
                {"ks": 0.05, "x": 1.0, "a": 0.5, "n": 100, "per_side": 2000}),
    # Power guards: refuse runs whose sample sizes cannot support their claim.
    "P.ks": Rule("P.ks", "minimum per-side KS sample size", {"min_side": MIN_KS_SIDE}),
    "P.brownianity": Rule("P.brownianity", "minimum replicas for increment statistics",
                          {"min_replicas": 100}),
    "P.lpp_gue": Rule("P.lpp_gue", "minimum count for the spectral comparison",
                      {"min_count": 200}),
}


def rule_param(rule_id: str, key: str):
    return ACCEPTANCE[rule_id].params[key]


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(slots=True)
class StatRecord:
    name: str
    value: float
    ci_lo: float | None = None
    ci_hi: float | None = None
    n: int | None = None
    rule: str | None = None
    passed: bool | None = None


@dataclass(slots=True)
class ExperimentReport:
    """Replicated-statistic container serialized to JSON, text, and CSV.

    The JSON form deliberately excludes wall_clock so identical configurations
    produce byte-identical report.json files; the human-readable text form
    shows the timing.
    """

    experiment: str
    config: dict
    statistics: list[StatRecord] = field(default_factory=list)
    tables: dict[str, tuple[list[str], list[tuple]]] = field(default_factory=dict)
    wall_clock: float | None = None

    def add(self, name: str, value: float, *, ci_lo=None, ci_hi=None, n=None,
            rule=None, passed=None) -> None:
        self.statistics.append(StatRecord(name, float(value),
                                          None if ci_lo is None else float(ci_lo),
                                          None if ci_hi is None else float(ci_hi),
                                          None if n is None else int(n),
                                          rule,
                                          None if passed is None else bool(passed)))

    def add_table(self, name: str, header: list[str], rows: list[tuple]) -> None:
        self.tables[name] = (list(header),
                             [tuple(c.item() if isinstance(c, np.generic) else c
                                    for c in r) for r in rows])

    def passed(self) -> bool:
        return all(rec.passed is not False for rec in self.statistics)

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "config": self.config,
            "passed": self.passed(),
            "statistics": [
                {"name": r.name, "value": r.value, "ci_lo": r.ci_lo, "ci_hi": r.ci_hi,
                 "n": r.n, "rule": r.rule, "passed": r.passed}
                for r in self.statistics
            ],
            "tables": {
                name: {"header": header, "rows": [list(row) for row in rows]}
                for name, (header, rows) in sorted(self.tables.items())
            },
        }
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"

    def to_text(self) -> str:
        lines = [f"experiment: {self.experiment}"]
        for key in sorted(self.config):
            lines.append(f"  config {key} = {self.config[key]}")
        width = max((len(r.name) for r in self.statistics), default=4)
        for r in self.statistics:
            ci = ""
            if r.ci_lo is not None and r.ci_hi is not None:
                ci = f"  ci=[{r.ci_lo:.6g}, {r.ci_hi:.6g}]"
            flag = "" if r.passed is None else ("  PASS" if r.passed else "  FAIL")
            ruletag = f"  rule={r.rule}" if r.rule else ""
            lines.append(f"  {r.name:<{width}}  {r.value:.6g}{ci}{ruletag}{flag}")
        if self.wall_clock is not None:
            lines.append(f"  wall_clock_s: {self.wall_clock:.2f}")
        lines.append(f"  overall: {'PASS' if self.passed() else 'FAIL'}")
        return "\n".join(lines) + "\n"

    def write(self, outdir: str) -> None:
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "report.json"), "w") as fh:
            fh.write(self.to_json())
        for name, (header, rows) in sorted(self.tables.items()):
            with open(os.path.join(outdir, f"{name}.csv"), "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(header)
                writer.writerows(rows)
