"""Discretized Brownian noise environment.

A NoiseField holds independent Brownian lines sampled on a shared uniform
grid. Every line is anchored to zero at the left edge: downstream energies
depend only on increments, so the anchor costs nothing and makes replays
bit-reproducible.

Randomness is counter-based (Philox), keyed by (master_seed, replica_index,
level, block). Distinct replicas and levels are disjoint streams by key;
distinct blocks within a level start 2^64 counter states apart, far beyond
what the ziggurat can consume per block, so regeneration is exact regardless
of scheduling.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "NoiseField",
    "dump_field",
    "generate_field",
    "grid_x",
    "load_field",
    "modulus_of_continuity",
    "snap_index",
    "value_at",
]

# Normals generated per Philox counter block.
_BLOCK = 1 << 16
_MASK32 = 0xFFFFFFFF
_MASK64 = 0xFFFFFFFFFFFFFFFF

# Snap tolerance in index units: rescues grid points mangled by float
# round-trips without ever promoting a deliberately off-grid query.
_SNAP_TOL = 1e-6

# Refuse fields whose sample matrix would exceed this many entries.
DEFAULT_CELL_CAP = 200_000_000

_MAGIC = b"KZF1"


@dataclass(frozen=True, eq=False, slots=True)
class NoiseField:
    """Immutable sampled environment.

    samples[k][i] is line k at abscissa x_min + i*step, with samples[k][0] = 0.
    The sample matrix is marked read-only; treat the whole object as frozen.
    """

    level_count: int
    x_min: float
    x_max: float
    step: float
    samples: np.ndarray
    master_seed: int
    replica_index: int

    @property
    def grid_size(self) -> int:
        return self.samples.shape[1]


def _level_normals(master_seed: int, replica_index: int, level: int, count: int) -> np.ndarray:
    """Standard normals for one line, identical for identical key tuples."""
    key_lo = master_seed & _MASK64
    key_hi = ((replica_index & _MASK32) << 32) | (level & _MASK32)
    out = np.empty(count, dtype=np.float64)
    for block in range((count + _BLOCK - 1) // _BLOCK):
        lo = block * _BLOCK
        hi = min(lo + _BLOCK, count)
        bitgen = np.random.Philox(
            key=np.array([key_lo, key_hi], dtype=np.uint64),
            counter=np.array([0, block, 0, 0], dtype=np.uint64),
        )
        out[lo:hi] = np.random.Generator(bitgen).standard_normal(hi - lo)
    return out


def generate_field(level_count: int, x_min: float, x_max: float, step: float,
                   master_seed: int, replica_index: int,
                   cell_cap: int = DEFAULT_CELL_CAP) -> NoiseField:
    """Sample a fresh environment. Identical inputs give bit-identical fields."""
    if level_count < 1:
        raise ValueError(f"level_count must be >= 1, got {level_count}")
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    if not x_max > x_min:
        raise ValueError(f"empty extent [{x_min}, {x_max}]")
    if replica_index < 0:
        raise ValueError(f"replica_index must be >= 0, got {replica_index}")
    grid_size = int(round((x_max - x_min) / step)) + 1
    if grid_size * level_count > cell_cap:
        raise ValueError(
            f"field of {level_count} x {grid_size} samples exceeds the cap of "
            f"{cell_cap} cells; enlarge cell_cap or coarsen the grid"
        )
    scale = np.sqrt(step)
    samples = np.empty((level_count, grid_size), dtype=np.float64)
    samples[:, 0] = 0.0
    for k in range(level_count):
        inc = _level_normals(master_seed, replica_index, k, grid_size - 1)
        np.cumsum(inc * scale, out=samples[k, 1:])
    samples.setflags(write=False)
    return NoiseField(level_count, float(x_min), float(x_max), float(step),
                      samples, int(master_seed), int(replica_index))


def snap_index(field: NoiseField, x: float) -> int:
    """Index of the nearest grid point at or below x (down-biased snap)."""
    idx = int(np.floor((x - field.x_min) / field.step + _SNAP_TOL))
    if idx < 0 or idx >= field.grid_size:
        raise ValueError(
            f"abscissa {x} outside the field extent [{field.x_min}, {field.x_max}]"
        )
    return idx


def grid_x(field: NoiseField, idx: int) -> float:
    assert 0 <= idx < field.grid_size
    return field.x_min + idx * field.step


def value_at(field: NoiseField, x: float, k: int) -> float:
    """Line k at the snapped abscissa; value_at(x_min, k) is exactly 0."""
    if not 0 <= k < field.level_count:
        raise ValueError(f"level {k} outside [0, {field.level_count})")
    return float(field.samples[k, snap_index(field, x)])


def modulus_of_continuity(field: NoiseField, k: int, r: float) -> float:
    """sup |B(s)-B(t)| over grid pairs with |s-t| <= r on line k."""
    if not 0 <= k < field.level_count:
        raise ValueError(f"level {k} outside [0, {field.level_count})")
    lag_max = int(np.floor(r / field.step + _SNAP_TOL))
    row = field.samples[k]
    worst = 0.0
    for lag in range(1, lag_max + 1):
        d = np.max(np.abs(row[lag:] - row[:-lag]))
        worst = max(worst, float(d))
    return worst


# ---------------------------------------------------------------------------
# Binary replay format: 4-byte magic (version baked in), header, row-major
# float64 payload.
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sq d d d Q q")


def dump_field(field: NoiseField, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, field.level_count, field.x_min, field.x_max,
                              field.step, field.master_seed & _MASK64,
                              field.replica_index))
        fh.write(np.ascontiguousarray(field.samples, dtype="<f8").tobytes())


def load_field(path: str) -> NoiseField:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, level_count, x_min, x_max, step, seed, replica = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: unrecognized magic {magic!r}")
        grid_size = int(round((x_max - x_min) / step)) + 1
        payload = fh.read()
    samples = np.frombuffer(payload, dtype="<f8")
    if samples.size != level_count * grid_size:
        raise ValueError(
            f"{path}: payload holds {samples.size} floats, expected "
            f"{level_count * grid_size}"
        )
    samples = samples.reshape(level_count, grid_size).astype(np.float64)
    samples.setflags(write=False)
    return NoiseField(int(level_count), float(x_min), float(x_max), float(step),
                      samples, int(seed), int(replica))
