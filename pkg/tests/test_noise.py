"""Determinism and distributional checks for the sampled environment."""

import numpy as np
import pytest

from kpzlab import noise


def small_field(seed=5, replica=0, levels=3, x_max=1.0, step=0.1):
    return noise.generate_field(levels, 0.0, x_max, step, seed, replica)


def test_regeneration_is_bit_identical():
    a = small_field()
    b = small_field()
    assert a.samples.dtype == np.float64
    assert np.array_equal(a.samples, b.samples)


def test_streams_diverge_by_key():
    base = small_field(seed=5, replica=0)
    assert not np.array_equal(base.samples, small_field(seed=6, replica=0).samples)
    assert not np.array_equal(base.samples, small_field(seed=5, replica=1).samples)
    # distinct levels of one field are distinct streams too
    assert not np.array_equal(base.samples[0], base.samples[1])


def test_left_anchor_is_exactly_zero():
    f = small_field(levels=4)
    assert np.all(f.samples[:, 0] == 0.0)
    assert noise.value_at(f, 0.0, 2) == 0.0


def test_normals_are_prefix_stable_across_blocks():
    # a longer grid must begin with exactly the shorter grid's draws, even
    # when the cut lands on the 2^16 counter-block boundary
    long = noise._level_normals(9, 2, 5, 70001)
    assert np.array_equal(long[:65536], noise._level_normals(9, 2, 5, 65536))
    assert np.array_equal(long[:70000], noise._level_normals(9, 2, 5, 70000))
    assert np.array_equal(long[:100], noise._level_normals(9, 2, 5, 100))


def test_snap_index_behavior():
    f = small_field(step=0.01, x_max=2.0)
    assert noise.snap_index(f, 0.37) == 37
    # interior points snap down
    assert noise.snap_index(f, 0.374999) == 37
    # float fuzz just below a grid point is rescued upward
    assert noise.snap_index(f, 0.37 - 1e-9) == 37
    assert noise.grid_x(f, 37) == pytest.approx(0.37)
    for bad in (-0.01, 2.02):
        with pytest.raises(ValueError):
            noise.snap_index(f, bad)


def test_increment_moments():
    f = noise.generate_field(2, 0.0, 200.0, 0.01, 31, 0)
    inc = np.diff(f.samples, axis=1) / np.sqrt(f.step)
    m = inc.shape[1]
    # chi-square concentration: sum of squares within 4.5 sd of m
    for k in range(2):
        s = float(np.sum(inc[k] ** 2))
        assert abs(s - m) < 4.5 * np.sqrt(2.0 * m)
    r = float(np.corrcoef(inc[0], inc[1])[0, 1])
    assert abs(r) < 4.0 / np.sqrt(m)


def test_modulus_matches_brute_force():
    f = small_field(seed=17, levels=1, x_max=1.0, step=0.1)
    row = f.samples[0]
    lag_max = 3
    brute = max(abs(row[j] - row[i])
                for i in range(len(row)) for j in range(i + 1, min(i + lag_max, len(row) - 1) + 1))
    assert noise.modulus_of_continuity(f, 0, 0.35) == pytest.approx(brute, abs=0.0)
    assert noise.modulus_of_continuity(f, 0, 0.05) == 0.0
    with pytest.raises(ValueError):
        noise.modulus_of_continuity(f, 1, 0.3)


def test_dump_load_round_trip(tmp_path):
    f = small_field(seed=23, replica=4, levels=2, x_max=0.5, step=0.05)
    path = str(tmp_path / "f.kzf")
    noise.dump_field(f, path)
    g = noise.load_field(path)
    assert np.array_equal(f.samples, g.samples)
    assert (g.level_count, g.x_min, g.x_max, g.step) == (2, 0.0, 0.5, 0.05)
    assert (g.master_seed, g.replica_index) == (23, 4)


def test_load_rejects_corruption(tmp_path):
    f = small_field()
    path = str(tmp_path / "f.kzf")
    noise.dump_field(f, path)
    blob = open(path, "rb").read()
    bad_magic = tmp_path / "bad_magic.kzf"
    bad_magic.write_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ValueError):
        noise.load_field(str(bad_magic))
    short = tmp_path / "short.kzf"
    short.write_bytes(blob[:10])
    with pytest.raises(ValueError):
        noise.load_field(str(short))
    clipped = tmp_path / "clipped.kzf"
    clipped.write_bytes(blob[:-8])
    with pytest.raises(ValueError):
        noise.load_field(str(clipped))


def test_generate_field_validation():
    with pytest.raises(ValueError):
        noise.generate_field(0, 0.0, 1.0, 0.1, 1, 0)
    with pytest.raises(ValueError):
        noise.generate_field(2, 0.0, 1.0, 0.0, 1, 0)
    with pytest.raises(ValueError):
        noise.generate_field(2, 1.0, 1.0, 0.1, 1, 0)
    with pytest.raises(ValueError):
        noise.generate_field(2, 0.0, 1.0, 0.1, 1, -1)
    with pytest.raises(ValueError):
        noise.generate_field(3, 0.0, 10.0, 1e-6, 1, 0, cell_cap=1000)


def test_samples_are_read_only():
    f = small_field()
    with pytest.raises(ValueError):
        f.samples[0, 0] = 1.0
