"""Serialization round trips and format validation."""

from __future__ import annotations

import random

import numpy as np
import pytest

from gpamlab.enhancement import EnhancedPair, enhance
from gpamlab.fieldio import (
    field_from_text,
    field_to_text,
    read_enhanced_pair,
    read_field,
    read_trajectory,
    write_enhanced_pair,
    write_field,
    write_trajectory,
)
from gpamlab.fields import Grid, SpectralField, constant_field, cosine_field, mode_field
from gpamlab.lp import DyadicPartition
from gpamlab.noise import sample_white_noise, unit_density_field
from gpamlab.pde import NONLINEARITIES, SolveConfig, solve_classical

from conftest import random_real_field


def _random_complex_field(n, seed):
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    coeffs[Grid(n).nyquist_mask] = 0.0
    coeffs[rng.standard_normal((n, n)) > 0.3] = 0.0  # leave holes
    return SpectralField(Grid(n), coeffs)


def test_field_round_trip_exact(tmp_path):
    u = _random_complex_field(16, 5)
    path = tmp_path / "u.field"
    write_field(path, u)
    v = read_field(path)
    assert v.grid == u.grid
    assert np.array_equal(v.coeffs, u.coeffs)


def test_field_text_is_lexicographic_and_sparse():
    g = Grid(8)
    u = cosine_field(g, 1, 0, 2.0) + mode_field(g, -2, 3, 1.5j)
    lines = field_to_text(u).splitlines()
    assert lines[0] == "GPAM-FIELD v1 n=8"
    modes = [tuple(map(int, ln.split()[:2])) for ln in lines[1:]]
    assert modes == sorted(modes)
    assert set(modes) == {(-2, 3), (-1, 0), (1, 0)}
    zero = field_to_text(constant_field(g, 0.0))
    assert zero.splitlines() == ["GPAM-FIELD v1 n=8"]


def test_reader_accepts_any_order():
    u = _random_complex_field(16, 6)
    lines = field_to_text(u).splitlines()
    random.Random(0).shuffle(lines[1:])
    v = field_from_text("\n".join(lines))
    assert np.array_equal(v.coeffs, u.coeffs)


def test_reader_rejects_malformed():
    with pytest.raises(ValueError):
        field_from_text("")
    with pytest.raises(ValueError):
        field_from_text("FIELD v2 n=8\n")
    with pytest.raises(ValueError):
        field_from_text("GPAM-FIELD v1 m=8\n")
    with pytest.raises(ValueError):
        field_from_text("GPAM-FIELD v1 n=8\n1 0 1.0\n")
    with pytest.raises(ValueError):
        field_from_text("GPAM-FIELD v1 n=8\n1 0 1.0 0.0\n1 0 2.0 0.0\n")
    with pytest.raises(ValueError):
        field_from_text("GPAM-FIELD v1 n=8\n7 0 1.0 0.0\n")
    with pytest.raises(ValueError):
        field_from_text("GPAM-FIELD v1 n=8\n1 0 nan 0.0\n")


def test_enhanced_pair_round_trip(tmp_path):
    g = Grid(32)
    part = DyadicPartition(g)
    theta = unit_density_field(sample_white_noise(g, 11, 0))
    pair = enhance(theta, 3.5, part)
    write_enhanced_pair(tmp_path / "pair", pair, alpha=0.75)
    back, alpha = read_enhanced_pair(tmp_path / "pair")
    assert alpha == 0.75
    assert np.array_equal(back.first.coeffs, pair.first.coeffs)
    assert np.array_equal(back.second.coeffs, pair.second.coeffs)
    manifest = (tmp_path / "pair" / "manifest.txt").read_text()
    assert manifest.splitlines()[0] == "GPAM-ENH v1 alpha=0.75"


def test_trajectory_round_trip(tmp_path):
    g = Grid(16)
    rng = np.random.default_rng(7)
    h = random_real_field(g, 3, rng)
    h = h - constant_field(g, h.mean_value.real)
    u0 = constant_field(g, 1.0) + cosine_field(g, 1, 1, 0.1)
    cfg = SolveConfig(0.05, 1e-2, scheme="etd2rk", snap_every=2)
    traj = solve_classical(u0, h, 0.3, NONLINEARITIES["sine"], cfg)
    write_trajectory(tmp_path / "run", traj)
    back = read_trajectory(tmp_path / "run")
    assert back.times == traj.times
    assert back.config == traj.config
    assert back.provenance == traj.provenance
    assert back.exploded == traj.exploded and back.explosion_time is None
    for a, b in zip(back.states, traj.states):
        assert np.array_equal(a.coeffs, b.coeffs)


def test_trajectory_manifest_guard(tmp_path):
    (tmp_path / "manifest.json").write_text('{"format": "other"}')
    with pytest.raises(ValueError):
        read_trajectory(tmp_path)
