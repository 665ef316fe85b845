import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from waveleton.errors import RegularityError, ShapeError
from waveleton.operators import (
    apply_compressed, assemble_derivative_matrix, compress, connection_coefficients, connection_quadrature,
    mass_matrix, wavelet_domain,
)
from waveleton.wavelets import DyadicGrid, daubechies_filter, haar


@pytest.mark.parametrize("n", [2, 3, 4, 6, 8])
def test_first_order_moments(n):
    t = connection_coefficients(daubechies_filter(n), 1)
    assert t[0] == 0.0
    assert abs(t.values.sum()) < 1e-10
    assert abs(np.dot(t.shifts, t.values) + 1) < 1e-10
    assert np.array_equal(t.values, -t.values[::-1])


@pytest.mark.parametrize("n", [3, 4, 6])
def test_second_order_moments(n):
    t = connection_coefficients(daubechies_filter(n), 2)
    assert np.array_equal(t.values, t.values[::-1])
    assert abs(t.values.sum()) < 1e-10
    assert abs(np.dot(t.shifts.astype(float) ** 2, t.values) - 2) < 1e-10


def test_support_range():
    t = connection_coefficients(daubechies_filter(3), 1)
    assert list(t.shifts) == list(range(-4, 5))
    assert t[5] == 0.0 and t[-7] == 0.0


def test_regularity_requirement():
    with pytest.raises(RegularityError):
        connection_coefficients(haar(), 1)
    with pytest.raises(RegularityError):
        connection_coefficients(daubechies_filter(2), 2)


def test_d4_table_closed_form():
    # int phi'(x) phi(x - l) dx for D4: Gamma_1 = -2/3, Gamma_2 = 1/12
    t = connection_coefficients(daubechies_filter(2), 1)
    assert abs(t[1] + 2 / 3) < 1e-12 and abs(t[2] - 1 / 12) < 1e-12
    assert abs(t[-1] - 2 / 3) < 1e-12 and abs(t[-2] + 1 / 12) < 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_table_matches_quadrature(n):
    f = daubechies_filter(n)
    t = connection_coefficients(f, 1)
    oracle = connection_quadrature(f, 1, level=12)
    for l, v in oracle.items():
        assert abs(t[l] - v) < 1e-6


def test_ramp_differentiates_to_one():
    grid = DyadicGrid(6)
    d = assemble_derivative_matrix(connection_coefficients(daubechies_filter(2), 1), grid)
    out = d @ grid.points
    assert np.abs(out[3:-3] - 1).max() < 1e-6


@pytest.mark.parametrize("n", [2, 3, 5])
def test_matrix_annihilates_constants(n):
    d = assemble_derivative_matrix(connection_coefficients(daubechies_filter(n), 1), DyadicGrid(5))
    assert np.abs(d.sum(axis=1)).max() < 1e-10
    assert np.abs(d @ np.zeros(32)).max() == 0.0


def test_second_derivative_of_sine():
    grid = DyadicGrid(7)
    d2 = assemble_derivative_matrix(connection_coefficients(daubechies_filter(4), 2), grid)
    x = grid.points
    err = d2 @ np.sin(2 * np.pi * x) + (2 * np.pi) ** 2 * np.sin(2 * np.pi * x)
    assert np.linalg.norm(err) / np.linalg.norm((2 * np.pi) ** 2 * np.sin(2 * np.pi * x)) < 1e-4


def test_bandwidth():
    d = assemble_derivative_matrix(connection_coefficients(daubechies_filter(2), 1), DyadicGrid(5))
    op = compress(d, 0.0)
    # shifts +-1 and +-2 are nonzero, Gamma_0 vanishes
    assert op.stored == 4 * 32
    assert abs(op.sparsity_ratio - 4 / 32) < 1e-15
    rows, cols = np.nonzero(d)
    offset = (rows - cols) % 32
    assert set(offset.tolist()) == {1, 2, 30, 31}


def test_mass_matrix_is_identity():
    for n in (1, 2, 3, 6):
        m = mass_matrix(daubechies_filter(n), DyadicGrid(4))
        assert np.abs(m - np.eye(16)).max() < 1e-8


def test_compress_exact_at_zero_threshold():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((40, 40))
    op = compress(a, 0.0)
    x = rng.standard_normal(40)
    assert np.abs(apply_compressed(op, x) - a @ x).max() <= 1e-14 * np.abs(a @ x).max()
    assert op.dropped_norm_bound == 0.0


def test_compress_shape_mismatch():
    op = compress(np.eye(4), 0.5)
    with pytest.raises(ShapeError):
        apply_compressed(op, np.ones(5))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), rel=st.floats(1e-6, 0.5))
def test_compression_bound_holds(seed, rel):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((32, 32)) * np.exp(-np.abs(np.subtract.outer(np.arange(32), np.arange(32))))
    op = compress(a, rel * np.abs(a).max())
    assert np.all(np.abs(op.entries.data) > op.threshold)
    x = rng.standard_normal(32)
    err = np.linalg.norm(a @ x - apply_compressed(op, x))
    assert err <= op.dropped_norm_bound * np.linalg.norm(x) + 1e-12


def test_wavelet_domain_is_orthogonal_conjugation():
    d = assemble_derivative_matrix(connection_coefficients(daubechies_filter(3), 1), DyadicGrid(5))
    w = wavelet_domain(d, daubechies_filter(3))
    assert abs(np.linalg.norm(w) - np.linalg.norm(d)) < 1e-10
    assert np.allclose(np.sort(np.abs(np.linalg.eigvals(w))), np.sort(np.abs(np.linalg.eigvals(d))), atol=1e-8)
