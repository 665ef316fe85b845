import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from waveleton.errors import CFLError, DivergenceError
from waveleton.moyal import (
    DynamicsConfig, Potential, active_orders, check_cfl, evolve, moyal_operator, moyal_rhs, moyal_terms,
    spectral_derivative,
)
from waveleton.wigner import gaussian_field

EXT = (-8.0, 8.0)


@pytest.fixture(scope="module")
def field():
    return gaussian_field(128, 128, EXT, EXT, sigma=1.0, q0=0.5, p0=-0.3)


@settings(max_examples=50)
@given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=0, max_size=7), st.integers(0, 3))
def test_derivatives_beyond_degree_vanish(coeffs, extra):
    u = Potential(tuple(coeffs))
    assert u.derivative(u.degree + 1 + extra).coefficients == ()
    q = np.linspace(-2, 2, 7)
    assert np.allclose(u(q), np.polyval(list(reversed(u.coefficients)) or [0.0], q))


def test_active_orders():
    assert active_orders(Potential(()), 5) == []
    assert active_orders(Potential.harmonic(), 5) == [0]
    assert active_orders(Potential.quartic(1.0), 0) == [0]
    assert active_orders(Potential.quartic(1.0), 5) == [0, 1]
    assert active_orders(Potential((0, 0, 0, 0, 0, 0, 1.0)), 5) == [0, 1, 2]


def test_free_rhs_is_kinetic_only(field):
    terms = moyal_terms(field, Potential(()), DynamicsConfig(truncation=3))
    assert list(terms) == ["kinetic"]
    dw = spectral_derivative(field.values, 1, field.dq, 0)
    assert np.array_equal(moyal_rhs(field, Potential(()), DynamicsConfig()).values, -field.p[None, :] * dw)


def _symbolic_gaussian():
    q, p = sympy.symbols("q p", real=True)
    w = sympy.exp(-(q - sympy.Rational(1, 2)) ** 2 - (p + sympy.Rational(3, 10)) ** 2) / sympy.pi
    return q, p, w


def test_harmonic_rhs_is_liouville(field):
    q, p, w = _symbolic_gaussian()
    oracle = sympy.lambdify((q, p), -p * sympy.diff(w, q) + q * sympy.diff(w, p), "numpy")
    rhs = moyal_rhs(field, Potential.harmonic(), DynamicsConfig(truncation=4)).values
    assert np.abs(rhs - oracle(*field.mesh())).max() < 1e-8


def test_quartic_first_correction_matches_symbolic_expansion(field):
    lam, hbar = 0.3, 0.7
    q, p, w = _symbolic_gaussian()
    l = 1
    u = lam * q**4
    coeff = (-1) ** l * (sympy.Float(hbar) / 2) ** (2 * l) / sympy.factorial(2 * l + 1)
    term = sympy.simplify(coeff * sympy.diff(u, q, 3)) * sympy.diff(w, p, 3)
    assert sympy.simplify(coeff * sympy.diff(u, q, 3) + hbar**2 * lam * q) == 0
    oracle = sympy.lambdify((q, p), term, "numpy")
    f = field.with_values(field.values)
    got = moyal_terms(f, Potential.quartic(lam), DynamicsConfig(truncation=1, hbar=hbar))[1]
    assert np.abs(got - oracle(*field.mesh())).max() < 1e-8


def test_backends_agree(field):
    u = Potential((0.0, 0.1, 0.5, 0.0, 0.05))
    a = moyal_rhs(field, u, DynamicsConfig(truncation=1)).values
    b = moyal_rhs(field, u, DynamicsConfig(truncation=1, backend="wavelet")).values
    assert np.abs(a - b).max() < 1e-6


@pytest.mark.parametrize("backend", ["spectral", "wavelet"])
def test_operator_matches_rhs(backend):
    f = gaussian_field(32, 32, (-6, 6), (-6, 6), sigma=1.0, q0=0.4)
    u = Potential((0.0, 0.0, 0.5, 0.0, 0.02))
    cfg = DynamicsConfig(truncation=2, backend=backend)
    r = moyal_operator(f, u, cfg)
    assert np.abs(r @ f.values.ravel() - moyal_rhs(f, u, cfg).values.ravel()).max() < 1e-12


def test_zero_field_stays_zero():
    f = gaussian_field(32, 32, EXT, EXT).with_values(np.zeros((32, 32)))
    tr = evolve(f, Potential.quartic(0.1), DynamicsConfig(dt=1e-3, t_final=0.05, stride=10))
    assert all(not np.any(s.values) for s in tr.fields)


def test_free_drift():
    f = gaussian_field(128, 128, EXT, EXT, sigma=1.0, p0=0.8)
    tr = evolve(f, Potential(()), DynamicsConfig(dt=1e-3, t_final=1.0, stride=250))
    for t, s in zip(tr.times, tr.fields):
        centre = np.sum(s.q_marginal() * s.q) * s.dq
        assert abs(centre - 0.8 * t) < 1e-4


def test_snapshot_cadence():
    f = gaussian_field(32, 32, EXT, EXT)
    tr = evolve(f, Potential.harmonic(), DynamicsConfig(dt=0.01, t_final=0.105, stride=4), edge_tol=None)
    assert np.allclose(tr.times, [0, 0.04, 0.08, 0.105])


def test_mass_conserved_with_quantum_correction():
    f = gaussian_field(64, 64, EXT, EXT, sigma=1.0, q0=1.0)
    tr = evolve(f, Potential((0.0, 0.0, 0.5, 0.0, 0.05)), DynamicsConfig(truncation=1, dt=1e-3, t_final=0.5,
                                                                            stride=100))
    assert max(abs(s.total() - f.total()) for s in tr.fields) < 1e-6


def test_quadratic_truncation_irrelevant():
    f = gaussian_field(64, 64, EXT, EXT, sigma=0.8, q0=1.0)
    a = evolve(f, Potential.harmonic(), DynamicsConfig(truncation=0, dt=2e-3, t_final=0.2))
    b = evolve(f, Potential.harmonic(), DynamicsConfig(truncation=5, dt=2e-3, t_final=0.2))
    assert np.abs(a.final.values - b.final.values).max() <= 1e-12


def test_cfl_violation():
    f = gaussian_field(64, 64, EXT, EXT)
    with pytest.raises(CFLError) as err:
        check_cfl(f, Potential.harmonic(), DynamicsConfig(dt=0.5))
    assert err.value.field == "dynamics.dt"


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_names_step():
    f = gaussian_field(32, 32, EXT, EXT)
    cfg = DynamicsConfig(dt=1e-5, t_final=1e-3, cfl=1e12)
    with pytest.raises(DivergenceError) as err:
        evolve(f, Potential((0, 0, 0, 0, 1e9)), cfg)
    assert err.value.step >= 1
