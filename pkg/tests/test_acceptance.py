"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import numpy as np
import pytest
import sympy

from waveleton.cli import run_scenario
from waveleton.galerkin import cutoff_error, gdr_evolve, multiscale_decompose
from waveleton.io import read_reports
from waveleton.moyal import DynamicsConfig, Potential, evolve, moyal_terms
from waveleton.operators import (
    apply_compressed, assemble_derivative_matrix, compress, connection_coefficients, connection_quadrature,
    significant_fraction, wavelet_domain,
)
from waveleton.scenario import bundled_scenarios
from waveleton.wavelets import DyadicGrid, daubechies_filter, fwt, ifwt
from waveleton.wigner import (
    cat_state, cat_wigner, gaussian_field, gaussian_state, gaussian_wigner, momentum_density, wigner_of_state,
)

EXT = (-8.0, 8.0)


def _l2(a, b, area):
    return float(np.sqrt(np.sum((a - b) ** 2) * area))


def test_c01_wavelet_round_trip_and_parseval(criterion):
    rng = np.random.default_rng(2024)
    signals = rng.standard_normal((100, 256))
    rt = pv = 0.0
    for n in range(1, 7):
        f = daubechies_filter(n)
        for x in signals:
            t = fwt(x, f, 8)
            rt = max(rt, np.abs(ifwt(t, f) - x).max())
            pv = max(pv, abs(np.sum(t.to_vector() ** 2) - np.sum(x**2)))
    ok = rt <= 1e-10 and pv <= 1e-10
    assert criterion(1, "wavelet round trip / Parseval", ok, f"max round-trip {rt:.2e}, max Parseval {pv:.2e}")


def test_c02_connection_coefficients(criterion):
    f = daubechies_filter(2)
    table = connection_coefficients(f, 1)
    oracle = connection_quadrature(f, 1, level=12)
    table_err = max(abs(table[l] - v) for l, v in oracle.items())
    grid = DyadicGrid(8)
    d = assemble_derivative_matrix(table, grid)
    x = grid.points
    exact = 2 * np.pi * np.cos(2 * np.pi * x)
    rel = np.linalg.norm(d @ np.sin(2 * np.pi * x) - exact) / np.linalg.norm(exact)
    ok = table_err <= 1e-6 and rel <= 1e-4
    assert criterion(2, "D4 connection coefficients", ok, f"table vs quadrature {table_err:.2e}, sine rel L2 {rel:.2e}")


def test_c03_operator_near_diagonality(criterion):
    f = daubechies_filter(2)
    table = connection_coefficients(f, 1)
    fractions = []
    ops = {}
    for level in range(4, 9):
        d1 = assemble_derivative_matrix(table, DyadicGrid(level))
        w = wavelet_domain(d1 @ d1, f)
        fractions.append(significant_fraction(w, 1e-6))
        ops[level] = w
    monotone = all(a >= b for a, b in zip(fractions, fractions[1:]))
    w = ops[8]
    op = compress(w, 1e-3 * np.abs(w).max())
    rng = np.random.default_rng(7)
    worst = -np.inf
    for _ in range(100):
        v = rng.standard_normal(w.shape[0])
        err = np.linalg.norm(w @ v - apply_compressed(op, v))
        worst = max(worst, err - op.dropped_norm_bound * np.linalg.norm(v))
    ok = monotone and worst <= 0
    detail = "fractions " + ", ".join(f"{x:.3f}" for x in fractions) + f"; max(err - bound) {worst:.2e}"
    assert criterion(3, "operator near-diagonality", ok, detail)


def test_c04_wigner_fidelity(criterion):
    s = gaussian_state(256, EXT, sigma=1.0)
    f = wigner_of_state(s, 256)
    q, p = f.mesh()
    closed = np.abs(f.values - gaussian_wigner(q, p)).max()
    mq = np.abs(f.q_marginal() - np.abs(s.samples) ** 2).max()
    mp = np.abs(f.p_marginal() - momentum_density(s, f.p)).max()
    a = 2.0
    c = wigner_of_state(cat_state(256, EXT, a, 0.5), 256, EXT)
    cq, cp = c.mesh()
    cat_err = np.abs(c.values - cat_wigner(cq, cp, a, 0.5)).max()
    row = c.values[np.argmin(np.abs(c.q))]
    pos = c.p >= 0
    pp, r = c.p[pos], row[pos]
    j = np.nonzero(np.sign(r[1:]) != np.sign(r[:-1]))[0][0]
    zero = pp[j] - r[j] * (pp[j + 1] - pp[j]) / (r[j + 1] - r[j])
    zero_err = abs(zero - np.pi / (4 * a))
    ok = closed <= 1e-6 and cat_err <= 1e-6 and mq <= 1e-8 and mp <= 1e-8 and zero_err <= c.dp
    detail = (f"Gaussian {closed:.2e}, cat {cat_err:.2e}, marginals {mq:.2e}/{mp:.2e}, "
              f"first zero off by {zero_err:.2e} (dp {c.dp:.3f})")
    assert criterion(4, "Wigner transform fidelity", ok, detail)


def test_c05_exact_moyal_cases(criterion):
    area = (16 / 128) ** 2
    # free shear: W(q, p, t) = W0(q - p t, p)
    f0 = gaussian_field(128, 128, EXT, EXT, sigma=1.0, p0=0.5)
    free = evolve(f0, Potential(()), DynamicsConfig(dt=1e-3, t_final=1.0, stride=500))
    q, p = f0.mesh()
    shear = _l2(free.final.values, gaussian_wigner(q - p, p, 1.0, 0.0, 0.5), area)
    # harmonic quarter turn: (q0, p0) = (2, 0) rotates rigidly to (0, -2)
    h0 = gaussian_field(128, 128, EXT, EXT, sigma=1.0, q0=2.0)
    quarter = evolve(h0, Potential.harmonic(), DynamicsConfig(dt=1e-3, t_final=np.pi / 2, stride=500))
    rotation = _l2(quarter.final.values, gaussian_wigner(q, p, 1.0, 0.0, -2.0), area)
    harm = evolve(h0, Potential.harmonic(), DynamicsConfig(dt=1e-3, t_final=2 * np.pi, stride=1000))
    mass = max(abs(s.total() - h0.total()) for s in list(free.fields) + list(quarter.fields) + list(harm.fields))
    purity = abs(harm.final.purity() - h0.purity())
    ok = shear <= 1e-3 and rotation <= 1e-3 and mass <= 1e-6 and purity <= 1e-3
    detail = f"shear {shear:.2e}, rotation {rotation:.2e}, mass {mass:.2e}, purity drift {purity:.2e}"
    assert criterion(5, "Moyal exact cases", ok, detail)


def test_c06_truncation_structure(criterion):
    lam, hbar = 0.3, 1.0
    f = gaussian_field(128, 128, EXT, EXT, sigma=1.0, q0=0.5, p0=-0.3)
    qs, ps = sympy.symbols("q p", real=True)
    w = sympy.exp(-(qs - sympy.Rational(1, 2)) ** 2 - (ps + sympy.Rational(3, 10)) ** 2) / sympy.pi
    oracle = sympy.lambdify((qs, ps), -hbar**2 * lam * qs * sympy.diff(w, ps, 3), "numpy")
    term = moyal_terms(f, Potential.quartic(lam), DynamicsConfig(truncation=1, hbar=hbar))[1]
    quartic = np.abs(term - oracle(*f.mesh())).max()
    h0 = gaussian_field(128, 128, EXT, EXT, sigma=0.8, q0=1.0, p0=0.5)
    a = evolve(h0, Potential.harmonic(), DynamicsConfig(truncation=0, dt=1e-3, t_final=0.5, stride=100))
    b = evolve(h0, Potential.harmonic(), DynamicsConfig(truncation=5, dt=1e-3, t_final=0.5, stride=100))
    same = max(np.abs(x.values - y.values).max() for x, y in zip(a.fields, b.fields))
    ok = quartic <= 1e-8 and same <= 1e-12
    assert criterion(6, "truncation structure", ok, f"quartic term {quartic:.2e}, L=0 vs L=5 {same:.2e}")


def _gdr_error(n_time):
    ext = (-6.0, 6.0)
    f = gaussian_field(16, 16, ext, ext, sigma=0.8)
    u = Potential.harmonic()
    res = gdr_evolve(f, u, DynamicsConfig(t_final=0.5), n_time)
    ref = evolve(f, u, DynamicsConfig(dt=1e-3, t_final=0.5), edge_tol=None)
    err = 0.0
    for t, g in zip(res.times, res.fields):
        m = ref.fields[int(np.argmin(np.abs(ref.times - t)))]
        err = max(err, _l2(g.values, m.values, f.cell_area))
    return err, float(np.abs(res.system.residuals).max())


def test_c07_gdr_consistency(criterion):
    e8, r8 = _gdr_error(8)
    e16, r16 = _gdr_error(16)
    ratio = e16 / e8
    ok = max(r8, r16) <= 1e-10 and e8 <= 1e-2 and ratio <= 0.6
    detail = f"residual {max(r8, r16):.2e}, error N_t=8 {e8:.2e}, N_t=16 {e16:.2e}, ratio {ratio:.3f}"
    assert criterion(7, "GDR consistency", ok, detail)


def test_c08_multiscale_decomposition(criterion):
    rng = np.random.default_rng(11)
    sums = energy = 0.0
    for _ in range(200):
        shape = tuple(2 ** rng.integers(3, 6, size=2))
        x = rng.standard_normal(shape)
        filt = daubechies_filter(int(rng.integers(1, 5)))
        split = int(rng.integers(0, int(np.log2(min(shape))) + 1))
        parts = multiscale_decompose(x, filt, split)
        sums = max(sums, np.abs(parts.total() - x).max())
        energy = max(energy, abs(sum(parts.energies().values()) - np.sum(x**2)))
    ok = sums <= 1e-10 and energy <= 1e-10
    assert criterion(8, "multiscale decomposition", ok, f"sum {sums:.2e}, energy {energy:.2e}")


def test_c09_cutoff_convergence(criterion):
    ext = (-6.0, 6.0)
    finals = {}
    for n in (16, 32, 64):
        f = gaussian_field(n, n, ext, ext, sigma=0.8)
        finals[n] = gdr_evolve(f, Potential.harmonic(), DynamicsConfig(t_final=0.5), 8).fields[-1]
    errs = [cutoff_error(finals[16], finals[32]), cutoff_error(finals[32], finals[64])]
    ok = errs[0] > errs[1]
    assert criterion(9, "cut-off convergence", ok, f"16->32 {errs[0]:.4f}, 32->64 {errs[1]:.4f}")


@pytest.fixture(scope="module")
def scenario_runs(tmp_path_factory):
    names = sorted(bundled_scenarios())
    roots = []
    for run in ("a", "b"):
        root = tmp_path_factory.mktemp(f"run_{run}")
        for name in names:
            assert run_scenario(name, root / name) == 0
        roots.append(root)
    return names, roots


def test_c10_pattern_pipeline(criterion, scenario_runs):
    names, (a, b) = scenario_runs
    fig5 = read_reports(a / "fig5_waveleton" / "reports.jsonl")
    wave = all(r["label"] == "waveleton" and r["entropy"] <= 1.5 and r["participation_ratio"] <= 8 for r in fig5)
    neg = read_reports(a / "fig2_three_packets" / "reports.jsonl")[0]["negativity"]
    chaos = read_reports(a / "fig4_chaotic" / "reports.jsonl")[0]["label"]
    differing = []
    for name in names:
        files = sorted(p.relative_to(a) for p in (a / name).iterdir())
        if files != sorted(p.relative_to(b) for p in (b / name).iterdir()):
            differing.append(name)
            continue
        differing += [str(p) for p in files if (a / p).read_bytes() != (b / p).read_bytes()]
    ok = wave and neg > 1e-3 and chaos == "chaotic-like" and not differing
    detail = (f"fig5 waveleton at {sum(r['label'] == 'waveleton' for r in fig5)}/{len(fig5)} snapshots, "
              f"fig2 negativity {neg:.3f}, fig4 {chaos}, {len(differing)} differing files")
    assert criterion(10, "pattern pipeline", ok, detail)
