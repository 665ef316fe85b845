"""Time and grid convergence of the GDR solution for a squeezed harmonic state."""

import numpy as np

from waveleton.galerkin import cutoff_error, gdr_evolve
from waveleton.moyal import DynamicsConfig, Potential, evolve
from waveleton.wigner import gaussian_field

EXT = (-6.0, 6.0)
T = 0.5


def time_errors(n=16, n_times=(4, 8, 16, 32)):
    f = gaussian_field(n, n, EXT, EXT, sigma=0.8)
    u = Potential.harmonic()
    ref = evolve(f, u, DynamicsConfig(dt=1e-3, t_final=T), edge_tol=None)
    prev = None
    for nt in n_times:
        res = gdr_evolve(f, u, DynamicsConfig(t_final=T), nt)
        err = max(np.sqrt(np.sum((g.values - ref.fields[int(np.argmin(np.abs(ref.times - t)))].values) ** 2)
                          * f.cell_area) for t, g in zip(res.times, res.fields))
        ratio = "" if prev is None else f"  ratio {err / prev:.3f}"
        print(f"N_t={nt:3d}  L2 error vs method of lines {err:.3e}{ratio}")
        prev = err


def grid_errors(sizes=(16, 32, 64), n_time=8):
    finals = {}
    for n in sizes:
        f = gaussian_field(n, n, EXT, EXT, sigma=0.8)
        finals[n] = gdr_evolve(f, Potential.harmonic(), DynamicsConfig(t_final=T), n_time).fields[-1]
    for a, b in zip(sizes, sizes[1:]):
        print(f"N_q={a:3d} -> {b:3d}  cut-off error {cutoff_error(finals[a], finals[b]):.4f}")


if __name__ == "__main__":
    time_errors()
    grid_errors()
