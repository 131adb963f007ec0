"""Independent finite-difference eigenfrequency oracle.

Deliberately a different discretization from the package solver: W-only
unknowns on a dense uniform radial grid, second-order central stencils
(one-sided at the ends), trapezoid quadrature of the same strain and
kinetic energy integrals, clamp enforced by dropping the first two grid
values (W = 0 and, to first order, W' = 0 at the fixture edge).  The
free outer edge needs no constraint because the energy form is what is
minimized.

The lowest eigenvalue comes from shift-invert Lanczos; a direct banded
solve of the standardized pencil loses the lowest mode under the float64
span of a fourth-order operator once the grid passes a few thousand
points, while shift-invert stays accurate through the 3000-point default
(checked against grid refinement before freezing).
"""

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh


def _derivative_operators(m, h):
    d1 = sp.lil_matrix((m, m))
    d2 = sp.lil_matrix((m, m))
    for j in range(1, m - 1):
        d1[j, j - 1], d1[j, j + 1] = -0.5 / h, 0.5 / h
        d2[j, j - 1], d2[j, j], d2[j, j + 1] = 1 / h**2, -2 / h**2, 1 / h**2
    d1[0, 0:3] = np.array([-1.5, 2.0, -0.5]) / h
    d1[m - 1, m - 3:m] = np.array([0.5, -2.0, 1.5]) / h
    d2[0, 0:4] = np.array([2.0, -5.0, 4.0, -1.0]) / h**2
    d2[m - 1, m - 4:m] = np.array([-1.0, 4.0, -5.0, 2.0]) / h**2
    return d1.tocsr(), d2.tocsr()


def oracle_frequency(plate, n, points=3000):
    """Lowest eigenfrequency [Hz] of harmonic ``n`` on the clamped annulus."""
    a, b = plate.fixture_radius, plate.outer_radius
    r = np.linspace(a, b, points)
    h = r[1] - r[0]
    nu = plate.poisson_ratio
    cn = 2.0 * np.pi if n == 0 else np.pi

    d1, d2 = _derivative_operators(points, h)
    trap = np.ones(points)
    trap[0] = trap[-1] = 0.5
    wq = sp.diags(cn * plate.D(r) * r * h * trap)
    r1 = sp.diags(1.0 / r)
    r2 = sp.diags(1.0 / r**2)

    lap = d2 + r1 @ d1 - (n * n) * r2
    curv_t = r1 @ d1 - (n * n) * r2
    twist = r1 @ d1 - r2
    K = (lap.T @ wq @ lap
         - (1 - nu) * (d2.T @ wq @ curv_t + curv_t.T @ wq @ d2)
         + 2 * (1 - nu) * n * n * (twist.T @ wq @ twist))
    mvec = cn * plate.mu(r) * r * h * trap

    Kc = K[2:, 2:].tocsc()
    Mc = sp.diags(mvec[2:]).tocsc()
    lam = eigsh(Kc, k=1, M=Mc, sigma=0.0, which="LM",
                v0=np.ones(Kc.shape[0]), return_eigenvectors=False)[0]
    return float(np.sqrt(lam) / (2.0 * np.pi))
