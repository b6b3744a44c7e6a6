"""Shared test utilities: seeded matrix builders and subspace comparison.

Deliberately built on numpy.linalg (not on the package under test) so the
checks stay independent of the code they verify.
"""

import numpy as np


def rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def matrix_with_cond(rows, cols, cond, seed, spread="geometric"):
    """rows x cols matrix with prescribed 2-norm condition number."""
    g = rng(seed)
    u, _ = np.linalg.qr(g.standard_normal((rows, cols)))
    v, _ = np.linalg.qr(g.standard_normal((cols, cols)))
    if spread == "geometric":
        sigma = np.geomspace(1.0, 1.0 / cond, cols)
    elif spread == "one_small":
        sigma = np.ones(cols)
        sigma[-1] = 1.0 / cond
    else:
        raise ValueError(spread)
    return (u * sigma) @ v.T


def clustered_spectrum_matrix(n, radius, seed):
    """Identity plus a scaled random perturbation.

    The eigenvalues land in a disk of roughly the given radius around 1,
    so unrestarted GMRES contracts the residual by about that factor per
    iteration and converges long before the Krylov space closes. Matrices
    with singular-value control alone tend to scatter eigenvalues around
    the origin, which forces GMRES to run all n steps.
    """
    g = rng(seed)
    return np.eye(n) + (radius / np.sqrt(n)) * g.standard_normal((n, n))


def max_principal_angle(x, y):
    """Sine of the largest principal angle between span(x) and span(y).

    Computed from projection residuals, which stay accurate for tiny
    angles; arccos of singular values bottoms out near sqrt(eps) and
    cannot certify agreement below ~1e-8.
    """
    qx, _ = np.linalg.qr(np.asarray(x, dtype=float))
    qy, _ = np.linalg.qr(np.asarray(y, dtype=float))
    a = np.linalg.norm(qy - qx @ (qx.T @ qy), 2)
    b = np.linalg.norm(qx - qy @ (qy.T @ qx), 2)
    return float(max(a, b))
