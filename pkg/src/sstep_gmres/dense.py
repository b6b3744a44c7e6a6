"""Dense kernels: Householder QR, Givens rotations, one-sided Jacobi SVD.

Everything downstream (block orthogonalization, the Arnoldi processes, the
least-squares update, the conditioning diagnostics) builds on this module.
All routines are deterministic for a fixed input on a fixed platform.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "UNIT_ROUNDOFF",
    "GivensRotation",
    "JacobiConvergenceError",
    "QrResult",
    "compute_givens",
    "cond2",
    "householder_qr",
    "jacobi_svd_values",
    "normalize_columns",
]

# Unit roundoff of binary64. Note np.finfo(float).eps is 2u.
UNIT_ROUNDOFF = 2.0 ** -53


class JacobiConvergenceError(RuntimeError):
    """One-sided Jacobi did not converge within the sweep cap.

    The best available singular values are attached as ``values`` so callers
    that only log conditioning can degrade gracefully.
    """

    def __init__(self, values, sweeps):
        super().__init__(
            "one-sided Jacobi SVD did not converge within %d sweeps" % sweeps
        )
        self.values = values
        self.sweeps = sweeps


class QrResult(NamedTuple):
    q: np.ndarray
    r: np.ndarray
    # Index of the first column whose Householder pivot fell below
    # u * ||M||_F (or the caller-supplied scale); None if full rank.
    deficient_col: "int | None"


def _as_matrix(m, name="m"):
    a = np.asarray(m, dtype=float)
    if a.ndim != 2:
        raise ValueError("%s must be 2-dimensional, got shape %r" % (name, a.shape))
    return a


def householder_qr(m, deficiency_scale=None):
    """Thin Householder QR with a nonnegative R diagonal.

    Parameters
    ----------
    m : (rows, cols) array, rows >= cols
    deficiency_scale : float, optional
        Scale against which pivot collapse is judged. A pivot below
        4 * sqrt(rows) * u * deficiency_scale marks the column deficient
        (the sqrt(rows) factor covers cancellation noise from eliminating
        an exactly dependent column). Defaults to ||m||_F. Block
        orthogonalizers pass the norm of the block as it was before
        projection so that fully projected-out columns are still
        recognized.

    Returns
    -------
    QrResult(q, r, deficient_col)
        q is rows x cols with orthonormal columns, r is cols x cols upper
        triangular with r[j, j] >= 0, and m = q @ r. deficient_col is the
        index of the first rank-deficient column, or None.
    """
    a = _as_matrix(m)
    rows, cols = a.shape
    if rows < cols:
        raise ValueError("householder_qr needs rows >= cols, got %d x %d" % (rows, cols))
    if cols == 0:
        return QrResult(np.zeros((rows, 0)), np.zeros((0, 0)), None)

    work = np.array(a, order="F", copy=True)
    scale = float(deficiency_scale) if deficiency_scale is not None else float(np.linalg.norm(a))
    threshold = 4.0 * np.sqrt(rows) * UNIT_ROUNDOFF * scale

    # Store the reflectors; vs[j] has length rows - j.
    vs = []
    deficient = None
    for j in range(cols):
        x = work[j:, j]
        pivot = np.linalg.norm(x)
        if pivot <= threshold and deficient is None:
            deficient = j
        if pivot == 0.0:
            vs.append(None)
            continue
        beta = -np.copysign(pivot, x[0])
        v = x.copy()
        v[0] -= beta
        vtv = v @ v
        if vtv == 0.0:
            vs.append(None)
            work[j, j] = beta
            continue
        vs.append((v, vtv))
        tail = work[j:, j + 1:]
        if tail.shape[1]:
            tail -= np.outer(v, (2.0 / vtv) * (v @ tail))
        work[j, j] = beta
        work[j + 1:, j] = 0.0

    r = np.triu(work[:cols, :cols]).copy()

    # Accumulate the thin Q by applying the reflectors to I in reverse.
    q = np.zeros((rows, cols), order="F")
    for j in range(cols):
        q[j, j] = 1.0
    for j in range(cols - 1, -1, -1):
        if vs[j] is None:
            continue
        v, vtv = vs[j]
        block = q[j:, :]
        block -= np.outer(v, (2.0 / vtv) * (v @ block))

    # Sign convention: R diagonal nonnegative.
    d = np.where(np.diag(r) < 0.0, -1.0, 1.0)
    q *= d
    r *= d[:, None]
    return QrResult(q, r, deficient)


@dataclass
class GivensRotation:
    """Plane rotation [c s; -s c] acting on rows (row, row + 1)."""

    c: float
    s: float
    row: int = 0

    def apply(self, a, b):
        """Rotate the pair (a, b); returns (c*a + s*b, -s*a + c*b)."""
        return self.c * a + self.s * b, -self.s * a + self.c * b


def compute_givens(a, b, row=0):
    """Rotation zeroing b against a; the first entry becomes hypot(a, b) >= 0.

    (a, b) = (0, 0) yields the identity rotation.
    """
    r = np.hypot(a, b)
    if r == 0.0:
        return GivensRotation(1.0, 0.0, row)
    return GivensRotation(a / r, b / r, row)


def _qrcp_r(a):
    """R factor of a column-pivoted Householder QR (values-only preprocessing).

    Column pivoting keeps the one-sided Jacobi iteration fast and accurate on
    badly scaled input; the singular values of R match those of ``a`` up to a
    backward-stable factorization.
    """
    work = np.array(a, dtype=float, order="F", copy=True)
    rows, cols = work.shape
    steps = min(rows, cols)
    for j in range(steps):
        tail = work[j:, j:]
        norms2 = np.einsum("ij,ij->j", tail, tail)
        k = int(np.argmax(norms2))
        if norms2[k] == 0.0:
            break
        if k != 0:
            work[:, [j, j + k]] = work[:, [j + k, j]]
        x = work[j:, j]
        pivot = np.sqrt(norms2[k])
        beta = -np.copysign(pivot, x[0])
        v = x.copy()
        v[0] -= beta
        vtv = v @ v
        if vtv > 0.0:
            rest = work[j:, j + 1:]
            if rest.shape[1]:
                rest -= np.outer(v, (2.0 / vtv) * (v @ rest))
        work[j, j] = beta
        work[j + 1:, j] = 0.0
    return np.triu(work[:steps, :]) if rows >= cols else work[:steps, :]


try:
    import numba

    @numba.njit(cache=True)
    def _jacobi_kernel(w, tol, max_sweeps):
        """Cyclic one-sided Jacobi, in place. Sweeps used, negative if capped."""
        n, k = w.shape
        for sweep in range(max_sweeps):
            rotations = 0
            for p in range(k - 1):
                for q in range(p + 1, k):
                    app = 0.0
                    aqq = 0.0
                    apq = 0.0
                    for i in range(n):
                        wp = w[i, p]
                        wq = w[i, q]
                        app += wp * wp
                        aqq += wq * wq
                        apq += wp * wq
                    if abs(apq) <= tol * np.sqrt(app) * np.sqrt(aqq):
                        continue
                    rotations += 1
                    tau = (aqq - app) / (2.0 * apq)
                    if tau == 0.0:
                        t = 1.0
                    else:
                        t = (1.0 if tau > 0.0 else -1.0) / (
                            abs(tau) + np.hypot(1.0, tau)
                        )
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    for i in range(n):
                        wp = w[i, p]
                        wq = w[i, q]
                        w[i, p] = c * wp - s * wq
                        w[i, q] = s * wp + c * wq
            if rotations == 0:
                return sweep + 1
        return -max_sweeps

except ImportError:  # pragma: no cover - exercised only without numba
    _jacobi_kernel = None


def _round_robin_schedule(k):
    """Tournament pairing: k-1 rounds of disjoint column pairs covering all pairs."""
    players = list(range(k))
    if k % 2:
        players.append(-1)
    m = len(players)
    half = m // 2
    rounds = []
    arr = players[:]
    for _ in range(m - 1):
        left = arr[:half]
        right = arr[half:][::-1]
        ip, iq = [], []
        for a, b in zip(left, right):
            if a >= 0 and b >= 0:
                ip.append(a)
                iq.append(b)
        rounds.append((np.array(ip), np.array(iq)))
        arr = [arr[0]] + [arr[-1]] + arr[1:-1]
    return rounds


def _jacobi_sweeps(w, tol, max_sweeps):
    """One-sided Jacobi on the columns of w, in place. True if converged."""
    k = w.shape[1]
    if k < 2:
        return True
    if _jacobi_kernel is not None:
        return _jacobi_kernel(w, tol, max_sweeps) > 0
    schedule = _round_robin_schedule(k)
    for _ in range(max_sweeps):
        rotations = 0
        for ip, iq in schedule:
            p = w[:, ip]
            q = w[:, iq]
            app = np.einsum("ij,ij->j", p, p)
            aqq = np.einsum("ij,ij->j", q, q)
            apq = np.einsum("ij,ij->j", p, q)
            need = np.abs(apq) > tol * np.sqrt(app) * np.sqrt(aqq)
            if not need.any():
                continue
            rotations += int(need.sum())
            app_r = app[need]
            aqq_r = aqq[need]
            apq_r = apq[need]
            tau = (aqq_r - app_r) / (2.0 * apq_r)
            t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
            # tau == 0 makes sign() vanish; the symmetric case rotates by 45 deg
            t = np.where(tau == 0.0, 1.0, t)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            pr = p[:, need]
            qr = q[:, need]
            w[:, ip[need]] = c * pr - s * qr
            w[:, iq[need]] = s * pr + c * qr
        if rotations == 0:
            return True
    return False


def jacobi_svd_values(m, tol=1e-15, max_sweeps=60):
    """Singular values of m (rows >= cols), descending, by one-sided Jacobi.

    The matrix is first reduced to its pivoted R factor, then Jacobi
    rotations are applied to column pairs until every off-diagonal Gram
    entry is below ``tol`` relative to its diagonal pair. Chosen over a
    bidiagonalization path for the relative accuracy of small singular
    values, which the conditioning diagnostics depend on.

    Raises JacobiConvergenceError (with best available values attached)
    if the sweep cap is exhausted.
    """
    a = _as_matrix(m)
    rows, cols = a.shape
    if rows < cols:
        raise ValueError("jacobi_svd_values needs rows >= cols, got %d x %d" % (rows, cols))
    if cols == 0:
        return np.zeros(0)
    if not np.all(np.isfinite(a)):
        raise ValueError("jacobi_svd_values requires finite entries")
    # Rotating the rows of the pivoted R factor (columns of R^T) converges
    # markedly faster than rotating R or the raw input and preserves the
    # relative accuracy of small values.
    w = np.array(_qrcp_r(a).T, order="F")
    converged = _jacobi_sweeps(w, tol, max_sweeps)
    sigma = np.sort(np.linalg.norm(w, axis=0))[::-1].copy()
    if not converged:
        raise JacobiConvergenceError(sigma, max_sweeps)
    return sigma


def cond2(m):
    """2-norm condition number sigma_max / sigma_min.

    Rank loss reports inf. A smallest singular value at or below the
    rounding-noise floor (4 * sqrt(rows) * u relative to sigma_max) is
    indistinguishable from exact dependence and also reports inf.
    Wide input is transposed first; singular values are unaffected.
    """
    a = _as_matrix(m)
    if a.size == 0 or not np.any(a):
        raise ValueError("cond2 requires a nonzero matrix")
    if a.shape[0] < a.shape[1]:
        a = a.T
    sigma = jacobi_svd_values(a)
    floor = 4.0 * np.sqrt(a.shape[0]) * UNIT_ROUNDOFF * sigma[0]
    if sigma[-1] <= floor:
        return np.inf
    return float(sigma[0] / sigma[-1])


def normalize_columns(m):
    """Scale each column to unit 2-norm.

    Returns (m_normalized, d) with m = m_normalized @ diag(d). A zero
    column cannot be normalized and raises ValueError naming its index.
    """
    a = _as_matrix(m)
    d = np.linalg.norm(a, axis=0)
    zero = np.flatnonzero(d == 0.0)
    if zero.size:
        raise ValueError("column %d has zero norm" % int(zero[0]))
    return a / d, d
