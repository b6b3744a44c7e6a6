"""Polynomial Krylov basis construction: monomial, Newton (Leja-ordered
shifts), and Chebyshev (spectral ellipse) bases, plus the warm-up Ritz
value estimation that parameterizes the latter two."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dense import UNIT_ROUNDOFF

__all__ = [
    "ChebyshevBasis",
    "ChebyshevParams",
    "MonomialBasis",
    "NewtonBasis",
    "RitzSet",
    "build_krylov_block",
    "chebyshev_params",
    "compute_ritz_values",
    "leja_order",
]

MAX_RITZ_COUNT = 64  # Hessenberg eigensolver is meant for warm-up sizes only


@dataclass(frozen=True)
class MonomialBasis:
    """p_j = x^j; the natural power basis."""


@dataclass(frozen=True)
class NewtonBasis:
    """p_j(x) = prod_{i<j} (x - shifts[i]); shifts consumed cyclically.

    Complex shifts must appear in adjacent conjugate pairs (the two are
    applied as one real quadratic) so every generated column stays real.
    """

    shifts: tuple

    def __post_init__(self):
        shifts = tuple(complex(z) for z in self.shifts)
        if not shifts:
            raise ValueError("newton basis needs at least one shift")
        object.__setattr__(self, "shifts", shifts)
        i = 0
        while i < len(shifts):
            z = shifts[i]
            if z.imag != 0.0:
                if i + 1 >= len(shifts) or shifts[i + 1] != z.conjugate():
                    raise ValueError(
                        "complex shift %r lacks an adjacent conjugate" % (z,)
                    )
                i += 2
            else:
                i += 1


@dataclass(frozen=True)
class ChebyshevBasis:
    """Scaled Chebyshev polynomials on the ellipse (center, focal distance).

    ``scale`` divides every freshly generated column as an overflow guard
    for runs with per-column normalization turned off; it has no effect on
    spans and defaults to 1.
    """

    center: float
    focal: float
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ValueError("scale must be positive")
        if self.focal == 0.0:
            raise ValueError(
                "degenerate ellipse (focal = 0); fall back to the monomial basis"
            )


@dataclass(frozen=True)
class RitzSet:
    """Warm-up Ritz values; closed under conjugation for real operators."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.atleast_1d(np.asarray(self.values, dtype=complex))
        object.__setattr__(self, "values", vals)
        key = np.lexsort((vals.imag, vals.real))
        ckey = np.lexsort((np.conj(vals).imag, np.conj(vals).real))
        if not np.array_equal(vals[key], np.conj(vals)[ckey]):
            raise ValueError("ritz values must be closed under conjugation")

    def __len__(self):
        return self.values.size


class ChebyshevParams(NamedTuple):
    center: float
    focal: float

    @property
    def degenerate(self):
        return self.focal == 0.0


def _eig_2x2(block):
    """Eigenvalues of a real 2x2; complex results are exact conjugates."""
    a, b = block[0, 0], block[0, 1]
    c, d = block[1, 0], block[1, 1]
    half_tr = 0.5 * (a + d)
    det = a * d - b * c
    disc = half_tr * half_tr - det
    if disc >= 0.0:
        root = np.sqrt(disc)
        lam1 = half_tr + root if half_tr >= 0.0 else half_tr - root
        lam2 = det / lam1 if lam1 != 0.0 else half_tr - root
        return [complex(lam1), complex(lam2)]
    imag = np.sqrt(-disc)
    return [complex(half_tr, imag), complex(half_tr, -imag)]


def _house3(x, y, z):
    """Reflector (v, beta) with (I - beta v v^T) [x,y,z]^T = [*,0,0]^T."""
    s = abs(x) + abs(y) + abs(z)
    if s == 0.0:
        return None, 0.0
    xs, ys, zs = x / s, y / s, z / s
    alpha = np.sqrt(xs * xs + ys * ys + zs * zs)
    if xs > 0.0:
        alpha = -alpha
    v0 = xs - alpha
    v = np.array([v0, ys, zs])
    vtv = v @ v
    if vtv == 0.0:
        return None, 0.0
    return v, 2.0 / vtv


def _francis_double_step(h, lo, hi, trace, det):
    x = h[lo, lo] * h[lo, lo] + h[lo, lo + 1] * h[lo + 1, lo] - trace * h[lo, lo] + det
    y = h[lo + 1, lo] * (h[lo, lo] + h[lo + 1, lo + 1] - trace)
    z = h[lo + 1, lo] * h[lo + 2, lo + 1]
    for k in range(lo, hi - 2):
        v, beta = _house3(x, y, z)
        if v is not None:
            c0 = k - 1 if k > lo else lo
            block = h[k:k + 3, c0:hi]
            block -= np.outer(beta * v, v @ block)
            r1 = min(k + 4, hi)
            block = h[lo:r1, k:k + 3]
            block -= np.outer(block @ v, beta * v)
            if k > lo:
                h[k + 1, k - 1] = 0.0
                h[k + 2, k - 1] = 0.0
        x = h[k + 1, k]
        y = h[k + 2, k]
        z = h[k + 3, k] if k + 3 < hi else 0.0
    # flush the remaining 2x1 bulge with a Givens rotation
    g = np.hypot(x, y)
    if g != 0.0:
        c, s = x / g, y / g
        i0, i1 = hi - 2, hi - 1
        c0 = hi - 3 if i0 > lo else lo
        rows = h[[i0, i1], c0:hi]
        h[i0, c0:hi] = c * rows[0] + s * rows[1]
        h[i1, c0:hi] = -s * rows[0] + c * rows[1]
        cols = h[lo:hi, [i0, i1]]
        h[lo:hi, i0] = c * cols[:, 0] + s * cols[:, 1]
        h[lo:hi, i1] = -s * cols[:, 0] + c * cols[:, 1]
        if i0 > lo:
            h[i1, hi - 3] = 0.0


def _hessenberg_eigenvalues(h):
    """Eigenvalues of a real upper Hessenberg matrix, Francis double-shift QR.

    Deflation uses the threshold u * (|h_ii| + |h_i+1,i+1|); stalls get the
    classic exceptional shift every 10 iterations.
    """
    h = np.array(h, dtype=float)
    n = h.shape[0]
    if h.shape != (n, n):
        raise ValueError("need a square matrix")
    if n == 0:
        return np.zeros(0, dtype=complex)
    eigs = []
    hi = n
    stuck = 0
    budget = 40 * n + 100
    while hi > 0:
        if hi == 1:
            eigs.append(complex(h[0, 0]))
            hi = 0
            break
        lo = hi - 1
        while lo > 0:
            tiny = UNIT_ROUNDOFF * (abs(h[lo - 1, lo - 1]) + abs(h[lo, lo]))
            if abs(h[lo, lo - 1]) <= tiny:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi - 1:
            eigs.append(complex(h[lo, lo]))
            hi -= 1
            stuck = 0
        elif lo == hi - 2:
            eigs.extend(_eig_2x2(h[lo:hi, lo:hi]))
            hi -= 2
            stuck = 0
        else:
            if stuck > 0 and stuck % 10 == 0:
                # exceptional shift (EISPACK hqr form)
                w = abs(h[hi - 1, hi - 2]) + abs(h[hi - 2, hi - 3])
                trace = 1.5 * w
                det = w * w
            else:
                trace = h[hi - 2, hi - 2] + h[hi - 1, hi - 1]
                det = (
                    h[hi - 2, hi - 2] * h[hi - 1, hi - 1]
                    - h[hi - 2, hi - 1] * h[hi - 1, hi - 2]
                )
            _francis_double_step(h, lo, hi, trace, det)
            stuck += 1
            budget -= 1
            if budget <= 0:
                raise ArithmeticError("eigenvalue iteration stalled")
    return np.array(eigs, dtype=complex)


def compute_ritz_values(apply_operator, r, s):
    """Ritz values from s steps of standard Arnoldi started at r.

    ``apply_operator`` must realize the preconditioned operator
    x -> M_L^{-1} A M_R^{-1} x. Early Arnoldi breakdown pads the value
    list by repeating the last value (conjugate pairs are repeated
    together so the set stays closed under conjugation).
    """
    if not 1 <= s <= MAX_RITZ_COUNT:
        raise ValueError("s must be in 1..%d, got %d" % (MAX_RITZ_COUNT, s))
    r = np.asarray(r, dtype=float)
    beta = np.linalg.norm(r)
    if beta == 0.0:
        raise ValueError("start vector is zero")
    n = r.size
    m = min(s, n)
    v = np.zeros((n, m + 1), order="F")
    v[:, 0] = r / beta
    hess = np.zeros((m + 1, m))
    steps = 0
    for j in range(m):
        w = apply_operator(v[:, j])
        w = np.asarray(w, dtype=float)
        scale = np.linalg.norm(w)
        for i in range(j + 1):
            hij = v[:, i] @ w
            w = w - hij * v[:, i]
            hess[i, j] = hij
        hnext = np.linalg.norm(w)
        hess[j + 1, j] = hnext
        steps = j + 1
        if hnext <= 100.0 * UNIT_ROUNDOFF * max(scale, 1e-300):
            break
        v[:, j + 1] = w / hnext
    vals = list(_hessenberg_eigenvalues(hess[:steps, :steps]))
    while len(vals) < s:
        last = vals[-1]
        if last.imag != 0.0:
            if s - len(vals) >= 2:
                vals.extend([last, last.conjugate()])
            else:
                vals.append(complex(last.real))
        else:
            vals.append(last)
    return RitzSet(np.array(vals[:s], dtype=complex))


def leja_order(values):
    """Greedy Leja ordering of a value multiset.

    The first point maximizes modulus; each further point maximizes the
    product of distances to the already chosen ones. Ties go to the
    lexicographically largest (Re, Im). A strictly complex choice pulls
    its conjugate partner in immediately after, keeping pairs adjacent.
    """
    vals = np.atleast_1d(np.asarray(values, dtype=complex))
    n = vals.size
    if n == 0:
        return vals.copy()
    remaining = list(range(n))
    order = []
    # sum of log-distances to the chosen prefix; -inf marks duplicates
    with np.errstate(divide="ignore"):
        logdist = np.zeros(n)

    def key(i, first):
        primary = abs(vals[i]) if first else logdist[i]
        return (primary, vals[i].real, vals[i].imag)

    def take(i):
        order.append(i)
        remaining.remove(i)
        with np.errstate(divide="ignore"):
            for j in remaining:
                logdist[j] += np.log(abs(vals[j] - vals[i]))

    while remaining:
        first = not order
        best = max(remaining, key=lambda i: key(i, first))
        take(best)
        z = vals[best]
        if z.imag != 0.0:
            partner = [j for j in remaining if vals[j] == z.conjugate()]
            if partner:
                take(partner[0])
    return vals[np.array(order)]


def chebyshev_params(values):
    """Ellipse parameters (center d, focal distance c) enclosing the values.

    d = midpoint of the real extent, a = real semi-axis, b = largest
    |imaginary part|; c = sqrt(a^2 - b^2) when a >= b, else the real
    fallback c = a. focal == 0 (all values identical, or no real spread)
    flags a degenerate ellipse; callers fall back to the monomial basis.
    """
    vals = np.atleast_1d(np.asarray(values, dtype=complex))
    if vals.size == 0:
        raise ValueError("need at least one value")
    re = vals.real
    d = 0.5 * (re.max() + re.min())
    a = 0.5 * (re.max() - re.min())
    b = np.abs(vals.imag).max()
    c = np.sqrt(a * a - b * b) if a >= b else a
    return ChebyshevParams(float(d), float(c))


def build_krylov_block(apply_op, v, s, kind, normalize=True):
    """Krylov block [p_0(op) v, p_1(op) v, ..., p_{s-1}(op) v].

    The first column is always v itself (p_0 = 1). With ``normalize``
    (default) each generated column is rescaled to unit norm, and the
    recurrences carry the scale ratios so the spanned space is unchanged.
    An exactly vanishing new column (invariant subspace) truncates the
    block to its actual width.

    Returns an (n, width) array with width <= s.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("v must be a vector")
    if s < 1:
        raise ValueError("s must be positive")
    n = v.size
    cols = np.zeros((n, s), order="F")
    cols[:, 0] = v

    if isinstance(kind, MonomialBasis):
        for j in range(1, s):
            w = np.asarray(apply_op(cols[:, j - 1]), dtype=float)
            nrm = np.linalg.norm(w)
            if nrm == 0.0:
                return cols[:, :j].copy()
            cols[:, j] = w / nrm if normalize else w
        return cols

    if isinstance(kind, NewtonBasis):
        shifts = kind.shifts
        t = 0
        j = 1
        while j < s:
            theta = shifts[t % len(shifts)]
            base = cols[:, j - 1]
            w = np.asarray(apply_op(base), dtype=float) - theta.real * base
            gamma = np.linalg.norm(w)
            if gamma == 0.0:
                return cols[:, :j].copy()
            if theta.imag == 0.0:
                cols[:, j] = w / gamma if normalize else w
                t += 1
                j += 1
                continue
            # conjugate pair applied as the real quadratic
            # op^2 - 2 Re(theta) op + |theta|^2
            stored = w / gamma if normalize else w
            cols[:, j] = stored
            t += 2
            j += 1
            if j >= s:
                break
            ratio = theta.imag * theta.imag / gamma if normalize else theta.imag ** 2
            w2 = (
                np.asarray(apply_op(stored), dtype=float)
                - theta.real * stored
                + ratio * base
            )
            nrm2 = np.linalg.norm(w2)
            if nrm2 == 0.0:
                return cols[:, :j].copy()
            cols[:, j] = w2 / nrm2 if normalize else w2
            j += 1
        return cols

    if isinstance(kind, ChebyshevBasis):
        d, c, guard = kind.center, kind.focal, kind.scale
        # stored column j equals the true Chebyshev column divided by a
        # running scale; prev_factor is the scale step of column j-1
        prev_factor = 1.0
        for j in range(1, s):
            base = cols[:, j - 1]
            w = np.asarray(apply_op(base), dtype=float) - d * base
            if j == 1:
                raw = w / c
            else:
                raw = (2.0 / c) * w - cols[:, j - 2] / prev_factor
            nrm = np.linalg.norm(raw)
            if nrm == 0.0:
                return cols[:, :j].copy()
            if normalize:
                cols[:, j] = raw / nrm
                prev_factor = nrm
            else:
                cols[:, j] = raw / guard
                prev_factor = guard
        return cols

    raise TypeError("unknown basis kind %r" % (kind,))
