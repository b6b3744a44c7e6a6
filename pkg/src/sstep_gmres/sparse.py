"""Sparse CSR storage, Matrix Market I/O, preconditioners, and synthetic
test-matrix generation with prescribed singular spectra."""

import io
from dataclasses import dataclass, field

import numpy as np

from .dense import householder_qr

__all__ = [
    "CsrMatrix",
    "MatrixMarketError",
    "Preconditioner",
    "RandSvdSpec",
    "apply_preconditioner_inverse",
    "gen_randsvd",
    "identity_preconditioner",
    "jacobi_preconditioner",
    "parse_matrix_market",
    "right_singular_vector",
    "spmv",
    "write_matrix_market",
]


class MatrixMarketError(ValueError):
    """Malformed Matrix Market input; messages carry 1-based line numbers."""


@dataclass(frozen=True)
class CsrMatrix:
    """Square sparse matrix in compressed sparse row form.

    Rows are stored with strictly increasing column indices; values are
    finite. Construction validates the structure once so every consumer
    can rely on it.
    """

    n: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_ptr", np.asarray(self.row_ptr, dtype=np.int64))
        object.__setattr__(self, "col_idx", np.asarray(self.col_idx, dtype=np.int64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        n, ptr, idx, val = self.n, self.row_ptr, self.col_idx, self.values
        if n < 1:
            raise ValueError("matrix dimension must be positive")
        if ptr.shape != (n + 1,) or ptr[0] != 0 or ptr[-1] != idx.size:
            raise ValueError("row_ptr inconsistent with matrix shape")
        if np.any(np.diff(ptr) < 0):
            raise ValueError("row_ptr must be nondecreasing")
        if idx.size != val.size:
            raise ValueError("col_idx and values length mismatch")
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ValueError("column index out of range")
        for i in range(n):
            cols = idx[ptr[i]:ptr[i + 1]]
            if cols.size > 1 and np.any(np.diff(cols) <= 0):
                raise ValueError("row %d has unsorted or duplicate columns" % i)
        if val.size and not np.all(np.isfinite(val)):
            raise ValueError("matrix values must be finite")

    @property
    def nnz(self):
        return int(self.values.size)

    def to_dense(self):
        out = np.zeros((self.n, self.n))
        rows = np.repeat(np.arange(self.n), np.diff(self.row_ptr))
        out[rows, self.col_idx] = self.values
        return out

    def diagonal(self):
        d = np.zeros(self.n)
        for i in range(self.n):
            s, e = self.row_ptr[i], self.row_ptr[i + 1]
            k = np.searchsorted(self.col_idx[s:e], i)
            if k < e - s and self.col_idx[s + k] == i:
                d[i] = self.values[s + k]
        return d

    def frobenius_norm(self):
        return float(np.linalg.norm(self.values))


def csr_from_coo(n, rows, cols, vals):
    """Build CSR from unsorted coordinate data; duplicates are summed in
    input order."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=float)
    if rows.size == 0:
        return CsrMatrix(n, np.zeros(n + 1, dtype=np.int64), rows, vals)
    order = np.lexsort((cols, rows))
    r, c, v = rows[order], cols[order], vals[order]
    fresh = np.empty(r.size, dtype=bool)
    fresh[0] = True
    fresh[1:] = (np.diff(r) != 0) | (np.diff(c) != 0)
    slot = np.cumsum(fresh) - 1
    out_v = np.zeros(int(slot[-1]) + 1)
    np.add.at(out_v, slot, v)  # unbuffered: file-order summation of duplicates
    out_r = r[fresh]
    out_c = c[fresh]
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(row_ptr, out_r + 1, 1)
    row_ptr = np.cumsum(row_ptr)
    return CsrMatrix(n, row_ptr, out_c, out_v)


def csr_from_dense(a, keep_zeros=False):
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("need a square matrix")
    if keep_zeros:
        rows, cols = np.indices(a.shape)
        rows, cols = rows.ravel(), cols.ravel()
    else:
        rows, cols = np.nonzero(a)
    return csr_from_coo(n, rows, cols, a[rows, cols])


def parse_matrix_market(source):
    """Parse Matrix Market coordinate real input into CsrMatrix.

    Accepts a path or an open text stream. Supported: object 'matrix',
    format 'coordinate', field 'real' (or 'integer'), symmetry 'general'
    or 'symmetric'. Symmetric input is expanded to full storage at parse
    time (diagonal entries once). One-based indices become zero-based.
    Duplicate entries are summed in file order.
    """
    if hasattr(source, "read"):
        return _parse_mm_stream(source)
    with open(source, "r", encoding="ascii", errors="replace") as fh:
        return _parse_mm_stream(fh)


def _parse_mm_stream(fh):
    def fail(lineno, msg):
        raise MatrixMarketError("line %d: %s" % (lineno, msg))

    header = fh.readline()
    if not header.startswith("%%MatrixMarket"):
        fail(1, "missing %%MatrixMarket banner")
    parts = header.strip().split()
    if len(parts) != 5:
        fail(1, "banner must have 5 fields, got %d" % len(parts))
    _, obj, fmt, fld, sym = [p.lower() for p in parts]
    if obj != "matrix":
        fail(1, "unsupported object %r" % obj)
    if fmt != "coordinate":
        fail(1, "unsupported format %r (only coordinate)" % fmt)
    if fld not in ("real", "integer"):
        fail(1, "unsupported field %r (only real/integer)" % fld)
    if sym not in ("general", "symmetric"):
        fail(1, "unsupported symmetry %r (only general/symmetric)" % sym)

    lineno = 1
    size_line = None
    for line in fh:
        lineno += 1
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        size_line = stripped
        break
    if size_line is None:
        fail(lineno, "missing size line")
    fields = size_line.split()
    if len(fields) != 3:
        fail(lineno, "size line must be 'rows cols nnz'")
    try:
        rows_n, cols_n, nnz = (int(f) for f in fields)
    except ValueError:
        fail(lineno, "size line must hold three integers")
    if rows_n != cols_n:
        fail(lineno, "matrix must be square, got %d x %d" % (rows_n, cols_n))
    if rows_n < 1:
        fail(lineno, "matrix dimension must be positive")

    ri = np.empty(nnz, dtype=np.int64)
    ci = np.empty(nnz, dtype=np.int64)
    vv = np.empty(nnz, dtype=float)
    seen = 0
    for line in fh:
        lineno += 1
        stripped = line.strip()
        if not stripped or stripped.startswith("%"):
            continue
        if seen >= nnz:
            fail(lineno, "more entries than the declared %d" % nnz)
        fields = stripped.split()
        if len(fields) != 3:
            fail(lineno, "entry must be 'i j value'")
        try:
            i = int(fields[0])
            j = int(fields[1])
            v = float(fields[2])
        except ValueError:
            fail(lineno, "malformed entry %r" % stripped)
        if not (1 <= i <= rows_n) or not (1 <= j <= cols_n):
            fail(lineno, "index (%d, %d) out of range for n=%d" % (i, j, rows_n))
        if not np.isfinite(v):
            fail(lineno, "non-finite value")
        ri[seen] = i - 1
        ci[seen] = j - 1
        vv[seen] = v
        seen += 1
    if seen != nnz:
        fail(lineno + 1, "expected %d entries, found %d" % (nnz, seen))

    if sym == "symmetric":
        off = ri != ci
        ri = np.concatenate([ri, ci[off]])
        ci = np.concatenate([ci, ri[:nnz][off]])
        vv = np.concatenate([vv, vv[off]])
    return csr_from_coo(rows_n, ri, ci, vv)


def write_matrix_market(a, sink):
    """Write CsrMatrix (or square dense array) as coordinate real general.

    Values are written with shortest round-trip decimals so that
    parse(write(a)) reproduces them bit for bit.
    """
    if not isinstance(a, CsrMatrix):
        a = csr_from_dense(np.asarray(a, dtype=float))
    own = not hasattr(sink, "write")
    fh = open(sink, "w", encoding="ascii") if own else sink
    try:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write("%d %d %d\n" % (a.n, a.n, a.nnz))
        rows = np.repeat(np.arange(a.n), np.diff(a.row_ptr))
        for i, j, v in zip(rows, a.col_idx, a.values):
            fh.write("%d %d %s\n" % (i + 1, j + 1, repr(float(v))))
    finally:
        if own:
            fh.close()


try:
    import numba

    @numba.njit(cache=True)
    def _spmv_kernel(n, row_ptr, col_idx, values, x, y):
        for i in range(n):
            acc = 0.0
            for k in range(row_ptr[i], row_ptr[i + 1]):
                acc += values[k] * x[col_idx[k]]
            y[i] = acc

except ImportError:  # pragma: no cover
    _spmv_kernel = None


def spmv(a, x):
    """y = A x with plain left-to-right accumulation within each row."""
    x = np.asarray(x, dtype=float)
    if x.shape != (a.n,):
        raise ValueError("vector length %r does not match n=%d" % (x.shape, a.n))
    y = np.zeros(a.n)
    if a.nnz == 0:
        return y
    if _spmv_kernel is not None:
        _spmv_kernel(a.n, a.row_ptr, a.col_idx, a.values, x, y)
        return y
    np.add.at(y, np.repeat(np.arange(a.n), np.diff(a.row_ptr)), a.values * x[a.col_idx])
    return y


@dataclass(frozen=True)
class Preconditioner:
    """Diagonal (Jacobi) or identity preconditioner."""

    kind: str  # "none" | "jacobi"
    diag: "np.ndarray | None" = None

    def __post_init__(self):
        if self.kind not in ("none", "jacobi"):
            raise ValueError("unknown preconditioner kind %r" % self.kind)
        if self.kind == "jacobi":
            d = np.asarray(self.diag, dtype=float)
            if np.any(d == 0.0) or not np.all(np.isfinite(d)):
                raise ValueError("jacobi preconditioner needs a nonzero finite diagonal")
            object.__setattr__(self, "diag", d)


def identity_preconditioner():
    return Preconditioner("none")


def jacobi_preconditioner(a):
    d = a.diagonal()
    zero = np.flatnonzero(d == 0.0)
    if zero.size:
        raise ValueError("zero diagonal entry at row %d" % int(zero[0]))
    return Preconditioner("jacobi", d)


def apply_preconditioner_inverse(p, x):
    """M^{-1} x for the given preconditioner (identity returns x untouched)."""
    if p is None or p.kind == "none":
        return x
    return x / p.diag


@dataclass(frozen=True)
class RandSvdSpec:
    """Synthetic dense test matrix with a prescribed singular spectrum.

    mode 1: one large value (sigma_1 = 1, rest 1/kappa)
    mode 2: one small value (sigma_n = 1/kappa, rest 1)
    mode 3: geometric decay from 1 to 1/kappa
    mode 4: arithmetic decay from 1 to 1/kappa
    mode 5: random values with log-uniform distribution in [1/kappa, 1]
    """

    n: int
    kappa: float
    mode: int
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.kappa >= 1.0:
            raise ValueError("kappa must be >= 1")
        if self.mode not in (1, 2, 3, 4, 5):
            raise ValueError("mode must be in 1..5")


def _randsvd_sigma(spec, generator):
    n, kappa = spec.n, float(spec.kappa)
    if n == 1:
        return np.ones(1)
    if spec.mode == 1:
        sigma = np.full(n, 1.0 / kappa)
        sigma[0] = 1.0
    elif spec.mode == 2:
        sigma = np.ones(n)
        sigma[-1] = 1.0 / kappa
    elif spec.mode == 3:
        sigma = kappa ** (-np.arange(n) / (n - 1.0))
    elif spec.mode == 4:
        sigma = 1.0 - (1.0 - 1.0 / kappa) * np.arange(n) / (n - 1.0)
    else:
        sigma = np.sort(np.exp(generator.uniform(np.log(1.0 / kappa), 0.0, n)))[::-1]
    return sigma


def gen_randsvd(spec):
    """Dense A = U diag(sigma) V^T from the seeded spec.

    Returns (a, v, sigma): the matrix, its right singular vectors as
    columns of v (descending sigma order), and the prescribed singular
    values. The PCG64 stream draws sigma (mode 5 only), then U, then V.
    """
    generator = np.random.Generator(np.random.PCG64(spec.seed))
    sigma = _randsvd_sigma(spec, generator)
    u = householder_qr(generator.standard_normal((spec.n, spec.n))).q
    v = householder_qr(generator.standard_normal((spec.n, spec.n))).q
    a = (u * sigma) @ v.T
    return a, v, sigma


def right_singular_vector(v, k):
    """k-th right singular vector (1-based, descending order) as a copy."""
    v = np.asarray(v)
    if not 1 <= k <= v.shape[1]:
        raise ValueError("k must be in 1..%d, got %d" % (v.shape[1], k))
    return v[:, k - 1].copy()
