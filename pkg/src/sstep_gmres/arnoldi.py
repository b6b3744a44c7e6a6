"""Block Arnoldi steps for s-step GMRES.

Each outer step grows the orthonormal basis V by up to s columns: build a
polynomial Krylov block K from the newest basis vector, map it through the
right preconditioner (Z), the operator and the left preconditioner (W),
then extend the shared QR factorization [r | W_1 | ... | W_i] = V R.

``classical_step`` feeds K directly as the candidate block. ``modified_step``
first replaces K by the Q factor of its twice-projected complement against
the previous basis columns, which keeps the accumulated candidate blocks
well conditioned regardless of the polynomial basis quality.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .basis import build_krylov_block
from .blockqr import QrState
from .dense import householder_qr

__all__ = [
    "ArnoldiState",
    "OperatorSet",
    "StepReport",
    "classical_step",
    "modified_step",
    "truncate_after_breakdown",
]


@dataclass(frozen=True)
class OperatorSet:
    """Callables defining the preconditioned system, all vector -> vector.

    ``basis_op`` is the operator used to build polynomial Krylov blocks;
    it may equal the plain matvec or fold in the preconditioners.
    """

    matvec: Callable
    left_inv: Callable
    right_inv: Callable
    basis_op: Callable


@dataclass
class StepReport:
    """One block step: the new inner-column range and QR rank status.

    ``projections`` and ``intra_qrs`` count the candidate-preparation
    work on top of the shared orthogonalization, so logs can show the
    near-doubling of QR cost in the modified variant.
    """

    start: int
    width: int
    deficient: Optional[int]  # first deficient V column (absolute), if any
    projections: int = 0
    intra_qrs: int = 0


class ArnoldiState:
    """Basis, triangular factor, and per-step blocks of one restart cycle.

    ``vr`` holds [r | W_1 | ... ] = V R; ``z`` the solution-space blocks
    Z_k; ``b_concat`` the candidate blocks B_k for conditioning
    diagnostics; ``w_colnorm2`` squared norms of the W columns as they
    entered the QR (the rank test scales against their running sum).
    """

    def __init__(self, n, max_inner):
        if not 1 <= max_inner <= n:
            raise ValueError("need 1 <= max_inner <= n")
        self.vr = QrState(n, max_inner + 1)
        self.z = np.zeros((n, max_inner), order="F")
        self.b_concat = np.zeros((n, max_inner), order="F")
        self.w_colnorm2 = np.zeros(max_inner)
        self.inner_cols = 0
        self.block_bounds = []

    @property
    def n(self):
        return self.z.shape[0]

    @property
    def max_inner(self):
        return self.z.shape[1]

    def seed(self, r, orth_step):
        """Install the start residual as the first basis column.

        The QR of the single column makes R[0, 0] = ||r||, so the driver
        reads beta straight off the triangular factor.
        """
        if self.vr.ncols != 0:
            raise ValueError("state is already seeded")
        res = orth_step(self.vr, r)
        return self.vr.r[0, 0], res

    def basis_columns(self):
        return self.vr.q[:, : self.vr.ncols]

    def z_columns(self):
        return self.z[:, : self.inner_cols]

    def b_columns(self):
        return self.b_concat[:, : self.inner_cols]


def _apply_columns(f, m):
    out = np.empty_like(m)
    for j in range(m.shape[1]):
        out[:, j] = f(m[:, j])
    return out


def _finish_step(state, ops, b, orth_step, projections=0, intra_qrs=0):
    width = b.shape[1]
    z = _apply_columns(ops.right_inv, b)
    w = _apply_columns(lambda x: ops.left_inv(ops.matvec(x)), z)
    start = state.inner_cols
    state.b_concat[:, start : start + width] = b
    state.z[:, start : start + width] = z
    state.w_colnorm2[start : start + width] = np.sum(w * w, axis=0)
    res = orth_step(state.vr, w)
    state.block_bounds.append((start, width))
    state.inner_cols += width
    return StepReport(start, width, res.deficient, projections, intra_qrs)


def _candidate_block(state, ops, basis, s):
    if state.vr.ncols == 0:
        raise ValueError("seed the state before stepping")
    room = state.max_inner - state.inner_cols
    if room <= 0:
        raise ValueError("no inner columns left; restart or stop")
    seed = state.vr.q[:, state.vr.ncols - 1].copy()
    k = build_krylov_block(ops.basis_op, seed, min(s, room), basis)
    return k


# Accumulated candidate blocks must keep sigma_min >= 1/2: that is the
# level the conditioning analysis guarantees while every block stays
# within the span of its own basis columns, and together with unit-norm
# columns it caps cond2 of the concatenation at 2 sqrt(n) + sqrt(s).
CANDIDATE_SIGMA_FLOOR = 0.5


def _admissible_width(state, q):
    """Widest prefix of q whose admission keeps the candidate set healthy.

    A column can pass the pivot test yet consist mostly of directions
    the basis already holds (rounding noise re-fetches content that an
    earlier, nearly converged column failed to deposit in the basis).
    Such columns overlap other blocks and sink sigma_min of the
    concatenated candidates, so admission stops right before the floor
    would be crossed. The seed column is exempt: the recurrence is
    defined to start from the newest basis column, and when that column
    carries nothing new its operator image collapses into the existing
    span, so the rank test on the R diagonal ends the cycle anyway.
    """
    width = q.shape[1]
    prev = state.b_columns()
    if prev.shape[1] == 0:
        return width
    m = prev.shape[1]
    cols = np.concatenate([prev, q], axis=1)
    gram = cols.T @ cols
    floor = CANDIDATE_SIGMA_FLOOR * CANDIDATE_SIGMA_FLOOR

    def ok(w):
        return float(np.linalg.eigvalsh(gram[: m + w, : m + w])[0]) >= floor

    w = width
    while w > 1 and not ok(w):
        w -= 1
    return w


def _enforce_span_budget(state, report, attempted):
    """Roll the committed block back to its span-consistent prefix.

    The conditioning guarantee for the stacked candidates rests on each
    candidate column lying in the span of its own block's basis columns
    (the seed plus the directions its predecessors created). That
    distance is only measurable after the block orthogonalization has
    committed those basis columns, so the check runs post-commit and
    cuts with the breakdown truncation, which keeps the factorization
    invariant intact. The per-column budget spreads the 1/2
    perturbation allowance of the guarantee over the worst-case number
    of blocks and columns a cycle can commit; the seed column always
    stays (it is itself a basis column).
    """
    if report.width <= 1:
        return report
    start = report.start
    budget = np.sqrt(attempted) / (20.0 * state.max_inner**1.5)
    for t in range(1, report.width):
        col = state.b_concat[:, start + t]
        own = state.vr.q[:, start : start + t + 1]
        resid = col - own @ (own.T @ col)
        if np.linalg.norm(resid) > budget:
            truncate_after_breakdown(state, start + t)
            deficient = report.deficient
            if deficient is not None and deficient > start + t:
                deficient = None
            return StepReport(
                start,
                t,
                deficient,
                projections=report.projections,
                intra_qrs=report.intra_qrs,
            )
    return report


def classical_step(state, ops, basis, s, orth_step):
    """One s-step block using the raw polynomial block as candidate."""
    k = _candidate_block(state, ops, basis, s)
    return _finish_step(state, ops, k, orth_step)


def modified_step(state, ops, basis, s, orth_step):
    """One s-step block with the candidate re-orthogonalized first.

    The polynomial block is projected twice against all basis columns
    except its own seed (the newest one), then replaced by its Q factor.
    Two rank decisions can narrow the block before it is committed.
    Three rank decisions can narrow the block. Before the commit,
    columns from the first dead QR pivot on are dropped (past that
    point the Q factor holds no information about K, only arbitrary
    orthonormal noise), and non-seed columns are admitted only while
    sigma_min of the accumulated candidate matrix stays at or above
    1/2. After the commit, the block is cut at the first candidate
    column that fails to lie in the span of its own block's new basis
    columns within the per-column budget: such a column is dominated
    by projection roundoff, i.e. directions the basis only acquires
    later, and keeping it is what lets the accumulated candidates lose
    their conditioning (the cut uses the breakdown truncation, so the
    factorization invariant survives). Together these keep the
    condition number of the stacked candidates at the 2 sqrt(n) +
    sqrt(s) level regardless of how degenerate the polynomial block
    was, while a healthy block commits at full width. The next block
    restarts the recurrence from a fresh seed either way. Width-1
    blocks skip all of this: a lone seed column is already
    orthonormal, and the step reduces to the classical one bit for
    bit.
    """
    k = _candidate_block(state, ops, basis, s)
    if k.shape[1] > 1:
        prev = state.vr.q[:, : state.vr.ncols - 1]
        y = k - prev @ (prev.T @ k)
        y = y - prev @ (prev.T @ y)
        q, _, dead = householder_qr(y, deficiency_scale=np.linalg.norm(k))
        if dead is not None:
            # the seed column enters with unit norm and orthogonal to
            # prev, so it cannot be the dead one; width stays >= 1
            q = q[:, : max(dead, 1)]
        q = q[:, : _admissible_width(state, q)]
        report = _finish_step(state, ops, q, orth_step, projections=2, intra_qrs=1)
        return _enforce_span_budget(state, report, k.shape[1])
    return _finish_step(state, ops, k, orth_step)


def truncate_after_breakdown(state, keep_inner):
    """Shrink the cycle to its first ``keep_inner`` inner columns.

    Keeps V columns 0..keep_inner (the deficient direction's column stays,
    so [r | W] = V R still holds on the retained slice) and trims the Z
    and candidate buffers to match. Used once, right before the final
    solution assembly of a cycle that hit a rank-deficient column.
    """
    if not 0 <= keep_inner <= state.inner_cols:
        raise ValueError("keep_inner out of range")
    state.vr.ncols = keep_inner + 1
    widths = state.vr.block_widths
    total = sum(widths)
    while total > state.vr.ncols:
        drop = min(widths[-1], total - state.vr.ncols)
        widths[-1] -= drop
        total -= drop
        if widths[-1] == 0:
            widths.pop()
    state.inner_cols = keep_inner
    bounds = []
    for start, width in state.block_bounds:
        if start >= keep_inner:
            break
        bounds.append((start, min(width, keep_inner - start)))
    state.block_bounds = bounds
