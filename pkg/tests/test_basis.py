"""Tests for polynomial basis construction and Ritz value machinery."""

import numpy as np
import pytest

from sstep_gmres.basis import (
    ChebyshevBasis,
    MonomialBasis,
    NewtonBasis,
    RitzSet,
    build_krylov_block,
    chebyshev_params,
    compute_ritz_values,
    leja_order,
)
from sstep_gmres.basis import _eig_2x2, _hessenberg_eigenvalues

from helpers import max_principal_angle, rng


def assert_spectra_close(got, want, tol):
    """Greedy nearest matching between two eigenvalue multisets."""
    got = np.asarray(got, dtype=complex)
    want = np.asarray(want, dtype=complex)
    assert got.size == want.size
    pool = list(got)
    for w in sorted(want, key=abs, reverse=True):
        dist = np.abs(np.array(pool) - w)
        i = int(np.argmin(dist))
        assert dist[i] <= tol, "no match for %r within %g (best %g)" % (
            w,
            tol,
            dist[i],
        )
        pool.pop(i)


def random_hessenberg(n, seed):
    h = rng(seed).standard_normal((n, n))
    return np.triu(h, -1)


class TestHessenbergEigenvalues:
    def test_against_dense_oracle(self):
        # oracle: np.linalg.eigvals on the same matrix
        for n in range(1, 25):
            for seed in range(8):
                h = random_hessenberg(n, 1000 * n + seed)
                got = _hessenberg_eigenvalues(h)
                want = np.linalg.eigvals(h)
                scale = max(1.0, np.abs(want).max())
                assert_spectra_close(got, want, 1e-8 * scale)

    def test_conjugate_closure_is_exact(self):
        for seed in range(20):
            h = random_hessenberg(12, seed)
            vals = _hessenberg_eigenvalues(h)
            RitzSet(vals)  # raises unless exactly closed under conjugation

    def test_known_rotation(self):
        h = np.array([[0.0, -1.0], [1.0, 0.0]])
        vals = sorted(_hessenberg_eigenvalues(h), key=lambda z: z.imag)
        assert vals[0] == -1j and vals[1] == 1j

    def test_triangular_input(self):
        h = np.triu(rng(3).standard_normal((10, 10)))
        got = np.sort(_hessenberg_eigenvalues(h).real)
        np.testing.assert_allclose(got, np.sort(np.diag(h)), rtol=1e-12)

    def test_repeated_eigenvalue(self):
        # Jordan-like block; eigenvalues still land near 2
        h = 2.0 * np.eye(6) + np.triu(0.1 * rng(7).standard_normal((6, 6)), 1)
        h[np.arange(1, 6), np.arange(5)] = 1e-3
        got = _hessenberg_eigenvalues(h)
        want = np.linalg.eigvals(h)
        assert_spectra_close(got, want, 1e-6)

    def test_empty_and_scalar(self):
        assert _hessenberg_eigenvalues(np.zeros((0, 0))).size == 0
        np.testing.assert_array_equal(
            _hessenberg_eigenvalues(np.array([[4.0]])), [4.0 + 0j]
        )

    def test_eig_2x2_matches_oracle(self):
        for seed in range(50):
            m = rng(200 + seed).standard_normal((2, 2))
            got = np.array(_eig_2x2(m))
            want = np.linalg.eigvals(m)
            scale = max(1.0, np.abs(want).max())
            assert_spectra_close(got, want, 1e-13 * scale)

    def test_eig_2x2_conjugates_exact(self):
        vals = _eig_2x2(np.array([[1.0, -2.0], [2.0, 1.0]]))
        assert vals[0] == vals[1].conjugate()
        assert vals[0].imag > 0


class TestRitzValues:
    def test_full_krylov_recovers_spectrum(self):
        n = 12
        a = np.diag(2.0 * np.ones(n)) + np.diag(-1.0 * np.ones(n - 1), 1)
        a = a + np.diag(-1.0 * np.ones(n - 1), -1)
        # generic start vector: all-ones would miss the antisymmetric modes
        r = rng(9).standard_normal(n)
        ritz = compute_ritz_values(lambda x: a @ x, r, n)
        want = np.linalg.eigvalsh(a)
        assert np.abs(ritz.values.imag).max() <= 1e-8
        assert_spectra_close(ritz.values, want, 1e-8 * np.abs(want).max())

    def test_partial_krylov_stays_in_hull(self):
        n = 30
        diag = np.linspace(1.0, 9.0, n)
        a = np.diag(diag)
        ritz = compute_ritz_values(lambda x: a @ x, rng(5).standard_normal(n), 6)
        assert len(ritz) == 6
        assert ritz.values.real.min() >= diag.min() - 1e-8
        assert ritz.values.real.max() <= diag.max() + 1e-8

    def test_identity_breaks_down_to_all_ones(self):
        # start vector is already invariant, so one step determines the set
        ritz = compute_ritz_values(lambda x: x, rng(1).standard_normal(20), 5)
        assert np.abs(ritz.values.imag).max() == 0.0
        np.testing.assert_allclose(ritz.values.real, np.ones(5), rtol=1e-14)

    def test_breakdown_pads_conjugate_pairs_together(self):
        a = np.array([[0.0, -1.0], [1.0, 0.0]])
        ritz = compute_ritz_values(lambda x: a @ x, np.array([1.0, 0.0]), 4)
        vals = sorted(ritz.values, key=lambda z: (z.real, z.imag))
        assert vals == [-1j, -1j, 1j, 1j]

    def test_breakdown_odd_slot_uses_real_part(self):
        a = np.array([[0.0, -1.0], [1.0, 0.0]])
        ritz = compute_ritz_values(lambda x: a @ x, np.array([1.0, 0.0]), 3)
        RitzSet(ritz.values)
        assert sorted(z.imag for z in ritz.values) == [-1.0, 0.0, 1.0]

    def test_count_cap_and_zero_start(self):
        with pytest.raises(ValueError, match="1..64"):
            compute_ritz_values(lambda x: x, np.ones(100), 65)
        with pytest.raises(ValueError, match="zero"):
            compute_ritz_values(lambda x: x, np.zeros(4), 2)

    def test_s_larger_than_dimension_pads(self):
        a = np.diag([1.0, 3.0])
        ritz = compute_ritz_values(lambda x: a @ x, np.ones(2), 5)
        assert len(ritz) == 5
        got = sorted(ritz.values.real)
        assert got[0] == pytest.approx(1.0, rel=1e-12)
        assert got[-1] == pytest.approx(3.0, rel=1e-12)


def brute_force_leja(values):
    """Reference greedy ordering for real-only inputs (direct products)."""
    vals = [complex(v) for v in values]
    rem = list(range(len(vals)))
    order = []
    while rem:
        if not order:
            best = max(rem, key=lambda i: (abs(vals[i]), vals[i].real, vals[i].imag))
        else:
            def key(i):
                prod = 1.0
                for j in order:
                    prod *= abs(vals[i] - vals[j])
                return (prod, vals[i].real, vals[i].imag)

            best = max(rem, key=key)
        order.append(best)
        rem.remove(best)
    return np.array([vals[i] for i in order])


class TestLejaOrder:
    def test_three_reals(self):
        got = leja_order([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(got, [3.0, 1.0, 2.0])

    def test_matches_brute_force_on_real_sets(self):
        for seed in range(20):
            vals = rng(300 + seed).uniform(-5.0, 5.0, size=7)
            got = leja_order(vals)
            want = brute_force_leja(vals)
            np.testing.assert_array_equal(got, want)

    def test_conjugate_pairs_stay_adjacent(self):
        vals = np.array([2.0, 1.0 + 1.0j, 1.0 - 1.0j])
        got = leja_order(vals)
        np.testing.assert_array_equal(got, [2.0, 1.0 + 1.0j, 1.0 - 1.0j])
        for seed in range(10):
            h = random_hessenberg(9, 400 + seed)
            spectrum = _hessenberg_eigenvalues(h)
            ordered = leja_order(spectrum)
            i = 0
            while i < len(ordered):
                if ordered[i].imag != 0.0:
                    assert ordered[i + 1] == ordered[i].conjugate()
                    i += 2
                else:
                    i += 1

    def test_first_is_max_modulus(self):
        for seed in range(10):
            vals = _hessenberg_eigenvalues(random_hessenberg(8, 500 + seed))
            got = leja_order(vals)
            # scalar abs and vectorized np.abs can disagree by one ulp
            assert abs(got[0]) >= np.abs(vals).max() * (1.0 - 4e-16)

    def test_duplicates_are_deterministic(self):
        got = leja_order([1.0, 1.0, 3.0])
        np.testing.assert_array_equal(got, [3.0, 1.0, 1.0])

    def test_preserves_multiset(self):
        vals = _hessenberg_eigenvalues(random_hessenberg(11, 42))
        got = leja_order(vals)
        key = lambda a: np.lexsort((a.imag, a.real))
        np.testing.assert_array_equal(got[key(got)], vals[key(vals)])


class TestChebyshevParams:
    def test_real_interval(self):
        p = chebyshev_params([1.0, 5.0])
        assert p.center == 3.0 and p.focal == 2.0 and not p.degenerate

    def test_complex_cloud(self):
        p = chebyshev_params([1.0, 3.0, 2.0 + 0.5j, 2.0 - 0.5j])
        assert p.center == 2.0
        assert p.focal == pytest.approx(np.sqrt(0.75), rel=1e-15)

    def test_tall_ellipse_falls_back_to_real_axis(self):
        p = chebyshev_params([2.0 + 1.0j, 2.0 - 1.0j])
        assert p.center == 2.0 and p.focal == 0.0 and p.degenerate

    def test_single_point_degenerate(self):
        p = chebyshev_params([3.0])
        assert p.center == 3.0 and p.degenerate


class TestBuildKrylovBlock:
    def test_monomial_powers_of_two(self):
        n = 6
        e1 = np.zeros(n)
        e1[0] = 1.0
        cols = build_krylov_block(
            lambda x: 2.0 * x, e1, 3, MonomialBasis(), normalize=False
        )
        np.testing.assert_array_equal(cols[:, 0], e1)
        np.testing.assert_array_equal(cols[:, 1], 2.0 * e1)
        np.testing.assert_array_equal(cols[:, 2], 4.0 * e1)

    def test_normalized_columns_are_unit(self):
        a = rng(11).standard_normal((15, 15))
        v = rng(12).standard_normal(15)
        for kind in (
            MonomialBasis(),
            NewtonBasis((0.5, -1.0, 2.0)),
            ChebyshevBasis(0.0, 1.5),
        ):
            cols = build_krylov_block(lambda x: a @ x, v, 5, kind)
            norms = np.linalg.norm(cols[:, 1:], axis=0)
            np.testing.assert_allclose(norms, 1.0, rtol=1e-14)
            np.testing.assert_array_equal(cols[:, 0], v)

    def test_all_bases_span_same_krylov_space(self):
        a = rng(21).standard_normal((20, 20))
        a = a + 5.0 * np.eye(20)  # keep the space well conditioned
        v = rng(22).standard_normal(20)
        s = 5
        explicit = np.empty((20, s), order="F")
        explicit[:, 0] = v
        for j in range(1, s):
            explicit[:, j] = a @ explicit[:, j - 1]
        for kind in (
            MonomialBasis(),
            NewtonBasis((4.0, 5.0 + 1.0j, 5.0 - 1.0j, 6.0)),
            ChebyshevBasis(5.0, 2.0),
        ):
            cols = build_krylov_block(lambda x: a @ x, v, s, kind)
            assert cols.shape == (20, s)
            assert max_principal_angle(cols, explicit) <= 1e-8

    def test_newton_real_shifts_product_form(self):
        a = rng(31).standard_normal((8, 8))
        v = rng(32).standard_normal(8)
        cols = build_krylov_block(
            lambda x: a @ x, v, 3, NewtonBasis((1.0, -2.0)), normalize=False
        )
        i = np.eye(8)
        np.testing.assert_allclose(cols[:, 1], (a - i) @ v, rtol=1e-14)
        np.testing.assert_allclose(
            cols[:, 2], (a + 2 * i) @ (a - i) @ v, rtol=1e-13
        )

    def test_newton_conjugate_pair_is_real_quadratic(self):
        a = rng(41).standard_normal((8, 8))
        v = rng(42).standard_normal(8)
        theta = 1.0 + 2.0j
        cols = build_krylov_block(
            lambda x: a @ x,
            v,
            3,
            NewtonBasis((theta, theta.conjugate())),
            normalize=False,
        )
        assert cols.dtype == np.float64
        i = np.eye(8)
        np.testing.assert_allclose(cols[:, 1], (a - i) @ v, rtol=1e-14)
        # (x - theta)(x - conj(theta)) = x^2 - 2 Re(theta) x + |theta|^2
        quad = a @ a - 2.0 * a + 5.0 * i
        np.testing.assert_allclose(cols[:, 2], quad @ v, rtol=1e-12)

    def test_newton_pair_with_normalization_spans_same_space(self):
        a = rng(43).standard_normal((12, 12)) + 4.0 * np.eye(12)
        v = rng(44).standard_normal(12)
        theta = 4.0 + 0.7j
        kind = NewtonBasis((theta, theta.conjugate(), 3.5))
        plain = build_krylov_block(lambda x: a @ x, v, 6, kind, normalize=False)
        unit = build_krylov_block(lambda x: a @ x, v, 6, kind, normalize=True)
        for j in range(6):
            d = plain[:, j] / unit[:, j]
            np.testing.assert_allclose(d, d[0], rtol=1e-10)

    def test_chebyshev_recurrence_explicit(self):
        a = rng(51).standard_normal((7, 7))
        v = rng(52).standard_normal(7)
        d, c = 0.5, 2.0
        cols = build_krylov_block(
            lambda x: a @ x, v, 4, ChebyshevBasis(d, c), normalize=False
        )
        i = np.eye(7)
        t1 = (a - d * i) @ v / c
        t2 = (2.0 / c) * (a - d * i) @ t1 - v
        t3 = (2.0 / c) * (a - d * i) @ t2 - t1
        np.testing.assert_allclose(cols[:, 1], t1, rtol=1e-13)
        np.testing.assert_allclose(cols[:, 2], t2, rtol=1e-13)
        np.testing.assert_allclose(cols[:, 3], t3, rtol=1e-12)

    def test_chebyshev_scale_guard_rescales_columns(self):
        a = rng(53).standard_normal((7, 7))
        v = rng(54).standard_normal(7)
        plain = build_krylov_block(
            lambda x: a @ x, v, 4, ChebyshevBasis(0.0, 1.0), normalize=False
        )
        guarded = build_krylov_block(
            lambda x: a @ x, v, 4, ChebyshevBasis(0.0, 1.0, scale=4.0),
            normalize=False,
        )
        for j in range(4):
            np.testing.assert_allclose(
                guarded[:, j] * 4.0 ** j, plain[:, j], rtol=1e-12
            )

    def test_invariant_subspace_truncates(self):
        # op sends e1 -> e2 -> 0, so the block stops at width 2
        nilp = np.zeros((4, 4))
        nilp[1, 0] = 1.0
        e1 = np.zeros(4)
        e1[0] = 1.0
        cols = build_krylov_block(lambda x: nilp @ x, e1, 4, MonomialBasis())
        assert cols.shape == (4, 2)
        np.testing.assert_array_equal(cols[:, 1], [0.0, 1.0, 0.0, 0.0])

    def test_validation_errors(self):
        with pytest.raises(ValueError, match="conjugate"):
            NewtonBasis((1.0 + 1.0j, 2.0))
        with pytest.raises(ValueError, match="at least one"):
            NewtonBasis(())
        with pytest.raises(ValueError, match="degenerate"):
            ChebyshevBasis(1.0, 0.0)
        with pytest.raises(ValueError, match="positive"):
            ChebyshevBasis(1.0, 1.0, scale=0.0)
        with pytest.raises(ValueError, match="conjugation"):
            RitzSet(np.array([1.0 + 1.0j]))
        with pytest.raises(TypeError, match="unknown basis"):
            build_krylov_block(lambda x: x, np.ones(3), 2, "monomial")
        with pytest.raises(ValueError, match="positive"):
            build_krylov_block(lambda x: x, np.ones(3), 0, MonomialBasis())
