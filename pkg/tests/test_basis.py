import numpy as np
import pytest

from torusbergman.basis import (
    CONJUGATE_FORM,
    HOLOMORPHIC,
    GramError,
    build_basis,
    factor_gram,
    factor_harmonicity_residual,
    gram,
    harmonicity_residual,
    kunneth_basis,
    orthonormalize,
    raw_factor_basis,
)
from torusbergman.geometry import ProductModel, TorusFactor
from torusbergman.kernel import density
from torusbergman.theta import ThetaSeries

TAU = 1j


def model(*degrees, tau=TAU):
    return ProductModel.from_factors([TorusFactor(tau, d) for d in degrees])


def haar_unitary(n, rng):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


class TestRawFactorBasis:
    def test_positive_degree_one_power_one(self):
        s = raw_factor_basis(TorusFactor(TAU, 1), 1)
        assert s.kind == HOLOMORPHIC
        assert s.count == 1

    def test_negative_three_members_at_k3(self):
        s = raw_factor_basis(TorusFactor(TAU, -1), 3)
        assert s.kind == CONJUGATE_FORM
        assert s.count == 3
        assert s.level == 3

    def test_member_count_k_times_degree(self):
        assert raw_factor_basis(TorusFactor(TAU, -2), 5).count == 10

    def test_rejects_nonpositive_power(self):
        with pytest.raises(ValueError):
            raw_factor_basis(TorusFactor(TAU, 1), 0)

    def test_conjugate_first_order_identity(self):
        # (d/dz + 2 dphi_plus/dz) f = 0 certified by the residual operator
        r = factor_harmonicity_residual(TorusFactor(TAU, -1), 3, 1, grid_n=192)
        assert r["first_order"] <= 1e-6


class TestGram:
    def test_conjugation_duality(self):
        gp = factor_gram(TorusFactor(TAU, 1), 3)
        gn = factor_gram(TorusFactor(TAU, -1), 3)
        assert np.max(np.abs(gn.entries - gp.entries.conj())) < 1e-10

    def test_doubling_resolution_stable(self):
        f = TorusFactor(TAU, -1)
        g1 = factor_gram(f, 3)
        g2 = factor_gram(f, 3, resolution=2 * g1.quadrature_resolution)
        assert np.max(np.abs(g1.entries - g2.entries)) < 1e-10

    def test_level_one_matches_brute_force_integral(self):
        # dense quadrature of |theta|^2 e^{-2 phi} * 2 dx dy with a radius-50 sum
        f = TorusFactor(TAU, 1)
        N = 400
        t = (np.arange(N) + 0.5) / N
        A, B = np.meshgrid(t, t, indexing="ij")
        z = (A + TAU * B).ravel()
        s = ThetaSeries(1, 0, TAU)
        vals = s.eval(z, radius=50)
        phi = np.pi * z.imag**2
        integral = np.sum(np.abs(vals) ** 2 * np.exp(-2 * phi)) * 2.0 / N**2
        g = factor_gram(f, 1)
        assert g.entries[0, 0].real == pytest.approx(integral, abs=1e-10)
        # closed form sqrt(2 T / m)
        assert g.entries[0, 0].real == pytest.approx(np.sqrt(2.0), abs=1e-12)

    def test_tensor_product_identity(self):
        m = model(-1, 2)
        kb = kunneth_basis(m, 2)
        G = gram(m, kb)
        g1 = factor_gram(m.factors[0], 2)
        g2 = factor_gram(m.factors[1], 2)
        assert np.max(np.abs(G.entries - np.kron(g1.entries, g2.entries))) < 1e-12

    def test_floor_violation_raises(self):
        with pytest.raises(GramError):
            factor_gram(TorusFactor(TAU, -1), 8, resolution=16)

    def test_gram_matrix_validation(self):
        from torusbergman.basis import GramMatrix

        with pytest.raises(GramError):
            GramMatrix(entries=np.array([[1.0, 2.0], [2.0, 1.0]]), quadrature_resolution=16)


class TestKunneth:
    def test_product_count(self):
        kb = kunneth_basis(model(-1, 1), 2)
        assert kb.count == 4
        assert len(kb.indices) == 4

    def test_positive_single_factor_reduces_to_theta_basis(self):
        m = model(2)
        assert m.n_minus == 0
        assert m.J0 == ()
        kb = kunneth_basis(m, 1)
        assert kb.factor_sets[0].kind == HOLOMORPHIC
        assert kb.count == 2

    def test_ordering_deterministic(self):
        a = kunneth_basis(model(-1, 2), 2).indices
        b = kunneth_basis(model(-1, 2), 2).indices
        assert a == b
        assert a[:3] == [(0, 0), (0, 1), (0, 2)]


class TestOrthonormalize:
    def test_recomputed_gram_is_identity(self):
        b = build_basis(model(-1, 2), 2)
        G = b.recompute_gram()
        assert np.max(np.abs(G - np.eye(b.dim))) < 1e-9

    def test_already_orthonormal_unchanged(self):
        b = build_basis(model(-1), 3)
        G = b.recompute_gram()
        L = np.linalg.cholesky(G)
        assert np.max(np.abs(L - np.eye(b.dim))) < 1e-12

    def test_dimension_law(self):
        for degs, k in [((-1,), 4), ((-2,), 3), ((-1, 1), 2), ((-1, 2), 2)]:
            b = build_basis(model(*degs), k)
            expected = k ** len(degs) * int(np.prod([abs(d) for d in degs]))
            assert b.dim == expected

    def test_unitary_remix_leaves_density_invariant(self):
        b = build_basis(model(-1), 4)
        rng = np.random.default_rng(17)
        U = haar_unitary(b.dim, rng)
        pts = rng.random((20, 2))
        d0 = density(b, pts)
        d1 = density(b.remixed(U), pts)
        assert np.max(np.abs(d0 - d1)) < 1e-10 * np.max(d0)

    def test_cholesky_condition_reported_small(self):
        for degs, k in [((-1,), 8), ((-1, 2), 3)]:
            b = build_basis(model(*degs), k)
            assert b.chol_condition < 1e6

    def test_inconsistent_supplied_gram_rejected(self):
        m = model(-1)
        kb = kunneth_basis(m, 2)
        bad = gram(m, kb)
        wrong = type(bad)(entries=bad.entries * 1.5, quadrature_resolution=bad.quadrature_resolution)
        with pytest.raises(GramError):
            orthonormalize(kb, gram_matrix=wrong)


class TestHarmonicity:
    def test_holomorphic_dbar_residual_small(self):
        r = factor_harmonicity_residual(TorusFactor(TAU, 1), 1, 0, grid_n=64)
        assert r["first_order"] <= 1e-8

    def test_conjugate_laplacian_residual_unit_level(self):
        r = factor_harmonicity_residual(TorusFactor(TAU, -1), 1, 0, grid_n=64)
        assert r["laplacian"] <= 1e-6

    def test_conjugate_laplacian_residual_level_three_fine_grid(self):
        r = factor_harmonicity_residual(TorusFactor(TAU, -1), 3, 0, grid_n=192)
        assert r["laplacian"] <= 1e-6

    def test_fourth_order_convergence(self):
        f = TorusFactor(TAU, -1)
        r64 = factor_harmonicity_residual(f, 2, 0, grid_n=64)["laplacian"]
        r128 = factor_harmonicity_residual(f, 2, 0, grid_n=128)["laplacian"]
        assert r128 < r64 / 8   # at least cubic observed decay

    def test_perturbed_section_detected(self):
        r = factor_harmonicity_residual(
            TorusFactor(TAU, -1), 3, 0, grid_n=64,
            perturb=lambda A, B: 0.01 * np.cos(2 * np.pi * A) * np.cos(2 * np.pi * B))
        assert r["laplacian"] >= 1e-3

    def test_product_section_residual(self):
        m = model(-1, 1)
        res = harmonicity_residual(m, 1, (0, 0), grid_n=64)
        assert res <= 1e-6
