import numpy as np
import pytest
import scipy.linalg

from ssdr import (CostMatrix, Dataset, EmbeddingModel, HeatKernelSpec,
                  LearnerSpec, UNLABELED, axis_weighting, embed, fit,
                  generate_multimodal_toy, laplacian_scatter, load_model,
                  numerical_rank, pairwise_sq_dists, pca_preprocess,
                  regularize, resolve_k, save_model, solve_gev)


def random_pd(rng, d):
    M = rng.standard_normal((d, d))
    return M @ M.T + d * np.eye(d)


def random_symmetric(rng, d):
    M = rng.standard_normal((d, d))
    return 0.5 * (M + M.T)


def labeled_dataset(rng, d0=4, n=40, c=2):
    X = rng.standard_normal((d0, n))
    labels = np.array([1 + i % c for i in range(n)])
    return Dataset(X=X, labels=labels, n_classes=c)


class TestLaplacianScatter:
    def test_zero_cost(self):
        X = np.random.default_rng(0).standard_normal((3, 5))
        assert np.allclose(laplacian_scatter(X, np.zeros((5, 5))), 0)

    def test_hand_example(self):
        X = np.array([[1.0, 0.0], [0.0, 0.0]])
        C = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(laplacian_scatter(X, C),
                                   [[1.0, 0.0], [0.0, 0.0]])

    def test_pairwise_sum_oracle(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((4, 10))
        C = random_symmetric(rng, 10)
        np.fill_diagonal(C, 0.0)
        A = rng.standard_normal((2, 4))
        L = laplacian_scatter(X, C)
        ordered = float((C * pairwise_sq_dists(A @ X)).sum())
        assert 2 * np.trace(A @ L @ A.T) == pytest.approx(ordered, rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            laplacian_scatter(np.zeros((2, 3)), np.zeros((4, 4)))


class TestRegularize:
    def test_epsilon_zero(self):
        B = random_pd(np.random.default_rng(2), 3)
        np.testing.assert_array_equal(regularize(B, 0.0), B)

    def test_zero_matrix(self):
        np.testing.assert_allclose(regularize(np.zeros((3, 3)), 0.1),
                                   0.1 * np.eye(3))

    def test_eigenvalue_shift(self):
        B = random_symmetric(np.random.default_rng(3), 5)
        lo = scipy.linalg.eigh(B, eigvals_only=True)[0]
        lo_reg = scipy.linalg.eigh(regularize(B, 0.7), eigvals_only=True)[0]
        assert lo_reg == pytest.approx(lo + 0.7, rel=1e-10)

    def test_negative_epsilon(self):
        with pytest.raises(ValueError):
            regularize(np.eye(2), -1.0)


class TestSolveGev:
    def test_diagonal_case(self):
        A, lam = solve_gev(np.diag([3.0, 1.0, 2.0]), np.eye(3), 2)
        np.testing.assert_allclose(lam, [1.0, 2.0])
        np.testing.assert_allclose(np.abs(A), [[0, 1, 0], [0, 0, 1]], atol=1e-12)
        assert A[0, 1] > 0 and A[1, 2] > 0  # sign convention

    def test_residuals_and_constraint(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            d0 = int(rng.integers(2, 11))
            L = random_symmetric(rng, d0)
            B = random_pd(rng, d0)
            A, lam = solve_gev(L, B, d0)
            assert (np.diff(lam) >= -1e-12).all()
            np.testing.assert_allclose(A @ B @ A.T, np.eye(d0), atol=1e-8)
            for j in range(d0):
                res = np.linalg.norm(L @ A[j] - lam[j] * B @ A[j])
                assert res <= 1e-8 * (np.linalg.norm(L, "fro")
                                      + abs(lam[j]) * np.linalg.norm(B, "fro"))

    def test_optimality_against_random_feasible(self):
        rng = np.random.default_rng(5)
        L = random_symmetric(rng, 5)
        B = random_pd(rng, 5)
        A, _ = solve_gev(L, B, 2)
        best = np.trace(A @ L @ A.T)
        R = scipy.linalg.cholesky(B, lower=False)
        Rinv = scipy.linalg.solve_triangular(R, np.eye(5), lower=False)
        for _ in range(200):
            Q = np.linalg.qr(rng.standard_normal((5, 2)))[0]  # feasible in the
            At = (Rinv @ Q).T                                 # whitened space
            np.testing.assert_allclose(At @ B @ At.T, np.eye(2), atol=1e-8)
            assert best <= np.trace(At @ L @ At.T) + 1e-10

    def test_not_pd_error_mentions_epsilon(self):
        with pytest.raises(np.linalg.LinAlgError, match="epsilon"):
            solve_gev(np.eye(3), np.zeros((3, 3)), 2)

    def test_dim_too_large(self):
        with pytest.raises(ValueError):
            solve_gev(np.eye(3), np.eye(3), 4)


class TestAxisWeighting:
    def setup_method(self):
        rng = np.random.default_rng(6)
        self.A = rng.standard_normal((3, 5))
        self.lam = np.array([0.5, 1.5, 4.0])

    def test_t1_identity(self):
        np.testing.assert_array_equal(
            axis_weighting(self.A, self.lam, "T1_identity"), self.A)

    def test_t2_unit_rows(self):
        out = axis_weighting(self.A, self.lam, "T2_unit_rows")
        np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0)

    def test_t3_sqrt_lambda(self):
        out = axis_weighting(self.A, self.lam, "T3_sqrt_lambda")
        np.testing.assert_allclose(out, np.sqrt(self.lam)[:, None] * self.A)

    def test_t4_composition(self):
        t3 = axis_weighting(self.A, self.lam, "T3_sqrt_lambda")
        norms = np.linalg.norm(self.A, axis=1)
        np.testing.assert_allclose(axis_weighting(self.A, self.lam, "T4_combined"),
                                   t3 / norms[:, None])

    def test_negative_lambda_clamped(self):
        out = axis_weighting(self.A, np.array([-1e-14, 1.0, 2.0]),
                             "T3_sqrt_lambda")
        assert np.allclose(out[0], 0.0)

    def test_zero_row_error(self):
        A = self.A.copy()
        A[1] = 0.0
        with pytest.raises(ValueError):
            axis_weighting(A, self.lam, "T2_unit_rows")


class TestPcaPreprocess:
    def test_full_rank_keeps_dimension(self):
        X = np.random.default_rng(7).standard_normal((3, 20))
        Xr, basis = pca_preprocess(X)
        assert Xr.shape[0] == 3 and basis.shape == (3, 3)

    def test_duplicated_row_drops_dimension(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((3, 20))
        X = np.vstack([X, X[0]])
        Xr, _ = pca_preprocess(X)
        assert Xr.shape[0] == 3
        assert numerical_rank(X) == 3

    def test_distances_preserved(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((2, 15))
        X = np.vstack([X, X.sum(axis=0)])  # rank-deficient 3rd row
        Xr, _ = pca_preprocess(X)
        np.testing.assert_allclose(pairwise_sq_dists(Xr), pairwise_sq_dists(X),
                                   rtol=1e-8, atol=1e-8)


class TestResolveK:
    def test_values(self):
        assert resolve_k(np.array([10, 10])) == 3
        assert resolve_k(np.array([2, 5])) == 2
        assert resolve_k(np.array([1, 1])) == 1

    def test_zero_count_errors(self):
        with pytest.raises(ValueError):
            resolve_k(np.array([3, 0]))


class TestFit:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            LearnerSpec(base="pca")
        with pytest.raises(ValueError):
            LearnerSpec(base="none", unlabel="none")
        with pytest.raises(ValueError):
            LearnerSpec(weighting_mode="T5")

    def test_constraint_satisfaction_t1(self):
        rng = np.random.default_rng(10)
        d = labeled_dataset(rng)
        model = fit(d, LearnerSpec(base="lfda", unlabel="heat", gamma=0.5, dim=2))
        # reconstruct B + eps*I from the training pipeline
        from ssdr.solver import build_cost_matrices
        from ssdr.dataset import center
        ds, _ = center(d)
        _, B, _ = build_cost_matrices(ds.X, ds.labels,
                                      LearnerSpec(base="lfda", unlabel="heat",
                                                  gamma=0.5, dim=2))
        np.testing.assert_allclose(
            model.A @ regularize(B, model.epsilon) @ model.A.T, np.eye(2),
            atol=1e-8)

    def test_lpp_star_alpha_one_equals_lpp(self):
        from dataclasses import replace
        from ssdr import learner_preset
        rng = np.random.default_rng(11)
        d = labeled_dataset(rng)
        star, _ = learner_preset("lpp*", dim=2)
        plain, _ = learner_preset("lpp", dim=2)
        m1 = fit(d, replace(star, alpha=1))
        m2 = fit(d, plain)
        np.testing.assert_array_equal(m1.A, m2.A)

    def test_gamma_zero_equals_supervised(self):
        rng = np.random.default_rng(12)
        d = labeled_dataset(rng)
        ss = fit(d, LearnerSpec(base="dne", unlabel="heat", gamma=0.0, dim=2))
        sup = fit(d, LearnerSpec(base="dne", unlabel="none", gamma=0.0, dim=2))
        np.testing.assert_array_equal(ss.A, sup.A)
        np.testing.assert_array_equal(ss.eigenvalues, sup.eigenvalues)

    def test_rank_deficient_data_triggers_pca(self):
        rng = np.random.default_rng(13)
        X = rng.standard_normal((2, 30))
        X = np.vstack([X, X[0] + X[1]])
        d = Dataset(X=X, labels=np.array([1 + i % 2 for i in range(30)]),
                    n_classes=2)
        model = fit(d, LearnerSpec(base="lfda", unlabel="none", gamma=0.0, dim=2))
        assert model.pre_pca is not None and model.pre_pca.shape == (3, 2)
        assert embed(model, d.X).shape == (2, 30)

    def test_singular_constraint_epsilon_fallback_warns(self):
        # few labeled points make the within-scatter singular at epsilon = 0
        rng = np.random.default_rng(14)
        X = rng.standard_normal((5, 30))
        labels = np.full(30, UNLABELED)
        labels[:4] = [1, 1, 2, 2]
        d = Dataset(X=X, labels=labels, n_classes=2)
        with pytest.warns(UserWarning, match="singular"):
            fit(d, LearnerSpec(base="lfda", unlabel="none", gamma=0.0, dim=2))

    def test_dim_exceeds_rank_errors(self):
        rng = np.random.default_rng(15)
        d = labeled_dataset(rng, d0=3)
        with pytest.raises(ValueError):
            fit(d, LearnerSpec(base="lfda", unlabel="none", gamma=0.0, dim=4))

    def test_needs_labels(self):
        d = Dataset(X=np.random.default_rng(16).standard_normal((2, 10)),
                    labels=np.full(10, UNLABELED), n_classes=2)
        with pytest.raises(ValueError):
            fit(d, LearnerSpec(base="dne", unlabel="none", gamma=0.0, dim=1))


class TestEmbed:
    def setup_method(self):
        rng = np.random.default_rng(17)
        self.d = labeled_dataset(rng)
        self.model = fit(self.d, LearnerSpec(base="lfda", unlabel="heat",
                                             gamma=0.3, dim=2))

    def test_train_mean_maps_to_zero(self):
        np.testing.assert_allclose(embed(self.model, self.model.train_mean), 0,
                                   atol=1e-12)

    def test_batch_matches_single(self):
        Z = embed(self.model, self.d.X)
        for j in (0, 5, 17):
            np.testing.assert_allclose(Z[:, j], embed(self.model, self.d.X[:, j]))

    def test_distance_invariance_under_orthogonal_row_mix(self):
        rng = np.random.default_rng(18)
        Q = np.linalg.qr(rng.standard_normal((2, 2)))[0]
        rotated = EmbeddingModel(A=Q @ self.model.A,
                                 eigenvalues=self.model.eigenvalues,
                                 train_mean=self.model.train_mean,
                                 pre_pca=self.model.pre_pca)
        z = embed(self.model, self.d.X)
        zr = embed(rotated, self.d.X)
        np.testing.assert_allclose(pairwise_sq_dists(zr), pairwise_sq_dists(z),
                                   rtol=1e-8, atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            embed(self.model, np.zeros(7))


class TestObjectiveInvariances:
    def test_trace_ratio_invariant_under_nonsingular_transform(self):
        rng = np.random.default_rng(19)
        L = random_symmetric(rng, 5)
        B = random_pd(rng, 5)
        A, _ = solve_gev(L, B, 3)
        value = np.trace(np.linalg.solve(A @ B @ A.T, A @ L @ A.T))
        for _ in range(10):
            T = rng.standard_normal((3, 3))
            while abs(np.linalg.det(T)) < 1e-3:
                T = rng.standard_normal((3, 3))
            TA = T @ A
            v = np.trace(np.linalg.solve(TA @ B @ TA.T, TA @ L @ TA.T))
            assert v == pytest.approx(value, rel=1e-8)


class TestModelSerialization:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(20)
        X = rng.standard_normal((2, 30))
        X = np.vstack([X, X[0]])  # force a pre-PCA basis
        d = Dataset(X=X, labels=np.array([1 + i % 2 for i in range(30)]),
                    n_classes=2)
        model = fit(d, LearnerSpec(base="lfda", unlabel="heat", gamma=0.4,
                                   alpha=2, dim=2, weighting_mode="T3_sqrt_lambda"))
        save_model(model, tmp_path / "m.bin")
        back = load_model(tmp_path / "m.bin")
        np.testing.assert_array_equal(back.A, model.A)
        np.testing.assert_array_equal(back.eigenvalues, model.eigenvalues)
        np.testing.assert_array_equal(back.train_mean, model.train_mean)
        np.testing.assert_array_equal(back.pre_pca, model.pre_pca)
        assert back.weighting_mode == model.weighting_mode
        assert back.gamma == model.gamma and back.alpha == model.alpha
        assert back.epsilon == model.epsilon
        np.testing.assert_array_equal(embed(back, d.X), embed(model, d.X))

    def test_bad_magic(self, tmp_path):
        (tmp_path / "junk.bin").write_bytes(b"NOPE" + b"\0" * 64)
        with pytest.raises(ValueError, match="not a model file"):
            load_model(tmp_path / "junk.bin")


class TestToyEndToEnd:
    def test_two_cluster_ssl_beats_fda_single_split(self):
        from ssdr import KnnIndex, SplitSpec, knn_classify, split
        data = generate_multimodal_toy("two-cluster", 50, 0.5, 0)
        lab, unl, _ = split(data, SplitSpec(labeled=20, seed=0,
                                            per_class_labels=True), 0)
        train = data.with_labels_hidden(lab)

        def acc(spec):
            m = fit(train, spec)
            Z = embed(m, data.X)
            idx = KnnIndex(Z[:, lab], data.labels[lab], 1)
            return float((knn_classify(idx, Z[:, unl]) == data.labels[unl]).mean())

        ss = acc(LearnerSpec(base="lfda", unlabel="heat", gamma=1.0, dim=1))
        fda = acc(LearnerSpec(base="fda", unlabel="none", gamma=0.0, dim=1))
        assert ss >= 0.9 and fda <= 0.75
