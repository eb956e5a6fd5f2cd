import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projtuple.completeness import Verdict, is_complete
from projtuple.errors import DependentFrame, HypothesisViolated, NotComplete
from projtuple.linalg import opnorm
from projtuple.model import gen_complete, gen_near_orthogonal, gen_positive, max_pairwise_product, validate_positive_tuple, validate_tuple
from projtuple.perturbation import (
    PerturbationParams,
    classical_constant,
    make_frame,
    near_identity_test,
    orthogonalize_nearby,
    orthogonalize_vectors_nearby,
    orthonormalize_frame,
    spectral_window,
    stability_radius,
)

from conftest import diag


def line(angle):
    v = np.array([np.cos(angle), np.sin(angle)])
    return np.outer(v, v).astype(complex)


class TestSpectralWindow:
    def test_orthogonal_projections(self, orthogonal_triple):
        ts = validate_positive_tuple(orthogonal_triple.mats)
        rep = spectral_window(ts, PerturbationParams(rho=1.0, eta=0.0, delta=0.1))
        np.testing.assert_allclose(rep.nonzero_eigenvalues, 1.0)
        assert rep.ok and rep.window == (pytest.approx(0.8), pytest.approx(1.2))

    def test_near_orthogonal_example(self):
        # pick the noise so the measured eta is close to 0.05
        t = next(t for noise in np.linspace(0.001, 0.1, 200)
                 if (t := gen_near_orthogonal(6, [2, 2, 2], noise, 1)).diagnostics["eta"] >= 0.045)
        eta = t.diagnostics["eta"]
        assert eta < 0.05
        rep = spectral_window(validate_positive_tuple(t.mats), PerturbationParams(rho=1.0, eta=0.05, delta=0.05))
        assert rep.window == (pytest.approx(0.9), pytest.approx(1.1))
        assert rep.ok
        assert np.all((rep.nonzero_eigenvalues >= 0.9) & (rep.nonzero_eigenvalues <= 1.1))

    def test_hypothesis_violated(self):
        with pytest.raises(HypothesisViolated) as info:
            PerturbationParams(rho=1.0, eta=0.6).validate(3)
        assert info.value.value == 0.6

    def test_delta_defaults_to_eta(self):
        ts = gen_positive(6, [2, 2], 0.02, 3)
        rep = spectral_window(ts)
        assert rep.delta == rep.eta

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(4, 10), st.floats(0.001, 0.04))
    def test_projection_tuples_stay_in_window(self, seed, k, noise):
        ranks = [1, 1, k - 2] if k > 3 else [1, 1]
        ts = gen_positive(k, ranks, noise, seed)
        rep = spectral_window(ts)
        assert not rep.excursions and rep.zero_isolated and rep.direct_sum

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(3, 10), st.floats(0.001, 0.04))
    def test_general_positive_tuples_stay_in_sound_window(self, seed, k, noise):
        ts = gen_positive(k, [1, k - 2], noise, seed, spread=(0.5, 2.0))
        rep = spectral_window(ts)
        assert not rep.sound_excursions

    def test_upper_edge_needs_norm_bound(self):
        # |T_1|^2 = 4 exceeds rho^2 + (n-1) delta = 1 for orthogonal T_i
        ts = validate_positive_tuple([diag(2, 0), diag(0, 1)])
        rep = spectral_window(ts)
        assert rep.rho == 1.0 and rep.excursions == [4.0]
        assert not rep.sound_excursions


class TestNearIdentity:
    def test_orthogonal(self, orthogonal_triple):
        assert near_identity_test(orthogonal_triple) is Verdict.COMPLETE

    def test_remark(self, remark_tuple):
        assert near_identity_test(remark_tuple) is Verdict.NOT_APPLICABLE

    def test_tiny_noise(self):
        t = gen_near_orthogonal(6, [2, 2, 2], 0.01, 2)
        assert near_identity_test(t) is Verdict.COMPLETE
        assert is_complete(t).verdict is Verdict.COMPLETE


class TestOrthogonalize:
    def test_orthogonal_is_fixed(self, orthogonal_triple):
        out = orthogonalize_nearby(orthogonal_triple, 0.5)
        assert out.diagnostics["max_distance"] == 0
        for p, q in zip(orthogonal_triple, out):
            np.testing.assert_array_equal(p, q)

    def test_two_lines(self):
        angle = np.pi / 2 - np.arcsin(0.1)
        t = validate_tuple([line(0.0), line(angle)])
        assert max_pairwise_product(t.mats) == pytest.approx(0.1)
        out = orthogonalize_nearby(t, 0.4)
        assert max(out.diagnostics["distances"]) < 0.4
        assert opnorm(out[0] @ out[1]) < 1e-12
        # each line turns by half the defect angle, and |P - P'| = sin of the turn
        turn = (np.pi / 2 - angle) / 2
        np.testing.assert_allclose(out.diagnostics["distances"], np.sin(turn), atol=1e-12)

    def test_four_components(self):
        t = next(t for s in range(100)
                 if 0 < (t := gen_near_orthogonal(8, [2, 2, 2, 2], 0.004, s)).diagnostics["eta"] < 0.01)
        out = orthogonalize_nearby(t, 0.06)
        assert out.diagnostics["max_distance"] < 0.06
        assert out.diagnostics["max_cross"] <= 1e-9

    def test_hypothesis(self):
        t = gen_near_orthogonal(4, [2, 2], 0.5, 0)
        with pytest.raises(HypothesisViolated):
            orthogonalize_nearby(t, 0.01)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(3, 12), st.floats(0.001, 0.1))
    def test_sharper_bound(self, seed, k, noise):
        n = min(k - 1, 4)
        ranks = [1] * n
        t = gen_near_orthogonal(k, ranks, noise / (n - 1), seed)
        eta = t.diagnostics["eta"]
        if not 0 < 2 * (n - 1) * eta < 0.99:
            return
        out = orthogonalize_nearby(t, 0.995)
        assert out.diagnostics["max_distance"] < 2 * (n - 1) * eta

    def test_classical_constant(self):
        assert [classical_constant(n) for n in (2, 3)] == [24, 864]
        assert all(2 * (n - 1) < classical_constant(n) for n in range(2, 10))


class TestFrames:
    def test_orthonormal(self):
        f = make_frame(np.eye(3)[:2])
        k_op, gammas = orthonormalize_frame(f)
        np.testing.assert_allclose(k_op, np.eye(3), atol=1e-15)
        np.testing.assert_allclose(gammas, f.vectors, atol=1e-15)
        np.testing.assert_allclose(orthogonalize_vectors_nearby(f, 0.5), f.vectors, atol=1e-15)

    def test_two_vectors_match_lowdin_oracle(self):
        vecs = np.array([[1, 0], [1, 1]], dtype=complex)
        vecs[1] /= np.sqrt(2)
        f = make_frame(vecs)
        gram = vecs.conj() @ vecs.T
        np.testing.assert_allclose(gram, [[1, 2 ** -0.5], [2 ** -0.5, 1]], atol=1e-15)
        k_op, gammas = orthonormalize_frame(f)
        x = vecs.T
        w, v = np.linalg.eigh(x.conj().T @ x)
        lowdin = x @ (v / np.sqrt(w)) @ v.conj().T
        np.testing.assert_allclose(gammas.T, lowdin, atol=1e-13)
        np.testing.assert_allclose(k_op, k_op.conj().T, atol=1e-15)

    def test_dependent(self):
        with pytest.raises(DependentFrame):
            make_frame(np.eye(2)[[0, 1, 0]])
        with pytest.raises(DependentFrame):
            make_frame(np.eye(3)[[0, 0]])

    def test_small_inner_products(self):
        rng = np.random.default_rng(5)
        base = np.eye(3, dtype=complex)
        vecs = base + 0.01 * (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        gram = vecs.conj() @ vecs.T
        assert np.abs(gram - np.diag(np.diag(gram))).max() < 0.025
        betas = orthogonalize_vectors_nearby(make_frame(vecs), 0.1)
        assert np.linalg.norm(vecs - betas, axis=1).max() < 0.2
        np.testing.assert_allclose(betas.conj() @ betas.T, np.eye(3), atol=1e-12)

    def test_large_inner_product(self):
        vecs = np.array([[1, 0], [0.5, np.sqrt(0.75)]], dtype=complex)
        with pytest.raises(HypothesisViolated):
            orthogonalize_vectors_nearby(make_frame(vecs), 0.1)


class TestStabilityRadius:
    def test_orthogonal_pair(self):
        t = validate_tuple([diag(1, 0), diag(0, 1)])
        assert stability_radius(t) == pytest.approx(1 / 48)

    def test_orthogonal_triple(self, orthogonal_triple):
        assert stability_radius(orthogonal_triple) == pytest.approx(1 / 288)

    def test_incomplete(self, remark_tuple):
        with pytest.raises(NotComplete):
            stability_radius(remark_tuple)

    def test_radius_below_breaking_size(self, oblique_pair):
        # rotating the second line onto the first destroys completeness at
        # distance |P_1 - P_2| = sin(pi/4); the radius must be smaller
        r = stability_radius(oblique_pair)
        assert r < opnorm(oblique_pair[0] - oblique_pair[1])

    def test_random_perturbations(self):
        from projtuple.experiments import exp_stability

        for seed in range(30):
            trial = exp_stability(np.random.default_rng(seed), 6, 3)
            assert not trial.violation
            assert trial.metrics["distance_over_radius"] == pytest.approx(0.9, rel=1e-6)


def test_generated_complete_has_positive_radius():
    assert stability_radius(gen_complete(5, [2, 3], 1)) > 0
