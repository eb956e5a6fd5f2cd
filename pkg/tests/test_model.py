import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projtuple.completeness import Verdict, oracle_direct_sum
from projtuple.errors import BadRanks, DimensionMismatch, NotIdempotent, NotProjection, TrivialProjection
from projtuple.linalg import opnorm
from projtuple.model import (
    gen_complete,
    gen_degenerate,
    gen_near_orthogonal,
    gen_positive,
    gen_random,
    max_pairwise_product,
    range_basis,
    range_projection,
    tuple_from_transform,
    validate_positive_tuple,
    validate_tuple,
)

from conftest import HALF_ONES, diag


class TestValidate:
    def test_remark_fixture(self, remark_tuple):
        assert (remark_tuple.n, remark_tuple.k, remark_tuple.ranks) == (3, 4, (2, 2, 2))

    def test_oblique_pair(self, oblique_pair):
        assert oblique_pair.ranks == (1, 1)

    def test_identity_is_trivial(self):
        with pytest.raises(TrivialProjection):
            validate_tuple([np.eye(3)])

    def test_zero_is_trivial(self):
        with pytest.raises(TrivialProjection):
            validate_tuple([diag(1, 0), np.zeros((2, 2))])

    def test_single_projection(self):
        with pytest.raises(DimensionMismatch):
            validate_tuple([diag(1, 0)])

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            validate_tuple([diag(1, 0), diag(1, 0, 0)])

    def test_not_projection(self):
        with pytest.raises(NotProjection) as info:
            validate_tuple([diag(1, 0), np.array([[1, 1], [0, 0]])])
        assert info.value.index == 1 and info.value.hermiticity > 0

    def test_matrices_are_read_only(self, oblique_pair):
        with pytest.raises(ValueError):
            oblique_pair[0][0, 0] = 2


class TestRangeProjection:
    def test_projection_is_fixed(self):
        np.testing.assert_allclose(range_projection(HALF_ONES), HALF_ONES, atol=1e-15)

    def test_oblique(self):
        e = np.array([[1, 1], [0, 0]], dtype=complex)
        r = range_projection(e)
        np.testing.assert_allclose(r, diag(1, 0), atol=1e-15)
        np.testing.assert_allclose(e @ r, r, atol=1e-15)
        np.testing.assert_allclose(r @ e, e, atol=1e-15)

    def test_identity(self):
        np.testing.assert_allclose(range_projection(np.eye(3)), np.eye(3))

    def test_rejects_non_idempotent(self):
        with pytest.raises(NotIdempotent):
            range_projection(diag(2, 0))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6), st.integers(2, 8), st.data())
    def test_random_oblique_idempotents(self, seed, k, data):
        r = data.draw(st.integers(1, k - 1))
        rng = np.random.default_rng(seed)
        s = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        if np.linalg.cond(s) > 1e3:
            return
        e = s @ diag(*([1] * r + [0] * (k - r))) @ np.linalg.inv(s)
        p = range_projection(e)
        scale = np.linalg.cond(s)
        assert opnorm(p @ p - p) < 1e-12 * scale ** 2
        assert opnorm(p - p.conj().T) < 1e-12 * scale ** 2
        assert opnorm(e @ p - p) < 1e-11 * scale ** 2
        assert opnorm(p @ e - e) < 1e-11 * scale ** 2


class TestGenerators:
    def test_identity_transport(self):
        t = tuple_from_transform(np.eye(2), [1, 1])
        np.testing.assert_allclose(t[0], diag(1, 0))
        np.testing.assert_allclose(t[1], diag(0, 1))

    @pytest.mark.parametrize("seed", range(5))
    def test_complete_passes_oracle(self, seed):
        t = gen_complete(4, [2, 1, 1], seed)
        assert t.ranks == (2, 1, 1)
        assert oracle_direct_sum(t) is Verdict.COMPLETE

    def test_bad_ranks(self):
        with pytest.raises(BadRanks):
            gen_complete(2, [1, 1, 1], 0)
        with pytest.raises(BadRanks):
            gen_near_orthogonal(3, [2, 2], 0.1, 0)

    def test_same_seed_same_tuple(self):
        a, b = gen_complete(6, [2, 2, 2], 11), gen_complete(6, [2, 2, 2], 11)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_zero_noise_is_orthogonal(self):
        t = gen_near_orthogonal(6, [2, 2, 1], 0.0, 3)
        assert t.diagnostics["eta"] == 0.0

    def test_principal_angle(self):
        # |P_1 P_2| is the cosine of the angle between the lines
        theta = np.arcsin(0.1)
        v = np.array([np.cos(np.pi / 2 - theta), np.sin(np.pi / 2 - theta)])
        t = validate_tuple([diag(1, 0), np.outer(v, v)])
        assert max_pairwise_product(t.mats) == pytest.approx(0.1, abs=1e-14)

    def test_large_noise_not_post_selected(self):
        t = gen_near_orthogonal(4, [2, 2], 1.0, 5)
        assert 0 < t.diagnostics["eta"] <= 1

    def test_degenerate_ranges_intersect(self):
        t = gen_degenerate(6, [3, 3], 2)
        assert sum(t.ranks) == 6
        assert oracle_direct_sum(t) is Verdict.INCOMPLETE

    def test_random_oversized(self):
        t = gen_random(5, [3, 3], 1)
        assert oracle_direct_sum(t) is Verdict.INCOMPLETE

    def test_positive_tuple(self):
        ts = gen_positive(6, [2, 2], 0.01, 4, spread=(0.5, 2.0))
        assert ts.n == 2 and all(0.5 - 1e-12 <= b <= 2.0 for b in ts.betas)

    def test_range_basis(self):
        t = gen_complete(5, [3, 2], 9)
        b = range_basis(t[0])
        assert b.shape == (5, 3)
        np.testing.assert_allclose(b @ b.conj().T, t[0], atol=1e-12)

    def test_positive_rejects_negative(self):
        from projtuple.errors import NotPSD

        with pytest.raises(NotPSD):
            validate_positive_tuple([diag(1, -1), diag(1, 0)])
