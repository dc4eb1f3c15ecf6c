import numpy as np
import pytest

from expsamp.errors import (
    FormatError,
    InvalidParameterError,
    InvalidSizeError,
    ShapeError,
)
from expsamp.walk import (
    MarkingFunctions,
    WalkOperator,
    compute_lambda,
    constant_marking,
    format_marking,
    format_matrix,
    indicator_marking,
    make_complete_with_loops,
    make_interpolation,
    make_random_regular,
    make_two_state_chain,
    marks_for,
    parse_marking,
    parse_matrix,
    sample_walk,
    seed_length_bits,
    simulate_sums,
)


def assert_walk_invariants(op):
    a = op.matrix
    assert np.all(a >= 0)
    np.testing.assert_allclose(a.sum(axis=1), 1.0, atol=1e-12, rtol=0)
    flow = op.stationary[:, None] * a
    np.testing.assert_allclose(flow, flow.T, atol=1e-12, rtol=0)
    s = np.sqrt(op.stationary)
    m = op.symmetrized() - np.outer(s, s)
    assert op.lam == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(0.5 * (m + m.T)))), abs=1e-9)


class TestConstructors:
    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_complete_with_loops(self, n):
        op = make_complete_with_loops(n)
        assert np.all(op.matrix == 1.0 / n)
        assert op.lam == 0.0
        assert compute_lambda(op) == pytest.approx(0.0, abs=1e-12)
        assert_walk_invariants(op)

    def test_complete_rejects_zero(self):
        with pytest.raises(InvalidSizeError):
            make_complete_with_loops(0)

    def test_interpolation_examples(self):
        assert np.all(make_interpolation(2, 0.0).matrix == 0.5)
        op = make_interpolation(2, 0.5)
        np.testing.assert_allclose(op.matrix, [[0.75, 0.25], [0.25, 0.75]])
        assert op.lam == 0.5
        assert compute_lambda(make_interpolation(3, 0.9)) == pytest.approx(0.9, abs=1e-9)

    @pytest.mark.parametrize("n", range(2, 17))
    def test_interpolation_lambda_grid(self, n):
        for lam in np.arange(10) / 10:
            op = make_interpolation(n, lam)
            assert compute_lambda(op) == pytest.approx(lam, abs=1e-9)
            assert_walk_invariants(op)

    @pytest.mark.parametrize("lam", [-0.1, 1.0, 1.5])
    def test_interpolation_rejects_lam(self, lam):
        with pytest.raises(InvalidParameterError):
            make_interpolation(3, lam)

    def test_two_state_examples(self):
        np.testing.assert_allclose(
            make_two_state_chain(0.5, 0.5).matrix, make_interpolation(2, 0.5).matrix
        )
        np.testing.assert_allclose(make_two_state_chain(0.0, 0.3).matrix, [[0.3, 0.7], [0.3, 0.7]])
        op = make_two_state_chain(0.5, 0.25)
        np.testing.assert_allclose(op.matrix[0], [0.625, 0.375])
        np.testing.assert_allclose(op.stationary, [0.25, 0.75])

    @pytest.mark.parametrize("lam,mu", [(0.0, 0.3), (0.5, 0.25), (0.9, 0.01), (0.3, 0.99)])
    def test_two_state_lambda_is_lam(self, lam, mu):
        op = make_two_state_chain(lam, mu)
        assert compute_lambda(op) == pytest.approx(lam, abs=1e-12)
        assert_walk_invariants(op)

    @pytest.mark.parametrize("lam,mu", [(1.0, 0.5), (0.5, 0.0), (0.5, 1.0), (-0.2, 0.5)])
    def test_two_state_rejects(self, lam, mu):
        with pytest.raises(InvalidParameterError):
            make_two_state_chain(lam, mu)

    def test_random_regular_structure(self):
        op = make_random_regular(4, 3, 7)
        assert_walk_invariants(op)
        np.testing.assert_allclose(op.matrix, op.matrix.T, atol=1e-12)
        scaled = op.matrix * 3
        assert np.allclose(scaled, np.round(scaled))
        assert np.all(np.isin(np.round(scaled), [0, 1, 2, 3]))

    def test_random_regular_deterministic(self):
        assert np.array_equal(make_random_regular(4, 3, 7).matrix, make_random_regular(4, 3, 7).matrix)

    def test_random_regular_anchor(self):
        op = make_random_regular(10, 3, 1)
        assert op.lam < 1.0
        assert op.lam == pytest.approx(0.9205190606106306, abs=1e-9)

    @pytest.mark.parametrize("n,d", [(7, 3), (9, 5), (5, 3)])
    def test_odd_n_odd_d_rejected(self, n, d):
        with pytest.raises(InvalidParameterError):
            make_random_regular(n, d, 0)

    def test_odd_n_even_d(self):
        op = make_random_regular(9, 4, 2)
        assert_walk_invariants(op)
        assert op.degree == 4

    @pytest.mark.parametrize("n,d", [(3, 3), (4, 2), (2, 3)])
    def test_infeasible_rejected(self, n, d):
        with pytest.raises(InvalidParameterError):
            make_random_regular(n, d, 0)


class TestValidation:
    def test_asymmetric_rejected(self):
        with pytest.raises(InvalidParameterError, match="symmetric"):
            WalkOperator(np.array([[0.5, 0.5], [0.2, 0.8]]))

    def test_bad_row_sum(self):
        with pytest.raises(InvalidParameterError, match="row 1"):
            WalkOperator(np.array([[0.5, 0.5], [0.5, 0.6]]))

    def test_non_square(self):
        with pytest.raises(ShapeError):
            WalkOperator(np.ones((2, 3)) / 3)

    def test_bipartite_lambda_one(self):
        assert compute_lambda(WalkOperator(np.array([[0.0, 1.0], [1.0, 0.0]]))) == 1.0

    def test_immutable(self):
        op = make_complete_with_loops(3)
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 1.0

    def test_degree_multiple_check(self):
        with pytest.raises(InvalidParameterError, match="multiples"):
            WalkOperator(make_interpolation(2, 0.5).matrix, degree=2)


def test_lambda_invariant_under_relabeling():
    rng = np.random.default_rng(11)
    op = make_random_regular(12, 4, 5)
    perm = rng.permutation(12)
    relabeled = WalkOperator(op.matrix[np.ix_(perm, perm)])
    assert abs(compute_lambda(relabeled) - compute_lambda(op)) < 1e-9


def test_jacobi_and_lapack_agree_on_lambda():
    op = make_random_regular(40, 3, 3)
    assert compute_lambda(op, method="jacobi") == pytest.approx(compute_lambda(op, method="lapack"), abs=1e-10)


class TestMarking:
    def test_means(self):
        marks = MarkingFunctions(np.array([[1.0, 0.0, 0.5, 0.5], [0.2, 0.2, 0.2, 0.2]]))
        np.testing.assert_allclose(marks.mus, [0.5, 0.2], atol=1e-12)
        assert marks.phi == pytest.approx(0.7, abs=1e-9)

    def test_weighted_means_for_two_state(self):
        op = make_two_state_chain(0.5, 0.1)
        marks = indicator_marking(op, 100, [0])
        assert marks.phi == pytest.approx(10.0, abs=1e-9)

    def test_out_of_range(self):
        with pytest.raises(InvalidParameterError):
            MarkingFunctions(np.array([[1.5, 0.0]]))


class TestSampling:
    def test_constant_one(self):
        op = make_random_regular(6, 3, 0)
        assert sample_walk(op, constant_marking(op, 1, 1.0), 5).s_n == 1.0

    def test_deterministic_and_consistent(self):
        op = make_random_regular(10, 3, 1)
        marks = marks_for(op, np.random.default_rng(0).random((25, 10)))
        a, b = sample_walk(op, marks, 42), sample_walk(op, marks, 42)
        assert a == b
        assert a.s_n == pytest.approx(sum(a.z_values), abs=1e-12)
        for u, v in zip(a.vertices, a.vertices[1:]):
            assert op.matrix[u, v] > 0
        assert a.seed_bits == seed_length_bits(10, 3, 25)

    def test_zero_probability_moves_never_taken(self):
        op = WalkOperator(np.array([[0.0, 1.0], [1.0, 0.0]]))
        walk = sample_walk(op, constant_marking(op, 50, 0.0), 3)
        assert all(u != v for u, v in zip(walk.vertices, walk.vertices[1:]))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            sample_walk(make_complete_with_loops(3), constant_marking(make_complete_with_loops(4), 2, 1), 0)

    def test_sample_walk_stationary_mean(self):
        op = make_complete_with_loops(4)
        marks = indicator_marking(op, 1000, [0, 1])
        means = np.array([sample_walk(op, marks, s).s_n / 1000 for s in range(300)])
        se = means.std(ddof=1) / np.sqrt(len(means))
        assert abs(means.mean() - 0.5) < 3 * se

    def test_simulated_stationary_mean_full_scale(self):
        op = make_complete_with_loops(4)
        marks = indicator_marking(op, 10_000, [0, 1])
        means = simulate_sums(op, marks, 10_000, np.random.default_rng(0)) / 10_000
        se = means.std(ddof=1) / np.sqrt(len(means))
        assert abs(means.mean() - 0.5) < 3 * se

    def test_sticky_chain_overdispersed(self):
        op = make_interpolation(2, 0.99)
        marks = indicator_marking(op, 100, [1])
        sums = np.array([sample_walk(op, marks, s).s_n for s in range(2000)])
        assert sums.var() / (100 * 0.5 * 0.5) > 2

    def test_single_step_marginal_uniform(self):
        op = make_random_regular(8, 3, 4)
        counts = np.zeros(8)
        for v in range(8):
            m = marks_for(op, np.vstack([np.zeros(8), np.eye(8)[v]]))
            counts[v] = simulate_sums(op, m, 100_000, np.random.default_rng(v)).sum()
        p = 1 / 8
        sigma = np.sqrt(100_000 * p * (1 - p))
        assert np.all(np.abs(counts - 100_000 * p) < 4 * sigma)


@pytest.mark.parametrize(
    "n_vertices,d,n,expected",
    [(2, 2, 1, 1.0), (1024, 4, 11, 30.0), (8, 8, 2, 6.0)],
)
def test_seed_length(n_vertices, d, n, expected):
    assert seed_length_bits(n_vertices, d, n) == expected


class TestFiles:
    def test_matrix_roundtrip(self):
        op = make_random_regular(10, 3, 1)
        back = parse_matrix(format_matrix(op))
        assert np.array_equal(back.matrix, op.matrix)

    def test_marking_roundtrip(self):
        marks = MarkingFunctions(np.random.default_rng(1).random((3, 5)))
        assert np.array_equal(parse_marking(format_marking(marks)).values, marks.values)

    @pytest.mark.parametrize(
        "text,line",
        [
            ("2\n0.5 0.5\n0.5\n", 3),
            ("2\n0.5 0.5\n0.5 x\n", 3),
            ("2\n0.5 0.5\n0.6 0.6\n", 3),
            ("two\n", 1),
        ],
    )
    def test_matrix_errors_name_line(self, text, line):
        with pytest.raises(FormatError) as err:
            parse_matrix(text)
        assert err.value.line == line

    def test_marking_value_out_of_range(self):
        with pytest.raises(FormatError) as err:
            parse_marking("1 2\n0.5 1.5\n")
        assert err.value.line == 2
