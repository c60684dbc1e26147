import numpy as np
import pytest

from hullbound.bounds import bounds_at, jensen_check
from hullbound.markov import (
    FiniteConditioning,
    MarkovOperator,
    apply,
    conditional_expectation,
    expectation_operator,
    hull_preserved,
    random_conditioning,
    random_stochastic,
    verify_conditional_bounds,
    verify_markov_bounds,
)
from hullbound.pipeline import analyze


@pytest.fixture(scope="module")
def ex1():
    return analyze("2 - x + sin(2*pi*x)", "[0,1]")


@pytest.fixture(scope="module")
def ex2():
    return analyze("1/x", "[-2,-1]u[1,2]")


def grid_points(a, n, seed):
    xs = np.array(a.graph.xs)
    return xs[np.random.default_rng(seed).integers(0, len(xs), n)]


def test_apply_examples():
    v = np.array([1.0, 2.0, 4.0])
    np.testing.assert_array_equal(apply(MarkovOperator(np.eye(3)), v), v)
    assert apply(expectation_operator(3), v)[0] == pytest.approx(7 / 3)
    m = MarkovOperator(np.array([[1, 0, 0], [0, 0.5, 0.5]]))
    np.testing.assert_array_equal(apply(m, v), [1.0, 3.0])
    with pytest.raises(ValueError):
        apply(m, [1.0, 2.0])


@pytest.mark.parametrize(
    "bad",
    [[[0.5, 0.6]], [[1.5, -0.5]], [[]], [1.0, 0.0]],
)
def test_operator_validation(bad):
    with pytest.raises(ValueError):
        MarkovOperator(np.array(bad, dtype=float))


def test_conditional_expectation_examples():
    v = np.array([1.0, 3.0, 7.0])
    w = (0.25, 0.25, 0.5)
    c = FiniteConditioning(w, ((0, 1), (2,)))
    np.testing.assert_allclose(conditional_expectation(c, v), [2.0, 2.0, 7.0])
    trivial = FiniteConditioning(w, ((0, 1, 2),))
    np.testing.assert_allclose(conditional_expectation(trivial, v), [4.5] * 3)
    finest = FiniteConditioning(w, ((0,), (1,), (2,)))
    np.testing.assert_array_equal(conditional_expectation(finest, v), v)
    np.testing.assert_allclose(c.as_operator().matrix @ v, [2.0, 2.0, 7.0])


@pytest.mark.parametrize(
    "weights, blocks",
    [((0.5, 0.5), ((0,),)), ((0.5, 0.5), ((0, 1), (1,))), ((1.0, 0.0), ((0,), (1,))), ((0.6, 0.6), ((0, 1),))],
)
def test_conditioning_validation(weights, blocks):
    with pytest.raises(ValueError):
        FiniteConditioning(weights, blocks)


def test_identity_operator_is_sample_sandwich(ex2):
    x = grid_points(ex2, 16, 0)
    r = verify_markov_bounds(MarkovOperator(np.eye(16)), x, ex2.f, ex2.g_l, ex2.g_u, ex2.domain)
    assert r.ok


def test_averaging_row_reproduces_expectation_bound(ex1):
    x = grid_points(ex1, 20, 1)
    r = verify_markov_bounds(expectation_operator(20), x, ex1.f, ex1.g_l, ex1.g_u, ex1.domain)
    b = bounds_at(ex1.g_l, ex1.g_u, float(np.mean(x)), ex1.f, ex1.domain)
    assert r.lower[0] == pytest.approx(b.lower, abs=1e-15)
    assert r.upper[0] == pytest.approx(b.upper, abs=1e-15)
    assert r.ok


def test_random_matrices_ex2(ex2):
    total = 0
    for seed in range(50):
        m = random_stochastic(8, 16, seed)
        r = verify_markov_bounds(m, grid_points(ex2, 16, 100 + seed), ex2.f, ex2.g_l, ex2.g_u, ex2.domain)
        total += len(r.passed)
        assert r.violations == 0
    assert total == 400


def test_random_partitions_ex1(ex1):
    for seed in range(100):
        c = random_conditioning(64, seed)
        r = verify_conditional_bounds(c, grid_points(ex1, 64, seed), ex1.f, ex1.g_l, ex1.g_u, ex1.domain)
        assert r.ok


def test_trivial_and_finest_partitions(ex1):
    x = grid_points(ex1, 10, 2)
    w = tuple(np.full(10, 0.1))
    r = verify_conditional_bounds(FiniteConditioning(w, (tuple(range(10)),)), x, ex1.f, ex1.g_l, ex1.g_u)
    b = bounds_at(ex1.g_l, ex1.g_u, float(np.mean(x)), ex1.f, ex1.domain)
    assert r.ok and r.lower == pytest.approx(np.full(10, b.lower))
    finest = FiniteConditioning(w, tuple((i,) for i in range(10)))
    r = verify_conditional_bounds(finest, x, ex1.f, ex1.g_l, ex1.g_u)
    assert r.ok
    np.testing.assert_array_equal(r.mean_x, x)


def test_hull_preservation(ex1):
    rng = np.random.default_rng(4)
    verts = np.array(ex1.hull.vertices)
    for seed in range(20):
        idx = rng.integers(0, len(verts), 12)
        z = verts[idx]
        assert hull_preserved(random_stochastic(5, 12, seed), z, ex1.hull)


def test_composition_closure(ex2):
    for seed in range(10):
        a = random_stochastic(8, 16, seed)
        b = random_stochastic(16, 12, seed + 1000)
        ab = a @ b
        assert np.abs(ab.matrix.sum(axis=1) - 1).max() <= 1e-12
        r = verify_markov_bounds(ab, grid_points(ex2, 12, seed), ex2.f, ex2.g_l, ex2.g_u)
        assert r.ok


def test_tower_coarsening(ex1):
    x = grid_points(ex1, 64, 9)
    c = random_conditioning(64, 3, max_blocks=12)
    nb = len(c.partition)
    assert verify_conditional_bounds(c, x, ex1.f, ex1.g_l, ex1.g_u).ok
    coarse = c.coarsen([list(range(0, nb, 2)), list(range(1, nb, 2))] if nb > 1 else [[0]])
    assert verify_conditional_bounds(coarse, x, ex1.f, ex1.g_l, ex1.g_u).ok
    # E[E[X|fine]|coarse] = E[X|coarse]
    fine_x = conditional_expectation(c, x)
    np.testing.assert_allclose(conditional_expectation(coarse, fine_x), conditional_expectation(coarse, x))


def test_jensen_for_markov_operators():
    a = analyze("exp(x)", "[-1,1]")
    assert jensen_check(a.g_l, a.f, a.graph)
    for seed in range(10):
        x = grid_points(a, 16, seed)
        r = verify_markov_bounds(random_stochastic(8, 16, seed), x, a.f, a.g_l, a.g_u)
        assert (r.mean_f >= np.exp(r.mean_x) - 1e-7).all()


def test_report_json_has_margins(ex2):
    r = verify_markov_bounds(MarkovOperator(np.eye(2)), [1.0, 2.0], ex2.f, ex2.g_l, ex2.g_u, ex2.domain)
    js = r.to_json()
    assert js["violations"] == 0
    row = js["coordinates"][1]
    assert row["mean_x"] == 2.0 and row["lower_margin"] == pytest.approx(0.0, abs=1e-15)
    assert row["c_l"] == pytest.approx(1.0)
