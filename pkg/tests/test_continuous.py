import numpy as np
import pytest
from scipy.optimize import brentq

from minimax_rules import (
    AnchoredFamily,
    ContinuousProblem,
    DimensionMismatch,
    ExpLinear,
    PiecewiseLinear,
    ProbabilityPolytope,
    Quadratic,
    RegretKind,
    ValidationError,
    determining_set,
    hull_reduce,
    regret_functions,
    robust_block_solve,
    solve_1d,
    solve_nd,
)
from minimax_rules.continuous import ComponentFunction, in_convex_hull
from minimax_rules.robust import inner_max

K = RegretKind


def box(n, r=2.0):
    return -r * np.ones(n), r * np.ones(n)


def grid_minimax(funcs, lo, hi, step):
    axes = [np.arange(l, h + step / 2, step) for l, h in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    env = np.max([[f.value(p) for p in pts] for f in funcs], axis=0)
    i = int(np.argmin(env))
    return pts[i], env[i]


# --- examples -------------------------------------------------------------


@pytest.mark.parametrize("solver", [solve_1d, solve_nd])
def test_symmetric_pair(solver):
    P = ContinuousProblem([-2], [2], (Quadratic([1]), Quadratic([-1])))
    s = solver(P)
    assert s.x_star[0] == pytest.approx(0, abs=1e-9)
    assert s.value == pytest.approx(1, abs=1e-12)
    assert s.determining == ("s1", "s2")


def test_dominated_third_scenario_inactive():
    P = ContinuousProblem([-2], [2], (Quadratic([1]), Quadratic([-1]), Quadratic([0])))
    s = solve_1d(P)
    assert s.x_star[0] == pytest.approx(0, abs=1e-9) and s.value == pytest.approx(1)
    assert "s3" not in s.active


@pytest.mark.parametrize("solver", [solve_1d, solve_nd])
def test_exponential_versus_linear(solver):
    # the crossing of exp(-(x - 1)) and x, located by bracketing root search
    root = brentq(lambda x: np.exp(-(x - 1)) - x, 0, 5, xtol=1e-14)
    assert root == pytest.approx(1.0, abs=1e-12)
    P = ContinuousProblem([0], [5], (ExpLinear(1, 1, 1), Quadratic([0], 0.0, linear=1)))
    s = solver(P)
    assert s.x_star[0] == pytest.approx(root, abs=1e-9)
    assert s.value == pytest.approx(root, abs=1e-9)


def test_unit_vectors_2d():
    P = ContinuousProblem(*box(2), (Quadratic([1, 0]), Quadratic([0, 1])))
    s = solve_nd(P)
    assert s.x_star == pytest.approx([0.5, 0.5], abs=1e-9)
    assert s.value == pytest.approx(0.5, abs=1e-12)


def test_three_anchored_quadratics_against_grid():
    fs = (Quadratic([0, 0]), Quadratic([1, 0]), Quadratic([0, 1]))
    s = solve_nd(ContinuousProblem(*box(2), fs))
    x, v = grid_minimax(fs, [0.3, 0.3], [0.7, 0.7], 1e-3)  # coarse bracket
    lo, hi = x - 2e-3, x + 2e-3
    x, v = grid_minimax(fs, lo, hi, 1e-4)
    assert np.abs(s.x_star - x).max() <= 1e-4
    assert abs(s.value - v) <= 1e-6


def test_single_scenario_returns_minimiser():
    f = Quadratic([0.3, -0.7], [[2, 0.5], [0.5, 1]], linear=[0.2, 0.1])
    s = solve_nd(ContinuousProblem(*box(2), (f,)))
    y = f.center - 0.5 * np.linalg.solve(f.Q, f.linear)
    assert s.x_star == pytest.approx(y, abs=1e-7)
    assert s.determining == ("s1",)


def test_bound_constrained_optimum():
    P = ContinuousProblem([2, -1], [3, 1], (Quadratic([0, 0]), Quadratic([0, 0.5])))
    s = solve_nd(P)
    x, v = grid_minimax(P.functions, [2, -1], [2.2, 1], 1e-3)
    assert s.value == pytest.approx(v, abs=1e-5)
    assert s.x_star[0] == pytest.approx(2.0, abs=1e-9)


def test_piecewise_linear_scenarios_warn():
    fs = (PiecewiseLinear([[1.0], [-1.0]], [0.0, 0.0]), PiecewiseLinear([[0.5]], [0.2]))
    s = solve_1d(ContinuousProblem([-2], [2], fs))
    assert s.value == pytest.approx(max(abs(s.x_star[0]), 0.5 * s.x_star[0] + 0.2), abs=1e-9)
    assert s.value == pytest.approx(0.4 / 3, abs=1e-7)
    assert any("strictly convex" in w for w in s.warnings)


# --- regret ----------------------------------------------------------------


def test_regret_of_nonnegative_quadratic_is_itself():
    P = ContinuousProblem([-2], [2], (Quadratic([1]),), kind=K.REGRET_MIN)
    (r,) = regret_functions(P)
    for x in np.linspace(-2, 2, 9):
        assert r(np.array([x])) == pytest.approx((x - 1) ** 2)


def test_constant_function_regret_zero():
    P = ContinuousProblem([-2], [2], (Quadratic([0], 0.0, offset=3.0),), kind=K.REGRET_MIN)
    (r,) = regret_functions(P)
    assert r(np.array([1.3])) == 0.0


def test_regret_shift_identity_anchored():
    rng = np.random.default_rng(4)
    for h in (Quadratic([0.2, -0.1], [[1.5, 0.3], [0.3, 0.8]]), ExpLinear([1.0, 2.0], [0.8, 0.5], [0, 0])):
        k = np.array([0.4, 0.3])
        fam = AnchoredFamily(rng.uniform(-1, 1, (5, 2)), h, k)
        P = fam.problem(*box(2, 20.0), kind=K.REGRET_MIN)
        rs = regret_functions(P)
        for _ in range(20):
            y = rng.uniform(-2, 2, 2)
            vals = [r(y + a) for r, a in zip(rs, fam.anchors)]
            assert np.allclose(vals, vals[0], rtol=1e-10, atol=1e-10)


def test_regret_numeric_fallback_matches_closed_form():
    # a non-diagonal quadratic whose minimiser is clipped has no closed form
    f = Quadratic([3.0, 3.0], [[2.0, 0.9], [0.9, 1.0]])
    P = ContinuousProblem(*box(2, 1.0), (f,), kind=K.REGRET_MIN)
    (r,) = regret_functions(P)
    from scipy.optimize import minimize

    ref = minimize(f, np.zeros(2), jac=f.grad, bounds=[(-1, 1)] * 2, method="L-BFGS-B",
                   options={"ftol": 1e-15, "gtol": 1e-12})
    assert r.shift == pytest.approx(ref.fun, abs=1e-8)


# --- determining sets -------------------------------------------------------


def random_strict(rng, n):
    if rng.random() < 0.5 or n > 1:
        A = rng.normal(size=(n, n))
        return Quadratic(rng.uniform(-2, 2, n), A @ A.T + 0.2 * np.eye(n), rng.uniform(-1, 1, n))
    return ExpLinear(rng.uniform(0.5, 3), rng.uniform(0.3, 2), rng.uniform(-2, 2), rng.uniform(0.1, 1))


def test_seven_random_1d_scenarios():
    rng = np.random.default_rng(9)
    for _ in range(40):
        fs = tuple(random_strict(rng, 1) for _ in range(7))
        P = ContinuousProblem([-4], [4], fs, kind=K.REGRET_MIN)
        s = solve_1d(P)
        assert len(s.determining) <= 2
        again = solve_1d(P.subset(s.determining), determine=False)
        assert abs(again.x_star[0] - s.x_star[0]) <= 1e-6 * (1 + abs(s.x_star[0]))


def test_dominating_scenario_is_singleton():
    fs = (Quadratic([0.5], offset=10.0), Quadratic([1.0]), Quadratic([-1.0]))
    s = solve_1d(ContinuousProblem([-2], [2], fs))
    assert s.determining == ("s1",)
    assert s.x_star[0] == pytest.approx(0.5, abs=1e-9)


def test_determining_set_function_matches_solution():
    P = ContinuousProblem(*box(2), (Quadratic([1, 0]), Quadratic([0, 1]), Quadratic([-1, -1])))
    s = solve_nd(P, determine=False)
    assert determining_set(P, s) == solve_nd(P).determining


def test_envelope_dominance_random_nd():
    rng = np.random.default_rng(12)
    for _ in range(20):
        n = int(rng.integers(2, 4))
        fs = tuple(random_strict(rng, n) for _ in range(int(rng.integers(2, 6))))
        P = ContinuousProblem(*box(n, 3.0), fs)
        s = solve_nd(P)
        vals = [f.value(s.x_star) for f in fs]
        assert s.value == pytest.approx(max(vals), abs=1e-9)
        assert s.lower_bound <= s.value + 1e-9
        assert len(s.determining) <= n + 1


# --- hull reduction ---------------------------------------------------------


def test_hull_1d_midpoint():
    fam = AnchoredFamily([[0], [1], [2]], Quadratic([0]), [0])
    assert hull_reduce(fam) == ("s1", "s3")


def test_hull_square_with_centre():
    fam = AnchoredFamily([[0, 0], [1, 0], [0, 1], [1, 1], [0.5, 0.5]], Quadratic([0, 0]), [0, 0])
    assert hull_reduce(fam) == ("s1", "s2", "s3", "s4")


def test_hull_matches_scipy_convex_hull():
    from scipy.spatial import ConvexHull

    rng = np.random.default_rng(13)
    for _ in range(20):
        A = rng.uniform(-1, 1, (20, 2))
        fam = AnchoredFamily(A, Quadratic([0, 0]), [0, 0])
        expected = tuple(f"s{i + 1}" for i in sorted(ConvexHull(A).vertices))
        assert hull_reduce(fam) == expected


def test_hull_reduction_preserves_solution_20_anchors():
    rng = np.random.default_rng(14)
    fam = AnchoredFamily(rng.uniform(-1, 1, (20, 2)), Quadratic([0, 0]), [0, 0])
    full = solve_nd(fam.problem(*box(2)), determine=False)
    kept = solve_nd(fam.problem(*box(2), names=hull_reduce(fam)), determine=False)
    assert np.abs(full.x_star - kept.x_star).max() <= 1e-6
    assert abs(full.value - kept.value) <= 1e-6


def test_in_convex_hull_basic():
    assert in_convex_hull(np.array([0.5]), np.array([[0.0], [1.0]]))
    assert not in_convex_hull(np.array([1.5]), np.array([[0.0], [1.0]]))
    assert not in_convex_hull(np.array([0.0]), np.zeros((0, 1)))


# --- block-robust -----------------------------------------------------------


def test_block_no_rows_equals_plain_solve():
    rng = np.random.default_rng(15)
    for n in (1, 2):
        fs = tuple(random_strict(rng, n) for _ in range(4))
        P = ContinuousProblem(*box(n, 3.0), fs)
        r = robust_block_solve(P, ProbabilityPolytope(P.names))
        s = solve_nd(P)
        assert np.abs(r.x_star - s.x_star).max() <= 1e-6
        assert r.value == pytest.approx(s.value, abs=1e-7)
        assert set(r.determining) == set(s.determining)


def test_block_singletons_forced_unit_mass():
    P = ContinuousProblem([-3], [3], (Quadratic([1.0]), Quadratic([-2.0])))
    r = robust_block_solve(P, ProbabilityPolytope(P.names))
    assert r.x_star[0] == pytest.approx(-0.5, abs=1e-9)
    assert r.components == (("s1",), ("s2",))


def test_component_function_matches_inner_max():
    rng = np.random.default_rng(16)
    fs = [Quadratic([c]) for c in rng.uniform(-2, 2, 3)]
    sub = ProbabilityPolytope(("a", "b", "c"), ({"a": -1, "b": 1}, {"b": -1, "c": 1}))
    g = ComponentFunction(fs, sub)
    for x in rng.uniform(-2, 2, 10):
        xv = np.array([x])
        assert g.value(xv) == pytest.approx(inner_max([f.value(xv) for f in fs], sub).objective, abs=1e-12)


def test_three_blocks_with_ordering_rows():
    rng = np.random.default_rng(18)
    names = tuple("abcdef")
    rows = ({"a": -1, "b": 1}, {"c": -1, "d": 1}, {"e": -1, "f": 1})
    for _ in range(10):
        fs = tuple(Quadratic([rng.uniform(-2, 2)], rng.uniform(0.3, 2)) for _ in range(6))
        P = ContinuousProblem([-3], [3], fs, names)
        poly = ProbabilityPolytope(names, rows)
        r = robust_block_solve(P, poly)
        assert len(r.determining) <= 2
        keep = [s for comp in r.components for s in comp]
        sub = ContinuousProblem([-3], [3], tuple(fs[names.index(s)] for s in keep), tuple(keep))
        again = robust_block_solve(sub, poly.restrict(keep))
        assert abs(again.x_star[0] - r.x_star[0]) <= 1e-6 * (1 + abs(r.x_star[0]))


# --- validation -------------------------------------------------------------


def test_validation():
    with pytest.raises(ValidationError):
        ContinuousProblem([1], [1], (Quadratic([0]),))
    with pytest.raises(ValidationError):
        ContinuousProblem([0], [np.inf], (Quadratic([0]),))
    with pytest.raises(DimensionMismatch):
        ContinuousProblem([0, 0], [1, 1], (Quadratic([0]),))
    with pytest.raises(ValidationError):
        ContinuousProblem(np.zeros(11), np.ones(11), (Quadratic(np.zeros(11)),))
    with pytest.raises(ValidationError):
        ContinuousProblem([0], [1], (Quadratic([0]),), kind=K.REGRET_MEAN)
    with pytest.raises(ValidationError):
        solve_1d(ContinuousProblem([0, 0], [1, 1], (Quadratic([0, 0]),)))
