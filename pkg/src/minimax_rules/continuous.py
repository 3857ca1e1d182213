"""Minimax over an axis-aligned box in R^n.

* :func:`solve_1d` - golden-section search on the upper envelope.
* :func:`solve_nd` - Kelley cutting planes on the epigraph form; each master
  LP is solved (in its dual form, n + 1 rows) with :func:`solve_lp`.

Both finish with an active-set Newton step on the KKT system of
``min t s.t. f_i(x) <= t``.  The step is accepted only if the resulting point
passes a full KKT check (non-negative multipliers, every scenario below the
envelope, correct bound multiplier signs), which certifies global optimality
for convex scenario costs; otherwise the search result is kept unchanged.

:func:`determining_set` shrinks the active set greedily while the optimum
stays put, :func:`hull_reduce` drops anchored scenarios lying in the convex
hull of the others, and :func:`robust_block_solve` applies the same machinery
to block-diagonal ambiguity sets, one envelope piece per component.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import RegretKind, check_labels
from .errors import DimensionMismatch, IterationLimit, NumericFailure, ValidationError
from .functions import ScenarioFunction, Shifted
from .robust import (
    ProbabilityPolytope,
    block_structure,
    inner_max,
)
from .simplex import LpStatus, solve_lp

GAP_TOL = 1e-7
ACTIVE_TOL = 1e-6
X_TOL = 1e-6
GOLDEN_TOL = 1e-9
MAX_DIM = 10

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class ContinuousProblem:
    """Scenario cost functions on the box ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray
    functions: tuple[ScenarioFunction, ...]
    names: tuple[str, ...] = ()
    kind: RegretKind = RegretKind.COST

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1 or lo.size < 1:
            raise DimensionMismatch("bounds must be two vectors of equal length n >= 1")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            raise ValidationError("bounds must be finite with lower < upper")
        if lo.size > MAX_DIM:
            raise ValidationError(f"dimension {lo.size} exceeds the supported maximum {MAX_DIM}")
        funcs = tuple(self.functions)
        if not funcs:
            raise ValidationError("at least one scenario function is required")
        for f in funcs:
            if f.dim != lo.size:
                raise DimensionMismatch(f"scenario function of dimension {f.dim} on a box of dimension {lo.size}")
        names = self.names or tuple(f"s{i + 1}" for i in range(len(funcs)))
        names = check_labels(names, "scenario")
        if len(names) != len(funcs):
            raise DimensionMismatch("one name per scenario function is required")
        if self.kind not in (RegretKind.COST, RegretKind.REGRET_MIN):
            raise ValidationError("continuous problems support COST and REGRET_MIN only")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "functions", funcs)
        object.__setattr__(self, "names", names)

    @property
    def dim(self) -> int:
        return self.lower.size

    def subset(self, names: Sequence[str]) -> "ContinuousProblem":
        """Sub-problem on ``names`` using the already transformed objectives."""
        fs = regret_functions(self)
        idx = [self.names.index(n) for n in names]
        return ContinuousProblem(self.lower, self.upper, tuple(fs[i] for i in idx), tuple(names))


@dataclass(frozen=True)
class AnchoredFamily:
    """Scenario costs ``h(x - a_i) + k.x`` sharing one shape ``h`` and cost vector ``k``."""

    anchors: np.ndarray
    h: ScenarioFunction
    k: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        a = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        if a.shape[1] != self.h.dim:
            raise DimensionMismatch("anchor dimension must match the shape function")
        if not np.all(np.isfinite(a)):
            raise ValidationError("anchors must be finite")
        object.__setattr__(self, "anchors", a)
        object.__setattr__(self, "k", np.broadcast_to(np.asarray(self.k, dtype=float), (self.h.dim,)).copy())
        names = self.names or tuple(f"s{i + 1}" for i in range(a.shape[0]))
        object.__setattr__(self, "names", check_labels(names, "scenario"))

    def functions(self) -> tuple[ScenarioFunction, ...]:
        return tuple(self.h.translated(a, self.k) for a in self.anchors)

    def problem(self, lower, upper, kind: RegretKind = RegretKind.COST, names: Sequence[str] | None = None):
        fs = dict(zip(self.names, self.functions()))
        names = tuple(names) if names is not None else self.names
        return ContinuousProblem(lower, upper, tuple(fs[n] for n in names), names, kind)


@dataclass(frozen=True, eq=False)
class ContinuousSolution:
    x_star: np.ndarray
    value: float
    active: tuple[str, ...]
    determining: tuple[str, ...]
    warnings: tuple[str, ...] = ()
    iterations: int = 0
    lower_bound: float = float("nan")
    components: tuple[tuple[str, ...], ...] = field(default=())


# --------------------------------------------------------------------------
# objective transforms


def box_minimum(f: ScenarioFunction, lower: np.ndarray, upper: np.ndarray) -> tuple[np.ndarray, float]:
    """Minimiser of ``f`` over the box: closed form when available, else numeric."""
    found = f.box_minimum(lower, upper)
    if found is not None:
        return found
    x, v, _, _ = _minimax([f], lower, upper)
    if not math.isfinite(v):
        raise NumericFailure("per-scenario minimisation did not converge")
    return x, v


def regret_functions(problem: ContinuousProblem) -> tuple[ScenarioFunction, ...]:
    """Per-scenario objectives: the costs, or ``f_i - min_D f_i`` for regret."""
    if problem.kind is RegretKind.COST:
        return problem.functions
    cached = problem.__dict__.get("_regret")
    if cached is None:
        cached = tuple(
            Shifted(f, box_minimum(f, problem.lower, problem.upper)[1]) for f in problem.functions
        )
        object.__setattr__(problem, "_regret", cached)
    return cached


# --------------------------------------------------------------------------
# search engines


def _envelope(funcs: Sequence[ScenarioFunction], x: np.ndarray) -> float:
    return max(f.value(x) for f in funcs)


def _golden(funcs, lower, upper) -> tuple[np.ndarray, float, int]:
    a, b = float(lower[0]), float(upper[0])
    F = lambda t: _envelope(funcs, np.array([t]))  # noqa: E731
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = F(c), F(d)
    it = 0
    while (b - a) > GOLDEN_TOL * (1.0 + abs(0.5 * (a + b))):
        it += 1
        if it > 10_000:
            raise IterationLimit("golden-section search did not converge")
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = F(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = F(d)
    pts = [a, c, d, b, 0.5 * (a + b)]
    vals = [F(t) for t in pts]
    i = int(np.argmin(vals))
    return np.array([pts[i]]), vals[i], it


def _kelley(funcs, lower, upper, max_iter: int):
    n = lower.size
    x = 0.5 * (lower + upper)
    slopes: list[np.ndarray] = []
    heights: list[float] = []
    owner: list[int] = []
    best_x, best = x.copy(), math.inf
    lb = -math.inf
    weights = np.zeros(len(funcs))
    for it in range(1, max_iter + 1):
        vals = [f.value(x) for f in funcs]
        top = max(vals)
        if top < best:
            best, best_x = top, x.copy()
        for i, f in enumerate(funcs):
            g = np.asarray(f.grad(x), dtype=float)
            slopes.append(g)
            heights.append(vals[i] - g @ x)
            owner.append(i)
        # dual master: max sum l_j h_j - mu_u.u + mu_l.l
        #   s.t. sum l_j = 1, sum l_j g_j + mu_u - mu_l = 0, all >= 0
        K = len(slopes)
        G = np.array(slopes).T
        A = np.zeros((n + 1, K + 2 * n))
        A[0, :K] = 1.0
        A[1:, :K] = G
        A[1:, K : K + n] = np.eye(n)
        A[1:, K + n :] = -np.eye(n)
        c = np.concatenate([heights, -upper, lower])
        b = np.zeros(n + 1)
        b[0] = 1.0
        sol = solve_lp(c, A_eq=A, b_eq=b, maximize=True)
        if sol.status is not LpStatus.OPTIMAL:
            raise NumericFailure(f"cutting-plane master problem is {sol.status.value}")
        lb = max(lb, sol.objective)
        weights = np.zeros(len(funcs))
        np.add.at(weights, owner, sol.x[:K])
        if best - lb <= GAP_TOL * (1.0 + abs(best)):
            return best_x, best, lb, it, weights
        x = np.clip(-sol.duals_eq[1:], lower, upper)
    raise IterationLimit(f"cutting-plane method hit the limit of {max_iter} iterations")


def _kkt_refine(funcs, lower, upper, x0, upper_value, hint):
    """Newton on the KKT system for candidate active sets; None if none verifies."""
    n = lower.size
    m = len(funcs)
    vals = np.array([f.value(x0) for f in funcs])
    top = vals.max()
    near = [i for i in range(m) if vals[i] >= top - 1e-3 * (1.0 + abs(top))]
    if len(near) > 12:
        return None
    first = sorted(i for i in near if hint[i] > 1e-8)
    candidates = [tuple(first)] if first else []
    for size in range(1, min(len(near), n + 1) + 1):
        for H in itertools.combinations(near, size):
            if H != tuple(first):
                candidates.append(H)

    span = upper - lower
    options = []
    for d in range(n):
        opts = [0]
        if x0[d] - lower[d] <= 1e-3 * span[d]:
            opts.insert(0, -1)
        if upper[d] - x0[d] <= 1e-3 * span[d]:
            opts.insert(0, 1)
        options.append(opts)
    tries = 0
    for fixed in itertools.product(*options):
        for H in candidates:
            tries += 1
            if tries > 400:
                return None
            got = _newton(funcs, lower, upper, x0, np.array(fixed), H, hint, upper_value)
            if got is not None:
                return got
    return None


def _newton(funcs, lower, upper, x0, fixed, H, hint, upper_value):
    n = lower.size
    free = np.flatnonzero(fixed == 0)
    if len(H) > free.size + 1:
        return None
    x = x0.copy()
    x[fixed == -1] = lower[fixed == -1]
    x[fixed == 1] = upper[fixed == 1]
    lam = np.array([max(hint[i], 0.0) for i in H])
    lam = lam / lam.sum() if lam.sum() > 0 else np.full(len(H), 1.0 / len(H))
    t = max(funcs[i].value(x) for i in H)
    nf, nh = free.size, len(H)
    size = nf + 1 + nh
    for _ in range(40):
        grads = np.array([funcs[i].grad(x) for i in H])
        fv = np.array([funcs[i].value(x) for i in H])
        r = np.concatenate([lam @ grads[:, free], fv - t, [lam.sum() - 1.0]])
        J = np.zeros((size, size))
        hsum = sum(l * funcs[i].hess(x) for l, i in zip(lam, H))
        J[:nf, :nf] = hsum[np.ix_(free, free)]
        J[:nf, nf + 1 :] = grads[:, free].T
        J[nf : nf + nh, :nf] = grads[:, free]
        J[nf : nf + nh, nf] = -1.0
        J[-1, nf + 1 :] = 1.0
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        x[free] += step[:nf]
        t += step[nf]
        lam += step[nf + 1 :]
        if (np.abs(step[:nf]).max(initial=0.0) <= 1e-13 * (1.0 + np.abs(x).max())
                and abs(step[nf]) <= 1e-13 * (1.0 + abs(t))):
            break
    else:
        return None

    scale = 1.0 + abs(t)
    if np.any(x < lower - 1e-12 * (1 + np.abs(lower))) or np.any(x > upper + 1e-12 * (1 + np.abs(upper))):
        return None
    x = np.clip(x, lower, upper)
    if np.any(lam < -1e-10):
        return None
    lam = np.maximum(lam, 0.0)
    allv = np.array([f.value(x) for f in funcs])
    if allv.max() > t + 1e-9 * scale or t > upper_value + 1e-9 * scale:
        return None
    grads = np.array([funcs[i].grad(x) for i in H])
    agg = lam @ grads
    gscale = 1.0 + np.abs(grads).max()
    if np.abs(agg[free]).max(initial=0.0) > 1e-8 * gscale:
        return None
    if np.any(agg[fixed == -1] < -1e-8 * gscale) or np.any(agg[fixed == 1] > 1e-8 * gscale):
        return None
    return x, float(allv.max())


def _minimax(funcs, lower, upper, max_iter: int = 10_000, method: str = "auto"):
    """Return ``(x, value, lower_bound, iterations)`` for ``min_x max_i f_i(x)``."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if method == "auto":
        method = "golden" if lower.size == 1 else "kelley"
    if method == "golden":
        x, v, it = _golden(funcs, lower, upper)
        lb = v
        hint = np.array([f.value(x) for f in funcs])
        hint = (hint >= v - ACTIVE_TOL * (1 + abs(v))).astype(float)
    else:
        x, v, lb, it, hint = _kelley(funcs, lower, upper, max_iter)
    refined = _kkt_refine(funcs, lower, upper, x, v, hint)
    if refined is not None and refined[1] <= v + 1e-9 * (1.0 + abs(v)):
        x, v = refined
        lb = min(lb, v)
    return x, v, lb, it


def _active(names, funcs, x, value) -> tuple[str, ...]:
    tol = ACTIVE_TOL * (1.0 + abs(value))
    return tuple(n for n, f in zip(names, funcs) if f.value(x) >= value - tol)


def _solve(problem: ContinuousProblem, determine: bool, max_iter: int = 10_000,
           method: str = "auto") -> ContinuousSolution:
    funcs = regret_functions(problem)
    x, v, lb, it = _minimax(funcs, problem.lower, problem.upper, max_iter, method)
    active = _active(problem.names, funcs, x, v)
    warnings = []
    if not all(f.strictly_convex for f in funcs):
        warnings.append("some scenario functions are not strictly convex; the minimiser may not be unique")
    sol = ContinuousSolution(x, v, active, active, tuple(warnings), it, lb)
    if determine:
        sol = _with_determining(
            problem, sol, lambda names: _solve(problem.subset(names), False, max_iter, method)
        )
    return sol


def solve_1d(problem: ContinuousProblem, determine: bool = True) -> ContinuousSolution:
    """Golden-section search on the envelope, then KKT refinement."""
    if problem.dim != 1:
        raise ValidationError("solve_1d needs a one-dimensional problem")
    return _solve(problem, determine, method="golden")


def solve_nd(problem: ContinuousProblem, determine: bool = True, max_iter: int = 10_000) -> ContinuousSolution:
    """Kelley cutting planes, then KKT refinement; also valid for n = 1."""
    return _solve(problem, determine, max_iter, method="kelley")


def solve(problem: ContinuousProblem, determine: bool = True) -> ContinuousSolution:
    """Golden section for n = 1, cutting planes otherwise."""
    return _solve(problem, determine)


def _close(a: np.ndarray, b: np.ndarray) -> bool:
    return float(np.abs(a - b).max()) <= X_TOL * (1.0 + float(np.abs(b).max()))


def _with_determining(problem, sol: ContinuousSolution, resolve: Callable) -> ContinuousSolution:
    K = list(sol.active)
    # One pass suffices: if dropping i moves the optimum for K it also does
    # for every subset of K (minimax values only fall as scenarios go).
    for name in list(K):
        trial = [k for k in K if k != name]
        if not trial:
            continue
        if _close(resolve(trial).x_star, sol.x_star):
            K = trial
    warnings = list(sol.warnings)
    funcs = regret_functions(problem)
    if all(f.strictly_convex for f in funcs) and len(K) > problem.dim + 1:
        warnings.append(f"determining set has {len(K)} > n + 1 scenarios; uniqueness may fail")
    return ContinuousSolution(sol.x_star, sol.value, sol.active, tuple(K), tuple(warnings),
                              sol.iterations, sol.lower_bound)


def determining_set(problem: ContinuousProblem, solution: ContinuousSolution) -> tuple[str, ...]:
    """Greedy reduction of the active set that keeps the optimum within tolerance."""
    return _with_determining(problem, solution, lambda names: _solve(problem.subset(names), False)).determining


# --------------------------------------------------------------------------
# convex-hull elimination


def in_convex_hull(point: np.ndarray, points: np.ndarray) -> bool:
    """Phase-1 feasibility of ``lam >= 0, sum lam = 1, points.T @ lam = point``."""
    points = np.atleast_2d(points)
    if points.shape[0] == 0:
        return False
    A = np.vstack([points.T, np.ones((1, points.shape[0]))])
    b = np.append(point, 1.0)
    sol = solve_lp(np.zeros(points.shape[0]), A_eq=A, b_eq=b)
    return sol.optimal


def hull_reduce(family: AnchoredFamily) -> tuple[str, ...]:
    """Drop scenarios whose anchor is a convex combination of the remaining ones."""
    keep = list(range(len(family.names)))
    for j in range(len(family.names)):
        others = [i for i in keep if i != j]
        if others and in_convex_hull(family.anchors[j], family.anchors[others]):
            keep.remove(j)
    return tuple(family.names[i] for i in keep)


# --------------------------------------------------------------------------
# block-diagonal ambiguity sets


class ComponentFunction(ScenarioFunction):
    """``g_j(x)``: worst-case expectation over one block of the polytope."""

    def __init__(self, funcs: Sequence[ScenarioFunction], sub: ProbabilityPolytope):
        self.funcs = tuple(funcs)
        self.sub = sub
        self.dim = funcs[0].dim
        self.strictly_convex = all(f.strictly_convex for f in funcs)
        self._key: bytes | None = None
        self._sol = None

    def _solve(self, x):
        key = np.asarray(x, dtype=float).tobytes()
        if key != self._key:
            self._sol = inner_max([f.value(x) for f in self.funcs], self.sub)
            self._key = key
            if self._sol.status is not LpStatus.OPTIMAL:
                raise NumericFailure("component carries no probability mass")
        return self._sol

    def value(self, x):
        return self._solve(x).objective

    def weights(self, x) -> np.ndarray:
        return self._solve(x).x

    def grad(self, x):
        p = self.weights(x)
        return sum(pi * f.grad(x) for pi, f in zip(p, self.funcs))

    def hess(self, x):
        p = self.weights(x)
        return sum(pi * f.hess(x) for pi, f in zip(p, self.funcs))


def robust_block_solve(problem: ContinuousProblem, polytope: ProbabilityPolytope) -> ContinuousSolution:
    """Minimise ``max_j g_j(x)`` over the components of a block-diagonal polytope.

    ``active``/``determining`` hold component labels (member scenarios
    joined by ``+``); ``components`` lists the members of the determining
    components.
    """
    if tuple(polytope.scenarios) != tuple(problem.names):
        raise ValidationError("polytope scenarios must match the problem's scenario names in order")
    funcs = dict(zip(problem.names, regret_functions(problem)))
    blocks = block_structure(polytope)
    pieces, labels, members, dead = [], [], {}, []
    for comp in blocks.components:
        sub = polytope.restrict(comp)
        probe = inner_max(np.zeros(len(comp)), sub)
        if probe.status is not LpStatus.OPTIMAL:
            dead.append(comp)
            continue
        label = "+".join(comp)
        pieces.append(ComponentFunction([funcs[s] for s in comp], sub))
        labels.append(label)
        members[label] = comp
    if not pieces:
        raise NumericFailure("no component of the polytope can carry probability mass")

    lower, upper = problem.lower, problem.upper
    x, v, lb, it = _minimax(pieces, lower, upper, method="kelley")
    active = _active(labels, pieces, x, v)
    L = list(active)
    for label in list(L):
        trial = [l for l in L if l != label]
        if not trial:
            continue
        xs, _, _, _ = _minimax([pieces[labels.index(l)] for l in trial], lower, upper, method="kelley")
        if _close(xs, x):
            L = trial
    warnings = [f"component {'+'.join(c)} cannot carry probability mass and was ignored" for c in dead]
    if len(L) > problem.dim + 1 and all(p.strictly_convex for p in pieces):
        warnings.append(f"{len(L)} determining components exceed n + 1")
    return ContinuousSolution(x, v, active, tuple(L), tuple(warnings), it, lb,
                              components=tuple(members[l] for l in L))
