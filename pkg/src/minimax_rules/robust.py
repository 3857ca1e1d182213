"""Robust selection over a probability polytope ``{p : A p <= 0, p >= 0, sum p = 1}``.

The inner problem for a fixed decision is the LP

    maximise   sum_i p_i f_i
    subject to A p <= 0,  sum_i p_i = 1,  p >= 0

whose dual is ``min w  s.t.  w + (A^T q)_i >= f_i,  q >= 0``.  With no rows
the polytope is the whole simplex and the inner value is ``max_i f_i``, so
robust selection collapses to plain minimax.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .core import CostMatrix, RegretKind, check_labels, regret_transform
from .errors import Infeasible, UnknownScenario, ValidationError
from .finite import TIE_TOL, Selection, select_from_objective
from .simplex import LpSolution, LpStatus, solve_lp


@dataclass(frozen=True, eq=False)
class ProbabilityPolytope:
    """Scenario probabilities restricted by homogeneous rows ``sum_i r_i p_i <= 0``."""

    scenarios: tuple[str, ...]
    rows: tuple[Mapping[str, float], ...] = ()

    def __post_init__(self) -> None:
        scen = check_labels(self.scenarios, "scenario")
        known = set(scen)
        rows = []
        for r, row in enumerate(self.rows):
            clean = {}
            for name, coef in row.items():
                if name not in known:
                    raise UnknownScenario(f"constraint row {r} names unknown scenario {name!r}")
                coef = float(coef)
                if not math.isfinite(coef):
                    raise ValidationError(f"constraint row {r} has non-finite coefficient for {name!r}")
                clean[name] = coef
            rows.append(MappingProxyType(clean))
        object.__setattr__(self, "scenarios", scen)
        object.__setattr__(self, "rows", tuple(rows))

    @classmethod
    def pinned(cls, scenarios: Sequence[str], weights: Sequence[float]) -> "ProbabilityPolytope":
        """Polytope containing only ``p = weights / sum(weights)``.

        Uses pairs of opposite ratio rows between consecutive positive-weight
        scenarios and a ``p_i <= 0`` row for every zero weight.
        """
        w = [float(v) for v in weights]
        if len(w) != len(scenarios) or any(v < 0 for v in w) or sum(w) <= 0:
            raise ValidationError("weights must be non-negative, one per scenario, not all zero")
        rows: list[dict[str, float]] = []
        pos = [i for i, v in enumerate(w) if v > 0]
        for i, j in zip(pos, pos[1:]):
            si, sj = scenarios[i], scenarios[j]
            rows.append({si: w[j], sj: -w[i]})
            rows.append({sj: w[i], si: -w[j]})
        rows.extend({scenarios[i]: 1.0} for i, v in enumerate(w) if v == 0)
        return cls(tuple(scenarios), tuple(rows))

    def matrix(self) -> np.ndarray:
        idx = {s: i for i, s in enumerate(self.scenarios)}
        A = np.zeros((len(self.rows), len(self.scenarios)))
        for r, row in enumerate(self.rows):
            for name, coef in row.items():
                A[r, idx[name]] += coef
        return A

    def support(self, r: int) -> tuple[str, ...]:
        return tuple(s for s in self.scenarios if self.rows[r].get(s, 0.0) != 0.0)

    def restrict(self, labels: Sequence[str]) -> "ProbabilityPolytope":
        """Sub-polytope on ``labels``; every row must live entirely inside or outside."""
        keep = set(labels)
        rows = []
        for r, row in enumerate(self.rows):
            sup = set(self.support(r))
            if sup and sup <= keep:
                rows.append({k: v for k, v in row.items() if v != 0.0})
            elif sup & keep:
                raise ValidationError(f"constraint row {r} straddles the requested scenario subset")
        return ProbabilityPolytope(tuple(labels), tuple(rows))

    def with_row(self, row: Mapping[str, float]) -> "ProbabilityPolytope":
        return ProbabilityPolytope(self.scenarios, self.rows + (row,))


def inner_max(values: Sequence[float], polytope: ProbabilityPolytope) -> LpSolution:
    """Worst-case expectation of ``values`` over the polytope.

    ``x`` of the result is the maximising probability vector and
    ``dual_certificate`` the pair ``(w, q)`` read from the final tableau.
    Without rows the maximiser is the unit mass on the first largest value.
    """
    f = np.asarray(values, dtype=float)
    if f.shape != (len(polytope.scenarios),):
        raise ValidationError("one value per polytope scenario is required")
    if not np.all(np.isfinite(f)):
        raise ValidationError("values must be finite")
    if not polytope.rows:
        i = int(np.argmax(f))
        p = np.zeros_like(f)
        p[i] = 1.0
        top = float(f[i])
        return LpSolution(
            LpStatus.OPTIMAL, top, x=p, duals_ub=np.zeros(0), duals_eq=np.array([top]),
            dual_objective=top, dual_infeasibility=0.0, primal_infeasibility=0.0,
            dual_certificate=(top, np.zeros(0)),
        )
    A = polytope.matrix()
    n = len(f)
    sol = solve_lp(f, A, np.zeros(A.shape[0]), np.ones((1, n)), [1.0], maximize=True)
    if not sol.optimal:
        return sol
    return LpSolution(
        sol.status, sol.objective, x=sol.x, duals_ub=sol.duals_ub, duals_eq=sol.duals_eq,
        dual_objective=sol.dual_objective, dual_infeasibility=sol.dual_infeasibility,
        primal_infeasibility=sol.primal_infeasibility, iterations=sol.iterations,
        dual_certificate=(float(sol.duals_eq[0]), np.maximum(sol.duals_ub, 0.0)),
    )


def dual_certificate(values: Sequence[float], polytope: ProbabilityPolytope) -> tuple[float, np.ndarray]:
    """Solve the dual program ``min w s.t. w + (A^T q)_i >= f_i, q >= 0`` directly."""
    f = np.asarray(values, dtype=float)
    A = polytope.matrix()
    m, n = A.shape
    # variables: [w, q_1..q_m]; rows: -w - (A^T q)_i <= -f_i
    G = np.hstack([-np.ones((n, 1)), -A.T])
    c = np.zeros(m + 1)
    c[0] = 1.0
    sol = solve_lp(c, G, -f, bounds=[(None, None)] + [(0.0, None)] * m)
    if not sol.optimal:
        raise Infeasible(f"dual program is {sol.status.value}; the polytope is empty")
    return float(sol.x[0]), sol.x[1:]


def robust_select_finite(C: CostMatrix, kind: RegretKind, polytope: ProbabilityPolytope) -> Selection:
    """``min_x max_{p in P} sum_i p_i f_i(x)`` over the columns of ``C``.

    ``active_scenarios`` lists the support of the worst-case distribution at
    the chosen decision (all maximising scenarios when there are no rows).
    """
    if tuple(polytope.scenarios) != tuple(C.scenarios):
        raise ValidationError("polytope scenarios must match the cost matrix rows in order")
    F = regret_transform(C, kind).values
    sols = [inner_max(F[:, j], polytope) for j in range(F.shape[1])]
    for d, s in zip(C.decisions, sols):
        if not s.optimal:
            raise Infeasible(f"inner problem for {d!r} is {s.status.value}")
    objective = np.array([s.objective for s in sols])
    if not polytope.rows:
        return select_from_objective(C, kind, objective)
    chosen = int(np.flatnonzero(objective <= objective.min() + TIE_TOL * (1 + abs(objective.min())))[0])
    p = sols[chosen].x
    active = tuple(s for s, v in zip(C.scenarios, p) if v > TIE_TOL)
    return select_from_objective(C, kind, objective, active=active)


@dataclass(frozen=True)
class BlockStructure:
    components: tuple[tuple[str, ...], ...]

    def component_of(self, scenario: str) -> int:
        for j, comp in enumerate(self.components):
            if scenario in comp:
                return j
        raise UnknownScenario(f"unknown scenario {scenario!r}")


def block_structure(polytope: ProbabilityPolytope) -> BlockStructure:
    """Connected components of scenarios linked by shared constraint rows."""
    idx = {s: i for i, s in enumerate(polytope.scenarios)}
    parent = list(range(len(idx)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for r in range(len(polytope.rows)):
        sup = [idx[s] for s in polytope.support(r)]
        for a in sup[1:]:
            ra, rb = find(a), find(sup[0])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[str]] = {}
    for s in polytope.scenarios:
        groups.setdefault(find(idx[s]), []).append(s)
    # dict preserves first-seen order, i.e. ordering by first scenario
    return BlockStructure(tuple(tuple(g) for g in groups.values()))


def component_polytopes(polytope: ProbabilityPolytope, blocks: BlockStructure | None = None):
    blocks = blocks or block_structure(polytope)
    return [polytope.restrict(comp) for comp in blocks.components]


def component_solution(values: Sequence[float], sub: ProbabilityPolytope) -> LpSolution:
    return inner_max(values, sub)


def component_value(values: Sequence[float], sub: ProbabilityPolytope) -> float:
    """Optimal value ``g_j`` of the component LP; ``-inf`` if the component can carry no mass."""
    sol = inner_max(values, sub)
    if sol.status is LpStatus.INFEASIBLE:
        return float("-inf")
    return sol.objective
