"""Decision rules and diagnostic probes over a finite decision set."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import CostMatrix, RegretKind, regret_transform
from .errors import InvalidProbability, NotUniqueMinimizer
from .simplex import solve_lp

# Two worst-case values closer than this (relative) are treated as tied.
TIE_TOL = 1e-9


@dataclass(frozen=True)
class Selection:
    """Outcome of a minimax-type rule.

    ``value`` is the rule's objective at ``chosen``: the worst transformed
    cost for plain minimax, the worst expectation over the ambiguity set for
    robust selection.  ``worst`` holds that objective for every decision.
    """

    chosen: str
    argmin_set: tuple[str, ...]
    value: float
    active_scenarios: tuple[str, ...]
    tie_break: str
    kind: RegretKind
    worst: Mapping[str, float] = field(default_factory=dict)


def near_min(values: np.ndarray, tol: float = TIE_TOL) -> np.ndarray:
    """Indices within ``tol`` (relative) of the minimum, in ascending order."""
    best = values.min()
    return np.flatnonzero(values <= best + tol * (1.0 + abs(best)))


def tie_trace(labels: Sequence[str], idx: Sequence[int], value: float, what: str = "decision") -> str:
    if len(idx) == 1:
        return f"unique minimizer {labels[idx[0]]!r}"
    names = ", ".join(repr(labels[i]) for i in idx)
    return (
        f"tie among {names} at {value:.12g} (relative tolerance {TIE_TOL:g}); "
        f"chose {labels[idx[0]]!r} by declared {what} order"
    )


def select_from_objective(
    C: CostMatrix, kind: RegretKind, objective: np.ndarray, active: Sequence[str] | None = None
) -> Selection:
    """Build a :class:`Selection` from a per-decision objective vector."""
    idx = near_min(objective)
    chosen = int(idx[0])
    value = float(objective[chosen])
    if active is None:
        col = regret_transform(C, kind).values[:, chosen]
        hit = col >= value - TIE_TOL * (1.0 + abs(value))
        active = tuple(s for s, h in zip(C.scenarios, hit) if h)
    return Selection(
        chosen=C.decisions[chosen],
        argmin_set=tuple(C.decisions[i] for i in idx),
        value=value,
        active_scenarios=tuple(active),
        tie_break=tie_trace(C.decisions, idx, value),
        kind=kind,
        worst={d: float(v) for d, v in zip(C.decisions, objective)},
    )


def minimax_select(C: CostMatrix, kind: RegretKind) -> Selection:
    """Choose the decision minimising the worst transformed cost over scenarios."""
    worst = regret_transform(C, kind).worst_case()
    return select_from_objective(C, kind, worst)


def pairwise_preference(C: CostMatrix, kind: RegretKind, d1: str, d2: str) -> str | None:
    """Preferred label when only ``d1`` and ``d2`` are on offer; None on a tie.

    The transform is recomputed on the two-column matrix, which is exactly
    what makes regret-based rules context dependent.
    """
    if d1 == d2:
        raise ValueError("pairwise comparison needs two distinct decisions")
    sub = C.restrict_decisions([d1, d2])
    w = regret_transform(sub, kind).worst_case()
    if abs(w[0] - w[1]) <= TIE_TOL * (1.0 + min(abs(w[0]), abs(w[1]))):
        return None
    return d1 if w[0] < w[1] else d2


Cycle = tuple[str, str, str]


def find_preference_cycles(C: CostMatrix, kind: RegretKind) -> list[Cycle]:
    """All strict 3-cycles of pairwise preference.

    A cycle ``(a, b, c)`` reads a > b, b > c, c > a and is rotated to start
    at the decision declared first.
    """
    winner: dict[frozenset, str | None] = {}

    def beats(a: str, b: str) -> bool:
        key = frozenset((a, b))
        if key not in winner:
            winner[key] = pairwise_preference(C, kind, a, b)
        return winner[key] == a

    cycles: list[Cycle] = []
    for a, b, c in itertools.combinations(C.decisions, 3):
        if beats(a, b) and beats(b, c) and beats(c, a):
            cycles.append((a, b, c))
        elif beats(a, c) and beats(c, b) and beats(b, a):
            cycles.append((a, c, b))
    return cycles


@dataclass(frozen=True)
class IiaViolation:
    removed: str
    old_choice: str
    new_choice: str


def iia_probe(C: CostMatrix, kind: RegretKind) -> list[IiaViolation]:
    """Remove each unchosen decision in turn and record any change of choice."""
    base = minimax_select(C, kind).chosen
    out = []
    if len(C.decisions) < 2:
        return out
    for d in C.decisions:
        if d == base:
            continue
        new = minimax_select(C.drop_decision(d), kind).chosen
        if new != base:
            out.append(IiaViolation(d, base, new))
    return out


@dataclass(frozen=True)
class RationalizabilityResult:
    feasible: bool
    probabilities: tuple[float, ...] | None = None


def rationalizability(C: CostMatrix, target: str) -> RationalizabilityResult:
    """Is there a probability vector under which ``target`` minimises expected cost?

    Solves the feasibility system ``p >= 0, sum p = 1`` and
    ``sum_i p_i C_i(target) <= sum_i p_i C_i(d)`` for every rival ``d``.
    """
    t = C.decision_index(target)
    rivals = [j for j in range(len(C.decisions)) if j != t]
    A = np.array([C.costs[:, t] - C.costs[:, j] for j in rivals]).reshape(len(rivals), -1)
    n = len(C.scenarios)
    sol = solve_lp(np.zeros(n), A, np.zeros(len(rivals)), np.ones((1, n)), [1.0])
    if not sol.optimal:
        return RationalizabilityResult(False)
    p = np.maximum(sol.x, 0.0)
    p = p / p.sum()
    return RationalizabilityResult(True, tuple(float(v) for v in p))


@dataclass(frozen=True)
class GamingConstruction:
    """Synthetic decision that pulls ``target`` into the minimax-regret choice set.

    ``M`` is the largest cost in the original table and ``L`` the smallest;
    ``injected_costs[pivot] = C_pivot(target) - M + L`` and every other entry
    is ``M - L + min_x C_i(x)``, which equals ``M`` whenever row ``i``
    attains the overall minimum.
    """

    injected_label: str
    injected_costs: tuple[float, ...]
    M: float
    L: float
    target: str
    pivot_scenario: str
    augmented: CostMatrix


def gaming_construct(
    C: CostMatrix, target: str, pivot: str, label: str = "gamed"
) -> GamingConstruction:
    """Inject a decision making ``target`` a minimax-regret winner.

    ``target`` must be the strict unique minimiser of scenario ``pivot``.
    The injected option undercuts ``target`` in the pivot scenario by the
    full cost range ``M - L``, so every rival inherits regret above that
    range there while ``target`` sits exactly on it.  Elsewhere its cost
    is set so that its own regret equals the same range, tying (not
    beating) the target.  The result guarantees membership in the argmin
    set; the tie is reported in the selection trace.
    """
    t = C.decision_index(target)
    k = C.scenario_index(pivot)
    row = C.costs[k]
    others = np.delete(row, t)
    if others.size and not np.all(row[t] < others):
        raise NotUniqueMinimizer(
            f"{target!r} is not the strict unique minimiser of scenario {pivot!r}"
        )
    while label in C.decisions:
        label += "'"
    M = float(C.costs.max())
    L = float(C.costs.min())
    if len(C.scenarios) == 1:
        # target already wins alone; a dominated option cannot unseat it
        injected = np.array([M])
    else:
        injected = (M - L) + C.costs.min(axis=1)
        injected[k] = row[t] - M + L
    aug = C.with_decision(label, injected)
    return GamingConstruction(label, tuple(float(v) for v in injected), M, L, target, pivot, aug)


def risk_aversion_limit(C: CostMatrix, p: Sequence[float], k: float) -> str:
    """Minimiser of the exponential disutility ``sum_i p_i exp(k C_i(x))``.

    Costs are rescaled to unit maximum magnitude first.  For large ``k`` this
    reproduces minimax cost: if the unique minimax decision beats every rival's
    worst case by ``gap`` (after rescaling) it is returned whenever
    ``min_i p_i * exp(k * gap) > 1``.
    """
    p = np.asarray(p, dtype=float)
    if p.shape != (len(C.scenarios),) or np.any(p < 0) or not np.isfinite(p).all():
        raise InvalidProbability("probabilities must be a non-negative vector, one per scenario")
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvalidProbability(f"probabilities sum to {p.sum()}, expected 1")
    if k <= 0:
        raise ValueError("risk-aversion parameter k must be positive")
    scale = np.abs(C.costs).max()
    X = C.costs / scale if scale > 0 else C.costs
    support = p > 0
    z = k * X[support]
    top = z.max(axis=0)
    # log-sum-exp per decision; comparing logs preserves the argmin
    score = top + np.log(p[support] @ np.exp(z - top))
    idx = near_min(score, 1e-12)
    return C.decisions[int(idx[0])]
