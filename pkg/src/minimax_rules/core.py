"""Scenario/decision universe, cost matrices and regret transforms.

A :class:`CostMatrix` is the table ``C[i, x]`` of costs borne when decision
``x`` is taken and scenario ``i`` occurs.  :func:`regret_transform` turns it
into the per-scenario objective ``f_i(x)`` used by every decision rule:

* ``COST``           f_i(x) = C_i(x)
* ``REGRET_MIN``     f_i(x) = C_i(x) - min_z C_i(z)
* ``REGRET_MEAN``    f_i(x) = C_i(x) - mean_z C_i(z)
* ``REGRET_MEDIAN``  f_i(x) = C_i(x) - median_z C_i(z)
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, DuplicateLabel, NonFiniteEntry, UnknownLabel, ValidationError

ScenarioSet = tuple[str, ...]
DecisionSet = tuple[str, ...]


class RegretKind(enum.Enum):
    COST = "cost"
    REGRET_MIN = "regret"
    REGRET_MEAN = "mean-regret"
    REGRET_MEDIAN = "median-regret"

    @property
    def rule_name(self) -> str:
        """Command-line spelling, e.g. ``minimax-regret``."""
        return "minimax-" + self.value

    @classmethod
    def from_rule(cls, rule: str) -> "RegretKind":
        for kind in cls:
            if rule in (kind.rule_name, kind.value, kind.name):
                return kind
        raise ValueError(f"unknown rule {rule!r}")


def check_labels(names: Iterable[str], what: str) -> tuple[str, ...]:
    names = tuple(str(n) for n in names)
    if not names:
        raise ValidationError(f"{what} set must be non-empty")
    seen: set[str] = set()
    for n in names:
        if n in seen:
            raise DuplicateLabel(f"duplicate {what} label {n!r}")
        seen.add(n)
    return names


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=float)
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Scenarios x decisions table of finite costs.

    Rows follow ``scenarios`` and columns follow ``decisions``; lookups are by
    label.  Instances are immutable (the backing array is read-only).
    """

    scenarios: ScenarioSet
    decisions: DecisionSet
    costs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "scenarios", check_labels(self.scenarios, "scenario"))
        object.__setattr__(self, "decisions", check_labels(self.decisions, "decision"))
        costs = np.asarray(self.costs, dtype=float)
        if costs.ndim != 2 or costs.shape != (len(self.scenarios), len(self.decisions)):
            raise DimensionMismatch(
                f"cost table has shape {costs.shape}, expected "
                f"{(len(self.scenarios), len(self.decisions))}"
            )
        if not np.all(np.isfinite(costs)):
            i, x = np.argwhere(~np.isfinite(costs))[0]
            raise NonFiniteEntry(f"non-finite cost at ({self.scenarios[i]!r}, {self.decisions[x]!r})")
        object.__setattr__(self, "costs", _frozen(costs))

    @property
    def shape(self) -> tuple[int, int]:
        return self.costs.shape

    def scenario_index(self, label: str) -> int:
        try:
            return self.scenarios.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown scenario {label!r}") from None

    def decision_index(self, label: str) -> int:
        try:
            return self.decisions.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown decision {label!r}") from None

    def cost(self, scenario: str, decision: str) -> float:
        return float(self.costs[self.scenario_index(scenario), self.decision_index(decision)])

    def column(self, decision: str) -> np.ndarray:
        return self.costs[:, self.decision_index(decision)]

    def row(self, scenario: str) -> np.ndarray:
        return self.costs[self.scenario_index(scenario)]

    def restrict_decisions(self, labels: Sequence[str]) -> "CostMatrix":
        idx = [self.decision_index(d) for d in labels]
        return CostMatrix(self.scenarios, tuple(labels), self.costs[:, idx])

    def restrict_scenarios(self, labels: Sequence[str]) -> "CostMatrix":
        idx = [self.scenario_index(s) for s in labels]
        return CostMatrix(tuple(labels), self.decisions, self.costs[idx, :])

    def drop_decision(self, label: str) -> "CostMatrix":
        self.decision_index(label)
        return self.restrict_decisions([d for d in self.decisions if d != label])

    def drop_scenario(self, label: str) -> "CostMatrix":
        self.scenario_index(label)
        return self.restrict_scenarios([s for s in self.scenarios if s != label])

    def with_decision(self, label: str, costs: Sequence[float]) -> "CostMatrix":
        column = np.asarray(costs, dtype=float).reshape(-1, 1)
        return CostMatrix(self.scenarios, self.decisions + (label,), np.hstack([self.costs, column]))

    def shift_rows(self, shifts: Sequence[float]) -> "CostMatrix":
        """Add ``shifts[i]`` to every entry of scenario row ``i``."""
        shifts = np.asarray(shifts, dtype=float).reshape(-1, 1)
        return CostMatrix(self.scenarios, self.decisions, self.costs + shifts)

    def scaled(self, factor: float) -> "CostMatrix":
        return CostMatrix(self.scenarios, self.decisions, self.costs * factor)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CostMatrix):
            return NotImplemented
        return (
            self.scenarios == other.scenarios
            and self.decisions == other.decisions
            and np.array_equal(self.costs, other.costs)
        )

    __hash__ = None  # type: ignore[assignment]


def build_cost_matrix(
    scenario_names: Sequence[str], decision_names: Sequence[str], rows: Sequence[Sequence[float]]
) -> CostMatrix:
    """Validate and wrap a nested-list cost table."""
    rows = list(rows)
    if len(rows) != len(scenario_names):
        raise DimensionMismatch(f"{len(rows)} rows for {len(scenario_names)} scenarios")
    for name, row in zip(scenario_names, rows):
        if len(row) != len(decision_names):
            raise DimensionMismatch(
                f"row {name!r} has {len(row)} entries, expected {len(decision_names)}"
            )
    table = np.array(rows, dtype=float).reshape(len(rows), len(decision_names))
    return CostMatrix(tuple(scenario_names), tuple(decision_names), table)


@dataclass(frozen=True, eq=False)
class RegretMatrix:
    """Transformed objective ``f_i(x)`` with the same labelling as its source."""

    source: CostMatrix
    kind: RegretKind
    values: np.ndarray

    @property
    def scenarios(self) -> ScenarioSet:
        return self.source.scenarios

    @property
    def decisions(self) -> DecisionSet:
        return self.source.decisions

    def column(self, decision: str) -> np.ndarray:
        return self.values[:, self.source.decision_index(decision)]

    def worst_case(self) -> np.ndarray:
        """Column-wise maximum over scenarios."""
        return self.values.max(axis=0)


def transform_values(costs: np.ndarray, kind: RegretKind) -> np.ndarray:
    costs = np.asarray(costs, dtype=float)
    if kind is RegretKind.COST:
        return costs.copy()
    lo = costs.min(axis=1, keepdims=True)
    rel = costs - lo
    if kind is RegretKind.REGRET_MIN:
        return rel
    if kind is RegretKind.REGRET_MEAN:
        return rel - rel.mean(axis=1, keepdims=True)
    # numpy's median averages the two central order statistics for even sizes
    return rel - np.median(rel, axis=1, keepdims=True)


def regret_transform(C: CostMatrix, kind: RegretKind) -> RegretMatrix:
    return RegretMatrix(C, kind, _frozen(transform_values(C.costs, kind)))
