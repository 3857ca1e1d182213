"""Project portfolios: decisions are subsets of a project list with additive costs.

The cost of running the subset ``T`` under scenario ``i`` is
``C_i(T) = sum_{k in T} c_i(k) + W_i``.  All ``2**n`` subsets are enumerated,
ordered by size and then lexicographically by project position, so the
empty set comes first and earlier ties prefer doing less.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import CostMatrix, RegretKind, check_labels
from .errors import DimensionMismatch, EmptyScenarioSet, NonFiniteEntry, TooManyProjects, UnknownLabel
from .finite import Selection, minimax_select

MAX_PROJECTS = 20


def subset_label(members: Sequence[str]) -> str:
    return "{" + ",".join(members) + "}"


def subsets_by_rank(n: int) -> list[tuple[int, ...]]:
    """Index tuples of every subset of ``range(n)``: by size, then lexicographic."""
    return [c for r in range(n + 1) for c in itertools.combinations(range(n), r)]


@dataclass(frozen=True, eq=False)
class AdditiveProjectInstance:
    projects: tuple[str, ...]
    scenarios: tuple[str, ...]
    c: np.ndarray
    W: np.ndarray | None = None

    def __post_init__(self) -> None:
        projects = tuple(str(p) for p in self.projects)
        if len(projects) != len(set(projects)):
            check_labels(projects, "project")  # raises DuplicateLabel
        if len(projects) > MAX_PROJECTS:
            raise TooManyProjects(f"{len(projects)} projects exceed the enumeration limit of {MAX_PROJECTS}")
        scenarios = check_labels(self.scenarios, "scenario")
        c = np.array(self.c, dtype=float).reshape(len(scenarios), len(projects))
        W = np.zeros(len(scenarios)) if self.W is None else np.array(self.W, dtype=float).ravel()
        if W.size != len(scenarios):
            raise DimensionMismatch(f"{W.size} base costs for {len(scenarios)} scenarios")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(W))):
            raise NonFiniteEntry("project and base costs must be finite")
        c.flags.writeable = False
        W.flags.writeable = False
        object.__setattr__(self, "projects", projects)
        object.__setattr__(self, "scenarios", scenarios)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return len(self.projects)

    def drop_project(self, label: str) -> "AdditiveProjectInstance":
        if label not in self.projects:
            raise UnknownLabel(f"unknown project {label!r}")
        j = self.projects.index(label)
        keep = [p for p in self.projects if p != label]
        return AdditiveProjectInstance(tuple(keep), self.scenarios, np.delete(self.c, j, axis=1), self.W)

    def drop_scenario(self, label: str) -> "AdditiveProjectInstance":
        if label not in self.scenarios:
            raise UnknownLabel(f"unknown scenario {label!r}")
        if len(self.scenarios) == 1:
            raise EmptyScenarioSet("cannot drop the only scenario")
        i = self.scenarios.index(label)
        keep = [s for s in self.scenarios if s != label]
        return AdditiveProjectInstance(self.projects, tuple(keep), np.delete(self.c, i, axis=0),
                                       np.delete(self.W, i))

    def with_base(self, W: Sequence[float]) -> "AdditiveProjectInstance":
        return AdditiveProjectInstance(self.projects, self.scenarios, self.c, W)


def membership(n: int) -> np.ndarray:
    """0/1 matrix, one row per subset in rank order."""
    subs = subsets_by_rank(n)
    U = np.zeros((len(subs), n))
    for r, s in enumerate(subs):
        U[r, list(s)] = 1.0
    return U


def induced_cost_matrix(inst: AdditiveProjectInstance) -> CostMatrix:
    subs = subsets_by_rank(inst.n)
    labels = tuple(subset_label([inst.projects[k] for k in s]) for s in subs)
    costs = inst.c @ membership(inst.n).T + inst.W[:, None]
    return CostMatrix(inst.scenarios, labels, costs)


@dataclass(frozen=True)
class SubsetSelection:
    chosen: tuple[str, ...]
    value: float
    argmin: tuple[tuple[str, ...], ...]
    active_scenarios: tuple[str, ...]
    tie_break: str
    selection: Selection

    @property
    def label(self) -> str:
        return subset_label(self.chosen)


def select_projects(inst: AdditiveProjectInstance, kind: RegretKind) -> SubsetSelection:
    """Minimax rule over the induced subset lattice; ties go to the earliest rank."""
    C = induced_cost_matrix(inst)
    sel = minimax_select(C, kind)
    members = dict(zip(C.decisions, ([inst.projects[k] for k in s] for s in subsets_by_rank(inst.n))))
    return SubsetSelection(
        chosen=tuple(members[sel.chosen]),
        value=sel.value,
        argmin=tuple(tuple(members[d]) for d in sel.argmin_set),
        active_scenarios=sel.active_scenarios,
        tie_break=sel.tie_break.replace("declared decision order", "subset rank (size, then project order)"),
        selection=sel,
    )


def mean_regret_additive(inst: AdditiveProjectInstance, subset: Sequence[str]) -> float:
    """Worst mean regret of ``subset`` via ``sum_{k in T} c_i(k) - sum_k c_i(k) / 2``.

    Each scenario's subset costs are symmetric about their midpoint (a set
    and its complement sit on either side), so mean and median regret agree.
    """
    idx = []
    for label in subset:
        if label not in inst.projects:
            raise UnknownLabel(f"unknown project {label!r}")
        idx.append(inst.projects.index(label))
    u = np.zeros(inst.n)
    u[idx] = 1.0
    return float((inst.c @ (u - 0.5)).max())


@dataclass(frozen=True)
class ProjectIiaViolation:
    dropped: str
    old: tuple[str, ...]
    new: tuple[str, ...]
    old_value: float
    new_value: float


def project_iia_probe(inst: AdditiveProjectInstance, kind: RegretKind) -> list[ProjectIiaViolation]:
    """Drop each unselected project and report every change of selection."""
    base = select_projects(inst, kind)
    out = []
    for p in inst.projects:
        if p in base.chosen:
            continue
        new = select_projects(inst.drop_project(p), kind)
        if new.chosen != base.chosen:
            out.append(ProjectIiaViolation(p, base.chosen, new.chosen, base.value, new.value))
    return out


@dataclass(frozen=True)
class ScenarioRemoval:
    dropped: str
    chosen: tuple[str, ...]
    value: float
    essential: bool


@dataclass(frozen=True)
class EssentialReport:
    baseline: tuple[str, ...]
    outcomes: tuple[ScenarioRemoval, ...]

    @property
    def count(self) -> int:
        return sum(o.essential for o in self.outcomes)


def essential_scenarios(inst: AdditiveProjectInstance, kind: RegretKind) -> EssentialReport:
    """Re-select with each scenario removed; essential means the choice moved."""
    if len(inst.scenarios) < 2:
        raise EmptyScenarioSet("removing the only scenario leaves nothing to decide on")
    base = select_projects(inst, kind).chosen
    outcomes = []
    for s in inst.scenarios:
        sel = select_projects(inst.drop_scenario(s), kind)
        outcomes.append(ScenarioRemoval(s, sel.chosen, sel.value, sel.chosen != base))
    return EssentialReport(base, tuple(outcomes))
