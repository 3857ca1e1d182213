"""Capacity-to-secure study: risk cost plus investment cost per scenario.

Scenario ``i`` costs ``voll * E_i * exp(-lam_i (x - a_i)) + cone * x`` pounds
at secured capacity ``x`` MW, where ``E_i`` is the expected energy unserved
(MWh) at ``x = a_i``.  When every scenario shares one ``lam`` the family is
anchored: writing ``a~_i = a_i + ln(E_i) / lam`` gives
``h(x - a~_i) + cone * x`` with ``h(y) = voll * exp(-lam y)``.

Units: MW for capacity, MWh for energy, pounds for cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import RegretKind, check_labels
from .continuous import AnchoredFamily, ContinuousProblem, ContinuousSolution, hull_reduce, solve_1d
from .errors import OutOfBounds, UnknownScenario, ValidationError
from .functions import ExpLinear

VOLL = 17_000.0  # pounds per MWh
CONE = 49_000.0  # pounds per MW


@dataclass(frozen=True)
class CapacityScenario:
    name: str
    a: float
    E: float
    lam: float

    def __post_init__(self) -> None:
        for field_name in ("a", "E", "lam"):
            v = float(getattr(self, field_name))
            if not math.isfinite(v):
                raise ValidationError(f"scenario {self.name!r}: {field_name} must be finite")
            object.__setattr__(self, field_name, v)
        if self.E <= 0 or self.lam <= 0:
            raise ValidationError(f"scenario {self.name!r}: E and lambda must be positive")

    @property
    def effective_anchor(self) -> float:
        """Capacity at which the expected energy unserved is 1 MWh."""
        return self.a + math.log(self.E) / self.lam


@dataclass(frozen=True)
class CapacityStudy:
    voll: float
    cone: float
    scenarios: tuple[CapacityScenario, ...]
    bounds: tuple[float, float]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.voll) and math.isfinite(self.cone) and self.voll > 0 and self.cone > 0):
            raise ValidationError("voll and cone must be positive and finite")
        scen = tuple(self.scenarios)
        if not scen:
            raise ValidationError("a study needs at least one scenario")
        check_labels([s.name for s in scen], "scenario")
        lo, hi = (float(b) for b in self.bounds)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValidationError("capacity bounds must be finite with lower < upper")
        object.__setattr__(self, "scenarios", scen)
        object.__setattr__(self, "bounds", (lo, hi))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.scenarios)

    def scenario(self, name: str) -> CapacityScenario:
        for s in self.scenarios:
            if s.name == name:
                return s
        raise UnknownScenario(f"unknown scenario {name!r}")

    def restrict(self, names: Sequence[str]) -> "CapacityStudy":
        return CapacityStudy(self.voll, self.cone, tuple(self.scenario(n) for n in names), self.bounds)

    @property
    def shared_lambda(self) -> float | None:
        lams = {s.lam for s in self.scenarios}
        return lams.pop() if len(lams) == 1 else None

    def to_dict(self) -> dict:
        return {
            "voll": self.voll,
            "cone": self.cone,
            "bounds": list(self.bounds),
            "scenarios": [{"name": s.name, "a": s.a, "E": s.E, "lambda": s.lam} for s in self.scenarios],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CapacityStudy":
        scen = tuple(CapacityScenario(str(s["name"]), s["a"], s["E"], s["lambda"]) for s in doc["scenarios"])
        return cls(float(doc.get("voll", VOLL)), float(doc.get("cone", CONE)), scen, tuple(doc["bounds"]))


def _scenario(study: CapacityStudy, scenario) -> CapacityScenario:
    return scenario if isinstance(scenario, CapacityScenario) else study.scenario(scenario)


def capacity_cost(study: CapacityStudy, scenario, x: float) -> float:
    s = _scenario(study, scenario)
    lo, hi = study.bounds
    if not lo <= x <= hi:
        raise OutOfBounds(f"capacity {x} MW outside [{lo}, {hi}]")
    return study.voll * s.E * math.exp(-s.lam * (x - s.a)) + study.cone * x


def scenario_optimum(study: CapacityStudy, scenario) -> float:
    """Stationary point ``a + ln(voll E lam / cone) / lam`` clamped to the bounds."""
    s = _scenario(study, scenario)
    x = s.a + math.log(study.voll * s.E * s.lam / study.cone) / s.lam
    return min(max(x, study.bounds[0]), study.bounds[1])


def cost_function(study: CapacityStudy, scenario) -> ExpLinear:
    s = _scenario(study, scenario)
    return ExpLinear(study.voll * s.E, s.lam, s.a, study.cone)


def as_problem(study: CapacityStudy, kind: RegretKind = RegretKind.REGRET_MIN) -> ContinuousProblem:
    return ContinuousProblem(
        [study.bounds[0]], [study.bounds[1]],
        tuple(cost_function(study, s) for s in study.scenarios), study.names, kind,
    )


def minimax_regret_capacity(study: CapacityStudy) -> ContinuousSolution:
    """Capacity minimising the worst regret; ``determining`` holds the deciding scenarios."""
    return solve_1d(as_problem(study, RegretKind.REGRET_MIN))


def anchored_family(study: CapacityStudy) -> AnchoredFamily:
    lam = study.shared_lambda
    if lam is None:
        raise ValidationError("an anchored family needs one decay rate shared by all scenarios")
    anchors = [[s.effective_anchor] for s in study.scenarios]
    return AnchoredFamily(anchors, ExpLinear(study.voll, lam, 0.0), [study.cone], study.names)


def reduce_scenarios(study: CapacityStudy) -> tuple[str, ...]:
    """Scenarios kept by convex-hull elimination; all of them unless lambda is shared."""
    if study.shared_lambda is None:
        return study.names
    return hull_reduce(anchored_family(study))


def pointwise_extremes(study: CapacityStudy) -> tuple[str, str] | None:
    """``(lowest, highest)`` scenarios whose cost curves bound all others on the box.

    Costs differ only in the risk term, and the log-ratio of two exponential
    terms is affine in ``x``, so one comparison at each bound decides
    pointwise order over the whole interval.
    """
    lo, hi = study.bounds

    def log_risk(s: CapacityScenario, x: float) -> float:
        return math.log(s.E) - s.lam * (x - s.a)

    def below(p: CapacityScenario, q: CapacityScenario) -> bool:
        return all(log_risk(p, x) <= log_risk(q, x) for x in (lo, hi))

    scen = study.scenarios
    low = [p for p in scen if all(below(p, q) for q in scen)]
    high = [q for q in scen if all(below(p, q) for p in scen)]
    if not low or not high:
        return None
    return low[0].name, high[0].name


def synth_ecr(seed: int, count: int = 19, lam: float = 1 / 800) -> CapacityStudy:
    """Synthetic study with ``min(5, count)`` core scenarios and the rest minor.

    Generator: ``numpy.random.default_rng(seed)`` (PCG64), draws in a fixed
    order.  Core anchors lie in [48000, 54000] MW with ``E`` in [1000, 5000]
    MWh.  Minor scenarios have effective anchors strictly inside the range
    spanned by the core ones, so the lowest and highest core scenarios bound
    every cost curve.  One decay rate is shared.  Values are rounded to
    0.1 MW / 0.1 MWh so that the study serialises exactly.
    """
    if count < 2:
        raise ValidationError("a synthetic study needs at least two scenarios")
    rng = np.random.default_rng(seed)
    n_core = min(5, count)
    scen: list[CapacityScenario] = []
    for k in range(n_core):
        a = round(float(rng.uniform(48_000, 54_000)), 1)
        E = round(float(rng.uniform(1_000, 5_000)), 1)
        scen.append(CapacityScenario(f"core{k + 1}", a, E, lam))
    eff = sorted(s.effective_anchor for s in scen)
    lo_eff, hi_eff = eff[0], eff[-1]
    margin = 0.05 * (hi_eff - lo_eff)
    for k in range(count - n_core):
        E = round(float(rng.uniform(1_000, 5_000)), 1)
        target = float(rng.uniform(lo_eff + margin, hi_eff - margin))
        a = round(target - math.log(E) / lam, 1)
        scen.append(CapacityScenario(f"minor{k + 1}", a, E, lam))
    a_vals = [s.a for s in scen]
    bounds = (math.floor(min(a_vals) / 1000) * 1000 - 10_000.0, math.ceil(max(a_vals) / 1000) * 1000 + 10_000.0)
    return CapacityStudy(VOLL, CONE, tuple(scen), bounds)


@dataclass(frozen=True)
class CurveTable:
    header: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        lines += [",".join(f"{v:.6f}" for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def emit_curves(study: CapacityStudy, step: float, start: float | None = None,
                stop: float | None = None) -> CurveTable:
    """Cost and regret of every scenario on the grid ``start, start + step, ... <= stop``."""
    if not (step > 0 and math.isfinite(step)):
        raise ValidationError("grid step must be a positive number of MW")
    lo, hi = study.bounds
    start = lo if start is None else float(start)
    stop = hi if stop is None else float(stop)
    header = ("x",) + tuple(f"{n}_cost" for n in study.names) + tuple(f"{n}_regret" for n in study.names)
    if start > stop:
        return CurveTable(header, ())
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    mins = [capacity_cost(study, s, scenario_optimum(study, s)) for s in study.scenarios]
    rows = []
    for k in range(count):
        x = start + k * step
        costs = [capacity_cost(study, s, x) for s in study.scenarios]
        rows.append((x, *costs, *(c - m for c, m in zip(costs, mins))))
    return CurveTable(header, tuple(rows))
