import json
import math

import numpy as np
import pytest
from scipy.optimize import brentq, minimize_scalar

from conftest import FIXTURES
from minimax_rules import (
    CapacityScenario,
    CapacityStudy,
    OutOfBounds,
    capacity_cost,
    emit_curves,
    minimax_regret_capacity,
    scenario_optimum,
    synth_ecr,
)
from minimax_rules.capacity import CONE, VOLL, pointwise_extremes, reduce_scenarios


def study(*scen, bounds=(0.0, 100_000.0)):
    return CapacityStudy(VOLL, CONE, tuple(scen), bounds)


def regret_fn(st, s):
    m = capacity_cost(st, s, scenario_optimum(st, s))
    return lambda x: capacity_cost(st, s, x) - m


def test_cost_example():
    s = CapacityScenario("s", 40_000, 1.0, 0.001)
    # 17000 * 1 + 49000 * 40000, exactly representable
    assert capacity_cost(study(s), s, 40_000) == 1_960_017_000.0
    assert capacity_cost(study(s), s, 40_000) == pytest.approx(1.96e9, rel=1e-5)


def test_risk_term_at_anchor_and_vanishing():
    s = CapacityScenario("s", 50_000, 2500.0, 0.002)
    st = study(s)
    assert capacity_cost(st, s, 50_000) - CONE * 50_000 == VOLL * 2500.0
    steep = CapacityScenario("t", 50_000, 2500.0, 5.0)
    assert capacity_cost(study(steep), steep, 60_000) == pytest.approx(CONE * 60_000, rel=1e-15)


def test_out_of_bounds():
    s = CapacityScenario("s", 50_000, 1.0, 0.001)
    with pytest.raises(OutOfBounds):
        capacity_cost(study(s, bounds=(40_000, 60_000)), s, 70_000)


def test_optimum_closed_form():
    lam = 0.001
    s = CapacityScenario("s", 50_000, CONE / (VOLL * lam), lam)
    assert scenario_optimum(study(s), s) == pytest.approx(50_000, abs=1e-9)
    a = CapacityScenario("a", 50_000, 1000.0, lam)
    b = CapacityScenario("b", 50_000, 2000.0, lam)
    st = study(a, b)
    assert scenario_optimum(st, b) - scenario_optimum(st, a) == pytest.approx(math.log(2) / lam, abs=1e-9)


def test_optimum_clamped_to_upper_bound():
    s = CapacityScenario("s", 51_800, 5000.0, 0.001)
    st = study(s, bounds=(40_000, 52_000))
    ref = minimize_scalar(lambda x: capacity_cost(st, s, x), bounds=st.bounds, method="bounded",
                          options={"xatol": 1e-6})
    assert scenario_optimum(st, s) == 52_000
    assert ref.x == pytest.approx(52_000, abs=1.0)


def test_two_scenarios_2000_mw_apart():
    st = CapacityStudy.from_dict(json.loads((FIXTURES / "two_scenario_capacity.json").read_text()))
    sol = minimax_regret_capacity(st)
    r = [regret_fn(st, s) for s in st.scenarios]
    cross = brentq(lambda x: r[0](x) - r[1](x), 49_000, 53_000, xtol=1e-9)
    assert sol.x_star[0] == pytest.approx(cross, abs=1e-3)
    xs = np.arange(st.bounds[0], st.bounds[1] + 1, 1.0)
    env = np.maximum.reduce([np.array([f(x) for x in xs]) for f in r])
    assert abs(xs[env.argmin()] - sol.x_star[0]) <= 1.0
    assert set(sol.determining) == {"low", "high"}


def test_single_scenario():
    s = CapacityScenario("only", 50_000, 3000.0, 0.001)
    st = study(s)
    sol = minimax_regret_capacity(st)
    assert sol.x_star[0] == pytest.approx(scenario_optimum(st, s), abs=1e-6)
    assert sol.value == pytest.approx(0.0, abs=1e-6)


def test_synth_golden_file():
    golden = json.loads((FIXTURES / "synth_ecr_seed1_count19.json").read_text())
    assert synth_ecr(1, 19).to_dict() == golden
    assert len(golden["scenarios"]) == 19


def test_synth_determinism_and_small_count():
    assert synth_ecr(5, 19).to_dict() == synth_ecr(5, 19).to_dict()
    st = synth_ecr(3, 2)
    assert set(pointwise_extremes(st)) == set(st.names)


@pytest.mark.parametrize("seed", range(1, 21))
def test_synth_determining_pair(seed):
    st = synth_ecr(seed, 19)
    sol = minimax_regret_capacity(st)
    ext = pointwise_extremes(st)
    assert ext is not None
    assert len(sol.determining) <= 2
    assert set(sol.determining) == set(ext)
    assert set(reduce_scenarios(st)) == set(ext)


def test_pointwise_extremes_against_grid():
    rng = np.random.default_rng(2)
    for _ in range(50):
        scen = tuple(
            CapacityScenario(f"s{i}", rng.uniform(48_000, 52_000), rng.uniform(500, 4000), rng.uniform(5e-4, 2e-3))
            for i in range(4)
        )
        st = study(*scen, bounds=(45_000, 55_000))
        xs = np.linspace(*st.bounds, 201)
        C = np.array([[capacity_cost(st, s, x) for x in xs] for s in scen])
        lows = [i for i in range(4) if (C[i] <= C + 1e-6).all()]
        highs = [i for i in range(4) if (C[i] >= C - 1e-6).all()]
        ext = pointwise_extremes(st)
        if lows and highs:
            assert ext == (scen[lows[0]].name, scen[highs[0]].name)
        else:
            assert ext is None


def test_reduce_skipped_without_shared_lambda():
    scen = (CapacityScenario("a", 50_000, 1000, 0.001), CapacityScenario("b", 50_000, 1000, 0.002),
            CapacityScenario("c", 50_000, 1000, 0.0015))
    assert reduce_scenarios(study(*scen)) == ("a", "b", "c")


def test_non_extreme_perturbation_keeps_x_star():
    rng = np.random.default_rng(21)
    for seed in range(1, 11):
        st = synth_ecr(seed, 19)
        base = minimax_regret_capacity(st).x_star[0]
        lo, hi = pointwise_extremes(st)
        lo_eff = st.scenario(lo).effective_anchor
        hi_eff = st.scenario(hi).effective_anchor
        lam = st.scenarios[0].lam
        moved = []
        for s in st.scenarios:
            if s.name in (lo, hi):
                moved.append(s)
                continue
            E = float(rng.uniform(500, 6000))
            eff = float(rng.uniform(lo_eff + 1.0, hi_eff - 1.0))
            moved.append(CapacityScenario(s.name, eff - math.log(E) / lam, E, lam))
        new = CapacityStudy(st.voll, st.cone, tuple(moved), st.bounds)
        assert abs(minimax_regret_capacity(new).x_star[0] - base) <= 1.0


def test_curves_regret_zero_at_optimum_and_nonnegative():
    st = synth_ecr(1, 7)
    for s in st.scenarios:
        x = scenario_optimum(st, s)
        t = emit_curves(st, 1.0, x, x)
        col = t.header.index(f"{s.name}_regret")
        assert t.rows[0][col] == pytest.approx(0.0, abs=1e-3)
    t = emit_curves(st, 250.0)
    n = len(st.scenarios)
    assert all(v >= -1e-6 for row in t.rows for v in row[1 + n:])


def test_curves_envelope_minimum_near_x_star():
    st = synth_ecr(4, 19)
    sol = minimax_regret_capacity(st)
    step = 10.0
    t = emit_curves(st, step)
    n = len(st.scenarios)
    env = [max(row[1 + n:]) for row in t.rows]
    x_best = t.rows[int(np.argmin(env))][0]
    assert abs(x_best - sol.x_star[0]) <= step


def test_curves_empty_range_and_format():
    st = synth_ecr(1, 3)
    t = emit_curves(st, 100.0, 60_000, 50_000)
    assert t.rows == ()
    text = emit_curves(st, 1000.0, 50_000, 51_000).to_csv()
    lines = text.splitlines()
    assert lines[0] == "x,core1_cost,core2_cost,core3_cost,core1_regret,core2_regret,core3_regret"
    assert len(lines) == 3 and lines[1].startswith("50000.000000,")
    assert all(len(f.split(".")[1]) == 6 for f in lines[1].split(","))
