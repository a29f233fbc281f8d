"""Exploration driver: selection, constraints, determinism, trends."""

import time

import pytest

from conftest import buffer_circuit, ripple_adder
from rcimflow.costmodel import Calibration, Metrics
from rcimflow.errors import ConstraintError
from rcimflow.explorer import (
    Candidate,
    Constraints,
    explore,
    pareto_front,
    select_best,
    synthesize_all,
    trend_report,
)
from rcimflow.techmap import LevelProfile
from rcimflow.topology import default_library
from rcimflow.transforms import Recipe, TransformId, enumerate_recipes


def _mk_candidate(energy, latency, area, idx=0):
    prof = LevelProfile(1, [0, 1], [0, 0], [0, 0])
    topo = default_library().topologies[idx % 12]
    return Candidate(
        recipe=Recipe((TransformId.BALANCE,)),
        recipe_index=idx,
        profile=prof,
        topology=topo,
        metrics=Metrics(
            cycles=max(1, int(latency)),
            latency_ns=latency,
            energy_nj=energy,
            power_mw=energy / latency * 1e3 if latency else 0.0,
            area_proxy_kb=area,
        ),
    )


def test_select_best_tiebreaks():
    a = _mk_candidate(1.0, 5.0, 12, idx=0)
    b = _mk_candidate(1.0, 3.0, 24, idx=1)
    assert select_best([a, b], Constraints()) is b  # latency breaks the tie
    c = _mk_candidate(0.5, 9.0, 48, idx=2)
    assert select_best([a, b, c], Constraints()) is c  # energy first


def test_select_best_single():
    a = _mk_candidate(1.0, 5.0, 12)
    assert select_best([a], Constraints()) is a


def test_select_best_planted_optimum():
    cands = [_mk_candidate(10.0 + i, 5.0, 12, idx=i) for i in range(24)]
    cands[17] = _mk_candidate(0.25, 5.0, 12, idx=17)
    # exhaustive scan oracle
    oracle = min(cands, key=lambda c: c.metrics.energy_nj)
    assert select_best(cands, Constraints()) is oracle
    assert oracle.recipe_index == 17


def test_select_best_constraint_error_with_nearest():
    a = _mk_candidate(1.0, 5.0, 12)
    with pytest.raises(ConstraintError) as err:
        select_best([a], Constraints(max_latency_ns=1.0))
    assert err.value.nearest is a


def test_pareto_front_nondominated():
    a = _mk_candidate(1.0, 5.0, 12)
    b = _mk_candidate(2.0, 3.0, 12)
    c = _mk_candidate(2.0, 6.0, 12)  # dominated by a and b? (2,6,12) vs (1,5,12): yes
    front = pareto_front([a, b, c])
    assert a in front and b in front and c not in front
    def key(x):
        return (x.metrics.energy_nj, x.metrics.latency_ns, x.metrics.area_proxy_kb)
    for cand in front:
        assert not any(
            all(u <= v for u, v in zip(key(o), key(cand))) and key(o) != key(cand)
            for o in front
        )


def test_synthesize_all_shares_prefixes():
    g = ripple_adder(3)
    recipes = enumerate_recipes(set(TransformId)).recipes
    results = synthesize_all(g, recipes)
    assert len(results) == 64
    from rcimflow.aig import equivalent

    for steps, h in list(results.items())[:8]:
        assert equivalent(g, h), steps


def test_explore_buffer_degenerate():
    g = buffer_circuit()
    rep = explore(g, default_library(), circuit_name="buffer")
    assert rep.best is not None
    assert rep.stats["min_memory_bits"] == 4  # one-gate floor
    assert rep.signoff["passed"]
    assert rep.inductor.inductance_h > 0


def test_explore_adder_end_to_end():
    g = ripple_adder(2)
    rep = explore(g, default_library(), circuit_name="adder2")
    assert rep.signoff["passed"] and rep.signoff["mismatches"] == 0
    assert rep.stats["candidates"] <= 2 * 12
    assert len(rep.recipes_characterized) == 64
    # every candidate satisfies the sizing rule
    for c in rep.candidates:
        assert c.topology.total_bits >= 4 * max(1, c.profile.total_gates)


def test_explore_unsatisfiable_constraint():
    g = ripple_adder(2)
    with pytest.raises(ConstraintError):
        explore(g, default_library(), constraints=Constraints(max_latency_ns=0.0))


def test_explore_constraints_filter():
    g = ripple_adder(2)
    rep = explore(
        g,
        default_library(),
        constraints=Constraints(max_memory_bits=8192 * 8),
        map_winner=False,
    )
    assert rep.best.topology.total_bits <= 8192 * 8


def test_explore_deterministic_bytes():
    g = ripple_adder(4)
    r1 = explore(g, default_library(), circuit_name="a4")
    r2 = explore(g, default_library(), circuit_name="a4")
    assert r1.to_json() == r2.to_json()
    assert r1.to_csv() == r2.to_csv()


def test_explore_jobs_do_not_change_results():
    g = ripple_adder(3)
    r1 = explore(g, default_library(), jobs=1, circuit_name="a3")
    r2 = explore(g, default_library(), jobs=2, circuit_name="a3")
    assert r1.to_json() == r2.to_json()


def test_exhaustive_candidate_count():
    g = ripple_adder(2)
    rep = explore(
        g, default_library(), exhaustive=True, map_winner=False, circuit_name="a2"
    )
    assert rep.stats["candidates"] == 64 * 12


def test_trend_report_shapes():
    g = ripple_adder(2)
    rep = explore(
        g, default_library(), exhaustive=True, map_winner=False, circuit_name="a2"
    )
    tr = trend_report([rep])
    d = tr.to_dict()
    assert set(d["flags"]) == {"three_vs_one", "six_vs_one"}
    assert d["flags"]["three_vs_one"] in ("green", "review")
    text = tr.render()
    assert "3-vs-1" in text and "6-vs-1" in text


def test_scheduled_mode_explore():
    g = ripple_adder(2)
    rep = explore(
        g, default_library(), mode="scheduled", map_winner=False, circuit_name="a2"
    )
    assert all(c.metrics.cycles >= 1 for c in rep.candidates)


def test_walltime_scales_roughly_linearly():
    # complexity sanity: 4x the profile work should cost well under 20x time
    from rcimflow.costmodel import estimate_metrics

    cal = Calibration()
    lib = default_library()

    def run(depth, reps):
        prof = LevelProfile(
            depth, [0] + [3] * depth, [0] + [2] * depth, [0] + [1] * depth
        )
        t0 = time.perf_counter()
        for _ in range(reps):
            for topo in lib:
                estimate_metrics(topo, cal, profile=prof, gate_count=1)
        return time.perf_counter() - t0

    run(16, 2)  # warm-up
    t_small = max(run(16, 12), 1e-4)
    t_large = max(run(64, 12), 1e-4)
    assert t_large / t_small < 20.0
