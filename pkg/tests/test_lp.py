import math
import random

import numpy as np
import pytest

from frlp import (AGG, CYCLIC, DISAGG, ORIGINAL, Demand, Edge, LinearProgram,
                  build_instance, build_model, eval_v_agg, eval_v_disagg,
                  eval_v_tight, gen_example, gen_prop5a, gen_random, lp_bound,
                  prepare_families, prepare_route_data, solve_lp)
from frlp.covering import CutSetFamily
from frlp.lp import (EQ, GE, LE, MAX, MIN, MIN_STATIONS, DimensionCapError,
                     LpSolution, served_vector)


def line_instance(volume=1.0):
    return build_instance(["1", "2"], [Edge(0, 1, 5.0)],
                          [Demand(0, 1, volume, alpha=1.0)], 5.0)


def test_trivial_lp():
    lp = LinearProgram(MAX, [1.0], bounds=[(0.0, 1.0)])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.value == pytest.approx(1.0)


def test_single_row_lp():
    # max f*y with x fixed at (0.5, 0.5) and the row x1 + x2 >= y
    lp = LinearProgram(MAX, [0.0, 0.0, 3.0],
                       bounds=[(0.5, 0.5), (0.5, 0.5), (0.0, 1.0)])
    lp.add_row([(0, 1.0), (1, 1.0), (2, -1.0)], GE, 0.0)
    sol = solve_lp(lp)
    assert sol.value == pytest.approx(3.0)


def test_example2_budgeted_relaxation():
    fig2 = gen_example("fig2", 10.0)
    families = prepare_families(fig2, ORIGINAL)
    model = build_model(fig2, AGG, families=families, budget=1)
    assert lp_bound(model) == pytest.approx(0.5)


def test_infeasible_and_unbounded():
    lp = LinearProgram(MIN, [1.0], bounds=[(0.0, 1.0)])
    lp.add_row([(0, 1.0)], GE, 2.0)
    assert solve_lp(lp).status == "infeasible"
    lp = LinearProgram(MAX, [1.0], bounds=[(0.0, math.inf)])
    assert solve_lp(lp).status == "unbounded"


def test_equality_rows_and_duals():
    lp = LinearProgram(MIN, [1.0, 2.0], bounds=[(0.0, 10.0), (0.0, 10.0)])
    lp.add_row([(0, 1.0), (1, 1.0)], EQ, 4.0)
    sol = solve_lp(lp)
    assert sol.value == pytest.approx(4.0)
    assert sol.primal == pytest.approx((4.0, 0.0))
    assert sol.duals[0] == pytest.approx(1.0)


def test_random_lps_match_reference():
    # cross-check against a naive vertex enumeration on tiny random LPs
    rng = random.Random(2)
    for _ in range(30):
        n = 3
        c = [rng.uniform(-2, 2) for _ in range(n)]
        lp = LinearProgram(MAX, list(c), bounds=[(0.0, 1.0)] * n)
        rows = []
        for _ in range(2):
            coeffs = [(j, rng.uniform(0.1, 1.0)) for j in range(n)]
            rhs = rng.uniform(0.5, 2.0)
            lp.add_row(coeffs, LE, rhs)
            rows.append((coeffs, rhs))
        sol = solve_lp(lp)
        assert sol.status == "optimal"
        # reference: dense grid of cube vertices + clipped scaling
        best = -math.inf
        for bits in range(1 << n):
            x = [float(bits >> j & 1) for j in range(n)]
            scale = 1.0
            for coeffs, rhs in rows:
                lhs = sum(w * x[j] for j, w in coeffs)
                if lhs > rhs:
                    scale = min(scale, rhs / lhs)
            x = [v * scale for v in x]
            best = max(best, sum(ci * xi for ci, xi in zip(c, x)))
        assert sol.value >= best - 1e-7


def test_build_model_example1_disagg_rows():
    fig2 = gen_example("fig2", 10.0)
    route_data = prepare_route_data(fig2, ORIGINAL)
    model = build_model(fig2, DISAGG, route_data=route_data)
    assert len(model.lp.rows) == 8  # 3 + 4 covering rows + one route-choice row
    assert model.roles[:5] == [("x", j) for j in range(5)]


def test_build_model_example2_agg_rows():
    from frlp import aggregate_cut_sets, cut_sets_for_path, make_route
    fig2 = gen_example("fig2", 10.0)
    net = fig2.network
    d1 = cut_sets_for_path(make_route(net, (0, 1, 3, 4), kind="path"), net, 10.0)
    d2 = cut_sets_for_path(make_route(net, (0, 1, 2, 3, 4), kind="path"), net, 10.0)
    full = aggregate_cut_sets([d1, d2], prune=False)
    model = build_model(fig2, AGG, families=[full])
    assert len(model.lp.rows) == 10


def test_build_model_min_stations_empty():
    empty = build_instance(["1", "2"], [Edge(0, 1, 1.0)], [], 2.0)
    model = build_model(empty, MIN_STATIONS, families=[])
    assert lp_bound(model) == pytest.approx(0.0)


def test_no_covering_rows_max_cover_gives_total_volume():
    inst = line_instance(volume=4.0)
    n = inst.num_nodes
    empty_family = CutSetFamily((), n)
    model = build_model(inst, AGG, families=[empty_family])
    assert lp_bound(model) == pytest.approx(4.0)


def test_relaxing_route_choice_integrality_is_lossless():
    # route-use and served variables may be relaxed without changing optima
    from frlp.oracle import brute_force_solve
    for seed in range(4):
        inst = gen_random(seed + 40, num_nodes=6, density=0.4, num_demands=2,
                          variant=ORIGINAL)
        route_data = prepare_route_data(inst, ORIGINAL)
        families = [d.aggregated for d in route_data]
        oracle = brute_force_solve(inst, ORIGINAL, "max_cover",
                                   budget=inst.num_nodes)
        # with all stations open both relaxations hit the full optimum
        agg = build_model(inst, AGG, families=families)
        disagg = build_model(inst, DISAGG, route_data=route_data)
        assert lp_bound(agg) == pytest.approx(oracle.objective)
        assert lp_bound(disagg) == pytest.approx(oracle.objective)


def test_eval_v_disagg_examples():
    inst = gen_prop5a(3)
    route_data = prepare_route_data(inst, ORIGINAL)
    n = inst.num_nodes
    x = [1.0 / 3.0] * n
    assert eval_v_disagg(inst, route_data, x) == pytest.approx(1.0)
    assert eval_v_disagg(inst, route_data, [1.0] * n) == pytest.approx(1.0)
    assert eval_v_disagg(inst, route_data, [0.0] * n) == pytest.approx(0.0)


def test_eval_v_agg_examples():
    inst = gen_prop5a(3)
    families = prepare_families(inst, ORIGINAL)
    n = inst.num_nodes
    assert eval_v_agg(inst, families, [1.0 / 3.0] * n) <= 0.5 + 1e-9
    line = line_instance(volume=2.0)
    line_fams = prepare_families(line, ORIGINAL)
    assert eval_v_agg(line, line_fams, [0.5, 0.5]) == pytest.approx(1.0)
    assert eval_v_agg(line, line_fams, [1.0, 1.0]) == pytest.approx(2.0)


def test_eval_v_tight_examples():
    line = line_instance(volume=2.0)
    fams = prepare_families(line, ORIGINAL)
    agg = eval_v_agg(line, fams, [0.5, 0.5])
    tight = eval_v_tight(line, [0.5, 0.5], families=fams)
    assert tight == pytest.approx(agg) == pytest.approx(1.0)
    # integral points recover the exact 0/1 servedness payoff
    assert eval_v_tight(line, [1, 1], families=fams) == pytest.approx(2.0)
    assert eval_v_tight(line, [1, 0], families=fams) == pytest.approx(0.0)
    assert eval_v_tight(line, [0, 0], families=fams) == pytest.approx(0.0)


def test_eval_v_tight_dimension_cap():
    inst = gen_random(1, num_nodes=19, density=0.2, num_demands=1)
    with pytest.raises(DimensionCapError):
        eval_v_tight(inst, [0.5] * 19, variant=CYCLIC)


def test_value_functions_concave():
    rng = random.Random(5)
    inst = gen_random(17, num_nodes=6, density=0.4, num_demands=2)
    route_data = prepare_route_data(inst, CYCLIC)
    families = [d.aggregated for d in route_data]
    served = [served_vector(f, inst.num_nodes) for f in families]
    n = inst.num_nodes
    for _ in range(10):
        x = np.array([rng.random() for _ in range(n)])
        y = np.array([rng.random() for _ in range(n)])
        lam = rng.random()
        mid = lam * x + (1 - lam) * y
        for fn in (
                lambda z: eval_v_disagg(inst, route_data, z),
                lambda z: eval_v_agg(inst, families, z),
                lambda z: eval_v_tight(inst, z, served=served)):
            assert fn(mid) >= lam * fn(x) + (1 - lam) * fn(y) - 1e-7


def test_served_vector_matches_hits_all():
    inst = gen_random(23, num_nodes=5, density=0.5, num_demands=1)
    family = prepare_families(inst, CYCLIC)[0]
    vec = served_vector(family, 5)
    for bits in range(1 << 5):
        stations = {j for j in range(5) if bits >> j & 1}
        assert vec[bits] == family.hits_all(stations)
