"""Causal graph polarities, loop enumeration, and the comparative-statics solver."""

import random

import pytest

from stockflow.analysis import (
    CausalEdge,
    CausalGraph,
    build_causal_graph,
    enumerate_loops,
    solve_linear_equilibrium,
)
from stockflow.core import compile_model
from stockflow.engine import RunSpec, simulate
from stockflow.errors import LoopExplosionError, NoCrossingError
from stockflow.language import parse_model


def _edges_by_pair(graph):
    return {(e.source, e.target): e for e in graph.edges}


def test_reference_edge_polarities_at_equilibrium(reference_compiled):
    graph = build_causal_graph(reference_compiled)
    edges = _edges_by_pair(graph)
    # ratio rises with its numerator
    assert edges[("Quantity_Supplied", "Supply_Demand_Ratio")].polarity == "+"
    # d/d(ratio) of ((1 - ratio) * 25) / 1 = -25, by hand differentiation
    assert edges[("Supply_Demand_Ratio", "Price_Change")].polarity == "-"
    # d/d(price) of ((1 - ratio) * price) / 1 = (1 - ratio) = 0 at equilibrium
    assert edges[("Price", "Price_Change")].polarity == "0"
    # perception delays are integration edges driven positively by price
    assert edges[("Price", "Perceived_Price_for_Supply")].kind == "integration"
    assert edges[("Price", "Perceived_Price_for_Supply")].polarity == "+"
    assert edges[("Price_Change", "Price")].kind == "integration"
    assert edges[("Price_Change", "Price")].polarity == "+"
    # tables are functions, not perturbable values
    assert edges[("Supply_Schedule", "Quantity_Supplied")].polarity == "?"


def test_reference_loops(reference_compiled):
    report = enumerate_loops(build_causal_graph(reference_compiled))
    assert len(report.loops) == 3
    two_node = [lp for lp in report.loops if len(lp.nodes) == 2]
    five_node = [lp for lp in report.loops if len(lp.nodes) == 5]
    assert len(two_node) == 1 and len(five_node) == 2
    assert two_node[0].polarity == "indeterminate"
    assert set(two_node[0].nodes) == {"Price", "Price_Change"}
    for loop in five_node:
        assert loop.polarity == "balancing"
        assert loop.delayed


def test_loops_stable_across_declaration_order(reference_model):
    baseline = enumerate_loops(build_causal_graph(compile_model(reference_model)))
    rng = random.Random(3)
    for _ in range(4):
        shuffled = reference_model.elements[:]
        rng.shuffle(shuffled)
        model = parse_model(
            "\n".join(_line for _line in _render_lines(shuffled)), name="shuffled"
        )
        report = enumerate_loops(build_causal_graph(compile_model(model)))
        assert set(report.loops) == set(baseline.loops)


def _render_lines(elements):
    from stockflow.core import ModelDefinition
    from stockflow.language import render_model

    return render_model(ModelDefinition("m", elements)).splitlines()


def test_self_reinforcing_stock():
    model = parse_model(
        "stock s = integ(growth, 1) [w]\n"
        "flow growth = rate * s [w/day]\n"
        "const rate = 0.5 [day^-1]\n"
    )
    report = enumerate_loops(build_causal_graph(compile_model(model)))
    assert len(report.loops) == 1
    assert report.loops[0].polarity == "reinforcing"
    assert report.loops[0].delayed


def test_acyclic_model_has_no_loops():
    model = parse_model("aux a = 1 [w]\naux b = a * 2 [w]")
    report = enumerate_loops(build_causal_graph(compile_model(model)))
    assert report.loops == []


def test_loop_cap_raises():
    nodes = [f"n{i}" for i in range(6)]
    edges = [
        CausalEdge(a, b, "instantaneous", "+")
        for a in nodes for b in nodes if a != b
    ]
    graph = CausalGraph(nodes=nodes, edges=edges)  # complete digraph: 409 cycles
    with pytest.raises(LoopExplosionError):
        enumerate_loops(graph, cap=100)
    assert len(enumerate_loops(graph, cap=1000).loops) == 409


def test_unmerged_smooth_gets_its_own_node():
    model = parse_model(
        "const tau = 2 [day]\n"
        "aux x = 5 [w]\n"
        "aux y = smooth(x, tau) + 1 [w]\n"
    )
    graph = build_causal_graph(compile_model(model))
    assert "y__smooth1" in graph.nodes
    edges = _edges_by_pair(graph)
    assert edges[("x", "y__smooth1")].kind == "integration"
    assert edges[("y__smooth1", "y")].kind == "instantaneous"


def test_nested_smooth_chains_integration_edges():
    model = parse_model(
        "const tau = 2 [day]\n"
        "aux x = 5 [w]\n"
        "aux y = smooth(smooth(x, tau), tau) [w]\n"
    )
    graph = build_causal_graph(compile_model(model))
    edges = _edges_by_pair(graph)
    # outer call collapses into y; the inner one keeps its hidden node
    assert "y__smooth1" not in graph.nodes
    assert "y__smooth2" in graph.nodes
    assert edges[("x", "y__smooth2")].kind == "integration"
    assert edges[("y__smooth2", "y")].kind == "integration"


def test_two_node_loop_polarity_tracks_market_pressure(reference_compiled, default_run):
    """sign(gain of the price<->price-change loop) = sign(1 - ratio) at the
    operating point, sampled along the shifted trajectory."""
    series = default_run.series
    times = default_run.times
    for t_probe in (10.5, 12.0, 14.0, 16.0, 20.0, 30.0):
        i = times.index(t_probe)
        point = {
            "Price": series["Price"][i],
            "Perceived_Price_for_Supply__smooth1": series["Perceived_Price_for_Supply"][i],
            "Perceived_Price_for_Demand__smooth1": series["Perceived_Price_for_Demand"][i],
        }
        graph = build_causal_graph(reference_compiled, point, at_time=t_probe)
        report = enumerate_loops(graph)
        ratio = series["Supply_Demand_Ratio"][i]
        two_node = next(lp for lp in report.loops if len(lp.nodes) == 2)
        five_node = [lp for lp in report.loops if len(lp.nodes) == 5]
        assert all(lp.polarity == "balancing" for lp in five_node), t_probe
        if abs(1.0 - ratio) < 1e-7:
            assert two_node.polarity == "indeterminate"
        elif ratio < 1.0:
            assert two_node.polarity == "reinforcing", t_probe
        else:
            assert two_node.polarity == "balancing", t_probe


def test_solver_reference_points(reference_model):
    supply = reference_model.by_name["Supply_Schedule"]
    demand = reference_model.by_name["Demand_Schedule"]
    flat = solve_linear_equilibrium(supply, demand, 0.0)
    assert flat.price == pytest.approx(25.0, abs=1e-6)
    assert flat.quantity == pytest.approx(50.0, abs=1e-6)
    shifted = solve_linear_equilibrium(supply, demand, 10.0)
    assert shifted.price == pytest.approx(27.5, abs=1e-6)
    assert shifted.quantity == pytest.approx(55.0, abs=1e-6)
    # intersection of 2p and 90 - 2p, computed by hand: (22.5, 45)
    down = solve_linear_equilibrium(supply, demand, -10.0)
    assert down.price == pytest.approx(22.5, abs=1e-6)
    assert down.quantity == pytest.approx(45.0, abs=1e-6)


def test_solver_no_crossing(reference_model):
    supply = reference_model.by_name["Supply_Schedule"]
    demand = reference_model.by_name["Demand_Schedule"]
    with pytest.raises(NoCrossingError):
        solve_linear_equilibrium(supply, demand, -200.0)


def test_simulated_steady_state_matches_solver(reference_model, reference_compiled):
    """Spot check of oracle equivalence; the acceptance suite runs 20 cases."""
    from stockflow.engine import detect_equilibrium

    supply = reference_model.by_name["Supply_Schedule"]
    demand = reference_model.by_name["Demand_Schedule"]
    for shift in (6.0, -4.0):
        predicted = solve_linear_equilibrium(supply, demand, shift)
        result = simulate(reference_compiled,
                          RunSpec(stop=150.0, overrides={"Shift_Height": shift}))
        price = detect_equilibrium(result, "Price", 10.0, 1e-3)
        qty = detect_equilibrium(result, "Quantity_Supplied", 10.0, 1e-3)
        assert price is not None and qty is not None
        assert price[1] == pytest.approx(predicted.price, rel=1e-3)
        assert qty[1] == pytest.approx(predicted.quantity, rel=1e-3)
