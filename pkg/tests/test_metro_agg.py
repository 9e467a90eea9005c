"""Metro aggregation horseshoes."""

import numpy as np
import pytest

from optinetgen.errors import InvalidParamsError
from optinetgen.metro_agg import (
    DEFAULT_LEN_RANGES,
    DEFAULT_NODE_COUNT_OCCURRENCE,
    DEFAULT_PERC_LENGTH,
    HorseshoeSpec,
    generate_horseshoe,
    horseshoe_stats,
    sample_hops,
)
from optinetgen.model import NodeType


def test_spec_validation():
    with pytest.raises(InvalidParamsError):
        HorseshoeSpec(end1="A", end2="A", hops=3)
    with pytest.raises(InvalidParamsError):
        HorseshoeSpec(end1="A", end2="B", hops=1)
    with pytest.raises(InvalidParamsError):
        HorseshoeSpec(end1="A", end2="B", hops=3, len_ranges=())
    with pytest.raises(InvalidParamsError):
        HorseshoeSpec(end1="A", end2="B", hops=3, len_ranges=((10.0, 5.0),), perc_length=(1.0,))
    with pytest.raises(InvalidParamsError):
        # descending ranges overlap
        HorseshoeSpec(
            end1="A",
            end2="B",
            hops=3,
            len_ranges=((10.0, 40.0), (20.0, 50.0)),
            perc_length=(0.5, 0.5),
        )
    with pytest.raises(InvalidParamsError):
        HorseshoeSpec(end1="A", end2="B", hops=3, perc_length=(1.0,))
    with pytest.raises(InvalidParamsError):
        HorseshoeSpec(
            end1="A",
            end2="B",
            hops=3,
            len_ranges=((1.0, 2.0), (2.0, 3.0)),
            perc_length=(0.6, 0.5),
        )


def test_defaults_are_consistent():
    assert len(DEFAULT_LEN_RANGES) == len(DEFAULT_PERC_LENGTH) == 5
    assert sum(DEFAULT_PERC_LENGTH) == pytest.approx(1.0)
    assert sum(DEFAULT_NODE_COUNT_OCCURRENCE.values()) == pytest.approx(1.0)


def test_structure_shape():
    spec = HorseshoeSpec(end1="R1", end2="R2", hops=4, pref="H7", idx=1, seed=5)
    topo = generate_horseshoe(spec)
    assert topo.number_of_nodes == 5  # hops + 1
    assert topo.number_of_links == 4
    g = topo.graph_view()
    assert g.nodes["R1"]["ntype"] == NodeType.REGIONAL
    assert g.nodes["R2"]["ntype"] == NodeType.REGIONAL
    locals_ = [n for n in g.nodes if n not in ("R1", "R2")]
    assert sorted(locals_) == ["H7LCO1", "H7LCO2", "H7LCO3"]
    for n in locals_:
        assert g.nodes[n]["ntype"] == NodeType.LOCAL
        assert g.degree(n) == 2
    assert g.degree("R1") == g.degree("R2") == 1


def test_minimal_horseshoe():
    topo = generate_horseshoe(HorseshoeSpec(end1="R1", end2="R2", hops=2, seed=1))
    assert topo.number_of_nodes == 3
    assert topo.number_of_links == 2


def test_total_length_within_ranges_and_conserved():
    lo_all = DEFAULT_LEN_RANGES[0][0]
    hi_all = DEFAULT_LEN_RANGES[-1][1]
    for seed in range(200):
        spec = HorseshoeSpec(end1="R1", end2="R2", hops=5, seed=seed)
        topo = generate_horseshoe(spec)
        g = topo.graph_view()
        total = sum(g.edges[e]["length_km"] for e in g.edges)
        assert lo_all <= total <= hi_all
        # chain geometry: node x-positions span exactly the total length
        span = g.nodes["R2"]["pos"][0] - g.nodes["R1"]["pos"][0]
        assert total == pytest.approx(span, abs=1e-9)
        assert all(g.edges[e]["length_km"] >= 0 for e in g.edges)


def test_single_range_pins_total():
    spec = HorseshoeSpec(
        end1="R1",
        end2="R2",
        hops=3,
        len_ranges=((100.0, 100.0 + 1e-12),),
        perc_length=(1.0,),
        seed=3,
    )
    g = generate_horseshoe(spec).graph_view()
    total = sum(g.edges[e]["length_km"] for e in g.edges)
    assert total == pytest.approx(100.0, abs=1e-6)


def test_reference_nodes_point_at_nearer_hub():
    for seed in range(50):
        spec = HorseshoeSpec(end1="R1", end2="R2", hops=6, seed=seed)
        g = generate_horseshoe(spec).graph_view()
        length = g.nodes["R2"]["pos"][0]
        for n in g.nodes:
            if n in ("R1", "R2"):
                assert "reference_node" not in g.nodes[n]
                continue
            x = g.nodes[n]["pos"][0]
            expect = "R1" if x <= length - x else "R2"
            assert g.nodes[n]["reference_node"] == expect


def test_office_positions_sorted_along_chain():
    spec = HorseshoeSpec(end1="R1", end2="R2", hops=5, seed=9)
    g = generate_horseshoe(spec).graph_view()
    xs = [g.nodes[f"LCO{i}"]["pos"][0] for i in range(1, 5)]
    assert xs == sorted(xs)
    assert 0.0 <= xs[0] and xs[-1] <= g.nodes["R2"]["pos"][0]


def test_range_choice_frequencies():
    rng = np.random.default_rng(55)
    hits = [0] * len(DEFAULT_LEN_RANGES)
    n = 20000
    for _ in range(n):
        spec = HorseshoeSpec(end1="R1", end2="R2", hops=2, seed=int(rng.integers(2**31)))
        g = generate_horseshoe(spec).graph_view()
        total = sum(g.edges[e]["length_km"] for e in g.edges)
        for i, (lo, hi) in enumerate(DEFAULT_LEN_RANGES):
            if lo <= total <= hi:
                hits[i] += 1
                break
    for i, p in enumerate(DEFAULT_PERC_LENGTH):
        assert abs(hits[i] / n - p) < 0.02


def test_sample_hops_expectation():
    # node counts weighted by occurrence give E[hops] = sum (count-1) * p
    expect = sum((k - 1) * p for k, p in DEFAULT_NODE_COUNT_OCCURRENCE.items())
    assert expect == pytest.approx(4.47, abs=1e-9)
    rng = np.random.default_rng(77)
    draws = [sample_hops(DEFAULT_NODE_COUNT_OCCURRENCE, rng) for _ in range(20000)]
    assert abs(np.mean(draws) - expect) < 0.05
    assert min(draws) >= 2 and max(draws) <= 8


def test_sample_hops_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(InvalidParamsError):
        sample_hops({}, rng)
    with pytest.raises(InvalidParamsError):
        sample_hops({2: 1.0}, rng)
    with pytest.raises(InvalidParamsError):
        sample_hops({3: 0.5, 4: 0.4}, rng)
    with pytest.raises(InvalidParamsError):
        sample_hops({3: -0.5, 4: 1.5}, rng)


def test_name_collision_detected():
    with pytest.raises(InvalidParamsError):
        generate_horseshoe(HorseshoeSpec(end1="LCO1", end2="R2", hops=3, seed=0))


def test_deterministic():
    spec = HorseshoeSpec(end1="R1", end2="R2", hops=4, seed=21)
    ga = generate_horseshoe(spec).graph_view()
    gb = generate_horseshoe(spec).graph_view()
    assert sorted(ga.nodes) == sorted(gb.nodes)
    for n in ga.nodes:
        assert ga.nodes[n]["pos"] == gb.nodes[n]["pos"]
    for e in ga.edges:
        assert ga.edges[e]["length_km"] == gb.edges[e]["length_km"]


def test_stats_aggregate():
    specs = [HorseshoeSpec(end1="R1", end2="R2", hops=h, seed=h) for h in (2, 3, 4)]
    shoes = [generate_horseshoe(s) for s in specs]
    stats = horseshoe_stats(shoes)
    assert stats.hops.min == 2 and stats.hops.max == 4
    assert stats.hops.avg == pytest.approx(3.0)
    totals = [sum(l.length_km for l in t.links()) for t in shoes]
    assert stats.total_length_km.avg == pytest.approx(np.mean(totals))
    assert stats.link_length_km.min >= 0
    with pytest.raises(InvalidParamsError):
        horseshoe_stats([])
