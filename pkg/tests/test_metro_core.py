"""Metro core meshes and N-ring structures."""

import math

import numpy as np
import pytest

from optinetgen.errors import InvalidParamsError
from optinetgen.metro_core import (
    ALLOWED_RING_COUNTS,
    DEFAULT_METRO_TYPES,
    DEFAULT_RING_OCCURRENCE,
    MetroMeshParams,
    RingConfig,
    RingStructureSpec,
    generate_metro_mesh,
    generate_nring,
    load_ring_defaults,
    ring_configs_from_defaults,
    sample_nring_count,
)
from optinetgen.model import NodeType, survivability_check
from optinetgen.validation import DegreeDistribution

RING_LETTERS = "ABCDEF"


def ring_sums(topo, end1, end2):
    """Total fiber length per ring, keyed by the ring's letter suffix."""
    g = topo.graph_view()
    sums: dict[str, float] = {}
    for a, b in g.edges:
        member = b if a in (end1, end2) else a
        sums[member[-1]] = sums.get(member[-1], 0.0) + g.edges[a, b]["length_km"]
    return sums


def simple_spec(**kw):
    kw.setdefault("end1", "H1")
    kw.setdefault("end2", "H2")
    kw.setdefault("nrings", 1)
    kw.setdefault(
        "rings",
        [RingConfig(total_length_km=100.0, offices=1, segment_ranges=[(50.0, 50.0)], max_unamplified_km=200.0)],
    )
    return RingStructureSpec(**kw)


# ---------------------------------------------------------------------------
# ring configuration validation
# ---------------------------------------------------------------------------


def test_ring_config_validation():
    ok = dict(total_length_km=80.0, offices=2, segment_ranges=[(5, 30), (5, 30)], max_unamplified_km=80.0)
    RingConfig(**ok)
    with pytest.raises(InvalidParamsError):
        RingConfig(**{**ok, "total_length_km": 0.0})
    with pytest.raises(InvalidParamsError):
        RingConfig(**{**ok, "offices": 0})
    with pytest.raises(InvalidParamsError):
        RingConfig(**{**ok, "segment_ranges": [(5, 30)]})
    with pytest.raises(InvalidParamsError):
        RingConfig(**{**ok, "segment_ranges": [(0, 30), (5, 30)]})
    with pytest.raises(InvalidParamsError):
        RingConfig(**{**ok, "segment_ranges": [(30, 5), (5, 30)]})
    with pytest.raises(InvalidParamsError):
        RingConfig(**{**ok, "max_unamplified_km": 0.0})


def test_spec_validation():
    with pytest.raises(InvalidParamsError):
        simple_spec(end2="H1")
    with pytest.raises(InvalidParamsError):
        simple_spec(nrings=5)
    with pytest.raises(InvalidParamsError):
        simple_spec(nrings=2)  # only one ring config supplied
    with pytest.raises(InvalidParamsError):
        simple_spec(var=1.0)
    with pytest.raises(InvalidParamsError):
        simple_spec(occurrence={1: 0.5, 2: 0.4})
    with pytest.raises(InvalidParamsError):
        simple_spec(occurrence={5: 1.0})
    with pytest.raises(InvalidParamsError):
        simple_spec(occurrence={})


def test_occurrence_sampler_frequencies():
    rng = np.random.default_rng(31)
    draws = [sample_nring_count(DEFAULT_RING_OCCURRENCE, rng) for _ in range(20000)]
    counts = {k: draws.count(k) / len(draws) for k in ALLOWED_RING_COUNTS}
    for k, p in DEFAULT_RING_OCCURRENCE.items():
        assert abs(counts[k] - p) < 0.02
    assert 5 not in draws  # five-ring structures never occur


# ---------------------------------------------------------------------------
# N-ring structures
# ---------------------------------------------------------------------------


def test_office_names_and_counts():
    rings = [
        RingConfig(total_length_km=100.0, offices=2, segment_ranges=[(20.0, 20.0)] * 2, max_unamplified_km=200.0),
        RingConfig(total_length_km=90.0, offices=1, segment_ranges=[(30.0, 30.0)], max_unamplified_km=200.0),
    ]
    spec = RingStructureSpec(end1="H1", end2="H2", nrings=2, rings=rings, pref="C3R", var=0.0, seed=5)
    topo = generate_nring(spec)
    names = set(topo.node_names())
    assert {"H1", "H2", "C3R21A", "C3R22A", "C3R21B"} <= names
    assert not any(n.startswith("C3RAMP") for n in names)  # nothing beyond reach
    assert topo.number_of_nodes == 5
    assert topo.number_of_links == 5  # 3 + 2 path segments
    g = topo.graph_view()
    assert g.nodes["C3R21A"]["ntype"] == NodeType.REGIONAL
    assert g.nodes["H1"]["ntype"] == NodeType.NATIONAL


def test_init_idx_shifts_names():
    spec = simple_spec(pref="R", init_idx=4, seed=1)
    topo = generate_nring(spec)
    assert "R14A" in topo.node_names()


def test_length_conservation_exact_when_var_zero():
    rng = np.random.default_rng(7)
    for seed in range(50):
        nrings = int(rng.choice(ALLOWED_RING_COUNTS))
        spec = RingStructureSpec(
            end1="H1",
            end2="H2",
            nrings=nrings,
            rings=ring_configs_from_defaults(nrings),
            var=0.0,
            seed=seed,
        )
        topo = generate_nring(spec)
        sums = ring_sums(topo, "H1", "H2")
        assert len(sums) == nrings
        for i, cfg in enumerate(spec.rings):
            assert sums[RING_LETTERS[i]] == pytest.approx(cfg.total_length_km, abs=1e-6)


def test_length_variation_bounds():
    cfg = RingConfig(total_length_km=100.0, offices=2, segment_ranges=[(10.0, 25.0)] * 2, max_unamplified_km=200.0)
    for seed in range(100):
        spec = RingStructureSpec(end1="A", end2="B", nrings=1, rings=[cfg], var=0.1, seed=seed)
        total = sum(ring_sums(generate_nring(spec), "A", "B").values())
        assert 90.0 - 1e-9 <= total <= 110.0 + 1e-9


def test_amplifier_split_is_even():
    # a 120 km segment against an 80 km reach becomes two 60 km pieces
    cfg = RingConfig(
        total_length_km=200.0,
        offices=1,
        segment_ranges=[(120.0, 120.0)],
        max_unamplified_km=80.0,
    )
    spec = RingStructureSpec(end1="H1", end2="H2", nrings=1, rings=[cfg], var=0.0, seed=3)
    topo = generate_nring(spec)
    g = topo.graph_view()
    amps = [n for n in g.nodes if g.nodes[n]["ntype"] == NodeType.AMPLIFIER]
    assert amps == ["AMP11A"]
    amp_lengths = sorted(g.edges[amps[0], v]["length_km"] for v in g.neighbors(amps[0]))
    assert amp_lengths == [pytest.approx(60.0), pytest.approx(60.0)]
    lengths = sorted(g.edges[e]["length_km"] for e in g.edges)
    assert lengths == [pytest.approx(60.0), pytest.approx(60.0), pytest.approx(80.0)]


def test_no_link_exceeds_reach():
    rng = np.random.default_rng(17)
    for seed in range(60):
        nrings = int(rng.choice(ALLOWED_RING_COUNTS))
        spec = RingStructureSpec(
            end1="H1",
            end2="H2",
            nrings=nrings,
            rings=ring_configs_from_defaults(nrings),
            seed=seed,
        )
        topo = generate_nring(spec)
        g = topo.graph_view()
        reach = max(cfg.max_unamplified_km for cfg in spec.rings)
        for e in g.edges:
            assert g.edges[e]["length_km"] <= reach + 1e-9
        # each ring is a simple end1-end2 path: every office/amp has degree 2
        for n in g.nodes:
            if n not in ("H1", "H2"):
                assert g.degree(n) == 2
        assert g.degree("H1") == g.degree("H2") == nrings


def test_reference_node_tie_prefers_first_end():
    topo = generate_nring(simple_spec(seed=11))  # two 50 km segments
    g = topo.graph_view()
    assert g.nodes["11A"]["reference_node"] == "H1"
    assert "reference_node" not in g.nodes["H1"]
    assert "reference_node" not in g.nodes["H2"]


def test_reference_node_takes_shorter_side():
    cfg = RingConfig(
        total_length_km=90.0,
        offices=2,
        segment_ranges=[(30.0, 30.0)] * 2,
        max_unamplified_km=200.0,
    )
    spec = RingStructureSpec(end1="H1", end2="H2", nrings=1, rings=[cfg], var=0.0, seed=2)
    g = generate_nring(spec).graph_view()
    # equal 30 km segments: first office is 30/60, second 60/30
    assert g.nodes["11A"]["reference_node"] == "H1"
    assert g.nodes["12A"]["reference_node"] == "H2"


def test_infeasible_segment_ranges():
    cfg = RingConfig(
        total_length_km=10.0,
        offices=2,
        segment_ranges=[(6.0, 6.0)] * 2,
        max_unamplified_km=200.0,
    )
    spec = RingStructureSpec(end1="A", end2="B", nrings=1, rings=[cfg], var=0.0, seed=0)
    with pytest.raises(InvalidParamsError):
        generate_nring(spec)


def test_tight_ranges_shrink_but_conserve():
    # draws alone overshoot the ring length, forcing the proportional shrink
    cfg = RingConfig(
        total_length_km=100.0,
        offices=2,
        segment_ranges=[(45.0, 60.0)] * 2,
        max_unamplified_km=200.0,
    )
    for seed in range(80):
        spec = RingStructureSpec(end1="A", end2="B", nrings=1, rings=[cfg], var=0.0, seed=seed)
        topo = generate_nring(spec)
        g = topo.graph_view()
        lengths = [g.edges[e]["length_km"] for e in g.edges]
        assert sum(lengths) == pytest.approx(100.0, abs=1e-9)
        assert min(lengths) > 0


def test_nring_deterministic():
    spec = simple_spec(seed=123)
    a, b = generate_nring(spec), generate_nring(spec)
    assert sorted(a.node_names()) == sorted(b.node_names())
    ga, gb = a.graph_view(), b.graph_view()
    assert {tuple(sorted(e)) for e in ga.edges} == {tuple(sorted(e)) for e in gb.edges}
    for n in ga.nodes:
        assert ga.nodes[n]["pos"] == gb.nodes[n]["pos"]


def test_name_collision_detected():
    spec = simple_spec(end2="11A", seed=0)  # hub name matches a generated office
    with pytest.raises(InvalidParamsError):
        generate_nring(spec)


# ---------------------------------------------------------------------------
# ring defaults
# ---------------------------------------------------------------------------


def test_packaged_defaults_shape():
    data = load_ring_defaults()
    sizes = [k for k in data if not k.startswith("_")]
    assert sorted(sizes) == ["1", "2", "3", "4", "6"]
    for key in sizes:
        assert len(data[key]) == int(key)
    cfgs = ring_configs_from_defaults(4)
    assert len(cfgs) == 4 and all(isinstance(c, RingConfig) for c in cfgs)
    with pytest.raises(InvalidParamsError):
        ring_configs_from_defaults(5)


def test_defaults_from_file(tmp_path):
    p = tmp_path / "rings.json"
    p.write_text(
        '{"1": [{"total_length_km": 50, "offices": 1, '
        '"segment_ranges": [[10, 20]], "max_unamplified_km": 80}]}'
    )
    cfgs = ring_configs_from_defaults(1, load_ring_defaults(p))
    assert cfgs[0].total_length_km == 50


# ---------------------------------------------------------------------------
# metro mesh
# ---------------------------------------------------------------------------


def test_mesh_params_validation():
    with pytest.raises(InvalidParamsError):
        MetroMeshParams(nodes=1)
    with pytest.raises(InvalidParamsError):
        MetroMeshParams(nodes=5, main_nodes=())
    with pytest.raises(InvalidParamsError):
        MetroMeshParams(nodes=5, main_nodes=("A", "A"))
    with pytest.raises(InvalidParamsError):
        MetroMeshParams(nodes=2, main_nodes=("A", "B", "C"))


def test_mesh_respects_main_node_names():
    params = MetroMeshParams(nodes=12, main_nodes=("M1", "M2", "M3"), seed=4)
    topo = generate_metro_mesh(params)
    assert topo.number_of_nodes == 12
    g = topo.graph_view()
    for m in ("M1", "M2", "M3"):
        assert g.nodes[m]["ntype"] == NodeType.NATIONAL
    r = survivability_check(topo)
    assert r.connected and r.edge_survivable


def test_mesh_subnet_chaining_link_count():
    # three 4-node square subnets chained by link pairs: 3*4 + 2*2 edges
    params = MetroMeshParams(
        nodes=12,
        main_nodes=("M1", "M2", "M3"),
        degrees=DegreeDistribution({2: 1.0}),
        seed=8,
    )
    topo = generate_metro_mesh(params)
    assert topo.number_of_links == 16


def test_mesh_default_type_allocation():
    # the type split is a deterministic function of the mix and node count
    topo = generate_metro_mesh(MetroMeshParams(nodes=95, seed=1))
    counts: dict[str, int] = {}
    for n in topo.nodes():
        counts[n.ntype] = counts.get(n.ntype, 0) + 1
    assert counts == {
        NodeType.NATIONAL: 5,
        NodeType.DATA_CENTER: 1,
        NodeType.REGIONAL: 66,
        NodeType.REGIONAL_NO_HUB: 23,
    }
    assert DEFAULT_METRO_TYPES.fractions[NodeType.REGIONAL] == 0.70


def test_mesh_name_prefix():
    topo = generate_metro_mesh(MetroMeshParams(nodes=8, name_prefix="X", seed=2))
    assert all(name.startswith("X") for name in topo.node_names())


def test_mesh_survivable_sweep():
    rng = np.random.default_rng(41)
    for _ in range(15):
        n = int(rng.integers(6, 60))
        topo = generate_metro_mesh(MetroMeshParams(nodes=n, seed=int(rng.integers(2**31))))
        assert topo.number_of_nodes == n
        r = survivability_check(topo)
        assert r.connected and r.edge_survivable


def test_mesh_single_node_subnets_still_survivable():
    params = MetroMeshParams(nodes=5, main_nodes=("A", "B", "C", "D", "E"), seed=6)
    topo = generate_metro_mesh(params)
    r = survivability_check(topo)
    assert r.connected and r.edge_survivable


def test_mesh_deterministic():
    params = MetroMeshParams(nodes=30, seed=19)
    a, b = generate_metro_mesh(params), generate_metro_mesh(params)
    ga, gb = a.graph_view(), b.graph_view()
    assert sorted(ga.nodes) == sorted(gb.nodes)
    assert {tuple(sorted(e)) for e in ga.edges} == {tuple(sorted(e)) for e in gb.edges}
    for n in ga.nodes:
        assert ga.nodes[n]["pos"] == gb.nodes[n]["pos"]
