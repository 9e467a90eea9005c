"""End-to-end generation: backbone, clusters, per-cluster rings, horseshoes.

The flow reproduces the full national-to-access pipeline in one call: a
backbone is generated and clustered into metro regions, each region gets
a ring structure between two of its nodes, and every directly linked
non-amplifier pair inside the metro segments receives an aggregation
horseshoe.  Everything lands in one workbook.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .backbone import (
    BackboneParams,
    NodeTypeMix,
    STRATEGY_DEFAULT,
    STRATEGY_REGION,
    STRATEGY_TWIN,
    WaxmanRegionParams,
    generate_backbone,
)
from .clustering import ClusterParams, MODE_DISTANCE, cluster_nodes
from .errors import InvalidParamsError
from .metro_core import (
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
from .metro_agg import (
    DEFAULT_LEN_RANGES,
    DEFAULT_NODE_COUNT_OCCURRENCE,
    DEFAULT_PERC_LENGTH,
    HorseshoeSpec,
    generate_horseshoe,
    sample_hops,
)
from .model import NodeType, SEGMENT_METRO_MESH, SEGMENT_METRO_RING, Topology
from .validation import (
    DegreeDistribution,
    DistanceRanges,
    ValidationReport,
    validate_topology,
)
from .workbook import Workbook

METRO_KIND_NRING = "nring"
METRO_KIND_MESH = "mesh"


# ---------------------------------------------------------------------------
# parameter coercion (shared with the CLI and the HTTP service)
# ---------------------------------------------------------------------------


def parse_degrees(value) -> DegreeDistribution:
    """Accept a DegreeDistribution, a ``d:p`` string, or a mapping."""
    if isinstance(value, DegreeDistribution):
        return value
    if isinstance(value, str):
        return DegreeDistribution.parse(value)
    if isinstance(value, Mapping):
        return DegreeDistribution({int(k): float(v) for k, v in value.items()})
    raise InvalidParamsError(f"cannot read a degree distribution from {value!r}")


def parse_ranges(value) -> DistanceRanges:
    """Accept a DistanceRanges, a ``lo-hi:p`` string, a mapping, or bin rows."""
    if isinstance(value, DistanceRanges):
        return value
    if isinstance(value, str):
        return DistanceRanges.parse(value)
    if isinstance(value, Mapping):
        return DistanceRanges.parse(",".join(f"{k}:{v}" for k, v in value.items()))
    if isinstance(value, (list, tuple)):
        bins, targets = [], []
        for row in value:
            lo, hi, p = row
            bins.append((float(lo), float(hi)))
            targets.append(float(p))
        return DistanceRanges(tuple(bins), tuple(targets))
    raise InvalidParamsError(f"cannot read distance ranges from {value!r}")


def parse_type_mix(value) -> NodeTypeMix:
    if isinstance(value, NodeTypeMix):
        return value
    if isinstance(value, str):
        return NodeTypeMix.parse(value)
    if isinstance(value, Mapping):
        return NodeTypeMix({str(k): float(v) for k, v in value.items()})
    raise InvalidParamsError(f"cannot read a node type mix from {value!r}")


def _int_keys(mapping: Mapping) -> dict[int, float]:
    return {int(k): float(v) for k, v in mapping.items()}


def backbone_params_from_dict(strategy: str, data: Mapping | None):
    """Build strategy parameters from a JSON-friendly mapping."""
    d = dict(data or {})
    if strategy == STRATEGY_REGION:
        kwargs = {}
        for key in (
            "nodes",
            "regions",
            "avg_degree",
            "min_node_distance",
            "alpha",
            "beta",
            "seed",
            "max_retries",
        ):
            if key in d:
                value = d.pop(key)
                kwargs[key] = float(value) if key in ("avg_degree", "min_node_distance", "alpha", "beta") else int(value)
        if "plane" in d:
            w, h = d.pop("plane")
            kwargs["plane"] = (float(w), float(h))
        if d:
            raise InvalidParamsError(f"unknown region backbone parameters: {sorted(d)}")
        if "nodes" not in kwargs:
            raise InvalidParamsError("backbone parameters need a node count")
        return WaxmanRegionParams(**kwargs)
    if strategy not in (STRATEGY_DEFAULT, STRATEGY_TWIN):
        raise InvalidParamsError(f"unknown backbone strategy {strategy!r}")
    kwargs = {}
    if "nodes" in d:
        kwargs["nodes"] = int(d.pop("nodes"))
    if "degrees" in d:
        kwargs["degrees"] = parse_degrees(d.pop("degrees"))
    if "type_mix" in d:
        kwargs["type_mix"] = parse_type_mix(d.pop("type_mix"))
    if "layout" in d:
        kwargs["layout"] = str(d.pop("layout"))
    if "distance_ranges" in d:
        kwargs["distance_ranges"] = parse_ranges(d.pop("distance_ranges"))
    if "fit_distances" in d:
        kwargs["fit_distances"] = bool(d.pop("fit_distances"))
    if "twin_distance_range" in d:
        lo, hi = d.pop("twin_distance_range")
        kwargs["twin_distance_range"] = (float(lo), float(hi))
    if "seed" in d:
        kwargs["seed"] = int(d.pop("seed"))
    if "max_retries" in d:
        kwargs["max_retries"] = int(d.pop("max_retries"))
    if d:
        raise InvalidParamsError(f"unknown backbone parameters: {sorted(d)}")
    if "nodes" not in kwargs:
        raise InvalidParamsError("backbone parameters need a node count")
    return BackboneParams(**kwargs)


def mesh_params_from_dict(data: Mapping | None, main_nodes=None) -> MetroMeshParams:
    d = dict(data or {})
    kwargs = {}
    if "nodes" in d:
        kwargs["nodes"] = int(d.pop("nodes"))
    if "degrees" in d:
        kwargs["degrees"] = parse_degrees(d.pop("degrees"))
    if "type_mix" in d:
        kwargs["type_mix"] = parse_type_mix(d.pop("type_mix"))
    if "layout" in d:
        kwargs["layout"] = str(d.pop("layout"))
    if "distance_ranges" in d:
        kwargs["distance_ranges"] = parse_ranges(d.pop("distance_ranges"))
    if "fit_distances" in d:
        kwargs["fit_distances"] = bool(d.pop("fit_distances"))
    if "name_prefix" in d:
        kwargs["name_prefix"] = str(d.pop("name_prefix"))
    if "seed" in d:
        kwargs["seed"] = int(d.pop("seed"))
    if "max_retries" in d:
        kwargs["max_retries"] = int(d.pop("max_retries"))
    if "main_nodes" in d:
        main_nodes = d.pop("main_nodes")
    if d:
        raise InvalidParamsError(f"unknown metro mesh parameters: {sorted(d)}")
    if main_nodes is not None:
        kwargs["main_nodes"] = tuple(str(n) for n in main_nodes)
    if "nodes" not in kwargs:
        raise InvalidParamsError("metro mesh parameters need a node count")
    return MetroMeshParams(**kwargs)


def ring_spec_from_params(
    end1: str,
    end2: str,
    data: Mapping | None,
    rng: np.random.Generator,
) -> RingStructureSpec:
    """Assemble a ring-structure spec, sampling the ring count if absent."""
    d = dict(data or {})
    occurrence = _int_keys(d.pop("occurrence", DEFAULT_RING_OCCURRENCE))
    nrings = int(d.pop("nrings")) if "nrings" in d else sample_nring_count(occurrence, rng)
    if "rings" in d:
        rings = [
            RingConfig(
                total_length_km=float(r["total_length_km"]),
                offices=int(r["offices"]),
                segment_ranges=[(float(a), float(b)) for a, b in r["segment_ranges"]],
                max_unamplified_km=float(r["max_unamplified_km"]),
            )
            for r in d.pop("rings")
        ]
    else:
        defaults = load_ring_defaults(d.pop("ring_defaults", None))
        rings = ring_configs_from_defaults(nrings, defaults)
    kwargs = {}
    for key in ("pref", "init_idx", "var", "seed"):
        if key in d:
            value = d.pop(key)
            kwargs[key] = str(value) if key == "pref" else (float(value) if key == "var" else int(value))
    if d:
        raise InvalidParamsError(f"unknown ring parameters: {sorted(d)}")
    kwargs.setdefault("seed", int(rng.integers(2**31)))
    return RingStructureSpec(
        end1=end1, end2=end2, nrings=nrings, rings=rings, occurrence=occurrence, **kwargs
    )


def horseshoe_spec_from_params(
    end1: str,
    end2: str,
    data: Mapping | None,
    rng: np.random.Generator,
    hops: int | None = None,
) -> HorseshoeSpec:
    d = dict(data or {})
    occurrence = _int_keys(d.pop("occurrence", DEFAULT_NODE_COUNT_OCCURRENCE))
    if hops is None:
        hops = int(d.pop("hops")) if "hops" in d else sample_hops(occurrence, rng)
    else:
        d.pop("hops", None)
    kwargs = {}
    if "len_ranges" in d:
        kwargs["len_ranges"] = [(float(a), float(b)) for a, b in d.pop("len_ranges")]
    if "perc_length" in d:
        kwargs["perc_length"] = [float(p) for p in d.pop("perc_length")]
    for key in ("pref", "idx", "seed"):
        if key in d:
            value = d.pop(key)
            kwargs[key] = str(value) if key == "pref" else int(value)
    if d:
        raise InvalidParamsError(f"unknown horseshoe parameters: {sorted(d)}")
    kwargs.setdefault("seed", int(rng.integers(2**31)))
    return HorseshoeSpec(end1=end1, end2=end2, hops=int(hops), **kwargs)


# ---------------------------------------------------------------------------
# flow configuration
# ---------------------------------------------------------------------------


@dataclass
class FlowConfig:
    """Declarative description of one full generation run.

    The section dictionaries carry the same JSON-friendly keys the
    individual generators accept; they are interpreted lazily so a config
    file round-trips unchanged.
    """

    backbone_strategy: str = STRATEGY_TWIN
    backbone: dict = field(default_factory=lambda: {"nodes": 6, "layout": "spring"})
    clustering: dict = field(default_factory=lambda: {"epsilon": 0.3})
    metro: dict = field(default_factory=dict)
    aggregation: dict | None = field(default_factory=dict)
    seed: int = 0
    out: str | None = None
    out_format: str = "csv"

    @classmethod
    def from_dict(cls, data: Mapping) -> "FlowConfig":
        d = dict(data)
        kwargs = {}
        if "backbone" in d:
            section = dict(d.pop("backbone"))
            if "strategy" in section:
                kwargs["backbone_strategy"] = str(section.pop("strategy"))
            kwargs["backbone"] = section
        if "strategy" in d:
            kwargs["backbone_strategy"] = str(d.pop("strategy"))
        for key in ("clustering", "metro"):
            if key in d:
                kwargs[key] = dict(d.pop(key))
        if "aggregation" in d:
            section = d.pop("aggregation")
            kwargs["aggregation"] = None if section is None else dict(section)
        if "seed" in d:
            kwargs["seed"] = int(d.pop("seed"))
        if "out" in d:
            kwargs["out"] = d.pop("out")
        if "format" in d:
            kwargs["out_format"] = str(d.pop("format"))
        if d:
            raise InvalidParamsError(f"unknown flow config keys: {sorted(d)}")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> "FlowConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise InvalidParamsError(f"flow config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidParamsError("flow config must be a JSON object")
        return cls.from_dict(data)


@dataclass
class FlowResult:
    workbook: Workbook
    backbone: Topology
    report: ValidationReport | None
    cluster_count: int
    structure_ids: list[str]
    warnings: list[str]

    @property
    def generation_calls(self) -> int:
        return len(self.structure_ids)


# ---------------------------------------------------------------------------
# position pinning
# ---------------------------------------------------------------------------


def pin_structure_positions(topo: Topology, end1, end2, world1, world2):
    """Map a structure's local coordinates onto the global scene.

    Uses the similarity transform that sends the structure's two end
    nodes onto their already-placed global positions, so rings and
    horseshoes hang off the nodes they terminate on.
    """
    g = topo._g
    p1 = complex(*g.nodes[end1]["pos"])
    p2 = complex(*g.nodes[end2]["pos"])
    q1 = complex(*world1)
    q2 = complex(*world2)
    if p1 == p2 or q1 == q2:
        shift = q1 - p1
        for n in g.nodes:
            z = complex(*g.nodes[n]["pos"]) + shift
            g.nodes[n]["pos"] = (z.real, z.imag)
        return
    a = (q2 - q1) / (p2 - p1)
    b = q1 - a * p1
    for n in g.nodes:
        z = a * complex(*g.nodes[n]["pos"]) + b
        g.nodes[n]["pos"] = (z.real, z.imag)


def _report_rows(wb: Workbook, report: ValidationReport):
    summary = {}
    for key in ("degree_mape", "degree_other", "distance_mape", "distance_other"):
        value = getattr(report, key)
        if value is not None:
            summary[key] = value
    if summary:
        wb.add_report_rows("validation", summary)
    for section, table in (
        ("degree-target", report.degree_target),
        ("degree-achieved", report.degree_achieved),
        ("distance-target", report.distance_target),
        ("distance-achieved", report.distance_achieved),
    ):
        if table:
            wb.add_report_rows(section, {str(k): v for k, v in table.items()})


# ---------------------------------------------------------------------------
# the flow itself
# ---------------------------------------------------------------------------


def run_flow(config: FlowConfig) -> FlowResult:
    rng = np.random.default_rng(config.seed)
    warnings: list[str] = []
    structure_ids: list[str] = []

    # 1. backbone
    backbone_section = dict(config.backbone)
    backbone_section.setdefault("seed", int(rng.integers(2**31)))
    params = backbone_params_from_dict(config.backbone_strategy, backbone_section)
    backbone = generate_backbone(config.backbone_strategy, params)
    wb = Workbook.from_topology(backbone)
    wb.add_structure(
        "backbone",
        backbone.segment,
        {"strategy": config.backbone_strategy, "nodes": params.nodes, "seed": params.seed},
    )
    structure_ids.append("backbone")

    report = None
    if isinstance(params, BackboneParams):
        report = validate_topology(backbone, params.degrees, params.distance_ranges)
        _report_rows(wb, report)

    # 2. clustering into metro regions
    cl = dict(config.clustering)
    cluster_params = ClusterParams(
        epsilon=float(cl.pop("epsilon", 0.3)),
        min_points=int(cl.pop("min_points", 1)),
        mode=str(cl.pop("mode", MODE_DISTANCE)),
        avoid_single=bool(cl.pop("avoid_single", False)),
    )
    if cl:
        raise InvalidParamsError(f"unknown clustering parameters: {sorted(cl)}")
    assignment = cluster_nodes(backbone, cluster_params)
    warnings.extend(assignment.warnings)
    wb.set_clusters(assignment)
    cluster_map = assignment.cluster_map()
    cluster_count = len([l for l in cluster_map if l != assignment.transit_label])

    world = {n.name: n.pos for n in backbone.nodes() if n.pos is not None}

    # 3. one metro structure per region
    metro = dict(config.metro)
    kind = str(metro.pop("kind", METRO_KIND_NRING))
    metro_params = metro.pop("params", metro)  # accept flat or nested params
    for label in sorted(cluster_map):
        if label == assignment.transit_label:
            continue
        members = sorted(cluster_map[label])
        if len(members) < 2:
            warnings.append(f"cluster {label} has a single node; no metro structure")
            continue
        if kind == METRO_KIND_NRING:
            spec = ring_spec_from_params(
                members[0],
                members[1],
                {"pref": f"C{label}R", **metro_params},
                rng,
            )
            structure = generate_nring(spec)
            pin_structure_positions(
                structure, spec.end1, spec.end2, world[spec.end1], world[spec.end2]
            )
            sid = f"ring-C{label}"
            meta = {"end1": spec.end1, "end2": spec.end2, "nrings": spec.nrings, "seed": spec.seed}
        elif kind == METRO_KIND_MESH:
            mesh_params = mesh_params_from_dict(
                {"seed": int(rng.integers(2**31)), **metro_params}, main_nodes=members
            )
            structure = generate_metro_mesh(mesh_params)
            sid = f"mesh-C{label}"
            meta = {"main_nodes": ",".join(members), "nodes": mesh_params.nodes, "seed": mesh_params.seed}
        else:
            raise InvalidParamsError(f"unknown metro kind {kind!r}")
        for node in structure.nodes():
            if node.name not in world and node.pos is not None:
                world[node.name] = node.pos
        wb.merge_topology(structure)
        wb.add_structure(sid, structure.segment, meta)
        structure_ids.append(sid)

    # 4. horseshoes on every directly linked non-amplifier metro pair
    agg = dict(config.aggregation) if config.aggregation is not None else None
    if agg is not None and agg.pop("enabled", True):
        type_of = {r["name"]: r["type"] for r in wb.nodes}
        candidates = [
            (r["source"], r["target"])
            for r in wb.links
            if r.get("segment") in (SEGMENT_METRO_RING, SEGMENT_METRO_MESH)
            and type_of[r["source"]] != NodeType.AMPLIFIER
            and type_of[r["target"]] != NodeType.AMPLIFIER
        ]
        for idx, (a, b) in enumerate(candidates, start=1):
            spec = horseshoe_spec_from_params(a, b, {"pref": f"H{idx}", **agg}, rng)
            horseshoe = generate_horseshoe(spec)
            pin_structure_positions(horseshoe, a, b, world[a], world[b])
            wb.merge_topology(horseshoe)
            sid = f"horseshoe-{idx}"
            wb.add_structure(sid, horseshoe.segment, {"end1": a, "end2": b, "hops": spec.hops, "seed": spec.seed})
            structure_ids.append(sid)

    wb.validate()
    return FlowResult(
        workbook=wb,
        backbone=backbone,
        report=report,
        cluster_count=cluster_count,
        structure_ids=structure_ids,
        warnings=warnings,
    )
