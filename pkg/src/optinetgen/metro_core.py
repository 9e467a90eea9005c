"""Metro core generation: interconnected meshes and N-ring structures.

A metro mesh covers a metro region with one survivable subnet per main
(national) office, the subnets chained by pairs of links.  An N-ring
structure hangs 1 to 6 rings between two hub offices, with per-segment
lengths drawn from configured ranges and amplifiers inserted on segments
longer than the unamplified reach.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import GenerationError, InvalidParamsError
from .backbone import (
    NodeTypeMix,
    _apply_colors,
    _closest_cross_pair,
    _generate_survivable_graph,
    _rename_by_type,
    allocate_counts,
    ensure_two_edge_connected,
)
from .layout import LAYOUT_SPRING, _layout_graph, scale_graph_lengths
from .model import (
    SEGMENT_METRO_MESH,
    SEGMENT_METRO_RING,
    NodeType,
    Topology,
    TYPE_PREFIX,
)
from .validation import (
    DEFAULT_BACKBONE_DEGREES,
    DEFAULT_METRO_RANGES,
    DegreeDistribution,
    DistanceRanges,
)

_SUM_TOL = 1e-9

#: Default composition of a metro core region.
DEFAULT_METRO_TYPES = NodeTypeMix(
    {
        NodeType.DATA_CENTER: 0.01,
        NodeType.NATIONAL: 0.05,
        NodeType.REGIONAL: 0.70,
        NodeType.REGIONAL_NO_HUB: 0.24,
    }
)

#: How often structures with a given number of rings occur in practice.
DEFAULT_RING_OCCURRENCE = {1: 0.08, 2: 0.53, 3: 0.25, 4: 0.10, 6: 0.04}

ALLOWED_RING_COUNTS = (1, 2, 3, 4, 6)

_RING_SUFFIX = "ABCDEF"


# ---------------------------------------------------------------------------
# metro mesh
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MetroMeshParams:
    nodes: int
    degrees: DegreeDistribution = DEFAULT_BACKBONE_DEGREES
    type_mix: NodeTypeMix = DEFAULT_METRO_TYPES
    main_nodes: tuple[str, ...] | None = None
    layout: str = LAYOUT_SPRING
    distance_ranges: DistanceRanges = DEFAULT_METRO_RANGES
    fit_distances: bool = False
    name_prefix: str = ""
    seed: int = 0
    max_retries: int = 1000

    def __post_init__(self):
        if self.nodes < 2:
            raise InvalidParamsError("metro mesh needs at least 2 nodes")
        if self.main_nodes is not None:
            names = tuple(self.main_nodes)
            if not names:
                raise InvalidParamsError("main node list is empty")
            if len(set(names)) != len(names):
                raise InvalidParamsError("main node names must be unique")
            if len(names) > self.nodes:
                raise InvalidParamsError("more main nodes than total nodes")
            object.__setattr__(self, "main_nodes", names)


def generate_metro_mesh(params: MetroMeshParams) -> Topology:
    """Mesh of one survivable subnet per main office, chained by link pairs.

    The node budget minus the main offices is split evenly across the
    subnets; each subnet realizes the degree distribution independently.
    Consecutive subnets are joined by two links whose endpoints are drawn
    from the lowest-degree nodes on each side.
    """
    rng = np.random.default_rng(params.seed)
    if params.main_nodes is not None:
        main_names = list(params.main_nodes)
    else:
        counts = allocate_counts(params.type_mix.fractions, params.nodes)
        k = max(1, counts.get(NodeType.NATIONAL, 0))
        main_names = [f"{params.name_prefix}NCO{i + 1}" for i in range(k)]
    k = len(main_names)
    budget = params.nodes - k
    if budget < 0:
        raise InvalidParamsError("more main nodes than total nodes")
    extra = [budget // k + (1 if i < budget % k else 0) for i in range(k)]

    # Non-main nodes take the non-national part of the mix, each type
    # spread as evenly as possible over the subnets.
    other = {
        t: f
        for t, f in params.type_mix.fractions.items()
        if t != NodeType.NATIONAL and f > 0
    }
    total = sum(other.values())
    if budget > 0 and total <= 0:
        raise InvalidParamsError("type mix has no non-national types for subnet nodes")
    type_counts = allocate_counts({t: f / total for t, f in other.items()}, budget) if budget else {}
    pool: list[str] = []
    for t in NodeType.ALL:
        pool.extend([t] * type_counts.get(t, 0))
    subnet_labels: list[list[str]] = [list(pool[i::k]) for i in range(k)]

    g = nx.Graph()
    subnet_nodes: list[list[str]] = []
    taken = set(main_names)
    counters: dict[str, int] = {}
    for i in range(k):
        size = 1 + extra[i]
        sub, _ = _generate_survivable_graph(params.degrees, size, rng, params.max_retries)
        labels = list(subnet_labels[i])
        rng.shuffle(labels)
        mapping = {}
        types = {}
        for node in sub.nodes:
            if node == 0:
                mapping[node] = main_names[i]
                types[main_names[i]] = NodeType.NATIONAL
                continue
            t = labels[node - 1]
            while True:
                counters[t] = counters.get(t, 0) + 1
                name = f"{params.name_prefix}{TYPE_PREFIX[t]}{counters[t]}"
                if name not in taken:
                    break
            taken.add(name)
            mapping[node] = name
            types[name] = t
        sub = nx.relabel_nodes(sub, mapping)
        for name, t in types.items():
            sub.nodes[name]["ntype"] = t
        g.update(sub)
        subnet_nodes.append([mapping[j] for j in range(size)])

    for i in range(1, k):
        a1, a2 = _two_lowest_degree(g, subnet_nodes[i - 1], rng)
        b1, b2 = _two_lowest_degree(g, subnet_nodes[i], rng)
        g.add_edge(a1, b1)
        g.add_edge(a2, b2)

    pos = _layout_graph(g, params.layout, seed=int(rng.integers(2**32)))
    for n, p in pos.items():
        g.nodes[n]["pos"] = p
    ensure_two_edge_connected(g, pos)
    scale_graph_lengths(g, params.distance_ranges, fit=params.fit_distances)
    _apply_colors(g)
    return Topology._wrap(g, SEGMENT_METRO_MESH)


def _two_lowest_degree(g: nx.Graph, nodes: Sequence[str], rng: np.random.Generator):
    """Two distinct nodes of minimal degree (random tie-break); a single
    node subnet returns the same node twice."""
    order = sorted(nodes, key=lambda u: (g.degree(u), rng.random()))
    if len(order) == 1:
        return order[0], order[0]
    return order[0], order[1]


# ---------------------------------------------------------------------------
# N-ring structures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RingConfig:
    """Configuration of a single ring within a structure."""

    total_length_km: float
    offices: int
    segment_ranges: Sequence[tuple[float, float]]
    max_unamplified_km: float

    def __post_init__(self):
        if self.total_length_km <= 0:
            raise InvalidParamsError("ring length must be positive")
        if self.offices < 1:
            raise InvalidParamsError("a ring needs at least one office")
        if self.max_unamplified_km <= 0:
            raise InvalidParamsError("max unamplified distance must be positive")
        ranges = [(float(a), float(b)) for a, b in self.segment_ranges]
        if len(ranges) != self.offices:
            raise InvalidParamsError("need one segment range per office")
        for lo, hi in ranges:
            if not (0 < lo <= hi):
                raise InvalidParamsError(f"bad segment range ({lo}, {hi})")
        object.__setattr__(self, "segment_ranges", tuple(ranges))


@dataclass(frozen=True)
class RingStructureSpec:
    end1: str
    end2: str
    nrings: int
    rings: Sequence[RingConfig]
    pref: str = ""
    init_idx: int = 1
    var: float = 0.1
    occurrence: Mapping[int, float] = field(default_factory=lambda: dict(DEFAULT_RING_OCCURRENCE))
    seed: int = 0

    def __post_init__(self):
        if self.end1 == self.end2:
            raise InvalidParamsError("ring ends must differ")
        if self.nrings not in ALLOWED_RING_COUNTS:
            raise InvalidParamsError(
                f"nrings must be one of {ALLOWED_RING_COUNTS}, got {self.nrings}"
            )
        if len(self.rings) != self.nrings:
            raise InvalidParamsError("need one ring config per ring")
        if not (0 <= self.var < 1):
            raise InvalidParamsError("var must be in [0, 1)")
        object.__setattr__(self, "rings", tuple(self.rings))
        _validate_occurrence(self.occurrence)


def _validate_occurrence(occurrence: Mapping[int, float]):
    if not occurrence:
        raise InvalidParamsError("occurrence table is empty")
    for k, p in occurrence.items():
        if k not in ALLOWED_RING_COUNTS:
            raise InvalidParamsError(f"unsupported ring count {k}")
        if p < 0:
            raise InvalidParamsError("occurrence probabilities must be non-negative")
    total = sum(occurrence.values())
    if abs(total - 1.0) > _SUM_TOL:
        raise InvalidParamsError(f"occurrence probabilities sum to {total}, expected 1")


def sample_nring_count(occurrence: Mapping[int, float], rng: np.random.Generator) -> int:
    """Draw how many rings a structure should have."""
    _validate_occurrence(occurrence)
    keys = sorted(occurrence)
    probs = np.array([occurrence[k] for k in keys], dtype=float)
    return int(rng.choice(keys, p=probs))


def _draw_segments(cfg: RingConfig, var: float, rng: np.random.Generator) -> list[float]:
    """Segment lengths for one ring, conserving the drawn total exactly.

    The first ``offices`` segments come from their ranges; the closing
    segment takes the remainder.  A non-positive remainder shrinks the
    drawn segments proportionally toward their range minima to make room.
    """
    actual = rng.uniform(cfg.total_length_km * (1 - var), cfg.total_length_km * (1 + var))
    draws = [rng.uniform(lo, hi) for lo, hi in cfg.segment_ranges]
    last = actual - sum(draws)
    if last <= 0:
        mins = [lo for lo, _ in cfg.segment_ranges]
        if sum(mins) >= actual:
            raise InvalidParamsError(
                "segment ranges incompatible with the ring length: "
                "no room left for a positive closing segment"
            )
        target_last = min(actual / (cfg.offices + 1), (actual - sum(mins)) / 2)
        shrink = (actual - target_last - sum(mins)) / (sum(draws) - sum(mins))
        draws = [lo + (d - lo) * shrink for lo, d in zip(mins, draws)]
        last = actual - sum(draws)
    segments = draws + [last]
    return [segments[int(j)] for j in rng.permutation(len(segments))]


def generate_nring(spec: RingStructureSpec, rng: np.random.Generator | None = None) -> Topology:
    """Build an N-ring structure between two hub offices.

    Every ring is a chain end1 - offices - end2; segments longer than the
    unamplified reach are cut into equal parts by amplifier nodes.  Each
    non-hub node records the hub reachable by the shorter path as its
    reference node.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    g = nx.Graph()
    g.add_node(spec.end1, ntype=NodeType.NATIONAL)
    g.add_node(spec.end2, ntype=NodeType.NATIONAL)

    for ring_i, cfg in enumerate(spec.rings):
        suffix = _RING_SUFFIX[ring_i]
        segments = _draw_segments(cfg, spec.var, rng)
        offices = [
            f"{spec.pref}{spec.nrings}{spec.init_idx + j}{suffix}" for j in range(cfg.offices)
        ]
        for name in offices:
            if g.has_node(name):
                raise InvalidParamsError(f"generated office name {name!r} collides")
            g.add_node(name, ntype=NodeType.REGIONAL)
        path = [spec.end1] + offices + [spec.end2]
        amp_idx = 0
        for (a, b), length in zip(zip(path, path[1:]), segments):
            parts = max(1, math.ceil(length / cfg.max_unamplified_km))
            if parts == 1:
                g.add_edge(a, b, length_km=length)
                continue
            piece = length / parts
            prev = a
            for p in range(parts - 1):
                amp_idx += 1
                amp = f"{spec.pref}AMP{spec.nrings}{amp_idx}{suffix}"
                g.add_node(amp, ntype=NodeType.AMPLIFIER)
                g.add_edge(prev, amp, length_km=piece)
                prev = amp
            g.add_edge(prev, b, length_km=piece)

    pos = _layout_graph(g, LAYOUT_SPRING, seed=int(rng.integers(2**32)))
    for n, p in pos.items():
        g.nodes[n]["pos"] = p
    _assign_reference_nodes(g, spec.end1, spec.end2)
    _apply_colors(g)
    return Topology._wrap(g, SEGMENT_METRO_RING)


def _assign_reference_nodes(g: nx.Graph, end1: str, end2: str):
    """Mark the nearer hub for every non-hub node.

    Implemented with a dummy node tied to both hubs by zero-length links:
    one shortest-path pass from the dummy yields, for every node, the
    distance to its closer hub and which hub that is.  Ties go to end1.
    """
    dummy = "__ref_probe__"
    g.add_node(dummy)
    g.add_edge(dummy, end1, length_km=0.0)
    g.add_edge(dummy, end2, length_km=0.0)
    try:
        dist, paths = nx.single_source_dijkstra(g, dummy, weight="length_km")
    finally:
        g.remove_node(dummy)
    d1 = nx.single_source_dijkstra_path_length(g, end1, weight="length_km")
    for n in g.nodes:
        if n in (end1, end2):
            continue
        path = paths.get(n)
        if path is None:
            continue
        side = path[1]  # hub right after the dummy on the shortest path
        if side == end2 and d1.get(n, math.inf) <= dist[n] + 1e-12:
            side = end1  # equidistant: prefer end1
        g.nodes[n]["reference_node"] = side
    g.nodes[end1].pop("reference_node", None)
    g.nodes[end2].pop("reference_node", None)


# ---------------------------------------------------------------------------
# ring defaults
# ---------------------------------------------------------------------------


def load_ring_defaults(path=None) -> dict:
    """Ring configuration presets keyed by ring count (as strings).

    Without a path the packaged illustrative defaults are returned.
    """
    if path is None:
        text = resources.files("optinetgen.data").joinpath("ring_defaults.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def ring_configs_from_defaults(nrings: int, defaults: dict | None = None) -> list[RingConfig]:
    """Materialize :class:`RingConfig` objects for a structure size."""
    data = defaults if defaults is not None else load_ring_defaults()
    key = str(nrings)
    if key not in data:
        raise InvalidParamsError(f"no ring defaults for nrings={nrings}")
    out = []
    for entry in data[key]:
        out.append(
            RingConfig(
                total_length_km=entry["total_length_km"],
                offices=entry["offices"],
                segment_ranges=[tuple(r) for r in entry["segment_ranges"]],
                max_unamplified_km=entry["max_unamplified_km"],
            )
        )
    return out
