"""National backbone generation.

Three strategies are provided:

* ``default`` — a survivable mesh built from a random degree sequence via
  stub pairing, with retries until the graph is connected and loses no
  node to a single failure.
* ``twin`` — half-size mesh whose nodes are then duplicated into twin
  pairs, modelling dual-site offices.
* ``region`` — nodes scattered over a plane split into regions, linked by
  a survivable frame plus distance-dependent random links.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import GenerationError, InvalidParamsError
from .layout import LAYOUT_SPECTRAL, _layout_graph, scale_graph_lengths
from .model import (
    DEFAULT_COLORS,
    SEGMENT_BACKBONE,
    NodeType,
    Topology,
    TYPE_PREFIX,
)
from .validation import (
    DEFAULT_BACKBONE_DEGREES,
    DEFAULT_BACKBONE_RANGES,
    DegreeDistribution,
    DistanceRanges,
)

_SUM_TOL = 1e-9

STRATEGY_DEFAULT = "default"
STRATEGY_TWIN = "twin"
STRATEGY_REGION = "region"

#: Suffix appended to the duplicated node of a twin pair.
TWIN_SUFFIX = "_TW"


@dataclass(frozen=True)
class NodeTypeMix:
    """Fractions of node types, e.g. ``{"national": 0.95, "transit": 0.05}``."""

    fractions: Mapping[str, float]

    def __post_init__(self):
        items = list(self.fractions.items())
        if not items:
            raise InvalidParamsError("node type mix is empty")
        for t, f in items:
            if t not in NodeType.ALL:
                raise InvalidParamsError(f"unknown node type {t!r}")
            if f < 0:
                raise InvalidParamsError(f"fraction for {t!r} is negative")
        total = sum(f for _, f in items)
        if abs(total - 1.0) > _SUM_TOL:
            raise InvalidParamsError(f"type fractions sum to {total}, expected 1")
        object.__setattr__(self, "fractions", dict(items))

    @classmethod
    def parse(cls, text: str) -> "NodeTypeMix":
        fracs = {}
        try:
            for part in text.split(","):
                k, v = part.split(":")
                fracs[k.strip()] = float(v)
        except ValueError as exc:
            raise InvalidParamsError(f"bad type mix spec {text!r}") from exc
        return cls(fracs)


ALL_NATIONAL = NodeTypeMix({NodeType.NATIONAL: 1.0})


@dataclass(frozen=True)
class BackboneParams:
    nodes: int
    degrees: DegreeDistribution = DEFAULT_BACKBONE_DEGREES
    type_mix: NodeTypeMix = ALL_NATIONAL
    layout: str = LAYOUT_SPECTRAL
    distance_ranges: DistanceRanges = DEFAULT_BACKBONE_RANGES
    fit_distances: bool = False
    #: Per-axis offset range (layout units) between the members of a twin pair.
    twin_distance_range: tuple[float, float] = (0.05, 0.15)
    seed: int = 0
    max_retries: int = 1000

    def __post_init__(self):
        if self.nodes < 2:
            raise InvalidParamsError("backbone needs at least 2 nodes")
        if self.max_retries < 1:
            raise InvalidParamsError("max_retries must be >= 1")
        lo, hi = self.twin_distance_range
        if not (0 <= lo <= hi) or hi <= 0:
            raise InvalidParamsError("twin distance range must satisfy 0 <= lo <= hi, hi > 0")


@dataclass(frozen=True)
class WaxmanRegionParams:
    nodes: int
    regions: int = 9
    avg_degree: float = 3.2
    min_node_distance: float = 10.0
    alpha: float = 0.4
    beta: float = 0.1
    plane: tuple[float, float] = (1000.0, 1000.0)
    seed: int = 0
    max_retries: int = 1000

    def __post_init__(self):
        if self.nodes < 3:
            raise InvalidParamsError("region backbone needs at least 3 nodes")
        if self.regions < 1:
            raise InvalidParamsError("need at least one region")
        if self.avg_degree < 2:
            raise InvalidParamsError("average degree must be >= 2 for survivability")
        if self.min_node_distance <= 0:
            raise InvalidParamsError("min node distance must be positive")
        if not (0 < self.alpha and 0 < self.beta <= 1):
            raise InvalidParamsError("alpha must be > 0 and beta in (0, 1]")
        w, h = self.plane
        if w <= 0 or h <= 0:
            raise InvalidParamsError("plane dimensions must be positive")


# ---------------------------------------------------------------------------
# degree sequences and stub pairing
# ---------------------------------------------------------------------------


def sample_degree_sequence(dist: DegreeDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` degrees i.i.d. from ``dist``; fix parity if the sum is odd.

    When the sampled sum is odd no graph can realize it, so exactly one
    node holding the minimum sampled degree is incremented by one.
    """
    if n < 1:
        raise InvalidParamsError("need at least one node")
    degs = np.array(dist.degrees())
    probs = np.array([dist.probabilities[d] for d in degs], dtype=float)
    out = rng.choice(degs, size=n, p=probs).astype(int)
    if out.sum() % 2 == 1:
        out[int(np.argmin(out))] += 1
    return out


def _pair_and_simplify(degrees: Sequence[int], rng: np.random.Generator) -> set[tuple[int, int]]:
    """One stub-pairing pass; self-loops and parallel links are dropped."""
    stubs = np.repeat(np.arange(len(degrees)), degrees)
    rng.shuffle(stubs)
    edges: set[tuple[int, int]] = set()
    for a, b in zip(stubs[0::2], stubs[1::2]):
        if a == b:
            continue
        edges.add((int(min(a, b)), int(max(a, b))))
    return edges


def _is_survivable(g: nx.Graph) -> bool:
    return nx.is_connected(g) and next(nx.articulation_points(g), None) is None


def configuration_model(
    degrees: Sequence[int],
    rng: np.random.Generator,
    max_retries: int = 1000,
    survivable: bool = True,
) -> set[tuple[int, int]]:
    """Build a simple graph realizing ``degrees`` as closely as pairing allows.

    Stubs are paired at random; self-loops and parallel links are dropped.
    With ``survivable=True`` the result must be connected with no single
    point of failure, retrying up to ``max_retries`` times, and any
    remaining bridge is repaired by edge augmentation.
    """
    n = len(degrees)
    if n < 1:
        raise InvalidParamsError("degree sequence is empty")
    if sum(degrees) % 2 == 1:
        raise InvalidParamsError("degree sum must be even")
    attempts = 0
    while attempts < max_retries:
        attempts += 1
        edges = _pair_and_simplify(degrees, rng)
        if not survivable:
            return edges
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        if _is_survivable(g):
            if n >= 3 and nx.has_bridges(g):
                ensure_two_edge_connected(g)
            return {(min(a, b), max(a, b)) for a, b in g.edges()}
    raise GenerationError(
        f"no survivable pairing found in {max_retries} attempts", attempts=attempts
    )


# ---------------------------------------------------------------------------
# connectivity repair
# ---------------------------------------------------------------------------


def _closest_cross_pair(g: nx.Graph, comp_a, comp_b, positions=None):
    """Cheapest non-existing link between two node groups.

    With positions the Euclidean-shortest candidate wins, otherwise the
    lexicographically smallest pair; returns None when every cross pair
    already exists.
    """
    best, best_key = None, None
    for u in comp_a:
        for v in comp_b:
            if u == v or g.has_edge(u, v):
                continue
            if positions is not None:
                pa, pb = positions[u], positions[v]
                key = (math.hypot(pa[0] - pb[0], pa[1] - pb[1]), str(u), str(v))
            else:
                key = (0.0, str(u), str(v))
            if best_key is None or key < best_key:
                best, best_key = (u, v), key
    return best


def ensure_connected(g: nx.Graph, positions=None) -> int:
    """Join connected components until one remains; returns links added."""
    added = 0
    while True:
        comps = [sorted(c, key=str) for c in nx.connected_components(g)]
        if len(comps) <= 1:
            return added
        comps.sort(key=lambda c: str(c[0]))
        pair = _closest_cross_pair(g, comps[0], comps[1], positions)
        if pair is None:
            raise GenerationError("cannot connect components without parallel links")
        g.add_edge(*pair)
        added += 1


def ensure_two_edge_connected(g: nx.Graph, positions=None) -> int:
    """Add the minimum number of links so no single link cut disconnects ``g``.

    Leaf components of the bridge condensation tree are paired up; for a
    chosen component pair the candidate link is the closest cross pair
    when positions are known.
    """
    if g.number_of_nodes() < 3:
        return ensure_connected(g, positions)
    added = ensure_connected(g, positions)
    guard = 0
    while nx.has_bridges(g):
        guard += 1
        if guard > g.number_of_nodes() + 5:
            raise GenerationError("edge augmentation did not converge")
        bridges = list(nx.bridges(g))
        h = g.copy()
        h.remove_edges_from(bridges)
        comp_of = {}
        comps = []
        for c in nx.connected_components(h):
            idx = len(comps)
            comps.append(sorted(c, key=str))
            for u in c:
                comp_of[u] = idx
        tree = nx.Graph()
        tree.add_nodes_from(range(len(comps)))
        for u, v in bridges:
            tree.add_edge(comp_of[u], comp_of[v])
        order = list(nx.dfs_preorder_nodes(tree, source=0))
        leaves = [c for c in order if tree.degree(c) <= 1]
        half = (len(leaves) + 1) // 2
        pairs = [(leaves[i], leaves[i + half]) for i in range(len(leaves) - half)]
        if len(leaves) % 2 == 1:
            pairs.append((leaves[half - 1], leaves[-1]))
        progress = False
        for ca, cb in pairs:
            pair = _closest_cross_pair(g, comps[ca], comps[cb], positions)
            if pair is not None:
                g.add_edge(*pair)
                added += 1
                progress = True
        if not progress:
            raise GenerationError("no augmentation candidates left")
    return added


# ---------------------------------------------------------------------------
# type assignment and naming
# ---------------------------------------------------------------------------


def allocate_counts(fractions: Mapping[str, float], n: int) -> dict[str, int]:
    """Integer counts per key: floor of fraction*n, remainder by largest
    fractional part (ties resolve in key insertion order)."""
    keys = list(fractions)
    floors = {k: int(math.floor(fractions[k] * n)) for k in keys}
    rem = n - sum(floors.values())
    fracs = sorted(
        range(len(keys)),
        key=lambda i: (-(fractions[keys[i]] * n - floors[keys[i]]), i),
    )
    for i in fracs[:rem]:
        floors[keys[i]] += 1
    return floors


def _shuffled_labels(counts: Mapping[str, int], rng: np.random.Generator) -> list[str]:
    labels = []
    for t in NodeType.ALL:
        labels.extend([t] * counts.get(t, 0))
    rng.shuffle(labels)
    return labels


def _rename_by_type(g: nx.Graph, taken: set[str] | None = None, prefix: str = "") -> nx.Graph:
    """Relabel integer nodes to ``<prefix><TYPEPREFIX><seq>`` names."""
    taken = set(taken or ())
    counters: dict[str, int] = {}
    mapping = {}
    for node in g.nodes:
        t = g.nodes[node]["ntype"]
        while True:
            counters[t] = counters.get(t, 0) + 1
            name = f"{prefix}{TYPE_PREFIX[t]}{counters[t]}"
            if name not in taken:
                break
        taken.add(name)
        mapping[node] = name
    return nx.relabel_nodes(g, mapping)


def _apply_colors(g: nx.Graph, colors: Mapping[str, str] | None = None):
    table = dict(DEFAULT_COLORS)
    if colors:
        table.update(colors)
    for n in g.nodes:
        g.nodes[n]["color"] = table.get(g.nodes[n].get("ntype"), "")


def _generate_survivable_graph(
    dist: DegreeDistribution, n: int, rng: np.random.Generator, max_retries: int
) -> tuple[nx.Graph, int]:
    """Sample degrees and pair stubs until the graph survives single failures.

    Degrees are re-sampled on every retry.  Returns (graph, attempts).
    """
    if n == 1:
        g = nx.Graph()
        g.add_node(0)
        return g, 1
    attempts = 0
    while attempts < max_retries:
        attempts += 1
        degrees = sample_degree_sequence(dist, n, rng)
        edges = _pair_and_simplify(degrees, rng)
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        if n == 2:
            if g.number_of_edges() == 1:
                return g, attempts
            continue
        if _is_survivable(g):
            return g, attempts
    raise GenerationError(
        f"no survivable topology in {max_retries} attempts", attempts=attempts
    )


# ---------------------------------------------------------------------------
# strategies
# ---------------------------------------------------------------------------


def generate_mesh_backbone(params: BackboneParams) -> Topology:
    """Survivable national mesh from the target degree distribution."""
    if params.nodes < 3:
        raise InvalidParamsError("mesh backbone needs at least 3 nodes")
    rng = np.random.default_rng(params.seed)
    g, _ = _generate_survivable_graph(params.degrees, params.nodes, rng, params.max_retries)
    ensure_two_edge_connected(g)

    counts = allocate_counts(params.type_mix.fractions, params.nodes)
    labels = _shuffled_labels(counts, rng)
    for node, label in zip(g.nodes, labels):
        g.nodes[node]["ntype"] = label
    g = _rename_by_type(g)

    pos = _layout_graph(g, params.layout, seed=int(rng.integers(2**32)))
    for n, p in pos.items():
        g.nodes[n]["pos"] = p
    scale_graph_lengths(g, params.distance_ranges, fit=params.fit_distances)
    _apply_colors(g)
    return Topology._wrap(g, SEGMENT_BACKBONE)


def generate_twin_backbone(params: BackboneParams) -> Topology:
    """Backbone of dual-site twin pairs.

    A reduced mesh of half the nodes is generated with every degree
    transformed to ``2*d - 2``; each non-transit node is then split into a
    twin pair that shares the original links evenly plus one twin link, so
    each member ends up close to the originally sampled degree.  Transit
    nodes are not twinned and keep untransformed degrees.
    """
    n = params.nodes
    if n % 2 == 1:
        raise InvalidParamsError("twin backbone needs an even node count")
    if n < 6:
        raise InvalidParamsError("twin backbone needs at least 6 nodes")
    min_deg = min(params.degrees.support())
    if 2 * min_deg - 2 < 1:
        raise InvalidParamsError("transformed degree distribution reaches below 1")
    rng = np.random.default_rng(params.seed)

    # Decide how many transit nodes the final network carries; the reduced
    # mesh then needs (n + transit) / 2 nodes so twinning lands exactly on n.
    counts_final = allocate_counts(params.type_mix.fractions, n)
    transit = counts_final.get(NodeType.TRANSIT, 0)
    if (n + transit) % 2 == 1:
        transit -= 1
    m = (n + transit) // 2
    non_transit = m - transit
    if non_transit < 1:
        raise InvalidParamsError("type mix leaves no nodes to twin")
    nt_fracs = {
        t: f for t, f in params.type_mix.fractions.items() if t != NodeType.TRANSIT and f > 0
    }
    if not nt_fracs:
        raise InvalidParamsError("twin strategy needs non-transit node types")
    total = sum(nt_fracs.values())
    nt_counts = allocate_counts({t: f / total for t, f in nt_fracs.items()}, non_transit)
    nt_counts[NodeType.TRANSIT] = transit
    labels = _shuffled_labels(nt_counts, rng)

    attempts = 0
    while attempts < params.max_retries:
        attempts += 1
        raw = sample_degree_sequence(params.degrees, m, rng)
        degrees = np.where(
            np.array([t == NodeType.TRANSIT for t in labels]), raw, 2 * raw - 2
        )
        if degrees.sum() % 2 == 1:
            degrees[int(np.argmin(degrees))] += 1
        edges = _pair_and_simplify(degrees, rng)
        g = nx.Graph()
        g.add_nodes_from(range(m))
        g.add_edges_from(edges)
        if _is_survivable(g):
            break
    else:
        raise GenerationError(
            f"no survivable reduced mesh in {params.max_retries} attempts", attempts=attempts
        )

    for node, label in zip(g.nodes, labels):
        g.nodes[node]["ntype"] = label
    g = _rename_by_type(g)
    pos = _layout_graph(g, params.layout, seed=int(rng.integers(2**32)))
    for name, p in pos.items():
        g.nodes[name]["pos"] = p

    lo, hi = params.twin_distance_range
    for name in list(g.nodes):
        if g.nodes[name]["ntype"] == NodeType.TRANSIT:
            continue
        twin = name + TWIN_SUFFIX
        x, y = g.nodes[name]["pos"]
        dx = rng.uniform(lo, hi) * (1 if rng.random() < 0.5 else -1)
        dy = rng.uniform(lo, hi) * (1 if rng.random() < 0.5 else -1)
        g.add_node(twin, ntype=g.nodes[name]["ntype"], pos=(x + dx, y + dy))
        neighbors = [v for v in g.neighbors(name) if v != twin]
        order = rng.permutation(len(neighbors))
        moved = len(neighbors) // 2  # odd split leaves the extra with the original
        for j in order[:moved]:
            v = neighbors[int(j)]
            g.remove_edge(name, v)
            g.add_edge(twin, v)
        g.add_edge(name, twin)

    scale_graph_lengths(g, params.distance_ranges, fit=params.fit_distances)
    _apply_colors(g)
    return Topology._wrap(g, SEGMENT_BACKBONE)


def generate_region_backbone(params: WaxmanRegionParams) -> Topology:
    """Plane-of-regions backbone with distance-dependent random links.

    Nodes are placed uniformly per region, rejecting draws closer than
    ``min_node_distance`` to any other node.  A survivable frame (a chain
    per region, a ring over regions, plus augmentation) guarantees
    2-edge-connectivity; links are then added with probability
    ``beta * exp(-d / (alpha * L))`` until the average degree target is
    met, where ``L`` is the plane diagonal.
    """
    rng = np.random.default_rng(params.seed)
    n, r = params.nodes, params.regions
    w, h = params.plane
    cols = int(math.ceil(math.sqrt(r)))
    rows = int(math.ceil(r / cols))
    cell_w, cell_h = w / cols, h / rows
    cell_diag = math.hypot(cell_w, cell_h)

    sizes = [n // r + (1 if i < n % r else 0) for i in range(r)]
    if params.min_node_distance > cell_diag and any(s >= 2 for s in sizes):
        raise InvalidParamsError(
            "min node distance exceeds the region diagonal; placement is infeasible"
        )

    g = nx.Graph()
    placed: list[tuple[float, float]] = []
    region_nodes: list[list[int]] = []
    idx = 0
    for i in range(r):
        cx, cy = (i % cols) * cell_w, (i // cols) * cell_h
        members = []
        for _ in range(sizes[i]):
            for _attempt in range(500):
                p = (cx + rng.uniform(0, cell_w), cy + rng.uniform(0, cell_h))
                if all(
                    math.hypot(p[0] - q[0], p[1] - q[1]) >= params.min_node_distance
                    for q in placed
                ):
                    break
            else:
                raise InvalidParamsError(
                    "could not place nodes at the requested minimum distance"
                )
            g.add_node(idx, pos=p, ntype=NodeType.NATIONAL)
            placed.append(p)
            members.append(idx)
            idx += 1
        region_nodes.append(members)

    positions = {u: g.nodes[u]["pos"] for u in g.nodes}

    # Survivable frame: a chain inside each region, a ring over regions.
    for members in region_nodes:
        chain = sorted(members, key=lambda u: positions[u])
        for a, b in zip(chain, chain[1:]):
            g.add_edge(a, b)
    occupied = [m for m in region_nodes if m]
    if len(occupied) >= 2:
        ring = occupied + [occupied[0]] if len(occupied) >= 3 else [occupied[0], occupied[1]]
        for ra, rb in zip(ring, ring[1:]):
            pair = _closest_cross_pair(g, ra, rb, positions)
            if pair is not None:
                g.add_edge(*pair)
    ensure_two_edge_connected(g, positions)

    diag = math.hypot(w, h)
    target_links = int(math.ceil(params.avg_degree * n / 2))
    guard = 0
    while g.number_of_edges() < target_links:
        guard += 1
        if guard > 200:
            raise GenerationError("could not reach the target average degree")
        candidates = [
            (u, v) for u in g.nodes for v in g.nodes if u < v and not g.has_edge(u, v)
        ]
        if not candidates:
            break
        before = g.number_of_edges()
        for j in rng.permutation(len(candidates)):
            u, v = candidates[int(j)]
            if g.has_edge(u, v):
                continue
            d = math.hypot(
                positions[u][0] - positions[v][0], positions[u][1] - positions[v][1]
            )
            if rng.random() < params.beta * math.exp(-d / (params.alpha * diag)):
                g.add_edge(u, v)
                if g.number_of_edges() >= target_links:
                    break
        if g.number_of_edges() == before:
            # Probabilities too small for progress; take one weighted draw.
            weights = np.array(
                [
                    params.beta
                    * math.exp(
                        -math.hypot(
                            positions[u][0] - positions[v][0],
                            positions[u][1] - positions[v][1],
                        )
                        / (params.alpha * diag)
                    )
                    for u, v in candidates
                ]
            )
            pick = candidates[int(rng.choice(len(candidates), p=weights / weights.sum()))]
            g.add_edge(*pick)

    for a, b in g.edges():
        pa, pb = positions[a], positions[b]
        g.edges[a, b]["length_km"] = math.hypot(pa[0] - pb[0], pa[1] - pb[1])
    g = _rename_by_type(g)
    _apply_colors(g)
    return Topology._wrap(g, SEGMENT_BACKBONE)


def generate_backbone(strategy: str, params) -> Topology:
    """Dispatch to a strategy by name."""
    if strategy == STRATEGY_DEFAULT:
        return generate_mesh_backbone(params)
    if strategy == STRATEGY_TWIN:
        return generate_twin_backbone(params)
    if strategy == STRATEGY_REGION:
        return generate_region_backbone(params)
    raise InvalidParamsError(f"unknown backbone strategy {strategy!r}")
