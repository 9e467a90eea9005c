"""Planar layouts and distance scaling.

Layouts place nodes in an abstract unit-scale plane; scaling then turns
layout-space link lengths into kilometres so that the resulting length
histogram can match a target distribution of link-length ranges.
"""

from __future__ import annotations

import math

import networkx as nx
import numpy as np

from .errors import InvalidParamsError
from .model import Topology

LAYOUT_SPRING = "spring"
LAYOUT_KAMADA_KAWAI = "kamada-kawai"
LAYOUT_SPECTRAL = "spectral"

_STRATEGIES = (LAYOUT_SPRING, LAYOUT_KAMADA_KAWAI, LAYOUT_SPECTRAL)

#: Number of candidate scale factors tried when fitting to length ranges.
FIT_GRID_SIZE = 64
#: Fit candidates span base_factor * [0.25, 4].
FIT_GRID_SPAN = (0.25, 4.0)


def _separate_coincident(pos: dict) -> dict:
    """Spread apart nodes that landed on (numerically) the same point.

    Eigenvector layouts collapse structurally interchangeable nodes (same
    neighbour sets) onto identical coordinates, which would give their links
    zero length.  Points closer than a relative tolerance are clustered with
    union-find — exact duplicates and round-off twins alike — and each
    multi-node cluster is fanned out on a small circle around its first
    member.  The radius is a tenth of the smallest spacing between distinct
    clusters, so no new collisions can appear and the overall shape of the
    layout is preserved.
    """
    names = list(pos)
    if len(names) < 2:
        return pos
    xs = [pos[n][0] for n in names]
    ys = [pos[n][1] for n in names]
    extent = max(max(xs) - min(xs), max(ys) - min(ys)) or 1.0
    tol = 1e-9 * extent
    parent = list(range(len(names)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            if math.hypot(xs[i] - xs[j], ys[i] - ys[j]) < tol:
                parent[find(i)] = find(j)
    clusters: dict[int, list[int]] = {}
    for i in range(len(names)):
        clusters.setdefault(find(i), []).append(i)
    crowded = [ix for ix in clusters.values() if len(ix) > 1]
    if not crowded:
        return pos
    reps = [ix[0] for ix in clusters.values()]
    spacings = [
        math.hypot(xs[a] - xs[b], ys[a] - ys[b])
        for k, a in enumerate(reps)
        for b in reps[k + 1 :]
    ]
    radius = 0.1 * min(spacings) if spacings else 0.5
    out = dict(pos)
    for ix in crowded:
        cx, cy = xs[ix[0]], ys[ix[0]]
        for k, i in enumerate(ix):
            angle = 2.0 * math.pi * k / len(ix)
            out[names[i]] = (cx + radius * math.cos(angle), cy + radius * math.sin(angle))
    return out


def _layout_graph(g: nx.Graph, strategy: str, seed: int) -> dict:
    name = strategy.replace("_", "-").lower()
    if name == LAYOUT_SPRING:
        # 200 iterations with the default optimal distance 1/sqrt(n);
        # initial positions are drawn uniformly from the seed.
        pos = nx.spring_layout(g, iterations=200, seed=int(seed) % (2**32))
    elif name == LAYOUT_KAMADA_KAWAI:
        pos = nx.kamada_kawai_layout(g)
    elif name == LAYOUT_SPECTRAL:
        # Eigenvector-based and independent of the seed by construction.
        # Below 3 nodes the Laplacian has too few informative eigenvectors
        # (networkx returns coincident points), so place on a line instead.
        if g.number_of_nodes() < 3:
            pos = {n: (float(i), 0.0) for i, n in enumerate(g.nodes)}
        else:
            pos = nx.spectral_layout(g)
    else:
        raise InvalidParamsError(f"unknown layout strategy {strategy!r}")
    return _separate_coincident({n: (float(p[0]), float(p[1])) for n, p in pos.items()})


def compute_layout(topo: Topology, strategy: str, seed: int = 0) -> dict[str, tuple[float, float]]:
    """Compute 2-D positions for every node of a connected topology."""
    g = topo._g
    if g.number_of_nodes() == 0:
        raise InvalidParamsError("cannot lay out an empty topology")
    if g.number_of_nodes() > 1 and not nx.is_connected(g):
        raise InvalidParamsError("layout requires a connected topology")
    return _layout_graph(g, strategy, seed)


def _euclid(pa, pb) -> float:
    return math.hypot(pa[0] - pb[0], pa[1] - pb[1])


def _layout_lengths(g: nx.Graph) -> list[float]:
    out = []
    for a, b in g.edges():
        pa, pb = g.nodes[a].get("pos"), g.nodes[b].get("pos")
        if pa is None or pb is None:
            raise InvalidParamsError(f"node {a!r} or {b!r} has no position")
        d = _euclid(pa, pb)
        if d <= 0.0:
            raise InvalidParamsError(f"zero-length link {a!r}-{b!r} in layout")
        out.append(d)
    return out


def _fit_factor(lengths, ranges, base: float) -> float:
    # Grid search on a geometric ladder around the base factor, keeping
    # the factor whose scaled lengths match the target range histogram
    # best (lowest MAPE); ties resolve to the smaller factor.
    from .validation import mape, range_histogram

    factors = base * np.geomspace(FIT_GRID_SPAN[0], FIT_GRID_SPAN[1], FIT_GRID_SIZE)
    target = ranges.target_histogram()
    arr = np.asarray(lengths)
    best_f, best_score = None, None
    for f in factors:
        achieved, _ = range_histogram(arr * f, ranges)
        score = mape(target, achieved)
        if best_score is None or score < best_score - 1e-15:
            best_f, best_score = float(f), score
    return best_f


def scale_graph_lengths(g: nx.Graph, ranges, fit: bool = False) -> float:
    """Assign ``length_km`` to every edge of ``g`` in place; returns the factor.

    Without fitting, the factor maps the longest layout link onto the upper
    bound of the last range, so no link exceeds it.  With ``fit=True`` the
    factor is searched so the binned length histogram best matches
    ``ranges`` targets.
    """
    if g.number_of_edges() == 0:
        return 1.0
    lengths = _layout_lengths(g)
    base = ranges.max_km() / max(lengths)
    if fit:
        if ranges.targets is None:
            raise InvalidParamsError("fitting needs target proportions on the ranges")
        factor = _fit_factor(lengths, ranges, base)
    else:
        factor = base
    for (a, b), d in zip(g.edges(), lengths):
        g.edges[a, b]["length_km"] = d * factor
    return factor


def scale_to_ranges(topo: Topology, ranges, fit: bool = False) -> Topology:
    """Return a copy of ``topo`` with link lengths scaled into ``ranges``."""
    out = topo._copy()
    scale_graph_lengths(out._g, ranges, fit=fit)
    return out
