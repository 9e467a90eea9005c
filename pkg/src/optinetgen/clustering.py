"""Metro region clustering.

Groups backbone nodes into metro regions by position density (DBSCAN on
node coordinates).  Transit-only nodes never join a region; they are
collected under a dedicated virtual label.  Two post-processing options
mirror operator practice: splitting clusters that are not link-connected,
and merging leftover single-node clusters into their nearest region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np
from scipy.spatial import cKDTree
from sklearn.cluster import DBSCAN

from .errors import InvalidParamsError
from .model import NodeType, Topology

MODE_DISTANCE = "distance"
MODE_DISTANCE_CONNECTIVITY = "distance-connectivity"


@dataclass(frozen=True)
class ClusterParams:
    epsilon: float
    min_points: int = 1
    mode: str = MODE_DISTANCE
    avoid_single: bool = False

    def __post_init__(self):
        if self.epsilon <= 0:
            raise InvalidParamsError("epsilon must be positive")
        if self.min_points < 1:
            raise InvalidParamsError("min_points must be >= 1")
        if self.mode not in (MODE_DISTANCE, MODE_DISTANCE_CONNECTIVITY):
            raise InvalidParamsError(f"unknown clustering mode {self.mode!r}")


@dataclass
class ClusterAssignment:
    """Node name to cluster label, plus the virtual transit label."""

    labels: dict[str, int]
    transit_label: int
    warnings: list[str] = field(default_factory=list)

    def members(self, label: int) -> list[str]:
        return sorted(n for n, l in self.labels.items() if l == label)

    def cluster_map(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for name in sorted(self.labels):
            out.setdefault(self.labels[name], []).append(name)
        return out


def cluster_nodes(topo: Topology, params: ClusterParams) -> ClusterAssignment:
    """Assign every node of ``topo`` to a metro region label.

    In ``distance-connectivity`` mode each density cluster is split into
    the connected components of its induced link subgraph, and singleton
    merging only considers link neighbors, so every final cluster stays
    connected.
    """
    g = topo._g
    names = sorted(g.nodes)
    transit = [n for n in names if g.nodes[n].get("ntype") == NodeType.TRANSIT]
    others = [n for n in names if g.nodes[n].get("ntype") != NodeType.TRANSIT]
    warnings: list[str] = []

    labels: dict[str, int] = {}
    next_label = 0
    if others:
        for n in others:
            if g.nodes[n].get("pos") is None:
                raise InvalidParamsError(f"node {n!r} has no position")
        coords = np.array([g.nodes[n]["pos"] for n in others], dtype=float)
        raw = DBSCAN(eps=params.epsilon, min_samples=params.min_points).fit(coords).labels_
        # Noise points (only possible when min_points > 1) become their own
        # single-node clusters so the avoid_single pass can pick them up.
        noise_base = int(raw.max()) + 1 if raw.size else 0
        groups: dict[int, list[str]] = {}
        for name, lab in zip(others, raw):
            lab = int(lab)
            if lab == -1:
                lab = noise_base
                noise_base += 1
            groups.setdefault(lab, []).append(name)

        if params.mode == MODE_DISTANCE_CONNECTIVITY:
            split: list[list[str]] = []
            for lab in sorted(groups, key=lambda l: groups[l][0]):
                sub = g.subgraph(groups[lab])
                comps = [sorted(c) for c in nx.connected_components(sub)]
                comps.sort(key=lambda c: c[0])
                split.extend(comps)
            groups = dict(enumerate(split))

        # Renumber consecutively, ordered by each group's first member name.
        for lab in sorted(groups, key=lambda l: sorted(groups[l])[0]):
            for name in groups[lab]:
                labels[name] = next_label
            next_label += 1

        if params.avoid_single:
            _merge_singletons(g, others, labels, params.mode, warnings)
            next_label = max(labels.values()) + 1 if labels else 0

    transit_label = next_label
    for n in transit:
        labels[n] = transit_label
    return ClusterAssignment(labels=labels, transit_label=transit_label, warnings=warnings)


def _merge_singletons(g, others, labels: dict[str, int], mode: str, warnings: list[str]):
    """Fold single-node clusters into their nearest region, in name order."""
    if len(others) < 2:
        return
    pos = {n: g.nodes[n]["pos"] for n in others}
    tree = cKDTree(np.array([pos[n] for n in others]))

    def cluster_size(lab: int) -> int:
        return sum(1 for v in labels.values() if v == lab)

    for i, name in enumerate(sorted(others)):
        lab = labels[name]
        if cluster_size(lab) != 1:
            continue
        if mode == MODE_DISTANCE_CONNECTIVITY:
            candidates = [v for v in g.neighbors(name) if v in labels and labels[v] != lab]
            if not candidates:
                warnings.append(f"node {name!r} has no linked neighbor; left as a singleton")
                continue
            target = min(
                candidates,
                key=lambda v: (
                    math.hypot(pos[name][0] - pos[v][0], pos[name][1] - pos[v][1]),
                    v,
                ),
            )
        else:
            # Nearest other node by position; k=3 guards against duplicate
            # coordinates returning the query node itself first.
            _, idx = tree.query(pos[name], k=min(3, len(others)))
            target = next(others[int(j)] for j in np.atleast_1d(idx) if others[int(j)] != name)
        labels[name] = labels[target]

    # Renumber consecutively, ordered by each cluster's first member name.
    clusters: dict[int, list[str]] = {}
    for name in sorted(others):
        clusters.setdefault(labels[name], []).append(name)
    remap = {
        lab: i
        for i, lab in enumerate(sorted(clusters, key=lambda l: clusters[l][0]))
    }
    for name in others:
        labels[name] = remap[labels[name]]


def apply_clusters(topo: Topology, assignment: ClusterAssignment) -> Topology:
    """Return a copy of ``topo`` with each node's cluster label set."""
    out = topo._copy()
    for name, lab in assignment.labels.items():
        if out._g.has_node(name):
            out._g.nodes[name]["cluster"] = int(lab)
    return out
