"""Core topology data model.

A :class:`Topology` is an undirected simple graph of named nodes with
positions, types and link lengths in kilometres.  Topologies are treated as
values: the public edit operations (:func:`add_link`, :func:`drop_link`)
return new instances and never mutate their input.  Generators inside the
package assemble a plain :class:`networkx.Graph` and wrap it once finished.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import networkx as nx

from .errors import (
    DuplicateLinkError,
    EmptyTopologyError,
    InvalidLengthError,
    SelfLoopError,
    UnknownLinkError,
    UnknownNodeError,
)


class NodeType:
    """String constants for the supported node roles."""

    NATIONAL = "national"
    REGIONAL = "regional"
    REGIONAL_NO_HUB = "regional_no_hub"
    LOCAL = "local"
    DATA_CENTER = "data_center"
    TRANSIT = "transit"
    AMPLIFIER = "amplifier"

    ALL = (NATIONAL, REGIONAL, REGIONAL_NO_HUB, LOCAL, DATA_CENTER, TRANSIT, AMPLIFIER)


#: Name prefix used when generators label nodes of a given type.
TYPE_PREFIX = {
    NodeType.NATIONAL: "NCO",
    NodeType.REGIONAL: "RCO",
    NodeType.REGIONAL_NO_HUB: "RNH",
    NodeType.LOCAL: "LCO",
    NodeType.DATA_CENTER: "DC",
    NodeType.TRANSIT: "TR",
    NodeType.AMPLIFIER: "AMP",
}

#: Default display colors; amplifiers are rendered as triangle markers.
DEFAULT_COLORS = {
    NodeType.NATIONAL: "green",
    NodeType.REGIONAL: "blue",
    NodeType.REGIONAL_NO_HUB: "orange",
    NodeType.LOCAL: "yellow",
    NodeType.DATA_CENTER: "violet",
    NodeType.TRANSIT: "gray",
    NodeType.AMPLIFIER: "black",
}

#: Segment tags used to mark which network layer a structure belongs to.
SEGMENT_BACKBONE = "backbone"
SEGMENT_METRO_MESH = "metro-core-mesh"
SEGMENT_METRO_RING = "metro-core-ring"
SEGMENT_METRO_AGG = "metro-aggregation"


@dataclass
class Node:
    name: str
    ntype: str
    pos: tuple[float, float] | None = None
    cluster: int | None = None
    reference_node: str | None = None
    color: str = ""


@dataclass(frozen=True)
class Link:
    """An undirected link; endpoint names are stored in sorted order."""

    a: str
    b: str
    length_km: float = 0.0

    @staticmethod
    def key(a: str, b: str) -> tuple[str, str]:
        return (a, b) if a <= b else (b, a)


@dataclass
class SurvivabilityReport:
    connected: bool
    node_survivable: bool
    edge_survivable: bool


class Topology:
    """Named nodes plus undirected links, with a segment tag.

    The underlying graph is private; use :meth:`graph_view` when an
    algorithm needs networkx access (it returns a copy).
    """

    def __init__(self, segment: str = SEGMENT_BACKBONE, graph: nx.Graph | None = None):
        self._g = graph if graph is not None else nx.Graph()
        self.segment = segment

    # -- construction helpers (package internal) --------------------------

    @classmethod
    def _wrap(cls, graph: nx.Graph, segment: str) -> "Topology":
        """Take ownership of ``graph`` without copying."""
        return cls(segment=segment, graph=graph)

    def _copy(self) -> "Topology":
        return Topology(segment=self.segment, graph=self._g.copy())

    # -- queries -----------------------------------------------------------

    def __len__(self) -> int:
        return self._g.number_of_nodes()

    @property
    def number_of_nodes(self) -> int:
        return self._g.number_of_nodes()

    @property
    def number_of_links(self) -> int:
        return self._g.number_of_edges()

    def node_names(self) -> list[str]:
        return list(self._g.nodes)

    def has_node(self, name: str) -> bool:
        return self._g.has_node(name)

    def node(self, name: str) -> Node:
        if not self._g.has_node(name):
            raise UnknownNodeError(f"unknown node {name!r}")
        d = self._g.nodes[name]
        return Node(
            name=name,
            ntype=d.get("ntype", NodeType.NATIONAL),
            pos=d.get("pos"),
            cluster=d.get("cluster"),
            reference_node=d.get("reference_node"),
            color=d.get("color", ""),
        )

    def nodes(self) -> Iterator[Node]:
        for name in self._g.nodes:
            yield self.node(name)

    def links(self) -> list[Link]:
        out = []
        for a, b, d in self._g.edges(data=True):
            x, y = Link.key(a, b)
            out.append(Link(x, y, float(d.get("length_km", 0.0))))
        return out

    def has_link(self, a: str, b: str) -> bool:
        return self._g.has_edge(a, b)

    def link_length(self, a: str, b: str) -> float:
        if not self._g.has_edge(a, b):
            raise UnknownLinkError(f"no link between {a!r} and {b!r}")
        return float(self._g.edges[a, b].get("length_km", 0.0))

    def degree(self, name: str) -> int:
        if not self._g.has_node(name):
            raise UnknownNodeError(f"unknown node {name!r}")
        return int(self._g.degree(name))

    def graph_view(self) -> nx.Graph:
        """A copy of the underlying graph for algorithmic use."""
        return self._g.copy()


@dataclass
class EditResult:
    """Outcome of a mutating edit: the new topology plus any warnings."""

    topology: Topology
    warnings: list[str] = field(default_factory=list)


def add_link(topo: Topology, a: str, b: str, length_km: float) -> Topology:
    """Return a copy of ``topo`` with a new link ``a``–``b``.

    Raises a distinct error for each misuse: unknown endpoint, self loop,
    duplicate link, or non-positive length.
    """
    for name in (a, b):
        if not topo.has_node(name):
            raise UnknownNodeError(f"unknown node {name!r}")
    if a == b:
        raise SelfLoopError(f"self loop on {a!r} not allowed")
    if topo.has_link(a, b):
        raise DuplicateLinkError(f"link {a!r}-{b!r} already exists")
    if not (length_km > 0):
        raise InvalidLengthError(f"length must be positive, got {length_km}")
    out = topo._copy()
    out._g.add_edge(a, b, length_km=float(length_km))
    return out


def drop_link(topo: Topology, a: str, b: str) -> EditResult:
    """Remove link ``a``–``b``; warn when survivability degrades."""
    if not topo.has_link(a, b):
        raise UnknownLinkError(f"no link between {a!r} and {b!r}")
    out = topo._copy()
    out._g.remove_edge(a, b)
    warnings = []
    g = out._g
    if g.number_of_nodes() > 1:
        if not nx.is_connected(g):
            warnings.append("topology is disconnected")
        elif nx.has_bridges(g):
            warnings.append("topology is no longer 2-edge-connected")
    return EditResult(topology=out, warnings=warnings)


def degree_histogram(topo: Topology) -> dict[int, float]:
    """Map each occurring degree to its fraction of nodes; sums to 1."""
    n = topo.number_of_nodes
    if n == 0:
        raise EmptyTopologyError("degree histogram of an empty topology")
    counts: dict[int, int] = {}
    for _, d in topo._g.degree():
        counts[d] = counts.get(d, 0) + 1
    return {d: c / n for d, c in sorted(counts.items())}


def survivability_check(topo: Topology) -> SurvivabilityReport:
    """Report connectivity, node survivability and edge survivability.

    Node survivability means no single node failure disconnects the
    network (no articulation points); edge survivability means no single
    link failure does (no bridges).  A disconnected topology fails all
    three checks.
    """
    g = topo._g
    if g.number_of_nodes() < 2:
        raise EmptyTopologyError("survivability needs at least two nodes")
    connected = nx.is_connected(g)
    if not connected:
        return SurvivabilityReport(False, False, False)
    node_ok = next(nx.articulation_points(g), None) is None
    edge_ok = not nx.has_bridges(g)
    return SurvivabilityReport(connected, node_ok, edge_ok)
