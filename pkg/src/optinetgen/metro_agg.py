"""Metro aggregation horseshoes.

A horseshoe is an open chain of local offices hung between two regional
hub nodes.  Its total length is drawn from configurable ranges, interior
offices fall uniformly along that length, and every office points at the
nearer hub as its reference node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import networkx as nx
import numpy as np

from .errors import InvalidParamsError
from .backbone import _apply_colors
from .model import SEGMENT_METRO_AGG, NodeType, Topology

_SUM_TOL = 1e-9

#: Horseshoe total-length ranges (km) and how often each range occurs.
DEFAULT_LEN_RANGES = ((15.0, 40.0), (40.0, 80.0), (80.0, 130.0), (130.0, 200.0), (200.0, 302.0))
DEFAULT_PERC_LENGTH = (0.20, 0.30, 0.25, 0.15, 0.10)

#: How often a horseshoe has a given total node count (hubs + offices).
DEFAULT_NODE_COUNT_OCCURRENCE = {
    3: 0.10,
    4: 0.19,
    5: 0.21,
    6: 0.27,
    7: 0.14,
    8: 0.05,
    9: 0.04,
}


@dataclass(frozen=True)
class HorseshoeSpec:
    end1: str
    end2: str
    hops: int
    len_ranges: Sequence[tuple[float, float]] = DEFAULT_LEN_RANGES
    perc_length: Sequence[float] = DEFAULT_PERC_LENGTH
    pref: str = ""
    idx: int = 1
    dict_colors: Mapping[str, str] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.end1 == self.end2:
            raise InvalidParamsError("horseshoe ends must differ")
        if self.hops < 2:
            raise InvalidParamsError("a horseshoe needs at least 2 hops")
        ranges = [(float(a), float(b)) for a, b in self.len_ranges]
        if not ranges:
            raise InvalidParamsError("length ranges are empty")
        prev = None
        for lo, hi in ranges:
            if not (hi > lo >= 0):
                raise InvalidParamsError(f"bad length range ({lo}, {hi})")
            if prev is not None and lo < prev:
                raise InvalidParamsError("length ranges must be ascending and non-overlapping")
            prev = hi
        object.__setattr__(self, "len_ranges", tuple(ranges))
        probs = [float(p) for p in self.perc_length]
        if len(probs) != len(ranges):
            raise InvalidParamsError("need one probability per length range")
        if any(p < 0 for p in probs):
            raise InvalidParamsError("range probabilities must be non-negative")
        if abs(sum(probs) - 1.0) > _SUM_TOL:
            raise InvalidParamsError(f"range probabilities sum to {sum(probs)}, expected 1")
        object.__setattr__(self, "perc_length", tuple(probs))


def sample_hops(occurrence: Mapping[int, float], rng: np.random.Generator) -> int:
    """Draw a hop count from a node-count occurrence table.

    ``occurrence`` maps total node count (two hubs plus offices) to its
    probability; the returned hop count is the node count minus one.
    """
    if not occurrence:
        raise InvalidParamsError("occurrence table is empty")
    for k, p in occurrence.items():
        if k < 3:
            raise InvalidParamsError("horseshoes need at least 3 nodes")
        if p < 0:
            raise InvalidParamsError("occurrence probabilities must be non-negative")
    total = sum(occurrence.values())
    if abs(total - 1.0) > _SUM_TOL:
        raise InvalidParamsError(f"occurrence probabilities sum to {total}, expected 1")
    keys = sorted(occurrence)
    probs = np.array([occurrence[k] for k in keys], dtype=float)
    return int(rng.choice(keys, p=probs)) - 1


def generate_horseshoe(spec: HorseshoeSpec, rng: np.random.Generator | None = None) -> Topology:
    """Build a horseshoe chain of ``hops`` links between two hubs.

    The total length is drawn from one of ``len_ranges`` picked according
    to ``perc_length``; the ``hops - 1`` interior offices are placed at
    sorted uniform draws over the open interval (0, length).  Nodes sit on
    a straight line, hubs at the extremes.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    pick = int(rng.choice(len(spec.len_ranges), p=np.array(spec.perc_length)))
    lo, hi = spec.len_ranges[pick]
    length = rng.uniform(lo, hi)
    offsets = sorted(float(rng.uniform(0.0, length)) for _ in range(spec.hops - 1))

    g = nx.Graph()
    g.add_node(spec.end1, ntype=NodeType.REGIONAL, pos=(0.0, 0.0))
    locals_ = [f"{spec.pref}LCO{spec.idx + j}" for j in range(spec.hops - 1)]
    for name, x in zip(locals_, offsets):
        if g.has_node(name):
            raise InvalidParamsError(f"generated office name {name!r} collides")
        g.add_node(name, ntype=NodeType.LOCAL, pos=(x, 0.0), reference_node=spec.end1)
    g.add_node(spec.end2, ntype=NodeType.REGIONAL, pos=(length, 0.0))

    path = [spec.end1] + locals_ + [spec.end2]
    marks = [0.0] + offsets + [length]
    for (a, b), (xa, xb) in zip(zip(path, path[1:]), zip(marks, marks[1:])):
        g.add_edge(a, b, length_km=xb - xa)
    for name, x in zip(locals_, offsets):
        # Nearer hub along the chain; ties prefer end1.
        g.nodes[name]["reference_node"] = spec.end1 if x <= length - x else spec.end2
    _apply_colors(g, spec.dict_colors)
    return Topology._wrap(g, SEGMENT_METRO_AGG)


@dataclass(frozen=True)
class StatLine:
    min: float
    max: float
    avg: float
    std: float


@dataclass(frozen=True)
class HorseshoeStats:
    """Summary statistics over a set of horseshoes."""

    hops: StatLine
    link_length_km: StatLine
    total_length_km: StatLine


def _stat_line(values: Sequence[float]) -> StatLine:
    arr = np.asarray(values, dtype=float)
    return StatLine(
        min=float(arr.min()),
        max=float(arr.max()),
        avg=float(arr.mean()),
        std=float(arr.std()),
    )


def horseshoe_stats(horseshoes: Iterable[Topology]) -> HorseshoeStats:
    """Aggregate hop counts, link lengths and totals; needs >= 1 horseshoe."""
    hops, links, totals = [], [], []
    for topo in horseshoes:
        ls = [l.length_km for l in topo.links()]
        if not ls:
            continue
        hops.append(len(ls))
        links.extend(ls)
        totals.append(sum(ls))
    if not hops:
        raise InvalidParamsError("no horseshoes supplied")
    return HorseshoeStats(
        hops=_stat_line(hops),
        link_length_km=_stat_line(links),
        total_length_km=_stat_line(totals),
    )
