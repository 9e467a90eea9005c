import networkx as nx

from optinetgen.model import NodeType, Topology


def make_topology(edges, pos=None, types=None, segment="backbone"):
    """Hand-build a topology for tests.

    ``edges`` is a list of (a, b) or (a, b, length_km); missing lengths
    default to 1 km, missing positions to a unit grid by insertion order.
    """
    g = nx.Graph()
    names = []
    for e in edges:
        a, b = e[0], e[1]
        length = float(e[2]) if len(e) > 2 else 1.0
        for n in (a, b):
            if n not in names:
                names.append(n)
        g.add_edge(a, b, length_km=length)
    for i, n in enumerate(names):
        g.add_node(
            n,
            ntype=(types or {}).get(n, NodeType.NATIONAL),
            pos=(pos or {}).get(n, (float(i), float(i % 2))),
        )
    return Topology(segment=segment, graph=g)


def triangle(**kw):
    return make_topology([("A", "B"), ("B", "C"), ("A", "C")], **kw)
