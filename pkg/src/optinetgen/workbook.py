"""Workbook persistence and rendering.

A workbook is the on-disk scene: one nodes table, one links table, plus
clusters, structures and a validation report.  It saves either as a
directory of CSV files with a JSON manifest, or as a single JSON file.
Rows are kept sorted and numbers written with fixed precision so that
saving the same workbook twice is byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field

import networkx as nx

from .errors import (
    DanglingReferenceError,
    InvalidParamsError,
    MissingTableError,
    VersionMismatchError,
    WorkbookError,
)
from .model import DEFAULT_COLORS, Node, NodeType, Topology

WORKBOOK_FORMAT = "optinetgen-workbook"
WORKBOOK_VERSION = 1

NODE_FIELDS = ("name", "type", "x", "y", "cluster", "reference_node", "segment")
LINK_FIELDS = ("source", "target", "length_km", "segment")
CLUSTER_FIELDS = ("label", "member")
STRUCTURE_FIELDS = ("id", "kind", "params")
REPORT_FIELDS = ("section", "key", "value")

_TABLE_FILES = {
    "nodes": "nodes.csv",
    "links": "links.csv",
    "clusters": "clusters.csv",
    "structures": "structures.csv",
    "report": "report.csv",
}


def _q6(x) -> float | None:
    """Kilometre/coordinate values are carried at 6 decimal places."""
    if x is None:
        return None
    return round(float(x), 6)


@dataclass
class Workbook:
    nodes: list[dict] = field(default_factory=list)
    links: list[dict] = field(default_factory=list)
    clusters: list[dict] = field(default_factory=list)
    structures: list[dict] = field(default_factory=list)
    report: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_topology(cls, topo: Topology, structure_id: str | None = None) -> "Workbook":
        wb = cls()
        wb.merge_topology(topo)
        if structure_id is not None:
            wb.structures.append(
                {"id": structure_id, "kind": topo.segment, "params": "{}"}
            )
        wb.sort()
        return wb

    def merge_topology(self, topo: Topology, skip_existing: bool = True):
        """Fold a topology's nodes and links into the workbook.

        Nodes already present keep their original row; links are added
        once.  Every added row is tagged with the topology's segment.
        """
        present = {r["name"] for r in self.nodes}
        for node in topo.nodes():
            if node.name in present:
                continue
            present.add(node.name)
            self.nodes.append(_node_row(node, topo.segment))
        have = {(r["source"], r["target"]) for r in self.links}
        for link in topo.links():
            if (link.a, link.b) in have:
                continue
            have.add((link.a, link.b))
            self.links.append(
                {
                    "source": link.a,
                    "target": link.b,
                    "length_km": _q6(link.length_km),
                    "segment": topo.segment,
                }
            )
        self.sort()

    def set_clusters(self, assignment):
        """Replace the clusters table from a cluster assignment."""
        self.clusters = [
            {"label": int(lab), "member": name}
            for name, lab in assignment.labels.items()
        ]
        self.meta["transit_label"] = int(assignment.transit_label)
        by_name = {r["name"]: r for r in self.nodes}
        for name, lab in assignment.labels.items():
            if name in by_name:
                by_name[name]["cluster"] = int(lab)
        self.sort()

    def add_structure(self, structure_id: str, kind: str, params: dict | None = None):
        self.structures.append(
            {
                "id": structure_id,
                "kind": kind,
                "params": json.dumps(params or {}, sort_keys=True, separators=(",", ":")),
            }
        )
        self.sort()

    def add_report_rows(self, section: str, values: dict):
        for key in sorted(values):
            self.report.append(
                {"section": section, "key": str(key), "value": _q6(values[key])}
            )

    # -- queries -----------------------------------------------------------

    def node_names(self) -> set[str]:
        return {r["name"] for r in self.nodes}

    def to_topology(self, segment: str | None = None) -> Topology:
        """Rebuild a topology; optionally only rows of one segment.

        With a segment filter, links keep only endpoints whose node rows
        are included as well.
        """
        g = nx.Graph()
        keep = set()
        for r in self.nodes:
            if segment is not None and r.get("segment") != segment:
                continue
            keep.add(r["name"])
            pos = None
            if r.get("x") is not None and r.get("y") is not None:
                pos = (r["x"], r["y"])
            g.add_node(
                r["name"],
                ntype=r["type"],
                pos=pos,
                cluster=r.get("cluster"),
                reference_node=r.get("reference_node"),
                color=r.get("color") or DEFAULT_COLORS.get(r["type"], ""),
            )
        for r in self.links:
            if segment is not None and r.get("segment") != segment:
                continue
            if r["source"] in keep and r["target"] in keep:
                g.add_edge(r["source"], r["target"], length_km=r["length_km"])
        return Topology._wrap(g, segment or "workbook")

    def cluster_assignment(self):
        from .clustering import ClusterAssignment

        labels = {r["member"]: int(r["label"]) for r in self.clusters}
        transit = self.meta.get("transit_label")
        if transit is None:
            transit = max(labels.values(), default=-1) + 1
        return ClusterAssignment(labels=labels, transit_label=int(transit))

    # -- invariants --------------------------------------------------------

    def sort(self):
        self.nodes.sort(key=lambda r: r["name"])
        self.links.sort(key=lambda r: (r["source"], r["target"]))
        self.clusters.sort(key=lambda r: (r["label"], r["member"]))
        self.structures.sort(key=lambda r: r["id"])
        self.report.sort(key=lambda r: (r["section"], r["key"]))

    def validate(self):
        """Check referential integrity; report every offender at once."""
        names = self.node_names()
        offenders = []
        for r in self.links:
            for end in (r["source"], r["target"]):
                if end not in names:
                    offenders.append(f"link {r['source']}-{r['target']} references {end!r}")
        for r in self.clusters:
            if r["member"] not in names:
                offenders.append(f"cluster {r['label']} references {r['member']!r}")
        for r in self.nodes:
            ref = r.get("reference_node")
            if ref and ref not in names:
                offenders.append(f"node {r['name']} references {ref!r}")
        if offenders:
            raise DanglingReferenceError(
                "dangling references: " + "; ".join(sorted(offenders)),
                offenders=sorted(offenders),
            )
        seen = set()
        for r in self.links:
            if r["source"] == r["target"]:
                raise WorkbookError(f"self loop on {r['source']!r}")
            key = (r["source"], r["target"])
            if key in seen:
                raise WorkbookError(f"duplicate link {key}")
            seen.add(key)


def _node_row(node: Node, segment: str) -> dict:
    x, y = (node.pos if node.pos is not None else (None, None))
    return {
        "name": node.name,
        "type": node.ntype,
        "x": _q6(x),
        "y": _q6(y),
        "cluster": node.cluster,
        "reference_node": node.reference_node,
        "segment": segment,
    }


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _fmt_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def _csv_text(rows: list[dict], fields) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    writer.writerow(fields)
    for r in rows:
        writer.writerow([_fmt_cell(r.get(f)) for f in fields])
    return buf.getvalue()


_TABLE_SPECS = {
    "nodes": NODE_FIELDS,
    "links": LINK_FIELDS,
    "clusters": CLUSTER_FIELDS,
    "structures": STRUCTURE_FIELDS,
    "report": REPORT_FIELDS,
}


def workbook_to_json_dict(wb: Workbook) -> dict:
    wb.sort()
    return {
        "format": WORKBOOK_FORMAT,
        "version": WORKBOOK_VERSION,
        "meta": wb.meta,
        "tables": {
            "nodes": wb.nodes,
            "links": wb.links,
            "clusters": wb.clusters,
            "structures": wb.structures,
            "report": wb.report,
        },
    }


def workbook_from_json_dict(data: dict) -> Workbook:
    if not isinstance(data, dict) or data.get("format") != WORKBOOK_FORMAT:
        raise WorkbookError("not a workbook document")
    if data.get("version") != WORKBOOK_VERSION:
        raise VersionMismatchError(
            f"workbook version {data.get('version')!r} unsupported (need {WORKBOOK_VERSION})"
        )
    tables = data.get("tables", {})
    for t in _TABLE_SPECS:
        if t not in tables:
            raise MissingTableError(f"missing table {t!r}")
    wb = Workbook(
        nodes=[_coerce_node(dict(r)) for r in tables["nodes"]],
        links=[_coerce_link(dict(r)) for r in tables["links"]],
        clusters=[
            {"label": int(r["label"]), "member": str(r["member"])} for r in tables["clusters"]
        ],
        structures=[dict(r) for r in tables["structures"]],
        report=[_coerce_report(dict(r)) for r in tables["report"]],
        meta=dict(data.get("meta", {})),
    )
    wb.sort()
    wb.validate()
    return wb


def _coerce_node(r: dict) -> dict:
    if r.get("type") not in NodeType.ALL:
        raise WorkbookError(f"unknown node type {r.get('type')!r} on {r.get('name')!r}")
    return {
        "name": str(r["name"]),
        "type": r["type"],
        "x": _q6(r["x"]) if r.get("x") not in (None, "") else None,
        "y": _q6(r["y"]) if r.get("y") not in (None, "") else None,
        "cluster": int(r["cluster"]) if r.get("cluster") not in (None, "") else None,
        "reference_node": r.get("reference_node") or None,
        "segment": r.get("segment") or None,
    }


def _coerce_link(r: dict) -> dict:
    length = _q6(r["length_km"]) if r.get("length_km") not in (None, "") else 0.0
    a, b = str(r["source"]), str(r["target"])
    if b < a:
        a, b = b, a
    return {"source": a, "target": b, "length_km": length, "segment": r.get("segment") or None}


def _coerce_report(r: dict) -> dict:
    value = r.get("value")
    if value not in (None, ""):
        try:
            value = _q6(value)
        except (TypeError, ValueError):
            value = str(value)
    else:
        value = None
    return {"section": str(r["section"]), "key": str(r["key"]), "value": value}


def workbook_csv_parts(wb: Workbook) -> dict[str, str]:
    """The CSV bundle as {filename: text}, manifest included."""
    wb.sort()
    manifest = {
        "format": WORKBOOK_FORMAT,
        "version": WORKBOOK_VERSION,
        "meta": wb.meta,
        "tables": dict(_TABLE_FILES),
    }
    parts = {"manifest.json": json.dumps(manifest, indent=2, sort_keys=True) + "\n"}
    for table, fields in _TABLE_SPECS.items():
        parts[_TABLE_FILES[table]] = _csv_text(getattr(wb, table), fields)
    return parts


def save_workbook(wb: Workbook, path: str, fmt: str = "csv") -> str:
    """Write ``wb`` to ``path``; returns the path written.

    ``fmt="csv"`` produces a directory with a manifest and one CSV per
    table; ``fmt="json"`` a single JSON file.
    """
    wb.sort()
    wb.validate()
    if fmt == "json":
        doc = workbook_to_json_dict(wb)
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path
    if fmt != "csv":
        raise InvalidParamsError(f"unknown workbook format {fmt!r}")
    os.makedirs(path, exist_ok=True)
    for fname, text in workbook_csv_parts(wb).items():
        with open(os.path.join(path, fname), "w", newline="") as fh:
            fh.write(text)
    return path


def load_workbook(path: str) -> Workbook:
    """Read a workbook from a CSV directory or a single JSON file."""
    if os.path.isdir(path):
        manifest_path = os.path.join(path, "manifest.json")
        if not os.path.exists(manifest_path):
            raise MissingTableError("manifest.json not found")
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        if manifest.get("format") != WORKBOOK_FORMAT:
            raise WorkbookError("not a workbook directory")
        if manifest.get("version") != WORKBOOK_VERSION:
            raise VersionMismatchError(
                f"workbook version {manifest.get('version')!r} unsupported"
            )
        tables = {}
        for table in _TABLE_SPECS:
            fname = manifest.get("tables", {}).get(table)
            if fname is None:
                raise MissingTableError(f"manifest lists no file for table {table!r}")
            fpath = os.path.join(path, fname)
            if not os.path.exists(fpath):
                raise MissingTableError(f"table file {fname!r} missing")
            with open(fpath, newline="") as fh:
                tables[table] = list(csv.DictReader(fh))
        data = {
            "format": WORKBOOK_FORMAT,
            "version": WORKBOOK_VERSION,
            "meta": manifest.get("meta", {}),
            "tables": tables,
        }
        return workbook_from_json_dict(data)
    if not os.path.exists(path):
        raise WorkbookError(f"no workbook at {path!r}")
    with open(path) as fh:
        data = json.load(fh)
    return workbook_from_json_dict(data)


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------


def export_svg(
    source: Workbook | Topology,
    width: int = 900,
    height: int = 700,
    labels: bool = False,
) -> str:
    """Render nodes and links as a standalone SVG document.

    Amplifier nodes draw as triangles, every other type as a filled
    circle in its display color.
    """
    if isinstance(source, Workbook):
        topo = source.to_topology()
    else:
        topo = source
    nodes = [n for n in topo.nodes() if n.pos is not None]
    if not nodes:
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"></svg>'
        )
    xs = [n.pos[0] for n in nodes]
    ys = [n.pos[1] for n in nodes]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    margin = 30.0
    sx = (width - 2 * margin) / (x1 - x0 or 1.0)
    sy = (height - 2 * margin) / (y1 - y0 or 1.0)

    def at(p):
        return (margin + (p[0] - x0) * sx, margin + (p[1] - y0) * sy)

    pos = {n.name: at(n.pos) for n in nodes}
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for link in topo.links():
        if link.a not in pos or link.b not in pos:
            continue
        (ax, ay), (bx, by) = pos[link.a], pos[link.b]
        parts.append(
            f'<line x1="{ax:.1f}" y1="{ay:.1f}" x2="{bx:.1f}" y2="{by:.1f}" '
            f'stroke="#888" stroke-width="1.2"/>'
        )
    for n in nodes:
        cx, cy = pos[n.name]
        color = n.color or DEFAULT_COLORS.get(n.ntype, "black")
        if n.ntype == NodeType.AMPLIFIER:
            r = 5.0
            pts = f"{cx:.1f},{cy - r:.1f} {cx - r:.1f},{cy + r:.1f} {cx + r:.1f},{cy + r:.1f}"
            parts.append(f'<polygon points="{pts}" fill="{color}"/>')
        else:
            parts.append(f'<circle cx="{cx:.1f}" cy="{cy:.1f}" r="5" fill="{color}"/>')
        if labels:
            parts.append(
                f'<text x="{cx + 7:.1f}" y="{cy - 7:.1f}" font-size="9">{n.name}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)
