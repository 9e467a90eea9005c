"""HTTP facade over the generators and editors.

Each session owns a workbook that the endpoints mutate under a
per-session lock; every mutation first pushes an undo snapshot.  The
web UI (or any script) drives the whole pipeline through this API.
"""

from __future__ import annotations

import copy
import io
import json
import os
import threading
import uuid
import zipfile
from typing import Optional

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .clustering import ClusterParams, MODE_DISTANCE, cluster_nodes
from .backbone import generate_backbone
from .errors import TopologyError, UnknownNodeError
from .flow import (
    backbone_params_from_dict,
    horseshoe_spec_from_params,
    mesh_params_from_dict,
    parse_degrees,
    parse_ranges,
    pin_structure_positions,
    ring_spec_from_params,
)
from .metro_core import generate_metro_mesh, generate_nring
from .metro_agg import generate_horseshoe
from .model import Topology, add_link, drop_link
from .validation import (
    DEFAULT_BACKBONE_DEGREES,
    DEFAULT_BACKBONE_RANGES,
    validate_topology,
)
from .workbook import (
    Workbook,
    export_svg,
    workbook_csv_parts,
    workbook_from_json_dict,
    workbook_to_json_dict,
)

UNDO_DEPTH = 100

_STATUS_BY_CODE = {
    "unknown-node": 404,
    "unknown-link": 404,
    "unknown-session": 404,
    "duplicate-link": 409,
    "nothing-to-undo": 409,
    "generation-failed": 500,
}


class _Session:
    def __init__(self, seed: int = 0, workbook: Workbook | None = None):
        self.id = uuid.uuid4().hex[:12]
        self.workbook = workbook if workbook is not None else Workbook()
        self.lock = threading.Lock()
        self.rng = np.random.default_rng(seed)
        self.targets: dict = {"degrees": None, "ranges": None}
        self.undo_stack: list[Workbook] = []
        self.counter = 0

    def next_id(self, kind: str) -> str:
        self.counter += 1
        return f"{kind}-{self.counter}"

    def push_undo(self):
        self.undo_stack.append(copy.deepcopy(self.workbook))
        if len(self.undo_stack) > UNDO_DEPTH:
            self.undo_stack.pop(0)


# -- request bodies ---------------------------------------------------------


class SessionCreate(BaseModel):
    workbook: Optional[dict] = None
    seed: int = 0


class BackboneRequest(BaseModel):
    strategy: str = "default"
    params: dict = {}


class LinkRequest(BaseModel):
    source: str
    target: str
    length_km: float


class ClusterRequest(BaseModel):
    epsilon: float
    min_points: int = 1
    mode: str = MODE_DISTANCE
    avoid_single: bool = False


class MetroRequest(BaseModel):
    cluster_label: int
    kind: str = "nring"
    params: dict = {}


class HorseshoeRequest(BaseModel):
    end1: str
    end2: str
    hops: Optional[int] = None
    params: dict = {}


# -- payload helpers --------------------------------------------------------


def _node_payload(wb: Workbook) -> list[dict]:
    topo = wb.to_topology()
    color = {n.name: n.color for n in topo.nodes()}
    out = []
    for r in wb.nodes:
        row = dict(r)
        row["color"] = color.get(r["name"], "")
        out.append(row)
    return out


def _workbook_payload(wb: Workbook) -> dict:
    return {"nodes": _node_payload(wb), "links": [dict(r) for r in wb.links]}


def _structure_payload(topo: Topology) -> dict:
    nodes = []
    for n in topo.nodes():
        x, y = n.pos if n.pos is not None else (None, None)
        nodes.append(
            {
                "name": n.name,
                "type": n.ntype,
                "x": None if x is None else float(x),
                "y": None if y is None else float(y),
                "cluster": n.cluster,
                "reference_node": n.reference_node,
                "color": n.color,
                "segment": topo.segment,
            }
        )
    links = [
        {"source": l.a, "target": l.b, "length_km": float(l.length_km), "segment": topo.segment}
        for l in topo.links()
    ]
    return {"nodes": nodes, "links": links}


def _cluster_payload(wb: Workbook) -> dict:
    assignment = wb.cluster_assignment()
    return {
        "clusters": {str(k): v for k, v in sorted(assignment.cluster_map().items())},
        "transit_label": assignment.transit_label,
    }


# -- application ------------------------------------------------------------


def create_app(snapshot_dir: str | None = None) -> FastAPI:
    app = FastAPI(
        title="optinetgen service",
        description="Session-based generation and editing of optical network topologies.",
        version="0.1.0",
    )
    # the browser client may be served from any static host
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, _Session] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> _Session:
        with registry_lock:
            session = sessions.get(session_id)
        if session is None:
            raise TopologyError(f"no session {session_id!r}", code="unknown-session")
        return session

    def snapshot(session: _Session):
        if snapshot_dir is None:
            return
        os.makedirs(snapshot_dir, exist_ok=True)
        doc = workbook_to_json_dict(session.workbook)
        path = os.path.join(snapshot_dir, f"{session.id}.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)

    @app.exception_handler(TopologyError)
    async def topology_error_handler(request: Request, exc: TopologyError):
        status = _STATUS_BY_CODE.get(exc.code, 422)
        body = {"error": {"code": exc.code, "message": str(exc)}}
        if getattr(exc, "offenders", None):
            body["error"]["offenders"] = exc.offenders
        return JSONResponse(status_code=status, content=body)

    @app.post("/sessions")
    def create_session(body: SessionCreate | None = None):
        body = body or SessionCreate()
        wb = workbook_from_json_dict(body.workbook) if body.workbook is not None else None
        session = _Session(seed=body.seed, workbook=wb)
        with registry_lock:
            sessions[session.id] = session
        return {
            "id": session.id,
            "nodes": len(session.workbook.nodes),
            "links": len(session.workbook.links),
        }

    @app.post("/sessions/{session_id}/backbone")
    def post_backbone(session_id: str, body: BackboneRequest):
        session = get_session(session_id)
        with session.lock:
            params = backbone_params_from_dict(body.strategy, body.params)
            topo = generate_backbone(body.strategy, params)
            session.push_undo()
            wb = Workbook.from_topology(topo)
            wb.add_structure(
                "backbone",
                topo.segment,
                {"strategy": body.strategy, "nodes": params.nodes, "seed": params.seed},
            )
            session.workbook = wb
            session.targets = {
                "degrees": getattr(params, "degrees", None),
                "ranges": getattr(params, "distance_ranges", None),
            }
            snapshot(session)
            payload = _workbook_payload(session.workbook)
        payload["warnings"] = []
        return payload

    @app.get("/sessions/{session_id}/topology")
    def get_topology(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return _workbook_payload(session.workbook)

    @app.get("/sessions/{session_id}/stats")
    def get_stats(
        session_id: str,
        degrees: Optional[str] = Query(default=None),
        ranges: Optional[str] = Query(default=None),
    ):
        session = get_session(session_id)
        with session.lock:
            target_degrees = (
                parse_degrees(degrees)
                if degrees
                else (session.targets.get("degrees") or DEFAULT_BACKBONE_DEGREES)
            )
            target_ranges = (
                parse_ranges(ranges)
                if ranges
                else (session.targets.get("ranges") or DEFAULT_BACKBONE_RANGES)
            )
            report = validate_topology(session.workbook.to_topology(), target_degrees, target_ranges)
        return report.as_dict()

    @app.post("/sessions/{session_id}/links")
    def post_link(session_id: str, body: LinkRequest):
        session = get_session(session_id)
        with session.lock:
            topo = session.workbook.to_topology()
            updated = add_link(topo, body.source, body.target, body.length_km)
            session.push_undo()
            a, b = sorted((body.source, body.target))
            session.workbook.links.append(
                {
                    "source": a,
                    "target": b,
                    "length_km": round(float(body.length_km), 6),
                    "segment": "manual",
                }
            )
            session.workbook.sort()
            snapshot(session)
            length = updated.link_length(a, b)
        return {
            "nodes": [],
            "links": [{"source": a, "target": b, "length_km": length, "segment": "manual"}],
            "warnings": [],
        }

    @app.delete("/sessions/{session_id}/links/{a}/{b}")
    def delete_link(session_id: str, a: str, b: str):
        session = get_session(session_id)
        with session.lock:
            topo = session.workbook.to_topology()
            result = drop_link(topo, a, b)
            session.push_undo()
            lo, hi = sorted((a, b))
            session.workbook.links = [
                r
                for r in session.workbook.links
                if (r["source"], r["target"]) != (lo, hi)
            ]
            snapshot(session)
            warnings = result.warnings
        return {"nodes": [], "links": [], "warnings": warnings}

    @app.post("/sessions/{session_id}/clusters")
    def post_clusters(session_id: str, body: ClusterRequest):
        session = get_session(session_id)
        with session.lock:
            params = ClusterParams(
                epsilon=body.epsilon,
                min_points=body.min_points,
                mode=body.mode,
                avoid_single=body.avoid_single,
            )
            assignment = cluster_nodes(session.workbook.to_topology(), params)
            session.push_undo()
            session.workbook.set_clusters(assignment)
            snapshot(session)
            payload = _cluster_payload(session.workbook)
        payload["warnings"] = assignment.warnings
        return payload

    @app.get("/sessions/{session_id}/clusters")
    def get_clusters(session_id: str):
        session = get_session(session_id)
        with session.lock:
            return _cluster_payload(session.workbook)

    @app.post("/sessions/{session_id}/metro")
    def post_metro(session_id: str, body: MetroRequest):
        session = get_session(session_id)
        with session.lock:
            wb = session.workbook
            members = sorted(
                r["member"] for r in wb.clusters if r["label"] == body.cluster_label
            )
            if not members:
                raise TopologyError(
                    f"no cluster with label {body.cluster_label}", code="invalid-params"
                )
            if body.cluster_label == wb.meta.get("transit_label"):
                raise TopologyError(
                    "transit nodes do not form a metro region", code="invalid-params"
                )
            if body.kind == "nring":
                if len(members) < 2:
                    raise TopologyError(
                        f"cluster {body.cluster_label} needs two nodes for a ring structure",
                        code="invalid-params",
                    )
                spec = ring_spec_from_params(
                    members[0],
                    members[1],
                    {"pref": f"C{body.cluster_label}R", **body.params},
                    session.rng,
                )
                structure = generate_nring(spec)
                _pin_to_workbook(structure, spec.end1, spec.end2, wb)
                sid = session.next_id("ring")
                meta = {"end1": spec.end1, "end2": spec.end2, "nrings": spec.nrings, "seed": spec.seed}
            elif body.kind == "mesh":
                params = dict(body.params)
                params.setdefault("seed", int(session.rng.integers(2**31)))
                mesh_params = mesh_params_from_dict(params, main_nodes=members)
                structure = generate_metro_mesh(mesh_params)
                sid = session.next_id("mesh")
                meta = {"main_nodes": ",".join(members), "nodes": mesh_params.nodes, "seed": mesh_params.seed}
            else:
                raise TopologyError(f"unknown metro kind {body.kind!r}", code="invalid-params")
            session.push_undo()
            wb.merge_topology(structure)
            wb.add_structure(sid, structure.segment, meta)
            snapshot(session)
            payload = _structure_payload(structure)
        payload["structure_id"] = sid
        payload["warnings"] = []
        return payload

    @app.post("/sessions/{session_id}/horseshoe")
    def post_horseshoe(session_id: str, body: HorseshoeRequest):
        session = get_session(session_id)
        with session.lock:
            wb = session.workbook
            names = wb.node_names()
            for end in (body.end1, body.end2):
                if end not in names:
                    raise UnknownNodeError(f"unknown node {end!r}")
            sid = session.next_id("horseshoe")
            spec = horseshoe_spec_from_params(
                body.end1,
                body.end2,
                {"pref": f"H{session.counter}", **body.params},
                session.rng,
                hops=body.hops,
            )
            structure = generate_horseshoe(spec)
            _pin_to_workbook(structure, body.end1, body.end2, wb)
            session.push_undo()
            wb.merge_topology(structure)
            wb.add_structure(
                sid,
                structure.segment,
                {"end1": body.end1, "end2": body.end2, "hops": spec.hops, "seed": spec.seed},
            )
            snapshot(session)
            payload = _structure_payload(structure)
        payload["structure_id"] = sid
        payload["warnings"] = []
        return payload

    @app.post("/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        session = get_session(session_id)
        with session.lock:
            if not session.undo_stack:
                raise TopologyError("nothing to undo", code="nothing-to-undo")
            session.workbook = session.undo_stack.pop()
            snapshot(session)
            payload = _workbook_payload(session.workbook)
        payload["warnings"] = []
        return payload

    @app.get("/sessions/{session_id}/export")
    def get_export(session_id: str, format: str = Query(default="json")):
        session = get_session(session_id)
        with session.lock:
            wb = copy.deepcopy(session.workbook)
        wb.validate()
        if format == "json":
            doc = workbook_to_json_dict(wb)
            return Response(
                content=json.dumps(doc, indent=2, sort_keys=True) + "\n",
                media_type="application/json",
            )
        if format == "csv":
            buf = io.BytesIO()
            with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
                for fname, text in sorted(workbook_csv_parts(wb).items()):
                    info = zipfile.ZipInfo(fname, date_time=(1980, 1, 1, 0, 0, 0))
                    zf.writestr(info, text)
            return Response(content=buf.getvalue(), media_type="application/zip")
        if format == "svg":
            return Response(content=export_svg(wb) + "\n", media_type="image/svg+xml")
        raise TopologyError(f"unknown export format {format!r}", code="invalid-params")

    return app


def _pin_to_workbook(structure: Topology, end1: str, end2: str, wb: Workbook):
    """Anchor a freshly generated structure onto the session scene."""
    pos = {
        r["name"]: (r["x"], r["y"])
        for r in wb.nodes
        if r.get("x") is not None and r.get("y") is not None
    }
    if end1 in pos and end2 in pos:
        pin_structure_positions(structure, end1, end2, pos[end1], pos[end2])


app = create_app()
