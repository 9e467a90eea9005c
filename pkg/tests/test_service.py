"""HTTP service: sessions, generation, edits, undo, exports."""

import json
import io
import threading
import zipfile

import pytest
from fastapi.testclient import TestClient

from optinetgen.service import create_app


@pytest.fixture()
def client():
    return TestClient(create_app())


def new_session(client, **kwargs):
    r = client.post("/sessions", json=kwargs or {})
    assert r.status_code == 200
    return r.json()["id"]


def twin_session(client, nodes=6, seed=7):
    sid = new_session(client)
    r = client.post(
        f"/sessions/{sid}/backbone",
        json={"strategy": "twin", "params": {"nodes": nodes, "seed": seed}},
    )
    assert r.status_code == 200
    return sid


# ---------------------------------------------------------------------------
# sessions
# ---------------------------------------------------------------------------


def test_create_empty_session(client):
    r = client.post("/sessions", json={})
    assert r.status_code == 200
    body = r.json()
    assert body["nodes"] == 0 and body["links"] == 0 and body["id"]


def test_create_session_from_workbook(client):
    sid = twin_session(client)
    doc = json.loads(client.get(f"/sessions/{sid}/export?format=json").content)
    r = client.post("/sessions", json={"workbook": doc})
    assert r.status_code == 200
    assert r.json()["nodes"] == 6


def test_unknown_session_404(client):
    r = client.get("/sessions/nope/topology")
    assert r.status_code == 404
    assert r.json()["error"]["code"] == "unknown-session"


# ---------------------------------------------------------------------------
# backbone generation
# ---------------------------------------------------------------------------


def test_backbone_twin(client):
    sid = new_session(client)
    r = client.post(
        f"/sessions/{sid}/backbone",
        json={"strategy": "twin", "params": {"nodes": 6, "seed": 7}},
    )
    body = r.json()
    assert len(body["nodes"]) == 6
    assert any(n["name"].endswith("_TW") for n in body["nodes"])
    assert all("color" in n for n in body["nodes"])
    assert body["warnings"] == []


def test_backbone_replaces_previous(client):
    sid = twin_session(client, nodes=6)
    r = client.post(
        f"/sessions/{sid}/backbone",
        json={"strategy": "default", "params": {"nodes": 9, "seed": 1}},
    )
    assert len(r.json()["nodes"]) == 9
    topo = client.get(f"/sessions/{sid}/topology").json()
    assert len(topo["nodes"]) == 9


def test_backbone_invalid_params_422(client):
    sid = new_session(client)
    r = client.post(
        f"/sessions/{sid}/backbone",
        json={"strategy": "twin", "params": {"nodes": 7}},
    )
    assert r.status_code == 422
    assert r.json()["error"]["code"] == "invalid-params"


def test_backbone_unknown_strategy_422(client):
    sid = new_session(client)
    r = client.post(
        f"/sessions/{sid}/backbone",
        json={"strategy": "rhombic", "params": {"nodes": 6}},
    )
    assert r.status_code == 422


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def test_stats_uses_generation_targets(client):
    sid = new_session(client)
    client.post(
        f"/sessions/{sid}/backbone",
        json={
            "strategy": "default",
            "params": {"nodes": 10, "seed": 3, "degrees": "2:1.0"},
        },
    )
    stats = client.get(f"/sessions/{sid}/stats").json()
    assert stats["degree_target"] == {"2": 1.0}
    assert stats["degree_mape"] == 0.0


def test_stats_override_by_query(client):
    sid = twin_session(client)
    stats = client.get(
        f"/sessions/{sid}/stats", params={"degrees": "2:0.5,3:0.5"}
    ).json()
    assert stats["degree_target"] == {"2": 0.5, "3": 0.5}
    assert "degree_mape" in stats and "distance_mape" in stats


# ---------------------------------------------------------------------------
# manual link editing
# ---------------------------------------------------------------------------


def link_pairs(client, sid):
    topo = client.get(f"/sessions/{sid}/topology").json()
    return {(l["source"], l["target"]) for l in topo["links"]}


def test_add_and_delete_link(client):
    sid = twin_session(client)
    topo = client.get(f"/sessions/{sid}/topology").json()
    names = sorted(n["name"] for n in topo["nodes"])
    pairs = link_pairs(client, sid)
    a, b = next(
        (x, y) for x in names for y in names if x < y and (x, y) not in pairs
    )
    r = client.post(
        f"/sessions/{sid}/links", json={"source": a, "target": b, "length_km": 12.5}
    )
    assert r.status_code == 200
    added = r.json()["links"][0]
    assert added["segment"] == "manual" and added["length_km"] == 12.5
    assert (a, b) in link_pairs(client, sid)

    r = client.delete(f"/sessions/{sid}/links/{a}/{b}")
    assert r.status_code == 200
    assert (a, b) not in link_pairs(client, sid)


def test_duplicate_link_409(client):
    sid = twin_session(client)
    (a, b) = next(iter(link_pairs(client, sid)))
    r = client.post(
        f"/sessions/{sid}/links", json={"source": a, "target": b, "length_km": 5.0}
    )
    assert r.status_code == 409
    assert r.json()["error"]["code"] == "duplicate-link"


def test_link_unknown_node_404(client):
    sid = twin_session(client)
    r = client.post(
        f"/sessions/{sid}/links",
        json={"source": "GHOST", "target": "PHANTOM", "length_km": 1.0},
    )
    assert r.status_code == 404
    assert r.json()["error"]["code"] == "unknown-node"


def test_delete_unknown_link_404(client):
    sid = twin_session(client)
    topo = client.get(f"/sessions/{sid}/topology").json()
    names = sorted(n["name"] for n in topo["nodes"])
    pairs = link_pairs(client, sid)
    a, b = next((x, y) for x in names for y in names if x < y and (x, y) not in pairs)
    r = client.delete(f"/sessions/{sid}/links/{a}/{b}")
    assert r.status_code == 404
    assert r.json()["error"]["code"] == "unknown-link"


def test_delete_link_reports_survivability_warnings(client):
    sid = twin_session(client)
    # removing a twin link leaves the pair hanging off a single path
    topo = client.get(f"/sessions/{sid}/topology").json()
    twin = next(n["name"] for n in topo["nodes"] if n["name"].endswith("_TW"))
    base = twin[: -len("_TW")]
    pairs = link_pairs(client, sid)
    key = tuple(sorted((base, twin)))
    if key in pairs:
        r = client.delete(f"/sessions/{sid}/links/{key[0]}/{key[1]}")
        assert r.status_code == 200
        assert isinstance(r.json()["warnings"], list)


# ---------------------------------------------------------------------------
# clustering and metro structures
# ---------------------------------------------------------------------------


def test_cluster_then_metro_ring(client):
    sid = twin_session(client)
    r = client.post(f"/sessions/{sid}/clusters", json={"epsilon": 0.3})
    assert r.status_code == 200
    body = r.json()
    assert body["clusters"] and "transit_label" in body
    got = client.get(f"/sessions/{sid}/clusters").json()
    assert got["clusters"] == body["clusters"]

    label = next(
        int(k) for k, v in body["clusters"].items()
        if int(k) != body["transit_label"] and len(v) >= 2
    )
    r = client.post(
        f"/sessions/{sid}/metro",
        json={"cluster_label": label, "kind": "nring", "params": {"nrings": 2}},
    )
    assert r.status_code == 200
    payload = r.json()
    assert payload["structure_id"].startswith("ring-")
    members = body["clusters"][str(label)]
    ring_names = {n["name"] for n in payload["nodes"]}
    assert members[0] in ring_names and members[1] in ring_names
    assert all(n["segment"] == "metro-core-ring" for n in payload["nodes"] if n["name"] not in members)


def test_metro_mesh_kind(client):
    sid = twin_session(client)
    body = client.post(f"/sessions/{sid}/clusters", json={"epsilon": 0.3}).json()
    label = next(
        int(k) for k, v in body["clusters"].items()
        if int(k) != body["transit_label"] and len(v) >= 2
    )
    r = client.post(
        f"/sessions/{sid}/metro",
        json={"cluster_label": label, "kind": "mesh", "params": {"nodes": 8}},
    )
    assert r.status_code == 200
    assert r.json()["structure_id"].startswith("mesh-")
    assert len(r.json()["nodes"]) == 8


def test_metro_unknown_cluster_422(client):
    sid = twin_session(client)
    client.post(f"/sessions/{sid}/clusters", json={"epsilon": 0.3})
    r = client.post(f"/sessions/{sid}/metro", json={"cluster_label": 999})
    assert r.status_code == 422
    assert r.json()["error"]["code"] == "invalid-params"


def test_metro_on_transit_label_422(client):
    sid = twin_session(client)
    body = client.post(f"/sessions/{sid}/clusters", json={"epsilon": 0.3}).json()
    r = client.post(
        f"/sessions/{sid}/metro", json={"cluster_label": body["transit_label"]}
    )
    # either rejected as transit or as missing members, both invalid-params
    assert r.status_code == 422


def test_cluster_invalid_epsilon_422(client):
    sid = twin_session(client)
    r = client.post(f"/sessions/{sid}/clusters", json={"epsilon": -1.0})
    assert r.status_code == 422


# ---------------------------------------------------------------------------
# horseshoes
# ---------------------------------------------------------------------------


def test_horseshoe_roundtrip(client):
    sid = twin_session(client)
    (a, b) = next(iter(link_pairs(client, sid)))
    r = client.post(
        f"/sessions/{sid}/horseshoe", json={"end1": a, "end2": b, "hops": 4}
    )
    assert r.status_code == 200
    payload = r.json()
    assert payload["structure_id"].startswith("horseshoe-")
    assert len(payload["nodes"]) == 5  # hops + 1
    assert len(payload["links"]) == 4
    locals_ = [n for n in payload["nodes"] if n["name"] not in (a, b)]
    assert all(n["type"] == "local" for n in locals_)
    # offices were merged into the session workbook
    topo = client.get(f"/sessions/{sid}/topology").json()
    names = {n["name"] for n in topo["nodes"]}
    assert {n["name"] for n in payload["nodes"]} <= names


def test_horseshoe_unknown_end_404(client):
    sid = twin_session(client)
    r = client.post(
        f"/sessions/{sid}/horseshoe", json={"end1": "GHOST", "end2": "ALSO", "hops": 3}
    )
    assert r.status_code == 404
    assert r.json()["error"]["code"] == "unknown-node"


def test_horseshoe_same_ends_422(client):
    sid = twin_session(client)
    topo = client.get(f"/sessions/{sid}/topology").json()
    name = topo["nodes"][0]["name"]
    r = client.post(
        f"/sessions/{sid}/horseshoe", json={"end1": name, "end2": name, "hops": 3}
    )
    assert r.status_code == 422


# ---------------------------------------------------------------------------
# undo
# ---------------------------------------------------------------------------


def test_undo_restores_previous_workbook(client):
    sid = twin_session(client)
    before = client.get(f"/sessions/{sid}/export?format=json").content
    (a, b) = next(iter(link_pairs(client, sid)))
    client.delete(f"/sessions/{sid}/links/{a}/{b}")
    after = client.get(f"/sessions/{sid}/export?format=json").content
    assert after != before
    r = client.post(f"/sessions/{sid}/undo")
    assert r.status_code == 200
    restored = client.get(f"/sessions/{sid}/export?format=json").content
    assert restored == before


def test_undo_empty_409(client):
    sid = new_session(client)
    r = client.post(f"/sessions/{sid}/undo")
    assert r.status_code == 409
    assert r.json()["error"]["code"] == "nothing-to-undo"


def test_undo_stack_depth_two(client):
    sid = twin_session(client)
    client.post(f"/sessions/{sid}/clusters", json={"epsilon": 0.3})
    assert client.post(f"/sessions/{sid}/undo").status_code == 200
    assert client.post(f"/sessions/{sid}/undo").status_code == 200  # undoes the backbone
    assert client.post(f"/sessions/{sid}/undo").status_code == 409


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def test_export_json_is_canonical(client):
    sid = twin_session(client)
    one = client.get(f"/sessions/{sid}/export?format=json").content
    two = client.get(f"/sessions/{sid}/export?format=json").content
    assert one == two
    doc = json.loads(one)
    assert doc["format"] == "optinetgen-workbook"
    assert sorted(doc["tables"]) == ["clusters", "links", "nodes", "report", "structures"]


def test_export_add_delete_roundtrip_is_byte_identical(client):
    sid = twin_session(client)
    baseline = client.get(f"/sessions/{sid}/export?format=json").content
    topo = client.get(f"/sessions/{sid}/topology").json()
    names = sorted(n["name"] for n in topo["nodes"])
    pairs = link_pairs(client, sid)
    a, b = next((x, y) for x in names for y in names if x < y and (x, y) not in pairs)
    client.post(f"/sessions/{sid}/links", json={"source": a, "target": b, "length_km": 3.25})
    client.delete(f"/sessions/{sid}/links/{a}/{b}")
    final = client.get(f"/sessions/{sid}/export?format=json").content
    assert final == baseline
    # the csv export is deterministic too
    z1 = client.get(f"/sessions/{sid}/export?format=csv").content
    z2 = client.get(f"/sessions/{sid}/export?format=csv").content
    assert z1 == z2


def test_export_csv_zip_contents(client):
    sid = twin_session(client)
    blob = client.get(f"/sessions/{sid}/export?format=csv").content
    zf = zipfile.ZipFile(io.BytesIO(blob))
    assert sorted(zf.namelist()) == [
        "clusters.csv",
        "links.csv",
        "manifest.json",
        "nodes.csv",
        "report.csv",
        "structures.csv",
    ]
    nodes = zf.read("nodes.csv").decode()
    assert nodes.startswith("name,type,x,y,cluster,reference_node,segment\r\n")
    assert len(nodes.strip().splitlines()) == 7  # header + 6 nodes


def test_export_svg(client):
    sid = twin_session(client)
    r = client.get(f"/sessions/{sid}/export?format=svg")
    assert r.headers["content-type"].startswith("image/svg+xml")
    assert r.content.decode().count("<circle ") == 6


def test_export_unknown_format_422(client):
    sid = twin_session(client)
    assert client.get(f"/sessions/{sid}/export?format=pdf").status_code == 422


# ---------------------------------------------------------------------------
# snapshots and concurrency
# ---------------------------------------------------------------------------


def test_snapshot_dir(tmp_path):
    client = TestClient(create_app(snapshot_dir=str(tmp_path)))
    sid = twin_session(client)
    path = tmp_path / f"{sid}.json"
    assert path.exists()
    doc = json.loads(path.read_text())
    assert len(doc["tables"]["nodes"]) == 6


def test_concurrent_link_edits_stay_consistent(client):
    sid = twin_session(client, nodes=10, seed=3)
    topo = client.get(f"/sessions/{sid}/topology").json()
    names = sorted(n["name"] for n in topo["nodes"])
    pairs = link_pairs(client, sid)
    want = [
        (x, y) for x in names for y in names if x < y and (x, y) not in pairs
    ][:8]
    statuses = []

    def add(pair):
        r = client.post(
            f"/sessions/{sid}/links",
            json={"source": pair[0], "target": pair[1], "length_km": 1.0},
        )
        statuses.append(r.status_code)

    threads = [threading.Thread(target=add, args=(p,)) for p in want]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert statuses.count(200) == len(want)
    after = link_pairs(client, sid)
    assert set(want) <= after
    # every link row is unique after the concurrent burst
    doc = json.loads(client.get(f"/sessions/{sid}/export?format=json").content)
    rows = [(r["source"], r["target"]) for r in doc["tables"]["links"]]
    assert len(rows) == len(set(rows))
