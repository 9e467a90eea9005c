"""Command line front end.

Every generator, the clustering stage, validation campaigns, and the
integrated flow are reachable as subcommands, so full scenes can be
produced in batch without the web UI.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .backbone import (
    BackboneParams,
    STRATEGY_DEFAULT,
    STRATEGY_REGION,
    STRATEGY_TWIN,
    generate_backbone,
)
from .clustering import ClusterParams, MODE_DISTANCE, MODE_DISTANCE_CONNECTIVITY, cluster_nodes
from .errors import InvalidParamsError, TopologyError
from .flow import (
    FlowConfig,
    backbone_params_from_dict,
    horseshoe_spec_from_params,
    mesh_params_from_dict,
    parse_degrees,
    parse_ranges,
    parse_type_mix,
    ring_spec_from_params,
    run_flow,
)
from .layout import LAYOUT_KAMADA_KAWAI, LAYOUT_SPECTRAL, LAYOUT_SPRING
from .metro_core import generate_metro_mesh, generate_nring
from .metro_agg import generate_horseshoe
from .validation import (
    DEFAULT_BACKBONE_DEGREES,
    DEFAULT_BACKBONE_RANGES,
    best_of_n,
    validate_topology,
)
from .workbook import Workbook, export_svg, load_workbook, save_workbook

OUT_ENV = "OPTINETGEN_OUT"

_LAYOUTS = (LAYOUT_SPRING, LAYOUT_KAMADA_KAWAI, LAYOUT_SPECTRAL)


def _resolve_out(path: str | None, default_name: str) -> str:
    if path:
        return path
    base = os.environ.get(OUT_ENV, ".")
    return os.path.join(base, default_name)


def _write_workbook(wb: Workbook, out: str, fmt: str):
    save_workbook(wb, out, fmt=fmt)
    print(f"workbook written to {out}")


def _maybe_svg(wb: Workbook, svg_path: str | None):
    if not svg_path:
        return
    with open(svg_path, "w") as fh:
        fh.write(export_svg(wb))
        fh.write("\n")
    print(f"image written to {svg_path}")


def _degrees_option(args) -> str | dict | None:
    """Inline `d:p` pairs win over a JSON file when both are given."""
    if getattr(args, "degrees", None):
        return args.degrees
    path = getattr(args, "degrees_file", None)
    if path:
        with open(path) as fh:
            return json.load(fh)
    return None


def _backbone_param_dict(args) -> dict:
    params: dict = {"nodes": args.nodes, "seed": args.seed}
    if args.strategy == STRATEGY_REGION:
        for key in ("regions", "avg_degree", "min_node_distance", "alpha", "beta"):
            value = getattr(args, key)
            if value is not None:
                params[key] = value
        if args.plane:
            w, _, h = args.plane.partition("x")
            params["plane"] = (float(w), float(h))
        return params
    degrees = _degrees_option(args)
    if degrees is not None:
        params["degrees"] = degrees
    if args.type_mix:
        params["type_mix"] = args.type_mix
    if args.layout:
        params["layout"] = args.layout
    if args.ranges:
        params["distance_ranges"] = args.ranges
    if args.fit:
        params["fit_distances"] = True
    return params


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_backbone(args) -> int:
    params = backbone_params_from_dict(args.strategy, _backbone_param_dict(args))
    topo = generate_backbone(args.strategy, params)
    wb = Workbook.from_topology(topo)
    wb.add_structure("backbone", topo.segment, {"strategy": args.strategy, "nodes": params.nodes, "seed": args.seed})
    if isinstance(params, BackboneParams):
        report = validate_topology(topo, params.degrees, params.distance_ranges)
        print(f"degree MAPE {report.degree_mape:.4f}  distance MAPE {report.distance_mape:.4f}")
    print(f"{topo.number_of_nodes} nodes, {topo.number_of_links} links")
    out = _resolve_out(args.out, "backbone")
    _write_workbook(wb, out, args.format)
    _maybe_svg(wb, args.svg)
    return 0


def _cmd_cluster(args) -> int:
    wb = load_workbook(getattr(args, "in"))
    topo = wb.to_topology()
    params = ClusterParams(
        epsilon=args.epsilon,
        min_points=args.min_points,
        mode=args.mode,
        avoid_single=args.avoid_single,
    )
    assignment = cluster_nodes(topo, params)
    wb.set_clusters(assignment)
    clusters = {l for l in assignment.labels.values() if l != assignment.transit_label}
    print(f"{len(clusters)} clusters (transit label {assignment.transit_label})")
    for warning in assignment.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    out = args.out or getattr(args, "in")
    _write_workbook(wb, out, args.format)
    return 0


def _cmd_metro_mesh(args) -> int:
    params: dict = {"nodes": args.nodes, "seed": args.seed}
    degrees = _degrees_option(args)
    if degrees is not None:
        params["degrees"] = degrees
    if args.type_mix:
        params["type_mix"] = args.type_mix
    if args.layout:
        params["layout"] = args.layout
    if args.ranges:
        params["distance_ranges"] = args.ranges
    if args.fit:
        params["fit_distances"] = True
    if args.prefix:
        params["name_prefix"] = args.prefix
    main_nodes = args.main_nodes.split(",") if args.main_nodes else None
    mesh_params = mesh_params_from_dict(params, main_nodes=main_nodes)
    topo = generate_metro_mesh(mesh_params)
    wb = Workbook.from_topology(topo)
    wb.add_structure("metro-mesh", topo.segment, {"nodes": mesh_params.nodes, "seed": args.seed})
    print(f"{topo.number_of_nodes} nodes, {topo.number_of_links} links")
    out = _resolve_out(args.out, "metro-mesh")
    _write_workbook(wb, out, args.format)
    _maybe_svg(wb, args.svg)
    return 0


def _cmd_metro_rings(args) -> int:
    rng = np.random.default_rng(args.seed)
    params: dict = {"seed": args.seed}
    if args.nrings is not None:
        params["nrings"] = args.nrings
    if args.pref:
        params["pref"] = args.pref
    if args.var is not None:
        params["var"] = args.var
    if args.ring_defaults:
        params["ring_defaults"] = args.ring_defaults
    spec = ring_spec_from_params(args.end1, args.end2, params, rng)
    topo = generate_nring(spec)
    wb = Workbook.from_topology(topo)
    wb.add_structure("rings", topo.segment, {"end1": spec.end1, "end2": spec.end2, "nrings": spec.nrings, "seed": args.seed})
    print(f"{spec.nrings}-ring structure: {topo.number_of_nodes} nodes, {topo.number_of_links} links")
    out = _resolve_out(args.out, "metro-rings")
    _write_workbook(wb, out, args.format)
    _maybe_svg(wb, args.svg)
    return 0


def _cmd_horseshoe(args) -> int:
    rng = np.random.default_rng(args.seed)
    params: dict = {"seed": args.seed}
    if args.hops is not None:
        params["hops"] = args.hops
    if args.pref:
        params["pref"] = args.pref
    spec = horseshoe_spec_from_params(args.end1, args.end2, params, rng)
    topo = generate_horseshoe(spec)
    total = sum(l.length_km for l in topo.links())
    wb = Workbook.from_topology(topo)
    wb.add_structure("horseshoe", topo.segment, {"end1": spec.end1, "end2": spec.end2, "hops": spec.hops, "seed": args.seed})
    print(f"horseshoe with {spec.hops} hops, total {total:.1f} km")
    out = _resolve_out(args.out, "horseshoe")
    _write_workbook(wb, out, args.format)
    _maybe_svg(wb, args.svg)
    return 0


def _cmd_flow(args) -> int:
    config = FlowConfig.from_file(args.config)
    if args.seed is not None:
        config.seed = args.seed
    if args.out:
        config.out = args.out
    if args.format:
        config.out_format = args.format
    result = run_flow(config)
    print(
        f"flow: {result.cluster_count} clusters, "
        f"{len(result.structure_ids)} structures, "
        f"{len(result.workbook.nodes)} nodes, {len(result.workbook.links)} links"
    )
    for warning in result.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    out = _resolve_out(config.out, "flow")
    _write_workbook(result.workbook, out, config.out_format)
    _maybe_svg(result.workbook, args.svg)
    return 0


def _campaign_csv(result, metric: str) -> str:
    report = result.best_report
    lines = ["section,key,target,achieved"]
    tables = []
    if report.degree_target is not None:
        tables.append(("degree", report.degree_target, report.degree_achieved))
    if report.distance_target is not None:
        tables.append(("distance", report.distance_target, report.distance_achieved))
    for section, target, achieved in tables:
        for key in target:
            lines.append(f"{section},{key},{target[key]:.6f},{achieved.get(key, 0.0):.6f}")
    lines.append(f"summary,metric,,{metric}")
    lines.append(f"summary,best_mape,,{result.best_score:.6f}")
    lines.append(f"summary,average_mape,,{result.average_score:.6f}")
    lines.append(f"summary,best_seed,,{result.best_seed}")
    lines.append(f"summary,iterations,,{len(result.scores)}")
    return "\n".join(lines) + "\n"


def _cmd_validate(args) -> int:
    params = backbone_params_from_dict(args.strategy, _backbone_param_dict(args))

    def build(seed: int):
        if args.strategy == STRATEGY_REGION:
            p = params.__class__(**{**params.__dict__, "seed": seed})
        else:
            p = BackboneParams(**{**params.__dict__, "seed": seed})
        return generate_backbone(args.strategy, p)

    degrees = params.degrees if isinstance(params, BackboneParams) else DEFAULT_BACKBONE_DEGREES
    ranges = params.distance_ranges if isinstance(params, BackboneParams) else DEFAULT_BACKBONE_RANGES
    result = best_of_n(
        build,
        args.n,
        metric=args.metric,
        degrees=degrees,
        ranges=ranges,
        base_seed=args.seed,
    )
    print(
        f"best MAPE {result.best_score:.4f} (iteration {result.best_index}, seed {result.best_seed}), "
        f"average {result.average_score:.4f} over {len(result.scores)} runs"
    )
    text = _campaign_csv(result, args.metric)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"campaign table written to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_render(args) -> int:
    wb = load_workbook(getattr(args, "in"))
    out = _resolve_out(args.out, "topology.svg")
    with open(out, "w") as fh:
        fh.write(export_svg(wb, labels=args.labels))
        fh.write("\n")
    print(f"image written to {out}")
    return 0


def _cmd_serve(args) -> int:
    from .service import create_app

    app = create_app(snapshot_dir=args.snapshot_dir)
    if args.dump_openapi:
        text = json.dumps(app.openapi(), indent=2, sort_keys=True)
        if args.dump_openapi == "-":
            sys.stdout.write(text + "\n")
        else:
            with open(args.dump_openapi, "w") as fh:
                fh.write(text + "\n")
            print(f"OpenAPI description written to {args.dump_openapi}")
        return 0
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# parser assembly
# ---------------------------------------------------------------------------


def _add_output_options(p: argparse.ArgumentParser, with_svg: bool = True):
    p.add_argument("--out", help=f"output path (default from ${OUT_ENV})")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="workbook format")
    if with_svg:
        p.add_argument("--svg", help="also render an SVG image to this path")


def _add_distribution_options(p: argparse.ArgumentParser):
    p.add_argument("--degrees", help="degree distribution as d:p pairs, e.g. 2:0.227,3:0.409,...")
    p.add_argument("--degrees-file", help="degree distribution as a JSON object")
    p.add_argument("--type-mix", help="node type mix as type:fraction pairs")
    p.add_argument("--layout", choices=_LAYOUTS, help="layout strategy")
    p.add_argument("--ranges", help="distance ranges as lo-hi:p pairs, e.g. 0-50:0.155,...")
    p.add_argument("--fit", action="store_true", help="search a scale factor that best fits the ranges")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optinetgen",
        description="Synthesize survivable optical network topologies from statistical targets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("backbone", help="generate a backbone mesh")
    p.add_argument("--strategy", choices=(STRATEGY_DEFAULT, STRATEGY_TWIN, STRATEGY_REGION), default=STRATEGY_DEFAULT)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    _add_distribution_options(p)
    p.add_argument("--regions", type=int, help="region count (region strategy)")
    p.add_argument("--avg-degree", type=float, help="target average degree (region strategy)")
    p.add_argument("--min-node-distance", type=float, help="minimum node spacing in km (region strategy)")
    p.add_argument("--alpha", type=float, help="distance decay (region strategy)")
    p.add_argument("--beta", type=float, help="link probability scale (region strategy)")
    p.add_argument("--plane", help="plane size as WIDTHxHEIGHT km (region strategy)")
    _add_output_options(p)
    p.set_defaults(func=_cmd_backbone)

    p = sub.add_parser("cluster", help="cluster workbook nodes into metro regions")
    p.add_argument("--in", required=True, help="input workbook path")
    p.add_argument("--epsilon", type=float, required=True, help="neighborhood radius")
    p.add_argument("--min-points", type=int, default=1)
    p.add_argument("--mode", choices=(MODE_DISTANCE, MODE_DISTANCE_CONNECTIVITY), default=MODE_DISTANCE)
    p.add_argument("--avoid-single", action="store_true", help="merge singleton clusters into a neighbor")
    _add_output_options(p, with_svg=False)
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("metro-mesh", help="generate a metro core mesh")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--main-nodes", help="comma separated names of the main offices")
    p.add_argument("--prefix", help="name prefix for generated offices")
    p.add_argument("--seed", type=int, default=0)
    _add_distribution_options(p)
    _add_output_options(p)
    p.set_defaults(func=_cmd_metro_mesh)

    p = sub.add_parser("metro-rings", help="generate an N-ring metro core structure")
    p.add_argument("--end1", required=True)
    p.add_argument("--end2", required=True)
    p.add_argument("--nrings", type=int, help="ring count (sampled from the occurrence table when omitted)")
    p.add_argument("--pref", help="name prefix for offices")
    p.add_argument("--var", type=float, help="total length variation fraction")
    p.add_argument("--ring-defaults", help="JSON file with ring presets")
    p.add_argument("--seed", type=int, default=0)
    _add_output_options(p)
    p.set_defaults(func=_cmd_metro_rings)

    p = sub.add_parser("horseshoe", help="generate a metro aggregation horseshoe")
    p.add_argument("--end1", required=True)
    p.add_argument("--end2", required=True)
    p.add_argument("--hops", type=int, help="hop count (sampled when omitted)")
    p.add_argument("--pref", help="name prefix for local offices")
    p.add_argument("--seed", type=int, default=0)
    _add_output_options(p)
    p.set_defaults(func=_cmd_horseshoe)

    p = sub.add_parser("flow", help="run the integrated backbone-to-aggregation flow")
    p.add_argument("--config", required=True, help="flow configuration JSON")
    p.add_argument("--seed", type=int, help="override the config seed")
    _add_output_options(p)
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("validate", help="run a best-of-N generation campaign")
    p.add_argument("--strategy", choices=(STRATEGY_DEFAULT, STRATEGY_TWIN, STRATEGY_REGION), default=STRATEGY_DEFAULT)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--n", type=int, default=100, help="iteration count")
    p.add_argument("--metric", choices=("degree", "distance"), default="degree")
    p.add_argument("--seed", type=int, default=0, help="base seed; iteration i uses seed base+i")
    _add_distribution_options(p)
    p.add_argument("--regions", type=int)
    p.add_argument("--avg-degree", type=float)
    p.add_argument("--min-node-distance", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--plane")
    p.add_argument("--out", help="write the campaign table CSV here (stdout otherwise)")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("render", help="render a workbook to SVG")
    p.add_argument("--in", required=True, help="input workbook path")
    p.add_argument("--labels", action="store_true", help="draw node names")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--snapshot-dir", help="persist session workbooks here on every mutation")
    p.add_argument("--dump-openapi", help="write the OpenAPI description to this path ('-' for stdout) and exit")
    p.set_defaults(func=_cmd_serve)

    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InvalidParamsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TopologyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
