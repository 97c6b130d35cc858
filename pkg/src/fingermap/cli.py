"""Command-line entry points.

Subcommands: map (replay a trace through a technique), metrics (score a
mapped trace against a layout and task list), layout (generate targets
and task sequences), synth (generate synthetic traces), serve (the live
session endpoint), compare (map + metrics across techniques, printed
side by side). Parameter flags mirror MappingParams field names; set
FINGERMAP_LOG=debug|info|warning for verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import metrics as metrics_mod
from . import serve as serve_mod
from . import task_lab, trace_io
from .core import BodyCalibration, Vec3
from .errors import FingermapError
from .mapping import TECH_RAY, TECHNIQUES, MappingParams, MappingSession, merge_params

log = logging.getLogger("fingermap")

_PARAM_FLAGS = (
    ("retraction_min", float),
    ("extension_deadzone", float),
    ("extension_gain", float),
    ("arm_length", float),
    ("reach_floor", float),
    ("ray_max_length", float),
    ("filter_stage", str),
)
_EURO_FLAGS = (("min_cutoff", float), ("beta", float), ("d_cutoff", float))
_TRIGGER_FLAGS = (
    ("thumb_press_dist", float),
    ("thumb_release_dist", float),
    ("grab_press_dist", float),
    ("grab_release_dist", float),
)


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("mapping parameters")
    group.add_argument("--technique", choices=TECHNIQUES)
    for name, kind in _PARAM_FLAGS:
        group.add_argument(f"--{name.replace('_', '-')}", type=kind, dest=name)
    for name, kind in _EURO_FLAGS:
        group.add_argument(f"--euro-{name.replace('_', '-')}", type=kind, dest=f"euro_{name}")
    for name, kind in _TRIGGER_FLAGS:
        group.add_argument(f"--{name.replace('_', '-')}", type=kind, dest=f"trigger_{name}")


def _params_patch(args: argparse.Namespace) -> dict:
    patch: dict = {}
    if getattr(args, "technique", None) is not None:
        patch["technique"] = args.technique
    for name, _ in _PARAM_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            patch[name] = value
    for scope, flags in (("euro", _EURO_FLAGS), ("trigger", _TRIGGER_FLAGS)):
        sub = {
            name: getattr(args, f"{scope}_{name}")
            for name, _ in flags
            if getattr(args, f"{scope}_{name}", None) is not None
        }
        if sub:
            patch[scope] = sub
    return patch


def _load_calibration(path: str | None) -> BodyCalibration:
    if path is None:
        return BodyCalibration()
    with open(path, encoding="utf-8") as f:
        return trace_io.calibration_from_dict(json.load(f))


def _parse_point(text: str) -> Vec3:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected x,y,z")
    return Vec3(float(parts[0]), float(parts[1]), float(parts[2]))


def _parse_box(text: str) -> tuple[Vec3, Vec3]:
    lo, _, hi = text.partition(":")
    return _parse_point(lo), _parse_point(hi)


# --- subcommands ------------------------------------------------------------


def cmd_map(args: argparse.Namespace) -> int:
    with open(args.trace_in, encoding="utf-8") as f:
        header, calib, params, frames = trace_io.read_trace(f)
    params = merge_params(params, _params_patch(args))

    layout_targets = None
    if args.layout:
        with open(args.layout, encoding="utf-8") as f:
            layout_targets = trace_io.read_layout(f).spheres()

    session = MappingSession(calib, params, targets=layout_targets)
    mapped: list[trace_io.MappedFrame] = []
    skipped = 0
    events = 0
    for index, frame in enumerate(frames):
        try:
            result = session.step(frame)
        except FingermapError as e:
            skipped += 1
            log.warning("line %d: %s; frame skipped", index + 2, e)
            continue
        events += len(result.events)
        mapped.append(trace_io.mapped_from_result(result, frame))

    with open(args.trace_out, "w", encoding="utf-8") as f:
        trace_io.write_mapped_trace(
            f, mapped, calib, params, created_at=header.get("created_at", trace_io.EPOCH)
        )
    print(
        f"{params.technique}: mapped {len(mapped)} frames"
        f" ({skipped} skipped), {events} events -> {args.trace_out}"
    )
    return 0


def _score_mapped(
    mapped: list[trace_io.MappedFrame],
    layout: task_lab.TargetLayout,
    tasks: list[task_lab.TaskSpec],
    side: str,
    technique: str,
    ray_pause: str,
    outlier_sd: float | None,
    confine: tuple[Vec3, Vec3] | None,
) -> dict:
    pause = ray_pause == "on" or (ray_pause == "auto" and technique == TECH_RAY)
    times = [m.t for m in mapped]
    wrists = [m.physical_wrist[side] for m in mapped]
    pointers = [m.pointers[side] for m in mapped]
    records = metrics_mod.segment_tasks(times, wrists, pointers, tasks, layout, ray_pause=pause)
    summary = metrics_mod.summarize(records, outlier_sd=outlier_sd)

    payload: dict = {
        "technique": technique,
        "summary": {
            "tasks": summary.tasks,
            "successes": summary.successes,
            "outliers_dropped": summary.outliers_dropped,
            "mean_physical_ratio": _maybe_round(summary.mean_physical_ratio),
            "mean_virtual_ratio": _maybe_round(summary.mean_virtual_ratio),
            "mean_duration": _maybe_round(summary.mean_duration),
        },
        "tasks": [trace_io.record_row(i, r) for i, r in enumerate(records)],
    }

    tips = [(m.t, m.physical_index_tip[side]) for m in mapped if side in m.physical_index_tip]
    if tips and tips[-1][0] - tips[0][0] >= 1.0:
        volume = metrics_mod.interaction_volume(tips)
        payload["interaction_volume"] = {
            "volume": trace_io.round9(volume.volume),
            "box_min": [trace_io.round9(v) for v in volume.box_min.to_list()],
            "box_max": [trace_io.round9(v) for v in volume.box_max.to_list()],
            "samples": volume.samples,
        }
    if confine is not None:
        joint_sets = []
        for m in mapped:
            points = list(m.physical_wrist.values()) + list(m.physical_index_tip.values())
            joint_sets.append(points)
        count, intervals = metrics_mod.confinement_violations(times, joint_sets, *confine)
        payload["confinement"] = {
            "violations": count,
            "intervals": [[trace_io.round9(a), trace_io.round9(b)] for a, b in intervals],
        }
    payload["_records"] = records
    return payload


def _maybe_round(x: float) -> float | None:
    return None if x != x else trace_io.round9(x)


def _write_results(payload: dict, out_base: str) -> None:
    records = payload.pop("_records")
    with open(out_base + ".json", "w", encoding="utf-8") as f:
        trace_io.write_results_json(f, payload)
    with open(out_base + ".csv", "w", encoding="utf-8") as f:
        trace_io.write_results_csv(f, records)


def cmd_metrics(args: argparse.Namespace) -> int:
    with open(args.mapped, encoding="utf-8") as f:
        header, _calib, params, mapped = trace_io.read_mapped_trace(f)
    if not mapped:
        print("mapped trace has no frames", file=sys.stderr)
        return 1
    with open(args.layout, encoding="utf-8") as f:
        layout = trace_io.read_layout(f)
    with open(args.tasks, encoding="utf-8") as f:
        tasks = trace_io.read_tasks(f)
    for task in tasks:
        if task.start_id >= len(layout.targets) or task.end_id >= len(layout.targets):
            print(
                f"task references target {max(task.start_id, task.end_id)}"
                f" but the layout has only {len(layout.targets)}",
                file=sys.stderr,
            )
            return 1

    payload = _score_mapped(
        mapped,
        layout,
        tasks,
        side=args.side,
        technique=header.get("technique", params.technique),
        ray_pause=args.ray_pause,
        outlier_sd=args.outlier_sd,
        confine=args.confine,
    )
    summary = payload["summary"]
    out_base = args.out or str(Path(args.mapped).with_suffix(""))
    _write_results(payload, out_base)
    print(
        f"{payload['technique']}: {summary['successes']}/{summary['tasks']} tasks,"
        f" physical ratio {summary['mean_physical_ratio']},"
        f" virtual ratio {summary['mean_virtual_ratio']}"
        f" -> {out_base}.json, {out_base}.csv"
    )
    return 0


def cmd_layout(args: argparse.Namespace) -> int:
    layout = task_lab.generate_layout(
        args.arm_span, radius=args.radius, swap_layer_widths=args.swap_widths
    )
    with open(args.out_layout, "w", encoding="utf-8") as f:
        trace_io.write_layout(f, layout)
    message = f"layout: {len(layout.targets)} targets -> {args.out_layout}"
    if args.out_tasks:
        tasks = task_lab.make_task_sequence(layout, n_tasks=args.n_tasks, seed=args.seed)
        with open(args.out_tasks, "w", encoding="utf-8") as f:
            trace_io.write_tasks(f, tasks, seed=args.seed)
        message += f"; {len(tasks)} tasks -> {args.out_tasks}"
    print(message)
    return 0


def cmd_synth_reach(args: argparse.Namespace) -> int:
    spec = task_lab.ReachSpec(
        start=args.start,
        end=args.end,
        duration=args.duration,
        rate=args.rate,
        side=args.side,
        curl_start=args.curl_start,
        curl_end=args.curl_end,
    )
    frames = task_lab.synth_reach(spec)
    calib = _load_calibration(args.calibration)
    params = merge_params(MappingParams(), _params_patch(args))
    with open(args.out, "w", encoding="utf-8") as f:
        trace_io.write_trace(f, frames, calib, params)
    print(f"reach: {len(frames)} frames -> {args.out}")
    return 0


def cmd_synth_study(args: argparse.Namespace) -> int:
    with open(args.layout, encoding="utf-8") as f:
        layout = trace_io.read_layout(f)
    with open(args.tasks, encoding="utf-8") as f:
        tasks = trace_io.read_tasks(f)
    calib = _load_calibration(args.calibration)
    if args.calibration is None:
        calib = BodyCalibration(arm_span=layout.arm_span)
    params = merge_params(MappingParams(), _params_patch(args))
    frames = task_lab.simulate_study(
        params.technique, layout, tasks, calib, params, side=args.side, rate=args.rate
    )
    with open(args.out, "w", encoding="utf-8") as f:
        trace_io.write_trace(f, frames, calib, params)
    print(f"study ({params.technique}): {len(frames)} frames -> {args.out}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    calib = _load_calibration(args.calibration)
    params = merge_params(MappingParams(), _params_patch(args))
    ui_dir = Path(args.ui) if args.ui else None
    serve_mod.run(args.host, args.port, calib, params, ui_dir=ui_dir)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    with open(args.layout, encoding="utf-8") as f:
        layout = trace_io.read_layout(f)
    with open(args.tasks, encoding="utf-8") as f:
        tasks = trace_io.read_tasks(f)
    calib = _load_calibration(args.calibration)
    if args.calibration is None:
        calib = BodyCalibration(arm_span=layout.arm_span)
    techniques = [t.strip() for t in args.techniques.split(",") if t.strip()]
    for tech in techniques:
        if tech not in TECHNIQUES:
            print(f"unknown technique {tech!r}", file=sys.stderr)
            return 1

    rows = []
    for tech in techniques:
        params = merge_params(MappingParams(), {**_params_patch(args), "technique": tech})
        frames = task_lab.simulate_study(
            tech, layout, tasks, calib, params, side=args.side, rate=args.rate
        )
        session = MappingSession(calib, params, targets=layout.spheres())
        mapped = [trace_io.mapped_from_result(session.step(f), f) for f in frames]
        payload = _score_mapped(
            mapped,
            layout,
            tasks,
            side=args.side,
            technique=tech,
            ray_pause="auto",
            outlier_sd=args.outlier_sd,
            confine=None,
        )
        if args.out_dir:
            out = Path(args.out_dir)
            out.mkdir(parents=True, exist_ok=True)
            _write_results(payload, str(out / tech))
        else:
            payload.pop("_records")
        rows.append(payload)

    header = f"{'technique':<10} {'tasks':>7} {'phys_ratio':>11} {'virt_ratio':>11} {'volume_m3':>10}"
    print(header)
    print("-" * len(header))
    for payload in rows:
        s = payload["summary"]
        volume = payload.get("interaction_volume", {}).get("volume")
        print(
            f"{payload['technique']:<10} {s['successes']:>3}/{s['tasks']:<3}"
            f" {_fmt(s['mean_physical_ratio']):>11} {_fmt(s['mean_virtual_ratio']):>11}"
            f" {_fmt(volume):>10}"
        )
    return 0


def _fmt(x: float | None) -> str:
    return "-" if x is None else f"{x:.3f}"


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fingermap",
        description="Finger-motion to virtual-arm retargeting engine and study tooling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_map = sub.add_parser("map", help="replay a hand trace through a mapping technique")
    p_map.add_argument("trace_in")
    p_map.add_argument("trace_out")
    p_map.add_argument("--layout", help="target layout for the ray pointer")
    _add_param_flags(p_map)
    p_map.set_defaults(func=cmd_map)

    p_metrics = sub.add_parser("metrics", help="score a mapped trace against a task list")
    p_metrics.add_argument("mapped")
    p_metrics.add_argument("--layout", required=True)
    p_metrics.add_argument("--tasks", required=True)
    p_metrics.add_argument("--out", help="output base path (.json/.csv appended)")
    p_metrics.add_argument("--side", default="right", choices=("left", "right"))
    p_metrics.add_argument("--outlier-sd", type=float, default=None)
    p_metrics.add_argument("--ray-pause", choices=("auto", "on", "off"), default="auto")
    p_metrics.add_argument(
        "--confine",
        type=_parse_box,
        default=None,
        metavar="X0,Y0,Z0:X1,Y1,Z1",
        help="motion box; violations counted in results",
    )
    p_metrics.set_defaults(func=cmd_metrics)

    p_layout = sub.add_parser("layout", help="generate the target wall and task sequence")
    p_layout.add_argument("--arm-span", type=float, required=True)
    p_layout.add_argument("--radius", type=float, default=0.03)
    p_layout.add_argument("--swap-widths", action="store_true")
    p_layout.add_argument("--out-layout", required=True)
    p_layout.add_argument("--out-tasks")
    p_layout.add_argument("--n-tasks", type=int, default=30)
    p_layout.add_argument("--seed", type=int, default=0)
    p_layout.set_defaults(func=cmd_layout)

    p_synth = sub.add_parser("synth", help="generate synthetic hand traces")
    synth_sub = p_synth.add_subparsers(dest="mode", required=True)

    p_reach = synth_sub.add_parser("reach", help="one straight minimum-jerk reach")
    p_reach.add_argument("--start", type=_parse_point, required=True, metavar="X,Y,Z")
    p_reach.add_argument("--end", type=_parse_point, required=True, metavar="X,Y,Z")
    p_reach.add_argument("--duration", type=float, default=1.0)
    p_reach.add_argument("--rate", type=float, default=90.0)
    p_reach.add_argument("--side", default="right", choices=("left", "right"))
    p_reach.add_argument("--curl-start", type=float, default=0.0)
    p_reach.add_argument("--curl-end", type=float, default=0.0)
    p_reach.add_argument("--calibration", help="calibration JSON file")
    p_reach.add_argument("--out", required=True)
    _add_param_flags(p_reach)
    p_reach.set_defaults(func=cmd_synth_reach)

    p_study = synth_sub.add_parser("study", help="technique-aware synthetic user session")
    p_study.add_argument("--layout", required=True)
    p_study.add_argument("--tasks", required=True)
    p_study.add_argument("--rate", type=float, default=90.0)
    p_study.add_argument("--side", default="right", choices=("left", "right"))
    p_study.add_argument("--calibration", help="calibration JSON file")
    p_study.add_argument("--out", required=True)
    _add_param_flags(p_study)
    p_study.set_defaults(func=cmd_synth_study)

    p_serve = sub.add_parser("serve", help="run the streaming session endpoint")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--ui", help="static UI directory to serve over HTTP")
    p_serve.add_argument("--calibration", help="calibration JSON file")
    _add_param_flags(p_serve)
    p_serve.set_defaults(func=cmd_serve)

    p_cmp = sub.add_parser("compare", help="simulate, map, and score several techniques")
    p_cmp.add_argument("--layout", required=True)
    p_cmp.add_argument("--tasks", required=True)
    p_cmp.add_argument("--techniques", default="attach,direct,hand,ray")
    p_cmp.add_argument("--rate", type=float, default=90.0)
    p_cmp.add_argument("--side", default="right", choices=("left", "right"))
    p_cmp.add_argument("--outlier-sd", type=float, default=None)
    p_cmp.add_argument("--calibration", help="calibration JSON file")
    p_cmp.add_argument("--out-dir", help="write per-technique results files here")
    _add_param_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("FINGERMAP_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FingermapError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
