"""Command-line workflows: map, metrics, layout, synth, and compare."""

from __future__ import annotations

import json
import logging
from collections import Counter
from pathlib import Path

import pytest

from conftest import frame_at
from fingermap.cli import main
from fingermap.core import BodyCalibration, Vec3
from fingermap.mapping import TECH_DIRECT, TECH_HAND, MappingParams
from fingermap.trace_io import read_mapped_trace, read_layout, read_tasks, write_trace

CLASS_QUOTA = 10


def write_input_trace(path: Path, n: int = 20, technique: str = TECH_HAND) -> None:
    frames = [
        frame_at(i / 60.0, Vec3(0.18, 0.9, 0.3 + 0.002 * i)) for i in range(n)
    ]
    with open(path, "w", encoding="utf-8") as f:
        write_trace(f, frames, BodyCalibration(), MappingParams(technique=technique))


def read_mapped(path: Path):
    with open(path, encoding="utf-8") as f:
        return read_mapped_trace(f)


# --- map ---------------------------------------------------------------------


def test_map_passthrough_keeps_wrist(tmp_path: Path, capsys) -> None:
    src, dst = tmp_path / "in.fmtrace", tmp_path / "out.fmtrace"
    write_input_trace(src)
    assert main(["map", str(src), str(dst)]) == 0
    _, _, _, mapped = read_mapped(dst)
    assert len(mapped) == 20
    for m in mapped:
        assert m.poses["right"].wrist == m.physical_wrist["right"]
    assert "mapped 20 frames" in capsys.readouterr().out


def test_map_is_byte_deterministic(tmp_path: Path) -> None:
    src = tmp_path / "in.fmtrace"
    write_input_trace(src, technique=TECH_DIRECT)
    out_a, out_b = tmp_path / "a.fmtrace", tmp_path / "b.fmtrace"
    assert main(["map", str(src), str(out_a)]) == 0
    assert main(["map", str(src), str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_map_technique_flag_overrides_header(tmp_path: Path) -> None:
    src, dst = tmp_path / "in.fmtrace", tmp_path / "out.fmtrace"
    write_input_trace(src, technique=TECH_HAND)
    assert main(["map", str(src), str(dst), "--technique", "attach"]) == 0
    header, _, params, mapped = read_mapped(dst)
    assert header["technique"] == "attach"
    assert params.technique == "attach"
    shoulder = mapped[0].poses["right"].shoulder
    assert mapped[0].poses["right"].wrist.distance(shoulder) > 0.3


def test_map_skips_corrupt_frame_and_names_line(tmp_path: Path, caplog) -> None:
    src, dst = tmp_path / "in.fmtrace", tmp_path / "out.fmtrace"
    write_input_trace(src, technique=TECH_DIRECT)
    lines = src.read_text().splitlines()
    broken = json.loads(lines[11])
    del broken["hands"]["right"]["joints"]["index_pip"]
    lines[11] = json.dumps(broken, sort_keys=True, separators=(",", ":"))
    src.write_text("\n".join(lines) + "\n")
    with caplog.at_level(logging.WARNING, logger="fingermap"):
        assert main(["map", str(src), str(dst)]) == 0
    assert any("line 12" in r.message and "skipped" in r.message for r in caplog.records)
    _, _, _, mapped = read_mapped(dst)
    assert len(mapped) == 19


def test_map_missing_input_fails(tmp_path: Path, capsys) -> None:
    assert main(["map", str(tmp_path / "nope.fmtrace"), str(tmp_path / "out")]) == 1
    assert "error:" in capsys.readouterr().err


# --- layout ------------------------------------------------------------------


def test_layout_writes_targets_and_balanced_tasks(tmp_path: Path) -> None:
    layout_path, tasks_path = tmp_path / "wall.fmlayout", tmp_path / "seq.fmtasks"
    args = [
        "layout",
        "--arm-span",
        "1.7",
        "--out-layout",
        str(layout_path),
        "--out-tasks",
        str(tasks_path),
        "--n-tasks",
        "30",
        "--seed",
        "3",
    ]
    assert main(args) == 0
    with open(layout_path, encoding="utf-8") as f:
        layout = read_layout(f)
    assert len(layout.targets) == 18
    with open(tasks_path, encoding="utf-8") as f:
        tasks = read_tasks(f)
    assert len(tasks) == 30
    assert set(Counter(t.distance_class for t in tasks).values()) == {CLASS_QUOTA}


def test_layout_seed_repetition_is_identical(tmp_path: Path) -> None:
    def run(tag: str) -> bytes:
        layout_path = tmp_path / f"{tag}.fmlayout"
        tasks_path = tmp_path / f"{tag}.fmtasks"
        args = [
            "layout", "--arm-span", "1.55",
            "--out-layout", str(layout_path),
            "--out-tasks", str(tasks_path),
            "--seed", "9",
        ]
        assert main(args) == 0
        return layout_path.read_bytes() + tasks_path.read_bytes()

    assert run("a") == run("b")


def test_layout_rejects_task_count_not_divisible_by_three(tmp_path: Path, capsys) -> None:
    args = [
        "layout", "--arm-span", "1.7",
        "--out-layout", str(tmp_path / "wall.fmlayout"),
        "--out-tasks", str(tmp_path / "seq.fmtasks"),
        "--n-tasks", "31",
    ]
    assert main(args) == 1
    assert "divisible by 3" in capsys.readouterr().err


# --- synth -------------------------------------------------------------------


def test_synth_reach_writes_exact_endpoints(tmp_path: Path) -> None:
    out = tmp_path / "reach.fmtrace"
    args = [
        "synth", "reach",
        "--start", "0.2,0.9,0.25",
        "--end=-0.1,1.0,0.35",
        "--duration", "0.5",
        "--rate", "60",
        "--out", str(out),
    ]
    assert main(args) == 0
    from fingermap.trace_io import read_trace

    with open(out, encoding="utf-8") as f:
        _, _, _, frames = read_trace(f)
    assert len(frames) == 31
    assert frames[0].hands["right"].wrist.position.distance(Vec3(0.2, 0.9, 0.25)) < 1e-9
    assert frames[-1].hands["right"].wrist.position.distance(Vec3(-0.1, 1.0, 0.35)) < 1e-9


# --- metrics -----------------------------------------------------------------


def study_files(tmp_path: Path, technique: str, n_tasks: int = 6, rate: str = "60"):
    layout_path, tasks_path = tmp_path / "wall.fmlayout", tmp_path / "seq.fmtasks"
    assert (
        main(
            [
                "layout", "--arm-span", "1.7",
                "--out-layout", str(layout_path),
                "--out-tasks", str(tasks_path),
                "--n-tasks", str(n_tasks),
            ]
        )
        == 0
    )
    raw = tmp_path / "study.fmtrace"
    assert (
        main(
            [
                "synth", "study",
                "--layout", str(layout_path),
                "--tasks", str(tasks_path),
                "--rate", rate,
                "--technique", technique,
                "--out", str(raw),
            ]
        )
        == 0
    )
    mapped = tmp_path / "mapped.fmtrace"
    map_args = ["map", str(raw), str(mapped)]
    if technique == "ray":
        map_args += ["--layout", str(layout_path)]
    assert main(map_args) == 0
    return layout_path, tasks_path, mapped


def test_metrics_straight_reaches_score_unit_virtual_ratio(tmp_path: Path) -> None:
    layout_path, tasks_path, mapped = study_files(tmp_path, TECH_HAND)
    out_base = tmp_path / "results"
    args = [
        "metrics", str(mapped),
        "--layout", str(layout_path),
        "--tasks", str(tasks_path),
        "--out", str(out_base),
    ]
    assert main(args) == 0
    payload = json.loads((tmp_path / "results.json").read_text())
    summary = payload["summary"]
    assert summary["tasks"] == 6
    assert summary["successes"] == 6
    assert abs(summary["mean_virtual_ratio"] - 1.0) <= 0.02
    assert abs(summary["mean_physical_ratio"] - 1.0) <= 0.02
    csv_lines = (tmp_path / "results.csv").read_text().splitlines()
    assert len(csv_lines) == 1 + 6


def test_metrics_empty_task_list_exits_zero(tmp_path: Path, capsys) -> None:
    layout_path, _, mapped = study_files(tmp_path, TECH_HAND, n_tasks=3)
    empty = tmp_path / "none.fmtasks"
    empty.write_text('{"created_at":"1970-01-01T00:00:00Z","tasks":[],"version":1}\n')
    out_base = tmp_path / "empty"
    args = [
        "metrics", str(mapped),
        "--layout", str(layout_path),
        "--tasks", str(empty),
        "--out", str(out_base),
    ]
    assert main(args) == 0
    payload = json.loads((tmp_path / "empty.json").read_text())
    assert payload["summary"]["tasks"] == 0
    assert payload["summary"]["mean_virtual_ratio"] is None
    assert (tmp_path / "empty.csv").read_text().splitlines()[1:] == []


def test_metrics_rejects_task_ids_beyond_layout(tmp_path: Path, capsys) -> None:
    layout_path, _, mapped = study_files(tmp_path, TECH_HAND, n_tasks=3)
    rogue = tmp_path / "rogue.fmtasks"
    rogue.write_text(
        '{"tasks":[{"distance_class":"long","end_id":99,"start_id":0}],"version":1}\n'
    )
    args = [
        "metrics", str(mapped),
        "--layout", str(layout_path),
        "--tasks", str(rogue),
    ]
    assert main(args) == 1
    assert "layout has only" in capsys.readouterr().err


def test_metrics_confinement_box_reports_violations(tmp_path: Path) -> None:
    src, dst = tmp_path / "in.fmtrace", tmp_path / "out.fmtrace"
    frames = []
    for i in range(40):
        x = 0.18 if not 10 <= i < 14 else 0.9
        frames.append(frame_at(i / 30.0, Vec3(x, 0.9, 0.3)))
    with open(src, "w", encoding="utf-8") as f:
        write_trace(f, frames, BodyCalibration(), MappingParams(technique=TECH_HAND))
    assert main(["map", str(src), str(dst)]) == 0

    layout_path, tasks_path = tmp_path / "wall.fmlayout", tmp_path / "seq.fmtasks"
    assert main([
        "layout", "--arm-span", "1.7",
        "--out-layout", str(layout_path),
        "--out-tasks", str(tasks_path),
        "--n-tasks", "3",
    ]) == 0
    out_base = tmp_path / "res"
    args = [
        "metrics", str(dst),
        "--layout", str(layout_path),
        "--tasks", str(tasks_path),
        "--out", str(out_base),
        "--confine=-0.5,0.0,-0.5:0.5,2.0,1.0",
    ]
    assert main(args) == 0
    confinement = json.loads((tmp_path / "res.json").read_text())["confinement"]
    assert confinement["violations"] == 1
    assert len(confinement["intervals"]) == 1
    lo, hi = confinement["intervals"][0]
    assert lo == pytest.approx(10 / 30.0, abs=1e-9)
    assert hi == pytest.approx(14 / 30.0, abs=1e-9)


# --- compare -----------------------------------------------------------------


def test_compare_prints_table_and_writes_results(tmp_path: Path, capsys) -> None:
    layout_path, tasks_path = tmp_path / "wall.fmlayout", tmp_path / "seq.fmtasks"
    assert main([
        "layout", "--arm-span", "1.7",
        "--out-layout", str(layout_path),
        "--out-tasks", str(tasks_path),
        "--n-tasks", "3",
    ]) == 0
    capsys.readouterr()
    out_dir = tmp_path / "cmp"
    args = [
        "compare",
        "--layout", str(layout_path),
        "--tasks", str(tasks_path),
        "--techniques", "hand,attach",
        "--rate", "45",
        "--out-dir", str(out_dir),
    ]
    assert main(args) == 0
    table = capsys.readouterr().out.splitlines()
    assert table[0].split() == ["technique", "tasks", "phys_ratio", "virt_ratio", "volume_m3"]
    assert table[2].startswith("hand") and table[3].startswith("attach")
    for tech in ("hand", "attach"):
        payload = json.loads((out_dir / f"{tech}.json").read_text())
        assert payload["summary"]["successes"] == 3
        assert (out_dir / f"{tech}.csv").exists()
    # retargeted wrists move less than the baseline for the same tasks
    hand = json.loads((out_dir / "hand.json").read_text())["summary"]
    attach = json.loads((out_dir / "attach.json").read_text())["summary"]
    assert attach["mean_physical_ratio"] < hand["mean_physical_ratio"]


def test_compare_rejects_unknown_technique(tmp_path: Path, capsys) -> None:
    layout_path, tasks_path = tmp_path / "wall.fmlayout", tmp_path / "seq.fmtasks"
    assert main([
        "layout", "--arm-span", "1.7",
        "--out-layout", str(layout_path),
        "--out-tasks", str(tasks_path),
        "--n-tasks", "3",
    ]) == 0
    args = [
        "compare",
        "--layout", str(layout_path),
        "--tasks", str(tasks_path),
        "--techniques", "hand,teleport",
    ]
    assert main(args) == 1
    assert "unknown technique" in capsys.readouterr().err
