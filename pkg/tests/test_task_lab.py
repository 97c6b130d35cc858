"""Target wall geometry, task drawing, and synthetic trace generation."""

from __future__ import annotations

import random

import pytest

import oracles
from fingermap.core import BodyCalibration, Rotation, Vec3
from fingermap.mapping import MappingParams, TECH_ATTACH, TECH_DIRECT, TECH_HAND, TECH_RAY
from fingermap.task_lab import (
    CLASS_LONG,
    CLASS_MEDIUM,
    CLASS_SHORT,
    FINGER_LENGTH,
    ReachSpec,
    classify_distances,
    curl_for_retraction,
    generate_layout,
    make_hand,
    make_task_sequence,
    min_jerk,
    simulate_study,
    synth_reach,
)


def test_layout_has_18_targets_on_two_exact_depths() -> None:
    layout = generate_layout(arm_span=1.7)
    assert len(layout.targets) == 18
    depths = sorted({t.position.z for t in layout.targets})
    assert depths == [0.374, 0.748]
    near = [t for t in layout.targets if t.position.z == 0.374]
    far = [t for t in layout.targets if t.position.z == 0.748]
    assert len(near) == 12 and len(far) == 6


def test_layout_heights_exact_at_unit_span() -> None:
    layout = generate_layout(arm_span=1.0)
    heights = sorted({t.position.y for t in layout.targets})
    assert heights == [0.4, 0.6, 0.8]


def test_layout_heights_in_band_at_default_span() -> None:
    layout = generate_layout(arm_span=1.7)
    for t in layout.targets:
        assert 0.68 <= t.position.y <= 1.36


def test_layout_widths_follow_layer_fractions() -> None:
    layout = generate_layout(arm_span=1.7)
    near_xs = {t.position.x for t in layout.targets if t.position.z == 0.374}
    far_xs = {t.position.x for t in layout.targets if t.position.z == 0.748}
    assert max(near_xs) - min(near_xs) == pytest.approx(0.76 * 1.7, abs=1e-12)
    assert max(far_xs) - min(far_xs) == pytest.approx(0.25 * 1.7, abs=1e-12)
    assert len(near_xs) == 4 and len(far_xs) == 2


def test_layout_swap_flag_exchanges_widths() -> None:
    swapped = generate_layout(arm_span=1.7, swap_layer_widths=True)
    near_xs = {t.position.x for t in swapped.targets if t.position.z == 0.374}
    assert max(near_xs) - min(near_xs) == pytest.approx(0.25 * 1.7, abs=1e-12)


def test_layout_ids_unique_and_dense() -> None:
    layout = generate_layout(arm_span=1.7)
    assert sorted(t.id for t in layout.targets) == list(range(18))
    for t in layout.targets:
        assert layout.get(t.id) is t


def test_classify_covers_all_153_pairs() -> None:
    layout = generate_layout(arm_span=1.7)
    classes = classify_distances(layout)
    assert len(classes.classes) == 153
    counts = {c: 0 for c in (CLASS_SHORT, CLASS_MEDIUM, CLASS_LONG)}
    for c in classes.classes.values():
        counts[c] += 1
    assert all(v > 0 for v in counts.values())


def test_classify_thresholds_match_quartile_oracle() -> None:
    layout = generate_layout(arm_span=1.7)
    classes = classify_distances(layout)
    dists = []
    targets = list(layout.targets)
    for i in range(len(targets)):
        for j in range(i + 1, len(targets)):
            dists.append(targets[i].position.distance(targets[j].position))
    q25, q50 = oracles.quartiles(dists)
    assert classes.q25 == pytest.approx(q25, abs=1e-12)
    assert classes.q50 == pytest.approx(q50, abs=1e-12)


def test_adjacent_near_row_pair_is_short() -> None:
    layout = generate_layout(arm_span=1.7)
    classes = classify_distances(layout)
    near = sorted(
        (t for t in layout.targets if t.position.z == 0.374),
        key=lambda t: (t.position.y, t.position.x),
    )
    a, b = near[0], near[1]  # same row, adjacent columns
    key = (min(a.id, b.id), max(a.id, b.id))
    assert classes.classes[key] == CLASS_SHORT


def test_classes_scale_invariant() -> None:
    small = classify_distances(generate_layout(arm_span=1.0))
    big = classify_distances(generate_layout(arm_span=2.0))
    assert small.classes == big.classes
    assert big.q25 == pytest.approx(2.0 * small.q25, rel=1e-12)


def test_task_sequence_quotas_and_determinism() -> None:
    layout = generate_layout(arm_span=1.7)
    a = make_task_sequence(layout, n_tasks=30, seed=9)
    b = make_task_sequence(layout, n_tasks=30, seed=9)
    assert a == b
    assert len(a) == 30
    classes = classify_distances(layout)
    counts = {CLASS_SHORT: 0, CLASS_MEDIUM: 0, CLASS_LONG: 0}
    for task in a:
        counts[task.distance_class] += 1
        key = (min(task.start_id, task.end_id), max(task.start_id, task.end_id))
        assert classes.classes[key] == task.distance_class
    assert counts == {CLASS_SHORT: 10, CLASS_MEDIUM: 10, CLASS_LONG: 10}


def test_task_sequence_seed_changes_draw() -> None:
    layout = generate_layout(arm_span=1.7)
    assert make_task_sequence(layout, n_tasks=30, seed=1) != make_task_sequence(
        layout, n_tasks=30, seed=2
    )


def test_task_sequence_minimal_and_invalid_counts() -> None:
    layout = generate_layout(arm_span=1.7)
    three = make_task_sequence(layout, n_tasks=3, seed=4)
    assert sorted(t.distance_class for t in three) == sorted(
        [CLASS_SHORT, CLASS_MEDIUM, CLASS_LONG]
    )
    with pytest.raises(ValueError):
        make_task_sequence(layout, n_tasks=20, seed=0)
    with pytest.raises(ValueError):
        make_task_sequence(layout, n_tasks=0, seed=0)


def test_min_jerk_profile_shape() -> None:
    assert min_jerk(0.0) == 0.0
    assert min_jerk(1.0) == 1.0
    assert min_jerk(0.5) == 0.5
    grid = [min_jerk(i / 1000.0) for i in range(1001)]
    assert all(b >= a for a, b in zip(grid, grid[1:]))
    for tau in (0.1, 0.3, 0.7, 0.95):
        assert min_jerk(tau) == pytest.approx(oracles.min_jerk(tau), abs=1e-15)


def test_make_hand_segment_lengths_fixed() -> None:
    rng = random.Random(17)
    for _ in range(100):
        wrist = Vec3(rng.uniform(-1, 1), rng.uniform(0, 2), rng.uniform(-1, 1))
        curl = rng.uniform(0.0, 1.0)
        aim = Rotation.from_axis_angle(
            Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized(),
            rng.uniform(-3, 3),
        )
        hand = make_hand(wrist, aim=aim, curl=curl, grab=rng.random(), thumb_close=rng.random())
        mcp, pip, tip = (hand.joints[k] for k in ("index_mcp", "index_pip", "index_tip"))
        assert abs(wrist.distance(mcp) - 0.08) < 1e-12
        assert abs(mcp.distance(pip) - 0.045) < 1e-12
        assert abs(pip.distance(tip) - 0.05) < 1e-12


def test_make_hand_curl_monotone_in_tip_distance() -> None:
    wrist = Vec3(0.0, 1.0, 0.0)
    dists = []
    for i in range(51):
        hand = make_hand(wrist, curl=i / 50.0)
        dists.append(hand.joints["index_tip"].distance(hand.joints["index_mcp"]))
    assert abs(dists[0] - FINGER_LENGTH) < 1e-12
    assert all(b < a for a, b in zip(dists, dists[1:]))
    assert dists[-1] < 0.15 * FINGER_LENGTH


def test_make_hand_open_grab_distances() -> None:
    hand = make_hand(Vec3.zero())
    wrist = hand.wrist.position
    mean = (
        hand.joints["middle_tip"].distance(wrist)
        + hand.joints["ring_tip"].distance(wrist)
        + hand.joints["pinky_tip"].distance(wrist)
    ) / 3.0
    assert abs(mean - 0.17) < 1e-12
    closed = make_hand(Vec3.zero(), grab=1.0)
    mean_closed = (
        closed.joints["middle_tip"].distance(wrist)
        + closed.joints["ring_tip"].distance(wrist)
        + closed.joints["pinky_tip"].distance(wrist)
    ) / 3.0
    assert abs(mean_closed - 0.17 * 0.35) < 1e-12


def test_make_hand_thumb_close_crosses_press_threshold() -> None:
    open_hand = make_hand(Vec3.zero())
    closed = make_hand(Vec3.zero(), thumb_close=1.0)
    d_open = open_hand.joints["thumb_tip"].distance(open_hand.joints["middle_pip"])
    d_closed = closed.joints["thumb_tip"].distance(closed.joints["middle_pip"])
    assert d_open == pytest.approx(0.05, abs=1e-12)
    assert d_closed == pytest.approx(0.01, abs=1e-12)


def test_curl_for_retraction_inverts_make_hand() -> None:
    for r in (0.15, 0.3, 0.5, 0.75, 1.0):
        curl = curl_for_retraction(r)
        hand = make_hand(Vec3.zero(), curl=curl)
        d = hand.joints["index_tip"].distance(hand.joints["index_mcp"])
        assert abs(d / FINGER_LENGTH - r) < 1e-9


def test_synth_reach_endpoints_exact() -> None:
    start = Vec3(0.1, 0.9, 0.2)
    end = Vec3(-0.2, 1.1, 0.5)
    frames = synth_reach(ReachSpec(start=start, end=end, duration=1.0, rate=90.0))
    assert frames[0].hand("right").wrist.position == start
    assert frames[-1].hand("right").wrist.position == end


def test_synth_reach_stationary_when_start_equals_end() -> None:
    p = Vec3(0.1, 0.9, 0.2)
    frames = synth_reach(ReachSpec(start=p, end=p, duration=0.5, rate=60.0))
    assert all(f.hand("right").wrist.position == p for f in frames)


def test_synth_reach_path_length_matches_displacement() -> None:
    start = Vec3(0.0, 1.0, 0.2)
    end = Vec3(0.3, 1.0, 0.2)
    frames = synth_reach(ReachSpec(start=start, end=end, duration=1.0, rate=120.0))
    path = 0.0
    prev = None
    for f in frames:
        p = f.hand("right").wrist.position
        if prev is not None:
            path += prev.distance(p)
        prev = p
    assert abs(path - 0.3) < 1e-4


def test_synth_reach_midpoint_is_spatial_midpoint() -> None:
    start = Vec3(0.0, 1.0, 0.0)
    end = Vec3(0.2, 1.0, 0.4)
    frames = synth_reach(ReachSpec(start=start, end=end, duration=1.0, rate=100.0))
    mid = frames[len(frames) // 2].hand("right").wrist.position
    assert mid.distance(start.lerp(end, 0.5)) < 1e-12


def test_synth_reach_monotone_time_and_rate() -> None:
    frames = synth_reach(ReachSpec(start=Vec3.zero(), end=Vec3(0.1, 0.0, 0.0)))
    ts = [f.t for f in frames]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    with pytest.raises(ValueError):
        synth_reach(ReachSpec(start=Vec3.zero(), end=Vec3.zero(), duration=0.0))
    with pytest.raises(ValueError):
        synth_reach(ReachSpec(start=Vec3.zero(), end=Vec3.zero(), rate=10.0))


def test_simulate_study_is_deterministic() -> None:
    layout = generate_layout(arm_span=1.7)
    tasks = make_task_sequence(layout, n_tasks=3, seed=3)
    calib = BodyCalibration()
    params = MappingParams(technique=TECH_ATTACH)
    a = simulate_study(TECH_ATTACH, layout, tasks, calib, params)
    b = simulate_study(TECH_ATTACH, layout, tasks, calib, params)
    assert len(a) == len(b)
    for fa, fb in zip(a, b):
        assert fa.t == fb.t
        assert fa.hand("right").wrist.position == fb.hand("right").wrist.position


def test_simulate_study_frames_well_formed() -> None:
    layout = generate_layout(arm_span=1.7)
    tasks = make_task_sequence(layout, n_tasks=3, seed=5)
    calib = BodyCalibration()
    for tech in (TECH_HAND, TECH_RAY, TECH_ATTACH, TECH_DIRECT):
        frames = simulate_study(tech, layout, tasks, calib, MappingParams(technique=tech))
        ts = [f.t for f in frames]
        assert all(b > a for a, b in zip(ts, ts[1:]))
        for f in frames[:: max(1, len(frames) // 50)]:
            hand = f.hand("right")
            assert abs(hand.wrist.position.distance(hand.joints["index_mcp"]) - 0.08) < 1e-9
