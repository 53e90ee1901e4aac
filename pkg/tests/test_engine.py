"""Scheduling engines: determinism, replay fidelity, bounds, file formats."""

from splitternet import engine
from splitternet.engine import (
    POLICIES,
    EngineError,
    OutcomeEvent,
    ScheduleError,
    read_schedule,
    read_trace,
    replay,
    simulate,
    trace_from_jsonl,
    trace_to_jsonl,
    write_schedule,
    write_trace,
)
from splitternet.topology import build_adaptive, build_full, build_grid, build_tree, validate


def test_solo_process_stops_at_entry():
    """One process, any policy, any network: four accesses and the entry name."""
    for topo in (build_full(9), build_grid(6), build_tree(7), build_adaptive(4)):
        for policy in POLICIES:
            res, _ = simulate(topo, 1, policy, seed=9)
            assert res.names == {0: topo.entry}
            assert res.visits[0] == 1
            assert res.register_ops[0] == 4
            assert not res.overflowed


def test_grid_absorbs_its_side_count():
    """Six processes in a side-6 grid all stop, under every policy."""
    t = build_grid(6)
    for policy in POLICIES:
        for seed in range(5):
            res, _ = simulate(t, 6, policy, seed)
            assert len(res.names) == 6
            assert not res.overflowed
            assert len(set(res.names.values())) == 6


def test_full_network_names_capacity_load():
    """n processes through the full network: distinct names, no one exits."""
    for n in (4, 9):
        t = build_full(n)
        for policy in POLICIES:
            for seed in range(5):
                res, _ = simulate(t, n, policy, seed)
                assert len(res.names) == n
                assert len(set(res.names.values())) == n
                assert not res.overflowed
                assert res.stops_per_region["grid"] + res.stops_per_region["tree"] == n


def test_same_seed_means_identical_trace_bytes():
    t = build_full(9)
    for policy in POLICIES:
        _, tr1 = simulate(t, 9, policy, seed=7)
        _, tr2 = simulate(t, 9, policy, seed=7)
        assert trace_to_jsonl(tr1) == trace_to_jsonl(tr2)
    texts = {trace_to_jsonl(simulate(t, 9, "random", seed)[1]) for seed in range(5)}
    assert len(texts) > 1  # different seeds explore different schedules


def test_adversary_is_deterministic_and_seed_blind():
    t = build_full(9)
    res1, tr1 = simulate(t, 9, "adversary", seed=1)
    res2, tr2 = simulate(t, 9, "adversary", seed=99)
    assert res1.schedule == res2.schedule
    assert tr1.events == tr2.events


def test_replay_reproduces_simulate_exactly():
    """The splitter-core replay path must match the inlined loop event for event."""
    cases = [
        (build_grid(6), 8),
        (build_full(9), 9),
        (build_tree(3), 3),
        (build_adaptive(4), 4),
    ]
    for topo, procs in cases:
        for policy in POLICIES:
            res, tr = simulate(topo, procs, policy, seed=3)
            rres, rtr = replay(topo, res.schedule, procs=procs)
            assert rtr.events == tr.events
            assert rres.names == res.names
            assert rres.overflowed == res.overflowed
            assert not rres.unfinished
            assert rres.visits == res.visits
            assert rres.register_ops == res.register_ops


def test_hand_checked_two_process_schedule():
    """[0,1,0,0,0,1]: q's X overwrite sends p down; p's Y flag sends q right."""
    t = build_grid(1)
    res, tr = replay(t, [0, 1, 0, 0, 0, 1], procs=2)
    assert res.names == {}
    assert sorted(res.overflowed) == [0, 1]
    outcomes = [ev for ev in tr.events if isinstance(ev, OutcomeEvent)]
    assert outcomes == [OutcomeEvent(0, 0, "down"), OutcomeEvent(1, 0, "right")]
    assert res.register_ops == [4, 2]


def test_replay_rejects_overlong_schedule():
    """Naming a finished process fails with that step's index."""
    try:
        replay(build_grid(1), [0, 1, 0, 0, 0, 1, 1, 1], procs=2)
    except ScheduleError as e:
        assert e.step_index == 6
        assert "already finished" in str(e)
    else:
        raise AssertionError("overlong schedule should be rejected")


def test_replay_rejects_out_of_range_pid():
    try:
        replay(build_grid(1), [5], procs=2)
    except ScheduleError as e:
        assert e.step_index == 0
    else:
        raise AssertionError("out-of-range pid should be rejected")


def test_replay_reports_unfinished_processes():
    res, _ = replay(build_grid(1), [0], procs=1)
    assert res.unfinished == [0]
    assert res.names == {}
    assert res.register_ops == [1]


def test_trace_file_round_trip(tmp_path):
    _, tr = simulate(build_full(9), 9, "random", seed=2)
    path = tmp_path / "run.trace.jsonl"
    write_trace(tr, str(path))
    back = read_trace(str(path))
    assert back.meta == tr.meta
    assert back.events == tr.events


def test_trace_parse_errors_carry_line_numbers():
    _, tr = simulate(build_grid(1), 1, "round_robin")
    lines = trace_to_jsonl(tr).splitlines()
    lines[2] = "{broken"
    try:
        trace_from_jsonl("\n".join(lines))
    except EngineError as e:
        assert "line 3" in str(e)
    else:
        raise AssertionError("bad line should be reported")

    lines = trace_to_jsonl(tr).splitlines()
    lines[4] = '{"pid": 0, "node": 0, "outcome": "sideways"}'
    try:
        trace_from_jsonl("\n".join(lines))
    except EngineError as e:
        assert "line 5" in str(e)
    else:
        raise AssertionError("bad outcome should be reported")


def test_schedule_file_round_trip(tmp_path):
    res, _ = simulate(build_full(4), 4, "random", seed=11)
    path = tmp_path / "run.schedule.json"
    write_schedule(res.schedule, str(path))
    assert read_schedule(str(path)) == res.schedule


def test_step_budget_guard():
    """A wedged run is cut off rather than spinning forever."""
    old = engine.BUDGET_FACTOR
    engine.BUDGET_FACTOR = 0
    try:
        simulate(build_grid(1), 1)
    except EngineError as e:
        assert "exceeded" in str(e)
    else:
        raise AssertionError("zero budget should trip the guard")
    finally:
        engine.BUDGET_FACTOR = old


def test_visits_and_ops_respect_depth():
    """No process visits more splitters than the longest path, at 4 ops max each."""
    t = build_full(16)
    depth = validate(t).depth
    for policy in POLICIES:
        res, _ = simulate(t, 16, policy, seed=1)
        for pid in range(16):
            assert res.visits[pid] <= depth
            assert res.register_ops[pid] <= 4 * res.visits[pid]


def test_record_flag_only_drops_events():
    """record=False must not change the run itself."""
    t = build_full(9)
    res1, tr1 = simulate(t, 9, "random", seed=4, record=True)
    res2, tr2 = simulate(t, 9, "random", seed=4, record=False)
    assert res1.schedule == res2.schedule
    assert res1.names == res2.names
    assert tr2.events == []
    assert tr1.events != []


def test_rejects_bad_arguments():
    t = build_grid(1)
    for bad in ({"procs": 0}, {"policy": "zigzag"}):
        try:
            simulate(t, bad.get("procs", 1), bad.get("policy", "round_robin"))
        except EngineError:
            pass
        else:
            raise AssertionError(f"{bad} should be rejected")
