"""Execution engines over splitter-network topologies.

:func:`simulate` runs ``procs`` processes under a scheduling policy, one
atomic register access per step, and records the schedule (which pid moved
at each step) plus, optionally, the full event trace.  Given the topology
and the schedule the whole execution is determined, so :func:`replay`
reproduces a recorded run event for event.  ``simulate`` uses an inlined
integer-coded loop for throughput; ``replay`` deliberately drives
:func:`splitternet.splitter.step` instead, so the two implementations
cross-check each other whenever a replay is compared to its original.

Policies:

* ``round_robin`` -- unfinished processes take one access each, in pid
  order, round after round.
* ``random`` -- each step picks a uniformly random unfinished process from
  ``random.Random(seed)`` (CPython's Mersenne Twister, whose output is part
  of the language spec, so equal seeds give equal traces on any platform).
* ``adversary`` -- deterministic contention heuristic, ignores the seed:
  while some splitter hosts two or more processes, the laggard there moves
  (fewest accesses, then lowest pid), keeping collisions tight; otherwise
  the most advanced process moves, so lone leaders drain first.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from random import Random
from typing import NamedTuple, Union

from .splitter import Outcome, RegisterEvent, SplitterState, StepCursor, step
from .topology import Topology

POLICIES = ("round_robin", "random", "adversary")

# Step budget per simulate() call, as a multiple of node_count * procs.  A
# run that exceeds it is wedged (every run is wait-free and far shorter).
BUDGET_FACTOR = 8


class OutcomeEvent(NamedTuple):
    """A process finished its visit at ``node`` with ``outcome``."""

    pid: int
    node: int
    outcome: str  # "stop" | "right" | "down"


Event = Union[RegisterEvent, OutcomeEvent]

_OUT_NAMES = (Outcome.STOP.value, Outcome.RIGHT.value, Outcome.DOWN.value)


class EngineError(Exception):
    """A run failed its execution contract (bad arguments, wedged run)."""


class ScheduleError(Exception):
    """A schedule cannot drive the topology it was replayed on."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


@dataclass
class Trace:
    """Run metadata plus the ordered event stream."""

    meta: dict
    events: list[Event]


@dataclass
class ExecutionResult:
    """Aggregate outcome of one run; enough to verify the headline claims."""

    procs: int
    names: dict[int, int]  # pid -> node where it stopped
    overflowed: list[int]  # pids that left the network without stopping
    unfinished: list[int]  # pids still mid-visit (replay of a short schedule)
    visits: list[int]  # per pid, splitters visited
    register_ops: list[int]  # per pid, atomic accesses performed
    stops_per_stage: dict[int, int]
    stops_per_region: dict[str, int]
    schedule: list[int] = field(repr=False, default_factory=list)


def _result(
    procs: int,
    names: dict[int, int],
    overflowed: list[int],
    unfinished: list[int],
    visits: list[int],
    ops: list[int],
    stops_stage: list[int],
    stops_region: list[int],
    schedule: list[int],
) -> ExecutionResult:
    return ExecutionResult(
        procs,
        names,
        overflowed,
        unfinished,
        visits,
        ops,
        {s: c for s, c in enumerate(stops_stage)},
        {"grid": stops_region[0], "tree": stops_region[1]},
        schedule,
    )


def _adversary_pick(
    active: list[int], loc: list[int], ops: list[int], crowded: set[int]
) -> int:
    """Index into ``active`` of the process the adversary moves next."""
    if crowded:
        node = min(crowded)
        best = -1
        best_key = None
        for k, pid in enumerate(active):
            if loc[pid] == node:
                key = (ops[pid], pid)
                if best_key is None or key < best_key:
                    best, best_key = k, key
        return best
    best = 0
    best_key = (-ops[active[0]], active[0])
    for k, pid in enumerate(active):
        key = (-ops[pid], pid)
        if key < best_key:
            best, best_key = k, key
    return best


def simulate(
    topo: Topology,
    procs: int,
    policy: str = "round_robin",
    seed: int = 0,
    record: bool = True,
) -> tuple[ExecutionResult, Trace]:
    """Run ``procs`` processes from the entry until all stop or exit.

    Returns the result and a trace; with ``record=False`` the trace has an
    empty event list (the schedule and result are still complete), which
    makes large sweeps several times faster.
    """
    if procs < 1:
        raise EngineError(f"procs must be >= 1, got {procs}")
    if policy not in POLICIES:
        raise EngineError(f"unknown policy {policy!r}; choose from {', '.join(POLICIES)}")

    count = topo.node_count
    right = topo.right_code
    down = topo.down_code
    stage_of = topo.stage_code
    region_of = topo.region_code
    entry = topo.entry

    reg_x = [-1] * count
    reg_y = bytearray(count)
    loc = [entry] * procs
    phase = bytearray(procs)
    visits = [1] * procs
    ops = [0] * procs
    names: dict[int, int] = {}
    overflowed: list[int] = []
    stops_stage = [0] * topo.stage_count
    stops_region = [0, 0]
    schedule: list[int] = []
    events: list[Event] = []

    is_random = policy == "random"
    is_rr = policy == "round_robin"
    is_adv = policy == "adversary"
    rng = Random(seed)
    randrange = rng.randrange
    active = list(range(procs))
    rr_i = 0
    census: list[int] = []
    crowded: set[int] = set()
    if is_adv:
        census = [0] * count
        census[entry] = procs
        if procs >= 2:
            crowded.add(entry)

    budget = BUDGET_FACTOR * count * procs
    steps = 0
    while active:
        steps += 1
        if steps > budget:
            raise EngineError(
                f"run exceeded {budget} steps ({count} nodes, {procs} procs); "
                f"still active: {active[:10]}"
            )
        if is_random:
            idx = randrange(len(active))
        elif is_rr:
            if rr_i >= len(active):
                rr_i = 0
            idx = rr_i
        else:
            idx = _adversary_pick(active, loc, ops, crowded)
        pid = active[idx]
        schedule.append(pid)
        node = loc[pid]
        ph = phase[pid]
        ops[pid] += 1
        outcome = -1
        if ph == 0:  # write X
            reg_x[node] = pid
            phase[pid] = 1
            if record:
                events.append(RegisterEvent(pid, node, "write_x", "X", "write", pid))
        elif ph == 1:  # read Y
            y = reg_y[node]
            if record:
                events.append(RegisterEvent(pid, node, "read_y", "Y", "read", bool(y)))
            if y:
                outcome = 1
            else:
                phase[pid] = 2
        elif ph == 2:  # write Y
            reg_y[node] = 1
            phase[pid] = 3
            if record:
                events.append(RegisterEvent(pid, node, "write_y", "Y", "write", True))
        else:  # read X
            x = reg_x[node]
            if record:
                events.append(RegisterEvent(pid, node, "read_x", "X", "read", x if x >= 0 else None))
            outcome = 0 if x == pid else 2

        if outcome < 0:
            if is_rr:
                rr_i += 1
            continue
        if record:
            events.append(OutcomeEvent(pid, node, _OUT_NAMES[outcome]))
        if outcome == 0:
            names[pid] = node
            stops_stage[stage_of[node]] += 1
            stops_region[region_of[node]] += 1
        else:
            tgt = right[node] if outcome == 1 else down[node]
            if tgt >= 0:
                loc[pid] = tgt
                phase[pid] = 0
                visits[pid] += 1
                if is_adv:
                    census[node] -= 1
                    if census[node] == 1:
                        crowded.discard(node)
                    census[tgt] += 1
                    if census[tgt] == 2:
                        crowded.add(tgt)
                if is_rr:
                    rr_i += 1
                continue
            overflowed.append(pid)
        # pid finished (stopped or overflowed): retire it
        if is_adv:
            census[node] -= 1
            if census[node] == 1:
                crowded.discard(node)
        if is_rr:
            active.pop(idx)
        else:
            last = active.pop()
            if idx < len(active):
                active[idx] = last

    meta = {"topology_hash": topo.hash, "policy": policy, "seed": seed, "procs": procs}
    result = _result(
        procs, names, overflowed, [], visits, ops, stops_stage, stops_region, schedule
    )
    return result, Trace(meta, events)


def replay(topo: Topology, schedule: list[int], procs: int | None = None) -> tuple[ExecutionResult, Trace]:
    """Re-execute a schedule step for step, recording the full trace.

    The run is determined by (topology, schedule); the result and events
    match the run that produced the schedule exactly.  A schedule that
    names an out-of-range pid or a finished process is rejected with the
    offending step index.  Processes the schedule leaves mid-visit are
    reported as unfinished.
    """
    if procs is None:
        if not schedule:
            raise ScheduleError("cannot infer procs from an empty schedule")
        procs = max(schedule) + 1
    if procs < 1:
        raise EngineError(f"procs must be >= 1, got {procs}")

    right = topo.right_code
    down = topo.down_code
    stage_of = topo.stage_code
    region_of = topo.region_code

    states: dict[int, SplitterState] = {}
    cursors = [StepCursor() for _ in range(procs)]
    loc = [topo.entry] * procs
    done = [False] * procs
    visits = [1] * procs
    ops = [0] * procs
    names: dict[int, int] = {}
    overflowed: list[int] = []
    stops_stage = [0] * topo.stage_count
    stops_region = [0, 0]
    events: list[Event] = []

    for k, pid in enumerate(schedule):
        if not 0 <= pid < procs:
            raise ScheduleError(f"step {k}: pid {pid} outside 0..{procs - 1}", k)
        if done[pid]:
            raise ScheduleError(f"step {k}: process {pid} already finished", k)
        node = loc[pid]
        state = states.setdefault(node, SplitterState())
        cursor, ev = step(state, cursors[pid], pid, node)
        events.append(ev)
        ops[pid] += 1
        if not cursor.done:
            cursors[pid] = cursor
            continue
        out = cursor.outcome
        assert out is not None
        events.append(OutcomeEvent(pid, node, out.value))
        if out is Outcome.STOP:
            names[pid] = node
            stops_stage[stage_of[node]] += 1
            stops_region[region_of[node]] += 1
            done[pid] = True
        else:
            tgt = right[node] if out is Outcome.RIGHT else down[node]
            if tgt < 0:
                overflowed.append(pid)
                done[pid] = True
            else:
                loc[pid] = tgt
                visits[pid] += 1
                cursors[pid] = StepCursor()

    unfinished = [pid for pid in range(procs) if not done[pid]]
    meta = {"topology_hash": topo.hash, "policy": "replay", "seed": None, "procs": procs}
    result = _result(
        procs, names, overflowed, unfinished, visits, ops, stops_stage, stops_region,
        list(schedule),
    )
    return result, Trace(meta, events)


# ---------------------------------------------------------------------------
# trace and schedule files


def _event_line(ev: Event) -> str:
    return json.dumps(ev._asdict(), sort_keys=True, separators=(",", ":"))


def trace_to_jsonl(trace: Trace) -> str:
    """One JSON object per line: metadata header, then each event in order."""
    lines = [json.dumps(trace.meta, sort_keys=True, separators=(",", ":"))]
    lines.extend(_event_line(ev) for ev in trace.events)
    return "\n".join(lines) + "\n"


def trace_from_jsonl(text: str) -> Trace:
    """Parse a trace file; malformed lines are reported with their number."""
    lines = text.splitlines()
    if not lines:
        raise EngineError("trace file is empty")
    events: list[Event] = []
    meta = None
    for num, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as e:
            raise EngineError(f"trace line {num}: not valid JSON: {e}") from e
        if meta is None:
            if not isinstance(doc, dict) or "topology_hash" not in doc:
                raise EngineError(f"trace line {num}: expected metadata header")
            meta = doc
            continue
        try:
            if "outcome" in doc:
                ev: Event = OutcomeEvent(int(doc["pid"]), int(doc["node"]), str(doc["outcome"]))
                if ev.outcome not in _OUT_NAMES:
                    raise ValueError(f"bad outcome {ev.outcome!r}")
            else:
                ev = RegisterEvent(
                    int(doc["pid"]),
                    int(doc["node"]),
                    str(doc["phase"]),
                    str(doc["register"]),
                    str(doc["op"]),
                    doc["value"],
                )
                if ev.phase not in ("write_x", "read_y", "write_y", "read_x"):
                    raise ValueError(f"bad phase {ev.phase!r}")
        except (KeyError, TypeError, ValueError) as e:
            raise EngineError(f"trace line {num}: malformed event: {e!r}") from e
        events.append(ev)
    if meta is None:
        raise EngineError("trace file has no metadata header")
    return Trace(meta, events)


def write_trace(trace: Trace, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(trace_to_jsonl(trace))


def read_trace(path: str) -> Trace:
    with open(path) as fh:
        return trace_from_jsonl(fh.read())


def write_schedule(schedule: list[int], path: str) -> None:
    with open(path, "w") as fh:
        json.dump(schedule, fh)
        fh.write("\n")


def read_schedule(path: str) -> list[int]:
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, list) or not all(isinstance(x, int) for x in doc):
        raise ScheduleError("schedule file must be a JSON array of process ids")
    return doc
