"""Property checkers and metrics over recorded runs.

Checks come in two flavors.  Trace checks consume the full event stream
and verify the local splitter contract, the grid counting inequalities,
and the blocker guarantees of trees, stages, and whole networks.  Result
checks consume only an :class:`~splitternet.engine.ExecutionResult`, which
is enough for the headline claims (distinct names, no overflow, per-stage
stop counts, path-length bounds) and keeps large sweeps cheap.

Every violation carries a schedule that reproduces it via
:func:`splitternet.engine.replay`, when one is known.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .engine import ExecutionResult, OutcomeEvent, Trace
from .splitter import RegisterEvent
from .topology import GRID, TREE, BuildReport, Node, Topology

STOP = "stop"
RIGHT = "right"
DOWN = "down"


class AnalysisError(Exception):
    """The checker was given something it cannot analyze."""


@dataclass
class Violation:
    """One broken property, tied to where it broke and how to reproduce it."""

    kind: str
    location: str
    message: str
    schedule: list[int] | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "location": self.location,
            "message": self.message,
            "schedule": self.schedule,
        }


@dataclass(frozen=True)
class GridRegion:
    """The grid nodes of one stage, with enough wiring to count departures."""

    stage: int
    m: int  # side of the triangle
    nodes: frozenset[int]
    wires: dict[int, tuple[int | None, int | None]]  # node -> (right, down)


@dataclass
class Metrics:
    names_assigned: set[int]
    max_name: int | None
    per_process_visits: dict[int, int]
    per_process_register_ops: dict[int, int]
    stops_per_stage: dict[int, int]
    nonempty_output_wires: dict[int, int]  # stage -> wires used to leave its grid
    nonempty_output_splitters: dict[int, int]  # stage -> distinct splitters those wires leave


def schedule_of(trace: Trace) -> list[int]:
    """The schedule that produced a trace: one pid per register access."""
    return [ev.pid for ev in trace.events if isinstance(ev, RegisterEvent)]


# ---------------------------------------------------------------------------
# region extraction


def grid_regions(t: Topology) -> list[GridRegion]:
    """One region per stage that contains grid nodes, in stage order."""
    by_stage: dict[int, list[Node]] = defaultdict(list)
    for nd in t.nodes:
        if nd.region == GRID:
            by_stage[nd.stage].append(nd)
    regions = []
    for stage in sorted(by_stage):
        nodes = by_stage[stage]
        m = max(nd.coords[0] + nd.coords[1] for nd in nodes) + 1
        regions.append(
            GridRegion(
                stage,
                m,
                frozenset(nd.id for nd in nodes),
                {nd.id: (nd.right, nd.down) for nd in nodes},
            )
        )
    return regions


def region_for_stage(t: Topology, stage: int) -> GridRegion:
    for region in grid_regions(t):
        if region.stage == stage:
            return region
    raise AnalysisError(f"stage {stage} has no grid region in this topology")


def stage_ratios(t: Topology) -> list[int]:
    """Per stage, the blocker ratio r (grid side 2r); stages must be staged."""
    grids = {r.stage: r for r in grid_regions(t)}
    has_tree = {nd.stage for nd in t.nodes if nd.region == TREE}
    ratios = []
    for stage in range(t.stage_count):
        if stage not in grids or stage not in has_tree:
            raise AnalysisError(f"stage {stage} is not a grid-plus-trees stage")
        ratios.append(grids[stage].m // 2)
    return ratios


def _shape(t: Topology) -> str:
    regions = {nd.region for nd in t.nodes}
    if regions == {GRID}:
        return GRID
    if regions == {TREE}:
        return TREE
    return "staged"


def capacity(t: Topology) -> int:
    """Most entrants the topology guarantees to stop (all named, none out).

    A bare grid of side m absorbs m.  A bare tree absorbs 1 (its guarantee
    for more entrants is one stop, not all).  A staged chain absorbs, over
    each maximal run of equal-ratio stages, min(run_length * r, r * r);
    the best run wins, since earlier networks pass every non-stopped
    process forward.
    """
    shape = _shape(t)
    if shape == GRID:
        return grid_regions(t)[0].m
    if shape == TREE:
        return 1
    best = 0
    ratios = stage_ratios(t)
    i = 0
    while i < len(ratios):
        j = i
        while j < len(ratios) and ratios[j] == ratios[i]:
            j += 1
        r = ratios[i]
        best = max(best, min((j - i) * r, r * r))
        i = j
    return best


def min_guaranteed_stops(t: Topology, procs: int) -> int:
    """Stops every execution with ``procs`` entrants must produce."""
    shape = _shape(t)
    if shape == GRID:
        return procs if procs <= grid_regions(t)[0].m else 0
    if shape == TREE:
        return 1 if procs <= t.node_count else 0
    remaining = procs
    total = 0
    for r in stage_ratios(t):
        if remaining <= 0:
            break
        if remaining <= r * r:
            got = min(remaining, r)
            total += got
            remaining -= got
    return total


# ---------------------------------------------------------------------------
# trace checks


def _node_views(trace: Trace) -> tuple[dict[int, set[int]], dict[int, list[tuple[int, str]]]]:
    """Per node: which pids touched it, and who finished there with what."""
    invokers: dict[int, set[int]] = defaultdict(set)
    completions: dict[int, list[tuple[int, str]]] = defaultdict(list)
    for ev in trace.events:
        if isinstance(ev, OutcomeEvent):
            completions[ev.node].append((ev.pid, ev.outcome))
        else:
            invokers[ev.node].add(ev.pid)
    return invokers, completions


def check_splitter_properties(trace: Trace) -> list[Violation]:
    """Verify the three splitter guarantees at every node the trace touches.

    The not-all-right/not-all-down guarantee is only asserted at nodes
    where every invoker finished its visit; with a stalled writer present,
    two finishers may legitimately both go down.
    """
    invokers, completions = _node_views(trace)
    sched = schedule_of(trace)
    out: list[Violation] = []
    for node in sorted(invokers):
        done = completions.get(node, [])
        stoppers = [pid for pid, o in done if o == STOP]
        if len(stoppers) > 1:
            out.append(
                Violation(
                    "splitter-property",
                    f"node {node}",
                    f"processes {sorted(stoppers)} all stopped here; at most one may",
                    sched,
                )
            )
        if len(invokers[node]) == 1 and len(done) == 1 and done[0][1] != STOP:
            out.append(
                Violation(
                    "splitter-property",
                    f"node {node}",
                    f"process {done[0][0]} ran alone here but got {done[0][1]}, not stop",
                    sched,
                )
            )
        if len(done) >= 2 and len(done) == len(invokers[node]):
            outs = {o for _, o in done}
            if STOP not in outs and (RIGHT not in outs or DOWN not in outs):
                missing = "stop-or-down" if DOWN not in outs else "stop-or-right"
                out.append(
                    Violation(
                        "splitter-property",
                        f"node {node}",
                        f"{len(done)} finishers all got {done[0][1]}; one must get {missing}",
                        sched,
                    )
                )
    return out


def _region_flow(trace: Trace, region: GridRegion):
    """Who entered the region, who stopped in it, who left on which wire."""
    entered: set[int] = set()
    stopped: set[int] = set()
    left: set[int] = set()
    wires: set[tuple[int, str]] = set()
    for ev in trace.events:
        if ev.node not in region.nodes:
            continue
        if isinstance(ev, OutcomeEvent):
            if ev.outcome == STOP:
                stopped.add(ev.pid)
            else:
                right, down = region.wires[ev.node]
                tgt = right if ev.outcome == RIGHT else down
                if tgt is None or tgt not in region.nodes:
                    left.add(ev.pid)
                    wires.add((ev.node, ev.outcome))
        else:
            entered.add(ev.pid)
    return entered, stopped, left, wires


def check_lemma1(trace: Trace, region: GridRegion) -> list[Violation]:
    """Counting inequalities for one grid region of side m.

    If k processes entered and not all of them stopped inside, then
    (wires used to leave) + (stops) >= m + 1 and (distinct splitters those
    wires leave) + (stops) >= m.  Regions some entrant has not yet
    resolved (still inside, mid-visit) are skipped.
    """
    if not isinstance(region, GridRegion):
        raise AnalysisError(f"not a grid region: {region!r}")
    entered, stopped, left, wires = _region_flow(trace, region)
    if not entered or entered - stopped - left:
        return []
    if not left:  # everyone stopped inside; nothing is claimed
        return []
    out = []
    m = region.m
    loc = f"stage {region.stage} grid"
    splitters = {node for node, _ in wires}
    if len(wires) + len(stopped) < m + 1:
        out.append(
            Violation(
                "lemma1-wires",
                loc,
                f"{len(wires)} used output wires + {len(stopped)} stops < m+1 = {m + 1}",
                schedule_of(trace),
            )
        )
    if len(splitters) + len(stopped) < m:
        out.append(
            Violation(
                "lemma1-splitters",
                loc,
                f"{len(splitters)} used output splitters + {len(stopped)} stops < m = {m}",
                schedule_of(trace),
            )
        )
    return out


def _tree_groups(t: Topology) -> dict[tuple[int, int], set[int]]:
    groups: dict[tuple[int, int], set[int]] = defaultdict(set)
    for nd in t.nodes:
        if nd.region == TREE:
            groups[(nd.stage, nd.coords[0])].add(nd.id)
    return groups


def check_blockers(trace: Trace, t: Topology) -> list[Violation]:
    """Blocker guarantees of every tree, every stage, and the whole network.

    * a tree of size s entered by 1..s processes yields a stop inside it,
    * a ratio-r stage entered by k <= r*r processes yields min(k, r) stops,
    * a network entered by at most its capacity: nobody overflows,
    * stop positions are distinct names.

    Tree and stage counts are only asserted once every entrant resolved.
    """
    for nd in t.nodes:
        if nd.region not in (GRID, TREE):
            raise AnalysisError(f"node {nd.id} has unlabeled region {nd.region!r}")
    sched = schedule_of(trace)
    out: list[Violation] = []
    wires = {nd.id: (nd.right, nd.down) for nd in t.nodes}

    entered_of: dict[frozenset[int], tuple[set[int], set[int], set[int]]] = {}

    def flow(members: frozenset[int]):
        if members not in entered_of:
            region = GridRegion(-1, 1, members, {v: wires[v] for v in members})
            entered, stopped, left, _ = _region_flow(trace, region)
            entered_of[members] = (entered, stopped, left)
        return entered_of[members]

    for (stage, index), members in sorted(_tree_groups(t).items()):
        entered, stopped, left = flow(frozenset(members))
        if not entered or entered - stopped - left:
            continue
        if len(entered) <= len(members) and not stopped:
            out.append(
                Violation(
                    "tree-blocker",
                    f"stage {stage} tree {index}",
                    f"{len(entered)} processes crossed this {len(members)}-node tree, none stopped",
                    sched,
                )
            )

    if _shape(t) == "staged":
        ratios = stage_ratios(t)
        by_stage: dict[int, set[int]] = defaultdict(set)
        for nd in t.nodes:
            by_stage[nd.stage].add(nd.id)
        for stage, r in enumerate(ratios):
            entered, stopped, left = flow(frozenset(by_stage[stage]))
            if not entered or entered - stopped - left:
                continue
            k = len(entered)
            if k <= r * r and len(stopped) < min(k, r):
                out.append(
                    Violation(
                        "stage-blocker",
                        f"stage {stage}",
                        f"{k} entrants produced {len(stopped)} stops; a ratio-{r} stage "
                        f"guarantees {min(k, r)}",
                        sched,
                    )
                )

    entrants_total: set[int] = set()
    overflowed: list[int] = []
    stops: dict[int, list[int]] = defaultdict(list)
    for ev in trace.events:
        entrants_total.add(ev.pid)
        if isinstance(ev, OutcomeEvent):
            if ev.outcome == STOP:
                stops[ev.node].append(ev.pid)
            else:
                right, down = wires[ev.node]
                tgt = right if ev.outcome == RIGHT else down
                if tgt is None:
                    overflowed.append(ev.pid)
    if overflowed and len(entrants_total) <= capacity(t):
        out.append(
            Violation(
                "overflow",
                "network",
                f"{len(entrants_total)} entrants are within capacity {capacity(t)} "
                f"yet {sorted(overflowed)} overflowed",
                sched,
            )
        )
    for node, pids in sorted(stops.items()):
        if len(pids) > 1:
            out.append(
                Violation(
                    "duplicate-name",
                    f"node {node}",
                    f"name {node} was taken by processes {sorted(pids)}",
                    sched,
                )
            )
    return out


def check_all(trace: Trace, t: Topology) -> list[Violation]:
    """Every trace-level check that applies to this topology."""
    out = check_splitter_properties(trace)
    for region in grid_regions(t):
        out.extend(check_lemma1(trace, region))
    out.extend(check_blockers(trace, t))
    return out


# ---------------------------------------------------------------------------
# result checks


def check_result(
    result: ExecutionResult, t: Topology, report: BuildReport | None = None
) -> list[Violation]:
    """Cheap checks against an aggregate result (no event stream needed).

    Covers distinct names, overflow within capacity, per-stage stop counts
    on staged chains (stage entrants follow from the stop counts, since
    every non-stopped process moves forward), and per-process path bounds
    when a validation report supplies the depth.
    """
    out: list[Violation] = []
    sched = result.schedule or None
    taken: dict[int, list[int]] = defaultdict(list)
    for pid, node in result.names.items():
        taken[node].append(pid)
    for node, pids in sorted(taken.items()):
        if len(pids) > 1:
            out.append(
                Violation(
                    "duplicate-name",
                    f"node {node}",
                    f"name {node} was taken by processes {sorted(pids)}",
                    sched,
                )
            )
    if result.overflowed and not result.unfinished and result.procs <= capacity(t):
        out.append(
            Violation(
                "overflow",
                "network",
                f"{result.procs} entrants are within capacity {capacity(t)} "
                f"yet {sorted(result.overflowed)} overflowed",
                sched,
            )
        )
    if _shape(t) == "staged" and not result.unfinished:
        entrants = result.procs
        for stage, r in enumerate(stage_ratios(t)):
            if entrants <= 0:
                break
            stopped = result.stops_per_stage.get(stage, 0)
            if entrants <= r * r and stopped < min(entrants, r):
                out.append(
                    Violation(
                        "stage-blocker",
                        f"stage {stage}",
                        f"{entrants} entrants produced {stopped} stops; a ratio-{r} stage "
                        f"guarantees {min(entrants, r)}",
                        sched,
                    )
                )
            entrants -= stopped
    if report is not None:
        for pid in range(result.procs):
            visits = result.visits[pid]
            ops = result.register_ops[pid]
            if visits > report.depth or ops > 4 * visits:
                out.append(
                    Violation(
                        "depth-bound",
                        f"process {pid}",
                        f"{visits} visits / {ops} accesses exceed depth {report.depth} "
                        f"/ 4 per visit",
                        sched,
                    )
                )
    return out


# ---------------------------------------------------------------------------
# metrics


def compute_metrics(trace: Trace, t: Topology) -> Metrics:
    names: set[int] = set()
    visits: dict[int, int] = defaultdict(int)
    ops: dict[int, int] = defaultdict(int)
    stops_per_stage: dict[int, int] = defaultdict(int)
    stage_of = t.stage_code
    for ev in trace.events:
        if isinstance(ev, OutcomeEvent):
            if ev.outcome == STOP:
                names.add(ev.node)
                stops_per_stage[stage_of[ev.node]] += 1
        else:
            ops[ev.pid] += 1
            if ev.phase == "write_x":
                visits[ev.pid] += 1
    wires_per_stage: dict[int, int] = {}
    splitters_per_stage: dict[int, int] = {}
    for region in grid_regions(t):
        _, _, _, wires = _region_flow(trace, region)
        wires_per_stage[region.stage] = len(wires)
        splitters_per_stage[region.stage] = len({node for node, _ in wires})
    return Metrics(
        names,
        max(names) if names else None,
        dict(visits),
        dict(ops),
        dict(stops_per_stage),
        wires_per_stage,
        splitters_per_stage,
    )
