"""Exhaustive exploration of every schedule on a small topology.

The schedule space is walked as a graph of configurations (register
contents, per-process positions, per-node outcome tallies).  Distinct
schedules that reach the same configuration share all downstream work, so
the walk is memoized on configurations while the number of interleavings
is still counted exactly by summing path counts over the graph.  That
collapse is what makes three processes on a tree tractable: the raw
schedule count is astronomical, the configuration count is not.

Every transition is applied through :func:`splitternet.splitter.step`, so
the explorer checks the splitter semantics as written, independent of the
inlined simulator loop.

At each terminal configuration (all processes stopped or exited) the
splitter guarantees, the blocker guarantees, and name distinctness are
verified; a violation carries the schedule that led to it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import Violation, _tree_groups, capacity, stage_ratios, _shape
from .splitter import Outcome, Phase, SplitterState, StepCursor, step
from .topology import Topology

_PHASES = (Phase.WRITE_X, Phase.READ_Y, Phase.WRITE_Y, Phase.READ_X)

# Per-process state tags inside a configuration.
ACTIVE, STOPPED, EXIT_RIGHT, EXIT_DOWN = 0, 1, 2, 3
_FINAL_NAMES = {STOPPED: "stop", EXIT_RIGHT: "right", EXIT_DOWN: "down"}


class ExploreBudgetError(Exception):
    """The configuration cap was hit before the walk finished."""


@dataclass
class PropertyReport:
    """What an exhaustive walk of the schedule space established."""

    interleavings: int
    configurations: int
    outcome_vectors: set[tuple[tuple[str, int], ...]]
    violations: list[Violation]


def explore_exhaustive(
    topo: Topology, procs: int, config_cap: int = 500_000
) -> PropertyReport:
    """Walk every schedule of ``procs`` processes and check every property.

    Raises :class:`ExploreBudgetError` when more than ``config_cap``
    distinct configurations would be expanded; the error reports how far
    the walk got so the caller can judge a retry.
    """
    if procs < 1:
        raise ValueError(f"procs must be >= 1, got {procs}")
    count = topo.node_count
    right = topo.right_code
    down = topo.down_code

    # Structural facts the terminal checks need.
    shape = _shape(topo)
    trees = sorted(_tree_groups(topo).items())
    tree_roots = [min(members) for _, members in trees]
    ratios = stage_ratios(topo) if shape == "staged" else []
    stage_entries: list[int] = []
    if shape == "staged":
        stage_of = topo.stage_code
        first: dict[int, int] = {}
        for v in range(count):
            first.setdefault(stage_of[v], v)
        stage_entries = [first[s] for s in range(topo.stage_count)]
    cap_n = capacity(topo)

    regs0 = tuple([-1, 0] * count)
    procs0 = tuple((ACTIVE, topo.entry, 0) for _ in range(procs))
    tallies0 = tuple([0] * (3 * count))
    init = (regs0, procs0, tallies0)

    memo: dict[tuple, int] = {}
    vectors: set[tuple[tuple[str, int], ...]] = set()
    violations: list[Violation] = []
    path: list[int] = []
    expanded = 0

    def advance(cfg: tuple, pid: int) -> tuple:
        regs, states, tallies = cfg
        _, node, ph = states[pid]
        x = regs[2 * node]
        y = regs[2 * node + 1]
        shared = SplitterState(None if x < 0 else x, bool(y))
        cursor, _ = step(shared, StepCursor(_PHASES[ph]), pid, node)
        new_x = -1 if shared.reg_x is None else shared.reg_x
        new_y = 1 if shared.reg_y else 0
        if new_x != x or new_y != y:
            r = list(regs)
            r[2 * node] = new_x
            r[2 * node + 1] = new_y
            regs = tuple(r)
        st = list(states)
        if not cursor.done:
            st[pid] = (ACTIVE, node, _PHASES.index(cursor.phase))
            return regs, tuple(st), tallies
        tl = list(tallies)
        out = cursor.outcome
        if out is Outcome.STOP:
            tl[3 * node] += 1
            st[pid] = (STOPPED, node)
        elif out is Outcome.RIGHT:
            tl[3 * node + 1] += 1
            tgt = right[node]
            st[pid] = (ACTIVE, tgt, 0) if tgt >= 0 else (EXIT_RIGHT, node)
        else:
            tl[3 * node + 2] += 1
            tgt = down[node]
            st[pid] = (ACTIVE, tgt, 0) if tgt >= 0 else (EXIT_DOWN, node)
        return regs, tuple(st), tuple(tl)

    def check_terminal(cfg: tuple) -> None:
        _, states, tallies = cfg
        sched = list(path)
        for node in range(count):
            s, r, d = tallies[3 * node : 3 * node + 3]
            total = s + r + d
            if total == 0:
                continue
            if s > 1:
                violations.append(
                    Violation(
                        "splitter-property",
                        f"node {node}",
                        f"{s} processes stopped at one splitter",
                        sched,
                    )
                )
            if total == 1 and s != 1:
                violations.append(
                    Violation(
                        "splitter-property",
                        f"node {node}",
                        "a process that ran this splitter alone did not stop",
                        sched,
                    )
                )
            if total >= 2 and s == 0 and (r == 0 or d == 0):
                which = "stop-or-down" if d == 0 else "stop-or-right"
                violations.append(
                    Violation(
                        "splitter-property",
                        f"node {node}",
                        f"{total} visitors and none obtained {which}",
                        sched,
                    )
                )
        for (stage, index), members in trees:
            root = min(members)
            entrants = sum(tallies[3 * root : 3 * root + 3])
            stops = sum(tallies[3 * v] for v in members)
            if 1 <= entrants <= len(members) and stops == 0:
                violations.append(
                    Violation(
                        "tree-blocker",
                        f"stage {stage} tree {index}",
                        f"{entrants} processes crossed the tree, none stopped",
                        sched,
                    )
                )
        if shape == "staged":
            stage_of = topo.stage_code
            stops_by_stage = [0] * topo.stage_count
            for node in range(count):
                stops_by_stage[stage_of[node]] += tallies[3 * node]
            for stage, r in enumerate(ratios):
                entrants = sum(tallies[3 * stage_entries[stage] : 3 * stage_entries[stage] + 3])
                if 1 <= entrants <= r * r and stops_by_stage[stage] < min(entrants, r):
                    violations.append(
                        Violation(
                            "stage-blocker",
                            f"stage {stage}",
                            f"{entrants} entrants, only {stops_by_stage[stage]} stops",
                            sched,
                        )
                    )
        exits = [pid for pid, stt in enumerate(states) if stt[0] in (EXIT_RIGHT, EXIT_DOWN)]
        if exits and procs <= cap_n:
            violations.append(
                Violation(
                    "overflow",
                    "network",
                    f"{procs} entrants are within capacity {cap_n} yet {exits} overflowed",
                    sched,
                )
            )
        vectors.add(tuple((_FINAL_NAMES[stt[0]], stt[1]) for stt in states))

    def visit(cfg: tuple) -> int:
        nonlocal expanded
        known = memo.get(cfg)
        if known is not None:
            return known
        active = [pid for pid, stt in enumerate(cfg[1]) if stt[0] == ACTIVE]
        if not active:
            check_terminal(cfg)
            memo[cfg] = 1
            return 1
        expanded += 1
        if expanded > config_cap:
            raise ExploreBudgetError(
                f"more than {config_cap} configurations expanded "
                f"({len(memo)} finished); raise config_cap to continue"
            )
        paths = 0
        for pid in active:
            path.append(pid)
            paths += visit(advance(cfg, pid))
            path.pop()
        memo[cfg] = paths
        return paths

    total = visit(init)
    return PropertyReport(total, len(memo), vectors, violations)
