"""Race real OS threads through a splitter network.

Registers are plain Python list slots: loads and stores of list elements
are single bytecode operations, so under the interpreter lock each access
is atomic and threads interleave at exactly the granularity the model
assumes.  The switch interval is dropped during a run to force frequent
preemption; a barrier lines the workers up so they hit the entry splitter
together.

This gives up schedule control and reproducibility on purpose: it is the
end-to-end check that the guarantees hold under real preemption, not just
under the simulated schedulers.
"""

from __future__ import annotations

import sys
import threading

from .engine import EngineError, ExecutionResult
from .topology import Topology


def execute_threads(
    topo: Topology, procs: int, runs: int = 1, switch_interval: float = 1e-5
) -> list[ExecutionResult]:
    """Run ``procs`` threads through the network, ``runs`` times.

    Returns one result per run (names, overflow, visit and access counts;
    no schedule or events, since none can be observed).  Any exception in
    a worker fails the whole call.
    """
    if procs < 1:
        raise EngineError(f"procs must be >= 1, got {procs}")
    if runs < 1:
        raise EngineError(f"runs must be >= 1, got {runs}")
    old_interval = sys.getswitchinterval()
    sys.setswitchinterval(switch_interval)
    try:
        return [_one_run(topo, procs) for _ in range(runs)]
    finally:
        sys.setswitchinterval(old_interval)


def _one_run(topo: Topology, procs: int) -> ExecutionResult:
    count = topo.node_count
    right = topo.right_code
    down = topo.down_code
    stage_of = topo.stage_code
    region_of = topo.region_code
    entry = topo.entry

    reg_x = [-1] * count
    reg_y = [False] * count
    # Per-worker slots; disjoint indices, so no locking needed.
    name_of = [-1] * procs
    overflowed_flag = [False] * procs
    visits = [0] * procs
    ops = [0] * procs
    failures: list[tuple[int, BaseException]] = []
    barrier = threading.Barrier(procs)

    def worker(pid: int) -> None:
        try:
            barrier.wait()
            node = entry
            v = 0
            o = 0
            while True:
                v += 1
                reg_x[node] = pid  # write X
                o += 1
                y = reg_y[node]  # read Y
                o += 1
                if y:
                    tgt = right[node]
                else:
                    reg_y[node] = True  # write Y
                    o += 1
                    x = reg_x[node]  # read X
                    o += 1
                    if x == pid:
                        name_of[pid] = node
                        break
                    tgt = down[node]
                if tgt < 0:
                    overflowed_flag[pid] = True
                    break
                node = tgt
            visits[pid] = v
            ops[pid] = o
        except BaseException as exc:  # surfaced to the caller below
            failures.append((pid, exc))

    workers = [threading.Thread(target=worker, args=(pid,)) for pid in range(procs)]
    for w in workers:
        w.start()
    for w in workers:
        w.join()
    if failures:
        pid, exc = failures[0]
        raise EngineError(f"{len(failures)} worker(s) crashed; first was pid {pid}") from exc

    names = {pid: name_of[pid] for pid in range(procs) if name_of[pid] >= 0}
    stops_stage = [0] * topo.stage_count
    stops_region = [0, 0]
    for node in names.values():
        stops_stage[stage_of[node]] += 1
        stops_region[region_of[node]] += 1
    return ExecutionResult(
        procs,
        names,
        [pid for pid in range(procs) if overflowed_flag[pid]],
        [],
        visits,
        ops,
        {s: c for s, c in enumerate(stops_stage)},
        {"grid": stops_region[0], "tree": stops_region[1]},
        [],
    )
