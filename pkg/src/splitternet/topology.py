"""Splitter-network topologies.

A topology is a finite DAG of splitter nodes.  Every node has a ``right``
and a ``down`` wire; a wire either names another node or leaves the network
(``None``).  Processes enter at a single entry node and follow wires until
they stop at some splitter or exit on a dangling wire.

Builders:

* :func:`build_grid` -- triangular grid of side ``m``: nodes ``(i, j)`` with
  ``i + j <= m - 1``, right to ``(i+1, j)``, down to ``(i, j+1)``.  Any
  ``<= m`` processes all stop inside it.
* :func:`build_tree` -- heap-shaped complete binary tree of ``m`` nodes;
  both wires of a node lead to its children.  Any ``1..m`` processes
  produce at least one stop inside it.
* :func:`build_stage` -- grid of side ``2*ceil(sqrt(n))`` whose
  anti-diagonal splitters each feed a dedicated ``ceil(sqrt(n))``-node
  tree.  Any ``k <= n`` entrants produce ``>= min(k, ceil(sqrt(n)))``
  stops.
* :func:`build_full` -- ``ceil(sqrt(n))`` stages chained back to back;
  assigns distinct names (stop positions) to any ``<= n`` entrants.
* :func:`build_adaptive` -- full networks for ``n = 1, 2, 4, ...`` chained
  back to back, so ``k`` entrants never get past the first network sized
  ``>= k``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

GRID = "grid"
TREE = "tree"


class Node(NamedTuple):
    """One splitter in a network.

    ``right``/``down`` give the wire targets (``None`` = leaves the
    network).  ``region`` is ``"grid"`` or ``"tree"``, ``stage`` counts
    stages from the entry, and ``coords`` locates the node inside its
    region: ``(i, j)`` grid position, or ``(tree_index, heap_position)``.
    """

    id: int
    right: int | None
    down: int | None
    region: str
    stage: int
    coords: tuple[int, int]


class TopologyError(Exception):
    """A topology failed structural validation or (de)serialization."""


@dataclass(frozen=True)
class Topology:
    nodes: tuple[Node, ...]
    entry: int = 0

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    # Integer-coded wire arrays for the execution engines; -1 encodes a
    # network exit so the hot loop compares ints only.
    @cached_property
    def right_code(self) -> list[int]:
        return [-1 if n.right is None else n.right for n in self.nodes]

    @cached_property
    def down_code(self) -> list[int]:
        return [-1 if n.down is None else n.down for n in self.nodes]

    @cached_property
    def stage_code(self) -> list[int]:
        return [n.stage for n in self.nodes]

    @cached_property
    def region_code(self) -> list[int]:
        return [0 if n.region == GRID else 1 for n in self.nodes]

    @cached_property
    def stage_count(self) -> int:
        return max(n.stage for n in self.nodes) + 1

    @cached_property
    def hash(self) -> str:
        return hashlib.sha256(export_json(self).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class BuildReport:
    """Result of validating a topology."""

    splitter_count: int
    depth: int  # longest entry-to-exit path, counted in splitter visits
    per_stage: dict[int, dict[str, int]]  # stage -> {"grid": g, "tree": t}


def ceil_sqrt(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


# ---------------------------------------------------------------------------
# builders


def _grid_nodes(m: int, base: int, stage: int) -> tuple[list[Node], dict[tuple[int, int], int]]:
    """Triangular grid occupying ids base..base+m(m+1)/2-1, row-major by j."""
    order = [(i, j) for j in range(m) for i in range(m - j)]
    pos_to_id = {pos: base + k for k, pos in enumerate(order)}
    nodes = [
        Node(
            pos_to_id[(i, j)],
            pos_to_id.get((i + 1, j)),
            pos_to_id.get((i, j + 1)),
            GRID,
            stage,
            (i, j),
        )
        for (i, j) in order
    ]
    return nodes, pos_to_id


def _tree_nodes(count: int, base: int, stage: int, tree_index: int) -> list[Node]:
    """Heap-shaped binary tree; right wires to child 2k+1, down to 2k+2."""
    nodes = []
    for k in range(count):
        left, right = 2 * k + 1, 2 * k + 2
        nodes.append(
            Node(
                base + k,
                base + left if left < count else None,
                base + right if right < count else None,
                TREE,
                stage,
                (tree_index, k),
            )
        )
    return nodes


def build_grid(m: int) -> Topology:
    """Triangular splitter grid of side ``m`` (``m*(m+1)//2`` nodes)."""
    if m < 1:
        raise ValueError(f"grid side must be >= 1, got {m}")
    nodes, _ = _grid_nodes(m, 0, 0)
    return Topology(tuple(nodes))


def build_tree(m: int) -> Topology:
    """Complete binary tree of ``m`` splitters in heap order."""
    if m < 1:
        raise ValueError(f"tree size must be >= 1, got {m}")
    return Topology(tuple(_tree_nodes(m, 0, 0, 0)))


def _stage_nodes(n: int, base: int, stage: int, per_wire_trees: bool) -> list[Node]:
    r = ceil_sqrt(n)
    m = 2 * r
    grid, pos_to_id = _grid_nodes(m, base, stage)
    # One anti-diagonal node per grid row, in id order.
    anti = [pos_to_id[(m - 1 - j, j)] for j in range(m)]
    next_id = base + len(grid)
    trees: list[Node] = []
    rewire: dict[int, tuple[int, int]] = {}
    tree_index = 0
    for a in anti:
        if per_wire_trees:
            right_root = next_id
            trees += _tree_nodes(r, right_root, stage, tree_index)
            tree_index += 1
            next_id += r
            down_root = next_id
            trees += _tree_nodes(r, down_root, stage, tree_index)
            tree_index += 1
            next_id += r
            rewire[a] = (right_root, down_root)
        else:
            # Both exit wires of the anti-diagonal splitter merge into one
            # dedicated tree, so one tree per row suffices.
            root = next_id
            trees += _tree_nodes(r, root, stage, tree_index)
            tree_index += 1
            next_id += r
            rewire[a] = (root, root)
    grid = [
        nd._replace(right=rewire[nd.id][0], down=rewire[nd.id][1]) if nd.id in rewire else nd
        for nd in grid
    ]
    return grid + trees


def build_stage(n: int, per_wire_trees: bool = False) -> Topology:
    """One blocker stage sized for ``n``: a ``2r`` grid plus ``r``-node trees.

    With the default merged wiring each anti-diagonal splitter feeds a
    single tree (``4*r*r + r`` nodes total, ``r = ceil_sqrt(n)``).  With
    ``per_wire_trees=True`` each of its two wires gets its own tree.
    """
    if n < 1:
        raise ValueError(f"stage size must be >= 1, got {n}")
    return Topology(tuple(_stage_nodes(n, 0, 0, per_wire_trees)))


def _chain(parts: list[Topology]) -> Topology:
    """Concatenate topologies, rewiring every exit to the next entry."""
    out: list[Node] = []
    base = 0
    stage_base = 0
    for idx, t in enumerate(parts):
        last = idx == len(parts) - 1
        next_entry = base + t.node_count + parts[idx + 1].entry if not last else None
        for nd in t.nodes:
            right = nd.right + base if nd.right is not None else next_entry
            down = nd.down + base if nd.down is not None else next_entry
            out.append(Node(nd.id + base, right, down, nd.region, nd.stage + stage_base, nd.coords))
        base += t.node_count
        stage_base += t.stage_count
    return Topology(tuple(out), parts[0].entry)


def build_full(n: int, per_wire_trees: bool = False) -> Topology:
    """Chain of ``ceil_sqrt(n)`` identical stages; names any ``<= n`` entrants."""
    if n < 1:
        raise ValueError(f"network size must be >= 1, got {n}")
    r = ceil_sqrt(n)
    stage = build_stage(n, per_wire_trees)
    return _chain([stage] * r)


def build_adaptive(max_n: int) -> Topology:
    """Chain full networks for n = 1, 2, 4, ... up to the first power of two >= max_n."""
    if max_n < 1:
        raise ValueError(f"max_n must be >= 1, got {max_n}")
    sizes = [1]
    while sizes[-1] < max_n:
        sizes.append(sizes[-1] * 2)
    return _chain([build_full(n) for n in sizes])


# ---------------------------------------------------------------------------
# validation


def _find_cycle(t: Topology, remaining: set[int]) -> list[int]:
    """Return one wiring cycle from a leftover set of a topological sort.

    Every leftover node keeps at least one leftover predecessor, so walking
    predecessors must revisit a node; the reversed walk is a forward cycle.
    """
    preds: dict[int, int] = {}
    for v in remaining:
        nd = t.nodes[v]
        for w in (nd.right, nd.down):
            if w is not None and w in remaining:
                preds[w] = v
    seen: dict[int, int] = {}
    path: list[int] = []
    v = min(remaining)
    while v not in seen:
        seen[v] = len(path)
        path.append(v)
        v = preds[v]
    cycle = path[seen[v] :]
    cycle.reverse()
    return cycle + [cycle[0]]


def validate(t: Topology) -> BuildReport:
    """Check structure and return the size/depth/stage report.

    Raises :class:`TopologyError` listing every problem found: out-of-range
    ids or wires, wiring cycles (naming one cycle), nodes unreachable from
    the entry.
    """
    issues: list[str] = []
    count = t.node_count
    if count == 0:
        raise TopologyError("topology has no nodes")
    for k, nd in enumerate(t.nodes):
        if nd.id != k:
            issues.append(f"node at index {k} has id {nd.id}; ids must be dense and ordered")
        for port, tgt in (("right", nd.right), ("down", nd.down)):
            if tgt is not None and not 0 <= tgt < count:
                issues.append(f"node {nd.id} wire {port} targets {tgt}, outside 0..{count - 1}")
        if nd.region not in (GRID, TREE):
            issues.append(f"node {nd.id} has unknown region {nd.region!r}")
    if not 0 <= t.entry < count:
        issues.append(f"entry {t.entry} is not a node id")
    if issues:
        raise TopologyError("; ".join(issues))

    # Kahn topological order; leftovers mean a cycle.
    indeg = [0] * count
    for nd in t.nodes:
        for tgt in (nd.right, nd.down):
            if tgt is not None:
                indeg[tgt] += 1
    queue = [v for v in range(count) if indeg[v] == 0]
    topo_order: list[int] = []
    while queue:
        v = queue.pop()
        topo_order.append(v)
        for tgt in (t.nodes[v].right, t.nodes[v].down):
            if tgt is not None:
                indeg[tgt] -= 1
                if indeg[tgt] == 0:
                    queue.append(tgt)
    if len(topo_order) < count:
        cycle = _find_cycle(t, {v for v in range(count) if v not in set(topo_order)})
        raise TopologyError("wiring cycle: " + " -> ".join(str(v) for v in cycle))

    # Reachability from the entry.
    reachable = set()
    frontier = [t.entry]
    while frontier:
        v = frontier.pop()
        if v in reachable:
            continue
        reachable.add(v)
        for tgt in (t.nodes[v].right, t.nodes[v].down):
            if tgt is not None and tgt not in reachable:
                frontier.append(tgt)
    if len(reachable) < count:
        orphans = sorted(set(range(count)) - reachable)
        head = ", ".join(str(v) for v in orphans[:10])
        more = f" (+{len(orphans) - 10} more)" if len(orphans) > 10 else ""
        raise TopologyError(f"nodes unreachable from entry {t.entry}: {head}{more}")

    # Longest path in visits, via DP over reverse topological order.
    depth = [1] * count
    for v in reversed(topo_order):
        best = 0
        for tgt in (t.nodes[v].right, t.nodes[v].down):
            if tgt is not None and depth[tgt] > best:
                best = depth[tgt]
        depth[v] = 1 + best

    per_stage: dict[int, dict[str, int]] = {}
    for nd in t.nodes:
        bucket = per_stage.setdefault(nd.stage, {GRID: 0, TREE: 0})
        bucket[nd.region] += 1
    return BuildReport(count, depth[t.entry], per_stage)


# ---------------------------------------------------------------------------
# serialization


def export_json(t: Topology) -> str:
    """Canonical JSON form (sorted keys, no whitespace); stable for hashing."""
    doc = {
        "node_count": t.node_count,
        "entry": t.entry,
        "nodes": [
            {
                "id": nd.id,
                "right": "exit" if nd.right is None else nd.right,
                "down": "exit" if nd.down is None else nd.down,
                "region": nd.region,
                "stage": nd.stage,
                "coords": list(nd.coords),
            }
            for nd in t.nodes
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def import_json(text: str) -> Topology:
    """Parse :func:`export_json` output back into a topology."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TopologyError(f"not valid JSON: {e}") from e
    try:
        raw = doc["nodes"]
        nodes = []
        for item in raw:
            right = item["right"]
            down = item["down"]
            nodes.append(
                Node(
                    int(item["id"]),
                    None if right == "exit" else int(right),
                    None if down == "exit" else int(down),
                    str(item["region"]),
                    int(item["stage"]),
                    (int(item["coords"][0]), int(item["coords"][1])),
                )
            )
        t = Topology(tuple(nodes), int(doc["entry"]))
    except (KeyError, TypeError, ValueError, IndexError) as e:
        raise TopologyError(f"malformed topology document: {e!r}") from e
    if doc.get("node_count") != t.node_count:
        raise TopologyError(
            f"node_count field says {doc.get('node_count')} but {t.node_count} nodes are listed"
        )
    return t


def export_dot(t: Topology) -> str:
    """Graphviz text: grid nodes as boxes, tree nodes as ellipses, exits as points."""
    lines = ["digraph splitternet {", "  rankdir=TB;"]
    for nd in t.nodes:
        shape = "box" if nd.region == GRID else "ellipse"
        label = f"{nd.id} {nd.region} s{nd.stage} {nd.coords[0]},{nd.coords[1]}"
        lines.append(f'  n{nd.id} [shape={shape}, label="{label}"];')
    exits = 0
    for nd in t.nodes:
        for tgt, style in ((nd.right, "solid"), (nd.down, "dashed")):
            if tgt is None:
                lines.append(f"  x{exits} [shape=point, label=\"\"];")
                lines.append(f"  n{nd.id} -> x{exits} [style={style}];")
                exits += 1
            else:
                lines.append(f"  n{nd.id} -> n{tgt} [style={style}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export(t: Topology, format: str = "json") -> str:
    if format == "json":
        return export_json(t)
    if format == "dot":
        return export_dot(t)
    raise ValueError(f"unknown export format {format!r}; use 'json' or 'dot'")
