"""Security-driven netlist partitionings.

Three techniques map every vertex (pads included) to a partition:

* ``g_color`` -- balanced greedy coloring of the undirected adjacency where
  additionally all neighbors of any vertex get pairwise distinct colors, so
  the fan-out of every driver is decoupled from the driver and from each
  other.
* ``g_type`` -- clusters gates by type (flavor 1) or type plus fan-in count
  (flavor 2); BUF/INV gates are scattered uniformly at random over the type
  partitions; pads form dedicated INPUT and OUTPUT partitions.
* ``identity_partition`` -- single partition, the unprotected baseline.

All functions are pure and deterministic given (graph, seed).
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .netlist import PAD_INPUT, PAD_OUTPUT, NetlistGraph

TECHNIQUES = ("none", "g_color", "g_type1", "g_type2")


@dataclass(frozen=True)
class Partition:
    pid: int
    label: str
    members: tuple[int, ...]


@dataclass
class Partitioning:
    technique: str
    seed: int
    assignment: dict[int, int]
    partitions: tuple[Partition, ...]

    def __post_init__(self):
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown technique '{self.technique}'")
        for i, part in enumerate(self.partitions):
            if part.pid != i:
                raise ValueError("partition ids must be dense from 0")
            if not part.members:
                raise ValueError(f"partition {i} ('{part.label}') is empty")
            for v in part.members:
                if self.assignment.get(v) != i:
                    raise ValueError("assignment and partition members disagree")
        if len(self.assignment) != sum(len(p.members) for p in self.partitions):
            raise ValueError("assignment is not total over partition members")

    @property
    def count(self) -> int:
        return len(self.partitions)


@dataclass(frozen=True)
class ColorChoice:
    """One coloring decision, for auditing balance: the chosen color must be
    an argmin over feasible class sizes at choice time."""

    vertex: int
    chosen: int
    feasible: tuple[int, ...]
    sizes: tuple[int, ...]


def _finish(technique: str, seed: int, assignment: dict[int, int], labels: list[str]) -> Partitioning:
    members: dict[int, list[int]] = {pid: [] for pid in range(len(labels))}
    for v, pid in assignment.items():
        members[pid].append(v)
    parts = tuple(
        Partition(pid, labels[pid], tuple(sorted(members[pid])))
        for pid in range(len(labels))
    )
    return Partitioning(technique, seed, assignment, parts)


def g_color(g: NetlistGraph, seed: int) -> Partitioning:
    """Greedy balanced coloring; see :func:`g_color_traced` for the audit form."""
    part, _ = g_color_traced(g, seed)
    return part


def g_color_traced(g: NetlistGraph, seed: int) -> tuple[Partitioning, list[ColorChoice]]:
    """Color the netlist and also return the per-vertex decision trace.

    Starting from a seed-chosen random vertex, each processed vertex and then
    its (id-ordered) uncolored neighbors are colored; remaining vertices are
    visited in id order.  A color is feasible for ``v`` when neither a
    neighbor of ``v`` nor any other vertex sharing a neighbor with ``v``
    holds it (neighbors of a vertex always end up pairwise distinct, which
    in particular separates every driver's sinks).  Among feasible colors
    the smallest class wins, ties by lowest color id; a fresh color is
    opened only when nothing is feasible.
    """
    n = g.n
    if n == 0:
        raise ValueError("empty netlist")
    rng = random.Random(seed)
    color: dict[int, int] = {}
    sizes: list[int] = []
    trace: list[ColorChoice] = []

    adjacency = [g.neighbors(v) for v in range(n)]

    def assign(v: int):
        forbidden = {color[w] for w in adjacency[v] if w in color}
        for u in adjacency[v]:
            forbidden.update(color[w] for w in adjacency[u] if w != v and w in color)
        feasible = [c for c in range(len(sizes)) if c not in forbidden]
        if feasible:
            chosen = min(feasible, key=lambda c: (sizes[c], c))
        else:
            chosen = len(sizes)
            sizes.append(0)
        trace.append(ColorChoice(v, chosen, tuple(feasible), tuple(sizes)))
        color[v] = chosen
        sizes[chosen] += 1

    def process(u: int):
        if u not in color:
            assign(u)
        for v in adjacency[u]:
            if v not in color:
                assign(v)

    process(rng.randrange(n))
    for u in range(n):
        if u not in color:
            process(u)

    labels = [f"color{c}" for c in range(len(sizes))]
    return _finish("g_color", seed, color, labels), trace


def type_key(kind: str, fanin: int, flavor: int) -> tuple:
    """Clustering key: gate kind, plus the input count for flavor 2."""
    if flavor == 1:
        return (kind,)
    return (kind, fanin)


def type_label(key: tuple) -> str:
    return key[0] if len(key) == 1 else f"{key[0]}{key[1]}"


def g_type(g: NetlistGraph, flavor: int, seed: int) -> Partitioning:
    """Cluster gates by type key; scatter BUF/INV over the type partitions.

    Raises ``ValueError`` when the netlist is empty, the flavor is not 1 or
    2, or only BUF/INV gates exist (no target partition for them).
    """
    if flavor not in (1, 2):
        raise ValueError(f"g_type flavor must be 1 or 2, got {flavor}")
    if g.n == 0:
        raise ValueError("empty netlist")

    keyed: dict[tuple, list[int]] = {}
    bufinv: list[int] = []
    for gate in g.gates:
        if gate.kind in (PAD_INPUT, PAD_OUTPUT):
            continue
        if gate.kind in ("BUF", "INV"):
            bufinv.append(gate.gid)
        else:
            keyed.setdefault(type_key(gate.kind, gate.fanin, flavor), []).append(gate.gid)

    if bufinv and not keyed:
        raise ValueError("netlist contains only BUF/INV gates; g_type has no target partition")

    keys = sorted(keyed)
    labels = [type_label(k) for k in keys]
    assignment = {
        v: pid for pid, k in enumerate(keys) for v in keyed[k]
    }
    rng = random.Random(seed)
    target_pids = list(range(len(keys)))
    for v in bufinv:
        assignment[v] = rng.choice(target_pids)

    if g.inputs:
        pid = len(labels)
        labels.append(PAD_INPUT)
        for v in g.inputs:
            assignment[v] = pid
    if g.outputs:
        pid = len(labels)
        labels.append(PAD_OUTPUT)
        for v in g.outputs:
            assignment[v] = pid

    return _finish(f"g_type{flavor}", seed, assignment, labels)


def identity_partition(g: NetlistGraph) -> Partitioning:
    """Single all-gates partition, the unprotected baseline."""
    if g.n == 0:
        raise ValueError("empty netlist")
    return _finish("none", 0, {v: 0 for v in range(g.n)}, ["all"])


def partitioning_to_json(p: Partitioning, g: NetlistGraph) -> dict:
    return {
        "technique": p.technique,
        "seed": p.seed,
        "partitions": [
            {
                "id": part.pid,
                "label": part.label,
                "members": sorted(g.gates[v].name for v in part.members),
            }
            for part in p.partitions
        ],
    }
