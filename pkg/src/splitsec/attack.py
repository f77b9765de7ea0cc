"""Fab-side attacker model: recover hidden connectivity from an FEOL view.

The FEOL view exposes placed cells with their types and pin counts but no
nets (a lowest-metal split hides every inter-cell wire).  Two recovery
strategies are provided:

* ``greedy_proximity_attack`` wires each open sink, in deterministic order,
  to the nearest legal driver, rejecting choices that would close a
  combinational cycle in the partially recovered netlist.
* ``assignment_attack`` first gives every sink its globally nearest legal
  driver (with unbounded driver fan-out this is the relaxed optimum), then
  repairs cycles by repeatedly applying the cheapest cycle-breaking
  reassignment.  It stands in for published network-flow recoveries.

Pin geometry is cell-level: every pin of a cell sits on the cell's site.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netlist import PAD_INPUT, PAD_OUTPUT, NetlistGraph, _WRITER_KINDS
from .layout import Placement

BIG = 1 << 40


@dataclass(frozen=True)
class FeolCell:
    name: str
    kind: str
    fanin: int
    x: int
    y: int


@dataclass
class FeolView:
    """Attacker knowledge plus the ground truth kept aside for scoring."""

    cells: dict[str, FeolCell]
    open_sinks: tuple[tuple[str, int], ...]
    open_drivers: tuple[str, ...]
    truth: dict[tuple[str, int], str]

    def __post_init__(self):
        if len(set(self.open_sinks)) != len(self.open_sinks):
            raise ValueError("duplicate open sink pin")
        for name in self.open_drivers:
            if name not in self.cells:
                raise ValueError(f"unknown driver cell '{name}'")


@dataclass
class AttackResult:
    attack: str
    recovered: tuple[tuple[str, str, int], ...]  # (driver, sink, pin)
    correct: int
    total: int
    rate: float
    unresolved: tuple[tuple[str, int], ...] = ()
    total_cost: int = 0
    # wire cost before any cycle repair; the relaxed global optimum for the
    # assignment attack (never above the greedy cost), equal to total_cost
    # for attacks without a repair phase
    relaxed_cost: int = 0


def feol_view(g: NetlistGraph, pl: Placement) -> FeolView:
    """Strip all nets: cells plus open pins remain, truth kept for scoring."""
    cells = {}
    for gate in g.gates:
        x, y = pl.sites[gate.gid]
        cells[gate.name] = FeolCell(gate.name, gate.kind, gate.fanin, x, y)
    sinks = []
    truth = {}
    for gate in g.gates:
        if gate.kind == PAD_INPUT:
            continue
        for drv, pin in g.fanins(gate.gid):
            sinks.append((gate.name, pin))
            truth[(gate.name, pin)] = g.gates[drv].name
    drivers = tuple(
        sorted(gate.name for gate in g.gates if gate.kind != PAD_OUTPUT)
    )
    return FeolView(cells, tuple(sorted(sinks)), drivers, truth)


class _Recovery:
    """Incrementally grown cell-level netlist with cycle queries.

    Edges are reference-counted: two pins of one cell may connect to the
    same driver, and removing one must not drop the other's edge.
    """

    def __init__(self):
        self.adj: dict[str, dict[str, int]] = {}

    def add(self, driver: str, sink: str):
        out = self.adj.setdefault(driver, {})
        out[sink] = out.get(sink, 0) + 1

    def remove(self, driver: str, sink: str):
        out = self.adj[driver]
        out[sink] -= 1
        if not out[sink]:
            del out[sink]

    def creates_cycle(self, driver: str, sink: str) -> bool:
        """Would driver->sink close a loop, i.e. does sink reach driver?"""
        if driver == sink:
            return True
        stack = [sink]
        seen = {sink}
        while stack:
            v = stack.pop()
            for w in self.adj.get(v, ()):
                if w == driver:
                    return True
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False


def _driver_geometry(v: FeolView):
    names = list(v.open_drivers)
    xs = np.array([v.cells[d].x for d in names], dtype=np.int64)
    ys = np.array([v.cells[d].y for d in names], dtype=np.int64)
    return names, xs, ys


def _distance_order(v: FeolView, cell: str, xs, ys) -> tuple[np.ndarray, np.ndarray]:
    c = v.cells[cell]
    d = np.abs(xs - c.x) + np.abs(ys - c.y)
    # stable sort over name-ordered drivers implements the name tie-break
    return d, np.argsort(d, kind="stable")


def greedy_proximity_attack(v: FeolView, seed: int = 0) -> AttackResult:
    """Nearest-legal-driver recovery, one sink at a time.

    Sinks are processed sorted by (cell name, pin); distance ties fall to
    the lexicographically first driver.  ``seed`` is accepted for interface
    parity with the other pipeline stages but the attack is deterministic.
    """
    del seed
    names, xs, ys = _driver_geometry(v)
    recovery = _Recovery()
    recovered = []
    unresolved = []
    cost = 0
    for cell, pin in sorted(v.open_sinks):
        dist, order = _distance_order(v, cell, xs, ys)
        choice = None
        for i in order:
            drv = names[i]
            if drv == cell:
                continue
            if recovery.creates_cycle(drv, cell):
                continue
            choice = drv
            cost += int(dist[i])
            break
        if choice is None:
            unresolved.append((cell, pin))
            continue
        recovery.add(choice, cell)
        recovered.append((choice, cell, pin))
    return _finish_result("greedy", v, recovered, unresolved, cost, cost)


def assignment_attack(v: FeolView, fanout_cap: int | None = None) -> AttackResult:
    """Globally distance-minimal recovery followed by greedy cycle repair.

    With unbounded fan-out every sink independently takes its nearest legal
    driver; a ``fanout_cap`` turns the first phase into a min-cost matching
    on duplicated driver slots.  Cycle repair picks, among all edges inside
    a strongly connected component, the reassignment with the smallest cost
    increase that does not itself create a cycle.
    """
    names, xs, ys = _driver_geometry(v)
    sinks = sorted(v.open_sinks)

    chosen: dict[tuple[str, int], str] = {}
    unresolved: list[tuple[str, int]] = []
    if fanout_cap is None:
        for cell, pin in sinks:
            _, order = _distance_order(v, cell, xs, ys)
            for i in order:
                if names[i] != cell:
                    chosen[(cell, pin)] = names[i]
                    break
            else:
                unresolved.append((cell, pin))
    else:
        chosen, unresolved = _capped_assignment(v, sinks, names, xs, ys, fanout_cap)

    recovery = _Recovery()
    for (cell, _pin), drv in chosen.items():
        recovery.add(drv, cell)

    dist_of = {}
    for cell, pin in chosen:
        c, d = v.cells[cell], v.cells[chosen[(cell, pin)]]
        dist_of[(cell, pin)] = abs(c.x - d.x) + abs(c.y - d.y)
    relaxed_cost = sum(dist_of.values())

    while True:
        scc = _first_cyclic_scc(recovery.adj)
        if scc is None:
            break
        best = None
        for (cell, pin), drv in sorted(chosen.items()):
            if cell not in scc or drv not in scc:
                continue
            recovery.remove(drv, cell)
            dist, order = _distance_order(v, cell, xs, ys)
            for i in order:
                alt = names[i]
                if alt == cell or alt == drv:
                    continue
                if fanout_cap is not None and _load(chosen, alt) >= fanout_cap:
                    continue
                if recovery.creates_cycle(alt, cell):
                    continue
                delta = int(dist[i]) - dist_of[(cell, pin)]
                cand = (delta, cell, pin, alt)
                if best is None or cand < best:
                    best = cand
                break
            recovery.add(drv, cell)
        if best is None:
            raise RuntimeError("cycle repair found no feasible reassignment")
        delta, cell, pin, alt = best
        old = chosen[(cell, pin)]
        recovery.remove(old, cell)
        recovery.add(alt, cell)
        chosen[(cell, pin)] = alt
        dist_of[(cell, pin)] += delta

    recovered = [(drv, cell, pin) for (cell, pin), drv in sorted(chosen.items())]
    cost = sum(dist_of.values())
    return _finish_result("assignment", v, recovered, unresolved, cost, relaxed_cost)


def _load(chosen: dict, driver: str) -> int:
    return sum(1 for d in chosen.values() if d == driver)


def _capped_assignment(v, sinks, names, xs, ys, cap):
    """Min-cost matching of sinks onto driver slots duplicated ``cap`` times."""
    from scipy.optimize import linear_sum_assignment

    slots = [(d, k) for d in names for k in range(cap)]
    if len(sinks) > len(slots):
        raise ValueError("more open sinks than capped driver slots")
    slot_index = [names.index(drv) for drv, _ in slots]
    cost = np.zeros((len(sinks), len(slots)), dtype=np.int64)
    for r, (cell, _pin) in enumerate(sinks):
        c = v.cells[cell]
        d = np.abs(xs - c.x) + np.abs(ys - c.y)
        for s, idx in enumerate(slot_index):
            cost[r, s] = BIG if names[idx] == cell else d[idx]
    rows, cols = linear_sum_assignment(cost)
    chosen = {}
    unresolved = []
    for r, s in zip(rows, cols):
        cell, pin = sinks[r]
        if cost[r, s] >= BIG:
            unresolved.append((cell, pin))
        else:
            chosen[(cell, pin)] = slots[s][0]
    return chosen, unresolved


def _first_cyclic_scc(adj: dict[str, dict[str, int]]) -> set[str] | None:
    """Deterministic Tarjan; returns the cyclic SCC with the smallest member."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = [0]
    sccs: list[set[str]] = []

    vertices = sorted(set(adj) | {w for ws in adj.values() for w in ws})
    neigh = {u: sorted(adj.get(u, ())) for u in vertices}

    for root in vertices:
        if root in index:
            continue
        work = [(root, iter(neigh[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            u, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(neigh[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[u] = min(low[u], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[u])
            if low[u] == index[u]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == u:
                        break
                if len(comp) > 1:
                    sccs.append(comp)
    if not sccs:
        return None
    return min(sccs, key=lambda c: min(c))


def score(truth: set[tuple[str, str, int]], recovered: set[tuple[str, str, int]]) -> float:
    """Fraction of ground-truth (driver, sink, pin) edges recovered exactly."""
    if not truth:
        return 1.0 if not recovered else 0.0
    return len(truth & recovered) / len(truth)


def wire_cost(v: FeolView, edges) -> int:
    total = 0
    for drv, cell, _pin in edges:
        a, b = v.cells[drv], v.cells[cell]
        total += abs(a.x - b.x) + abs(a.y - b.y)
    return total


def _finish_result(name, v, recovered, unresolved, cost, relaxed_cost) -> AttackResult:
    truth = {(d, s, p) for (s, p), d in v.truth.items()}
    rec = set(recovered)
    correct = len(truth & rec)
    total = len(v.open_sinks)
    return AttackResult(
        attack=name,
        recovered=tuple(sorted(recovered, key=lambda e: (e[1], e[2]))),
        correct=correct,
        total=total,
        rate=correct / total if total else 1.0,
        unresolved=tuple(sorted(unresolved)),
        total_cost=cost,
        relaxed_cost=relaxed_cost,
    )


def result_to_json(r: AttackResult) -> dict:
    return {
        "attack": r.attack,
        "correct": r.correct,
        "total": r.total,
        "rate": r.rate,
        "total_cost": r.total_cost,
        "relaxed_cost": r.relaxed_cost,
        "unresolved": [list(u) for u in r.unresolved],
        "edges": [list(e) for e in r.recovered],
    }


def recovered_to_bench(v: FeolView, r: AttackResult, name: str = "recovered") -> str:
    """Render a complete recovery as `.bench` text for inspection.

    Output pads become explicit buffers (``y$po = BUFF(driver)``) so the
    file parses back.  Raises if any sink pin is unresolved.
    """
    if r.unresolved:
        raise ValueError("recovered netlist has unresolved pins")
    drv_of = {(s, p): d for d, s, p in r.recovered}
    lines = [f"# {name}"]
    pos = []
    for cell in sorted(v.cells.values(), key=lambda c: c.name):
        if cell.kind == PAD_INPUT:
            lines.append(f"INPUT({cell.name})")
        elif cell.kind == PAD_OUTPUT:
            pos.append(cell)
    for cell in pos:
        lines.append(f"OUTPUT({cell.name})")
    for cell in sorted(v.cells.values(), key=lambda c: c.name):
        if cell.kind == PAD_INPUT:
            continue
        args = ", ".join(drv_of[(cell.name, p)] for p in range(cell.fanin))
        kw = "BUFF" if cell.kind == PAD_OUTPUT else _WRITER_KINDS.get(cell.kind, cell.kind)
        lines.append(f"{cell.name} = {kw}({args})")
    return "\n".join(lines) + "\n"
