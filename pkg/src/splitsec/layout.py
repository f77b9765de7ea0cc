"""Fence-constrained placement on a unit site grid.

Cells are unit squares on integer sites.  A floorplan packs one rectangular
fence per partition (near-square, shelf-packed in descending size order) and
pins I/O pads to the die boundary ring.  The placer is a simulated annealer
whose moves never leave a cell's fence, so the physical separation dictated
by the partitioning survives optimization.  ``shuffle`` is the randomization
baseline and deliberately ignores fences.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .netlist import NetlistGraph
from .protect import Partitioning


class CapacityError(ValueError):
    """A fence is too small for the cells assigned to it."""


@dataclass(frozen=True)
class Fence:
    """Half-open site rectangle [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def capacity(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def contains(self, x: int, y: int) -> bool:
        return self.x0 <= x < self.x1 and self.y0 <= y < self.y1

    def sites(self) -> list[tuple[int, int]]:
        return [(x, y) for y in range(self.y0, self.y1) for x in range(self.x0, self.x1)]

    def overlaps(self, other: "Fence") -> bool:
        return not (
            self.x1 <= other.x0
            or other.x1 <= self.x0
            or self.y1 <= other.y0
            or other.y1 <= self.y0
        )


@dataclass
class FencePlan:
    die: tuple[int, int]
    fences: dict[int, Fence]
    io_sites: dict[int, tuple[int, int]]
    partitioning: Partitioning
    utilization: float

    def __post_init__(self):
        w, h = self.die
        items = sorted(self.fences.items())
        for pid, f in items:
            if not (0 <= f.x0 < f.x1 <= w and 0 <= f.y0 < f.y1 <= h):
                raise ValueError(f"fence {pid} exceeds the die")
        for i, (pa, fa) in enumerate(items):
            for pb, fb in items[i + 1:]:
                if fa.overlaps(fb):
                    raise ValueError(f"fences {pa} and {pb} overlap")
        ring = set(_ring_sites(w, h))
        taken = set()
        for v, site in self.io_sites.items():
            if site not in ring:
                raise ValueError(f"pad site {site} is not on the die boundary")
            if site in taken:
                raise ValueError(f"pad site {site} assigned twice")
            taken.add(site)


@dataclass
class Placement:
    """Gate -> site map.  ``fence_plan`` is None for placements loaded from
    JSON or otherwise detached from their floorplan."""

    sites: dict[int, tuple[int, int]]
    fence_plan: FencePlan | None
    seed: int
    utilization: float

    def __post_init__(self):
        if len(set(self.sites.values())) != len(self.sites):
            raise ValueError("two gates share a site")


@dataclass(frozen=True)
class WirelengthReport:
    total_hpwl: int
    per_net_hpwl: dict[int, int]
    die_area: int


def _ring_sites(w: int, h: int) -> list[tuple[int, int]]:
    """Perimeter walk: bottom, right, top, left; length 2(w+h)-4."""
    ring = [(x, 0) for x in range(w)]
    ring += [(w - 1, y) for y in range(1, h)]
    ring += [(x, h - 1) for x in range(w - 2, -1, -1)]
    ring += [(0, y) for y in range(h - 2, 0, -1)]
    return ring


def floorplan(p: Partitioning, g: NetlistGraph, utilization: float = 0.8) -> FencePlan:
    """Pack near-square fences for every partition that owns placeable cells.

    Fence capacity is at least ceil(cells / utilization).  Pads never live in
    fences; they are spread over the boundary ring evenly in name order, and
    the die grows until the ring can hold them all.
    """
    if not (0 < utilization <= 1):
        raise ValueError("utilization must be in (0, 1]")

    pads = set(g.pad_ids)
    cells_by_pid: dict[int, list[int]] = {}
    for v, pid in p.assignment.items():
        if v not in pads:
            cells_by_pid.setdefault(pid, []).append(v)

    shapes = []
    for pid, cells in cells_by_pid.items():
        cap = math.ceil(len(cells) / utilization)
        w = math.ceil(math.sqrt(cap))
        h = math.ceil(cap / w)
        shapes.append((pid, w, h))
    shapes.sort(key=lambda s: (-s[1] * s[2], s[0]))

    total_area = sum(w * h for _, w, h in shapes)
    max_w = max((w for _, w, _ in shapes), default=0)
    shelf_w = max(max_w, math.ceil(math.sqrt(total_area)))

    fences: dict[int, Fence] = {}
    x = y = shelf_h = 0
    core_w = 0
    for pid, w, h in shapes:
        if x + w > shelf_w and x > 0:
            y += shelf_h
            x = shelf_h = 0
        fences[pid] = Fence(x, y, x + w, y + h)
        x += w
        shelf_h = max(shelf_h, h)
        core_w = max(core_w, x)
    core_h = y + shelf_h

    margin = 2
    die_w = core_w + 2 * margin
    die_h = core_h + 2 * margin
    n_pads = len(pads)
    deficit = n_pads + 4 - 2 * (die_w + die_h)
    if deficit > 0:
        grow = math.ceil(deficit / 4)
        die_w += grow
        die_h += grow
    die_w = max(die_w, 3)
    die_h = max(die_h, 3)

    dx = (die_w - core_w) // 2
    dy = (die_h - core_h) // 2
    fences = {
        pid: Fence(f.x0 + dx, f.y0 + dy, f.x1 + dx, f.y1 + dy)
        for pid, f in fences.items()
    }

    ring = _ring_sites(die_w, die_h)
    pad_ids = sorted(pads, key=lambda v: g.gates[v].name)
    io_sites = {
        v: ring[(i * len(ring)) // max(1, n_pads)] for i, v in enumerate(pad_ids)
    }

    return FencePlan((die_w, die_h), fences, io_sites, p, utilization)


def _nets(g: NetlistGraph) -> list[list[int]]:
    """One star net per driver with at least one sink: [driver, *sinks]."""
    return [[v] + g.sinks(v) for v in range(g.n) if g.sinks(v)]


def _net_len(net: list[int], xs, ys) -> int:
    x = [xs[v] for v in net]
    y = [ys[v] for v in net]
    return (max(x) - min(x)) + (max(y) - min(y))


def place(g: NetlistGraph, fp: FencePlan, seed: int, effort: int) -> Placement:
    """Simulated-annealing placement minimizing total HPWL.

    Moves swap or relocate cells within their own fence only.  The start
    state is a seeded random scatter inside each fence; ``effort`` is the
    number of proposed moves (0 returns the start state).  The best state
    seen is returned, so the result never loses to the initial placement.
    """
    rng = random.Random(seed)
    pads = set(g.pad_ids)
    assignment = fp.partitioning.assignment

    fence_sites: dict[int, list[tuple[int, int]]] = {}
    sites: dict[int, tuple[int, int]] = {}
    for pid in sorted(fp.fences):
        cells = sorted(v for v, p in assignment.items() if p == pid and v not in pads)
        if not cells:
            continue
        avail = fp.fences[pid].sites()
        if len(cells) > len(avail):
            raise CapacityError(
                f"fence {pid} holds {len(avail)} sites for {len(cells)} cells"
            )
        fence_sites[pid] = avail
        for v, s in zip(cells, rng.sample(avail, len(cells))):
            sites[v] = s
    for v in sorted(pads):
        if v not in fp.io_sites:
            raise ValueError(f"pad '{g.gates[v].name}' has no ring site")
        sites[v] = fp.io_sites[v]
    unfenced = [v for v in range(g.n) if v not in sites]
    if unfenced:
        raise ValueError(
            f"no fence covers partition of '{g.gates[unfenced[0]].name}'"
        )

    placement = Placement(dict(sites), fp, seed, fp.utilization)
    movable = sorted(v for v in sites if v not in pads)
    if effort <= 0 or not movable:
        return placement

    xs = np.zeros(g.n, dtype=np.int64)
    ys = np.zeros(g.n, dtype=np.int64)
    for v, (x, y) in sites.items():
        xs[v], ys[v] = x, y

    nets = _nets(g)
    cell_nets: list[list[int]] = [[] for _ in range(g.n)]
    for i, net in enumerate(nets):
        for v in net:
            cell_nets[v].append(i)
    lens = [_net_len(net, xs, ys) for net in nets]
    cur = sum(lens)
    best = cur
    best_xs, best_ys = xs.copy(), ys.copy()

    occ = {s: v for v, s in sites.items() if v not in pads}
    w, h = fp.die
    t = (w + h) / 4.0
    t_end = 0.05
    alpha = (t_end / t) ** (1.0 / effort)

    for _ in range(effort):
        c = movable[rng.randrange(len(movable))]
        slist = fence_sites[assignment[c]]
        target = slist[rng.randrange(len(slist))]
        old = (int(xs[c]), int(ys[c]))
        t *= alpha
        if target == old:
            continue
        d = occ.get(target)
        touched = cell_nets[c] if d is None else sorted(set(cell_nets[c] + cell_nets[d]))
        saved = [(i, lens[i]) for i in touched]
        xs[c], ys[c] = target
        if d is not None:
            xs[d], ys[d] = old
        delta = 0
        for i in touched:
            new_len = _net_len(nets[i], xs, ys)
            delta += new_len - lens[i]
            lens[i] = new_len
        if delta <= 0 or rng.random() < math.exp(-delta / t):
            cur += delta
            occ[target] = c
            if d is None:
                del occ[old]
            else:
                occ[old] = d
            if cur < best:
                best = cur
                best_xs, best_ys = xs.copy(), ys.copy()
        else:
            xs[c], ys[c] = old
            if d is not None:
                xs[d], ys[d] = target
            for i, length in saved:
                lens[i] = length

    final = {v: (int(best_xs[v]), int(best_ys[v])) for v in movable}
    for v in sorted(pads):
        final[v] = fp.io_sites[v]
    return Placement(final, fp, seed, fp.utilization)


def shuffle(pl: Placement, fraction: float, seed: int, g: NetlistGraph) -> Placement:
    """Randomization baseline: permute the sites of a random cell subset.

    Picks ceil(fraction * n) of the non-pad cells (seeded, uniform) and
    permutes their site assignments among themselves, ignoring fences.  Pads
    stay put; fraction 0 is the identity.
    """
    if not (0 <= fraction <= 1):
        raise ValueError("fraction must be in [0, 1]")
    pads = set(g.pad_ids)
    movable = sorted(v for v in pl.sites if v not in pads)
    # the 1e-9 guard absorbs float error on exact multiples like 0.3 * 10
    k = 0 if fraction == 0 else min(len(movable), math.ceil(fraction * len(movable) - 1e-9))
    rng = random.Random(seed)
    chosen = sorted(rng.sample(movable, k))
    spots = [pl.sites[v] for v in chosen]
    rng.shuffle(spots)
    sites = dict(pl.sites)
    for v, s in zip(chosen, spots):
        sites[v] = s
    return Placement(sites, pl.fence_plan, seed, pl.utilization)


def manhattan(pl: Placement, u: int, v: int) -> int:
    if u not in pl.sites or v not in pl.sites:
        raise ValueError("both gates must be placed")
    (xu, yu), (xv, yv) = pl.sites[u], pl.sites[v]
    return abs(xu - xv) + abs(yu - yv)


def hpwl(g: NetlistGraph, pl: Placement) -> WirelengthReport:
    """Half-perimeter wirelength per driver net and in total."""
    per_net: dict[int, int] = {}
    for v in range(g.n):
        sinks = g.sinks(v)
        if not sinks:
            continue
        pts = [pl.sites[u] for u in [v] + sinks]
        x = [p[0] for p in pts]
        y = [p[1] for p in pts]
        per_net[v] = (max(x) - min(x)) + (max(y) - min(y))
    if pl.fence_plan is not None:
        w, h = pl.fence_plan.die
    else:
        w = max(x for x, _ in pl.sites.values()) + 1
        h = max(y for _, y in pl.sites.values()) + 1
    return WirelengthReport(sum(per_net.values()), per_net, w * h)


def placement_to_json(g: NetlistGraph, pl: Placement) -> dict:
    if pl.fence_plan is not None:
        die = list(pl.fence_plan.die)
        assignment = pl.fence_plan.partitioning.assignment
    else:
        die = None
        assignment = {}
    return {
        "die": die,
        "utilization": pl.utilization,
        "seed": pl.seed,
        "cells": [
            {
                "name": g.gates[v].name,
                "x": pl.sites[v][0],
                "y": pl.sites[v][1],
                "partition": assignment.get(v),
            }
            for v in sorted(pl.sites, key=lambda v: g.gates[v].name)
        ],
    }


def placement_from_json(g: NetlistGraph, doc: dict) -> Placement:
    sites: dict[int, tuple[int, int]] = {}
    for cell in doc["cells"]:
        name = cell["name"]
        try:
            v = g.gid(name)
        except KeyError:
            raise ValueError(f"placement names unknown gate '{name}'") from None
        sites[v] = (int(cell["x"]), int(cell["y"]))
    missing = [g.gates[v].name for v in range(g.n) if v not in sites]
    if missing:
        raise ValueError(f"placement misses gates: {', '.join(missing[:5])}")
    return Placement(sites, None, int(doc.get("seed", 0)), float(doc.get("utilization", 1.0)))
