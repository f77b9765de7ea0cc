"""Gate-level netlist model and `.bench` parsing.

The graph treats primary inputs and primary outputs as pad pseudo-gates, so
partitioning, placement, leakage measurement, and attacks all operate on one
vertex universe.  Vertex ids are assigned deterministically: primary inputs
first (declaration order), then logic gates (definition order), then output
pads.  Output pads are named after their driven signal with a ``$po`` suffix
(``OUTPUT(S)`` becomes vertex ``S$po`` with a single edge from ``S``).

Multi-fanout signals are decomposed into driver -> sink edges (star model);
an edge is the triple ``(driver id, sink id, sink pin index)``.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

LOGIC_KINDS = ("AND", "NAND", "OR", "NOR", "XOR", "XNOR", "INV", "BUF")
PAD_INPUT = "INPUT"
PAD_OUTPUT = "OUTPUT"

PO_SUFFIX = "$po"

_KIND_ALIASES = {"NOT": "INV", "BUFF": "BUF"}
_UNARY_KINDS = {"INV", "BUF"}
# classic .bench vocabulary used by the canonical writer
_WRITER_KINDS = {"INV": "NOT", "BUF": "BUFF"}

_NAME_RE = re.compile(r"[^\s(),=#]+")
_IO_RE = re.compile(r"(INPUT|OUTPUT)\s*\(\s*([^\s(),=#]+)\s*\)")
_GATE_RE = re.compile(r"([^\s(),=#]+)\s*=\s*([A-Za-z]+)\s*\((.*)\)")


class BenchParseError(ValueError):
    """Malformed or inconsistent `.bench` input."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Gate:
    gid: int
    name: str
    kind: str
    fanin: int


@dataclass(frozen=True)
class NetlistStats:
    input_count: int
    output_count: int
    gate_count: int


@dataclass
class NetlistGraph:
    """Validated, immutable-by-convention directed gate graph.

    ``gates`` covers every vertex (pads included) in id order; ``edges`` is
    the pin-resolved connectivity sorted by (sink, pin).
    """

    name: str
    gates: tuple[Gate, ...]
    edges: tuple[tuple[int, int, int], ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]
    _by_name: dict = field(default=None, repr=False, compare=False)
    _fanins: list = field(default=None, repr=False, compare=False)
    _fanouts: list = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self._build_index()
        self._validate()

    # -- construction helpers -------------------------------------------------

    def _build_index(self):
        self._by_name = {g.name: g.gid for g in self.gates}
        n = len(self.gates)
        self._fanins = [[] for _ in range(n)]
        self._fanouts = [[] for _ in range(n)]
        for drv, snk, pin in self.edges:
            self._fanins[snk].append((drv, pin))
            self._fanouts[drv].append(snk)
        for lst in self._fanins:
            lst.sort(key=lambda e: e[1])

    def _validate(self):
        n = len(self.gates)
        if len(self._by_name) != n:
            raise ValueError("gate names are not unique")
        for i, g in enumerate(self.gates):
            if g.gid != i:
                raise ValueError("gate ids must be contiguous and in order")
        ids = range(n)
        for drv, snk, pin in self.edges:
            if drv not in ids or snk not in ids:
                raise ValueError(f"edge ({drv},{snk},{pin}) references unknown gate")
        for g in self.gates:
            pins = sorted(pin for _, pin in self._fanins[g.gid])
            if g.kind == PAD_INPUT:
                if g.fanin != 0 or pins:
                    raise ValueError(f"input pad '{g.name}' must have no incoming edges")
            else:
                if pins != list(range(g.fanin)):
                    raise ValueError(
                        f"gate '{g.name}' declares fanin {g.fanin} but has pins {pins}"
                    )
        if _cycle_members(n, self.edges):
            raise ValueError("graph contains a combinational cycle")

    # -- accessors -------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.gates)

    def gate(self, name: str) -> Gate:
        return self.gates[self._by_name[name]]

    def gid(self, name: str) -> int:
        return self._by_name[name]

    def fanins(self, v: int) -> list[tuple[int, int]]:
        """Incoming (driver, pin) pairs of ``v``, ordered by pin."""
        return list(self._fanins[v])

    def sinks(self, v: int) -> list[int]:
        """Distinct sinks driven by ``v``, ascending."""
        return sorted(set(self._fanouts[v]))

    def neighbors(self, v: int) -> list[int]:
        """Distinct undirected neighbors of ``v``, ascending."""
        adj = set(self._fanouts[v])
        adj.update(d for d, _ in self._fanins[v])
        adj.discard(v)
        return sorted(adj)

    def is_pad(self, v: int) -> bool:
        return self.gates[v].kind in (PAD_INPUT, PAD_OUTPUT)

    @property
    def logic_ids(self) -> list[int]:
        return [g.gid for g in self.gates if not self.is_pad(g.gid)]

    @property
    def pad_ids(self) -> list[int]:
        return [g.gid for g in self.gates if self.is_pad(g.gid)]


def _cycle_members(n: int, edges) -> list[int]:
    """Kahn peel; returns the vertices left on a cycle (empty when acyclic)."""
    indeg = [0] * n
    adj = [[] for _ in range(n)]
    for drv, snk, _ in edges:
        indeg[snk] += 1
        adj[drv].append(snk)
    queue = deque(v for v in range(n) if indeg[v] == 0)
    seen = 0
    while queue:
        v = queue.popleft()
        seen += 1
        for w in adj[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return [v for v in range(n) if indeg[v] > 0]


def parse_bench(text: str, name: str = "bench") -> NetlistGraph:
    """Parse `.bench` text into a validated :class:`NetlistGraph`.

    Accepted statements: ``INPUT(x)``, ``OUTPUT(y)``,
    ``z = GATE(a, b, ...)``, ``#`` comments, blank lines.  ``NOT``/``INV``
    and ``BUF``/``BUFF`` are normalized to ``INV`` and ``BUF``.

    Raises :class:`BenchParseError` on syntax errors (with line number),
    undefined or duplicate signals, bad gate arity, unknown gate keywords,
    and combinational cycles.
    """
    inputs: list[tuple[str, int]] = []
    outputs: list[tuple[str, int]] = []
    gatedefs: list[tuple[str, str, list[str], int]] = []
    defined: dict[str, int] = {}
    out_seen: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stmt = raw.split("#", 1)[0].strip()
        if not stmt:
            continue
        m = _IO_RE.fullmatch(stmt)
        if m:
            kw, sig = m.group(1), m.group(2)
            if kw == "INPUT":
                if sig in defined:
                    raise BenchParseError(f"duplicate definition of '{sig}'", lineno)
                defined[sig] = lineno
                inputs.append((sig, lineno))
            else:
                if sig in out_seen:
                    raise BenchParseError(f"duplicate OUTPUT declaration of '{sig}'", lineno)
                out_seen[sig] = lineno
                outputs.append((sig, lineno))
            continue
        m = _GATE_RE.fullmatch(stmt)
        if m:
            lhs, kw, argstr = m.group(1), m.group(2), m.group(3)
            kind = _KIND_ALIASES.get(kw.upper(), kw.upper())
            if kind not in LOGIC_KINDS:
                raise BenchParseError(f"unknown gate keyword '{kw}'", lineno)
            args = [a.strip() for a in argstr.split(",")] if argstr.strip() else []
            if not args or not all(_NAME_RE.fullmatch(a) for a in args):
                raise BenchParseError(f"cannot parse argument list '{argstr}'", lineno)
            if kind in _UNARY_KINDS:
                if len(args) != 1:
                    raise BenchParseError(f"{kind} gate '{lhs}' must have exactly 1 input", lineno)
            elif len(args) < 2:
                raise BenchParseError(f"{kind} gate '{lhs}' must have at least 2 inputs", lineno)
            if lhs in defined:
                raise BenchParseError(f"duplicate definition of '{lhs}'", lineno)
            defined[lhs] = lineno
            gatedefs.append((lhs, kind, args, lineno))
            continue
        raise BenchParseError(f"cannot parse statement '{stmt}'", lineno)

    # id assignment: inputs, gates, then output pads
    ids: dict[str, int] = {}
    gates: list[Gate] = []
    for sig, _ in inputs:
        ids[sig] = len(gates)
        gates.append(Gate(len(gates), sig, PAD_INPUT, 0))
    for lhs, kind, args, _ in gatedefs:
        ids[lhs] = len(gates)
        gates.append(Gate(len(gates), lhs, kind, len(args)))

    edges: list[tuple[int, int, int]] = []
    for lhs, _, args, lineno in gatedefs:
        for pin, arg in enumerate(args):
            if arg not in ids:
                raise BenchParseError(f"undefined signal '{arg}'", lineno)
            edges.append((ids[arg], ids[lhs], pin))
    for sig, lineno in outputs:
        if sig not in ids:
            raise BenchParseError(f"undefined signal '{sig}' in OUTPUT", lineno)
        po_name = sig + PO_SUFFIX
        if po_name in ids:
            raise BenchParseError(f"duplicate definition of '{po_name}'", lineno)
        ids[po_name] = len(gates)
        gates.append(Gate(len(gates), po_name, PAD_OUTPUT, 1))
        edges.append((ids[sig], ids[po_name], 0))

    stuck = _cycle_members(len(gates), edges)
    if stuck:
        names = ", ".join(sorted(gates[v].name for v in stuck)[:8])
        raise BenchParseError(f"cycle detected involving: {names}")

    return NetlistGraph(
        name=name,
        gates=tuple(gates),
        edges=tuple(sorted(edges, key=lambda e: (e[1], e[2]))),
        inputs=tuple(ids[sig] for sig, _ in inputs),
        outputs=tuple(ids[sig + PO_SUFFIX] for sig, _ in outputs),
    )


def serialize_bench(g: NetlistGraph) -> str:
    """Canonical `.bench` writer; ``parse_bench(serialize_bench(g))`` == ``g``."""
    lines = [f"# {g.name}"]
    for v in g.inputs:
        lines.append(f"INPUT({g.gates[v].name})")
    for v in g.outputs:
        (drv, _), = g.fanins(v)
        lines.append(f"OUTPUT({g.gates[drv].name})")
    for gate in g.gates:
        if gate.kind in (PAD_INPUT, PAD_OUTPUT):
            continue
        args = ", ".join(g.gates[d].name for d, _ in g.fanins(gate.gid))
        kw = _WRITER_KINDS.get(gate.kind, gate.kind)
        lines.append(f"{gate.name} = {kw}({args})")
    return "\n".join(lines) + "\n"


def connected_pairs(g: NetlistGraph) -> set[tuple[int, int]]:
    """Unordered vertex pairs joined by at least one directed edge.

    Multi-fanout nets contribute driver-sink pairs only (star model); two
    sinks of the same driver are not a connected pair.
    """
    return {(min(d, s), max(d, s)) for d, s, _ in g.edges}


def stats(g: NetlistGraph) -> NetlistStats:
    return NetlistStats(
        input_count=len(g.inputs),
        output_count=len(g.outputs),
        gate_count=g.n - len(g.inputs) - len(g.outputs),
    )


def graph_to_json(g: NetlistGraph) -> dict:
    """Canonical JSON-ready dump: gates/edges/inputs/outputs, stable order."""
    return {
        "name": g.name,
        "inputs": [g.gates[v].name for v in g.inputs],
        "outputs": [g.gates[v].name for v in g.outputs],
        "gates": [
            {"name": x.name, "kind": x.kind, "fanin": x.fanin}
            for x in g.gates
            if x.kind not in (PAD_INPUT, PAD_OUTPUT)
        ],
        "edges": sorted(
            [g.gates[d].name, g.gates[s].name, p] for d, s, p in g.edges
        ),
    }
