"""Annealer hardware graphs: Chimera, Pegasus and custom topologies.

Qubit numbering
---------------
Chimera ``C(m, t)`` (``t`` is the shore size, 4 on real chips): the qubit in
cell row ``r``, cell column ``c``, shore ``u`` (0 = vertical, 1 = horizontal)
and in-shore index ``k`` has id ``2*t*(r*m + c) + t*u + k``. Cells are
numbered row-major and the vertical shore comes first inside a cell. Vertical
qubits couple to the same ``(u, k)`` qubit in the cells above and below,
horizontal qubits to the cells left and right.

Pegasus ``P(m)``: qubit ``(u, w, k, z)`` with ``u`` in {0, 1} (0 = vertical),
``w`` in ``[0, m)``, ``k`` in ``[0, 12)`` and ``z`` in ``[0, m-1)`` has id
``((u*m + w)*12 + k)*(m-1) + z``. Each qubit is a segment of length 12 on a
``12m x 12m`` grid: vertical qubits sit in column ``12w + k`` and cover rows
``[12z + s, 12z + s + 12)`` with ``s = VERTICAL_OFFSETS[k]``; horizontal
qubits mirror this with ``HORIZONTAL_OFFSETS``. Internal couplers join
crossing perpendicular segments, external couplers join ``z`` and ``z+1``,
odd couplers join ``k = 2j`` and ``2j+1``. Only the fabric is kept (qubits
with at least one internal coupler), giving ``(m-1)(24m-8)`` qubits. The
labels coincide with the integer labels of the usual Ocean generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import networkx as nx

from .errors import GraphFormatError, ParameterError, ValidationError

__all__ = [
    "HardwareGraph",
    "chimera_graph",
    "pegasus_graph",
    "apply_yield_mask",
    "save_graph",
    "load_graph",
    "graph_from_dict",
    "chimera_index",
]

TOPOLOGY_KINDS = ("chimera", "pegasus", "custom")

VERTICAL_OFFSETS = (2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6)
HORIZONTAL_OFFSETS = (6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10)


def _canonical(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class HardwareGraph:
    """Immutable qubit-connectivity graph with an optional dead-qubit mask.

    ``edges`` holds every coupler of the ideal graph as ``(small, large)``
    pairs; the *usable* view drops dead qubits and their couplers while the
    original ids are kept.
    """

    topology: str
    m: int
    qubits: frozenset[int]
    edges: frozenset[tuple[int, int]]
    dead: frozenset[int] = field(default_factory=frozenset)
    shore: int | None = None

    def __post_init__(self):
        if self.topology not in TOPOLOGY_KINDS:
            raise ValidationError(f"unknown topology kind {self.topology!r}")
        if self.m < 1:
            raise ValidationError(f"size parameter must be positive, got {self.m}")
        for a, b in self.edges:
            if a == b:
                raise ValidationError(f"self-loop on qubit {a}")
            if a > b:
                raise ValidationError(f"edge ({a}, {b}) is not stored as (small, large)")
            if a not in self.qubits or b not in self.qubits:
                raise ValidationError(f"edge ({a}, {b}) references an unknown qubit")
        unknown = self.dead - self.qubits
        if unknown:
            raise ValidationError(f"dead qubits not in graph: {sorted(unknown)[:5]}")

    @cached_property
    def usable_qubits(self) -> frozenset[int]:
        return self.qubits - self.dead

    @cached_property
    def usable_edges(self) -> frozenset[tuple[int, int]]:
        if not self.dead:
            return self.edges
        return frozenset(e for e in self.edges if e[0] not in self.dead and e[1] not in self.dead)

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        """Usable neighbourhoods, keyed by usable qubit."""
        nbrs: dict[int, set[int]] = {q: set() for q in self.usable_qubits}
        for a, b in self.usable_edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        return {q: frozenset(s) for q, s in nbrs.items()}

    def has_edge(self, a: int, b: int) -> bool:
        return _canonical(a, b) in self.usable_edges

    def degree(self, q: int) -> int:
        return len(self.adjacency.get(q, ()))

    @property
    def num_qubits(self) -> int:
        return len(self.qubits)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def to_networkx(self) -> nx.Graph:
        """Usable subgraph as a :class:`networkx.Graph`."""
        g = nx.Graph()
        g.add_nodes_from(sorted(self.usable_qubits))
        g.add_edges_from(sorted(self.usable_edges))
        return g

    def to_dict(self) -> dict:
        return {
            "topology": self.topology,
            "m": self.m,
            "shore": self.shore,
            "qubits": sorted(self.qubits),
            "edges": [list(e) for e in sorted(self.edges)],
            "dead": sorted(self.dead),
        }


def chimera_index(m: int, row: int, col: int, u: int, k: int, shore: int = 4) -> int:
    """Linear id of the Chimera qubit at cell (row, col), shore u, index k."""
    return 2 * shore * (row * m + col) + shore * u + k


def chimera_graph(m: int, shore: int = 4) -> HardwareGraph:
    """Ideal ``m x m`` Chimera graph of ``K_{shore,shore}`` cells."""
    if not isinstance(m, int) or m < 1:
        raise ParameterError(f"Chimera grid size must be >= 1, got {m!r}")
    if not isinstance(shore, int) or shore < 1:
        raise ParameterError(f"Chimera shore size must be >= 1, got {shore!r}")
    idx = chimera_index
    edges = set()
    for r in range(m):
        for c in range(m):
            for k in range(shore):
                vert = idx(m, r, c, 0, k, shore)
                horiz = idx(m, r, c, 1, k, shore)
                for kk in range(shore):
                    edges.add(_canonical(vert, idx(m, r, c, 1, kk, shore)))
                if r + 1 < m:
                    edges.add((vert, idx(m, r + 1, c, 0, k, shore)))
                if c + 1 < m:
                    edges.add((horiz, idx(m, r, c + 1, 1, k, shore)))
    qubits = frozenset(range(2 * shore * m * m))
    return HardwareGraph("chimera", m, qubits, frozenset(edges), shore=shore)


def pegasus_graph(m: int) -> HardwareGraph:
    """Fabric-only Pegasus graph ``P(m)`` with ``(m-1)(24m-8)`` qubits."""
    if not isinstance(m, int) or m < 2:
        raise ParameterError(f"Pegasus size must be >= 2, got {m!r}")
    m1 = m - 1

    def idx(u, w, k, z):
        return ((u * m + w) * 12 + k) * m1 + z

    edges = set()
    fabric = set()
    # internal couplers: vertical segment crosses the horizontal segment of each row it spans
    for w in range(m):
        for k in range(12):
            x = 12 * w + k
            for z in range(m1):
                start = 12 * z + VERTICAL_OFFSETS[k]
                for y in range(start, min(start + 12, 12 * m)):
                    w2, k2 = divmod(y, 12)
                    z2 = (x - HORIZONTAL_OFFSETS[k2]) // 12
                    if 0 <= z2 < m1:
                        a, b = idx(0, w, k, z), idx(1, w2, k2, z2)
                        edges.add(_canonical(a, b))
                        fabric.update((a, b))
    for u in (0, 1):
        for w in range(m):
            for k in range(12):
                for z in range(m1 - 1):
                    edges.add((idx(u, w, k, z), idx(u, w, k, z + 1)))
                if k % 2 == 0:
                    for z in range(m1):
                        edges.add((idx(u, w, k, z), idx(u, w, k + 1, z)))
    edges = {e for e in edges if e[0] in fabric and e[1] in fabric}
    return HardwareGraph("pegasus", m, frozenset(fabric), frozenset(edges))


def apply_yield_mask(graph: HardwareGraph, dead: Iterable[int]) -> HardwareGraph:
    """Return ``graph`` with ``dead`` added to its dead-qubit set."""
    dead = frozenset(dead)
    unknown = dead - graph.qubits
    if unknown:
        raise ParameterError(f"cannot mask unknown qubits {sorted(unknown)[:5]}")
    return HardwareGraph(graph.topology, graph.m, graph.qubits, graph.edges,
                         graph.dead | dead, graph.shore)


def save_graph(graph: HardwareGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(graph.to_dict(), indent=1) + "\n", encoding="utf-8")


def _int_list(value, name: str) -> list[int]:
    if not isinstance(value, list):
        raise GraphFormatError(f"field {name!r}: expected a list, got {type(value).__name__}")
    for i, v in enumerate(value):
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise GraphFormatError(f"field {name!r}[{i}]: expected a non-negative int, got {v!r}")
    return value


def graph_from_dict(data: dict) -> HardwareGraph:
    """Build a :class:`HardwareGraph` from the JSON object layout."""
    if not isinstance(data, dict):
        raise GraphFormatError("top level: expected a JSON object")
    for key in ("topology", "m", "qubits", "edges", "dead"):
        if key not in data:
            raise GraphFormatError(f"missing field {key!r}")
    m = data["m"]
    if not isinstance(m, int) or isinstance(m, bool):
        raise GraphFormatError(f"field 'm': expected int, got {m!r}")
    shore = data.get("shore")
    if shore is not None and not isinstance(shore, int):
        raise GraphFormatError(f"field 'shore': expected int or null, got {shore!r}")
    qubits = _int_list(data["qubits"], "qubits")
    dead = _int_list(data["dead"], "dead")
    if not isinstance(data["edges"], list):
        raise GraphFormatError("field 'edges': expected a list")
    edges = []
    seen = set()
    for i, e in enumerate(data["edges"]):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            raise GraphFormatError(f"field 'edges'[{i}]: expected [int, int], got {e!r}")
        a, b = e
        if a >= b:
            # each coupler is stored once as [small, large]; anything else is a
            # directed (asymmetric) listing or a self-loop
            raise ValidationError(f"edges[{i}] = {e!r} is not a canonical undirected edge")
        if (a, b) in seen:
            raise ValidationError(f"edges[{i}] = {e!r} is duplicated")
        seen.add((a, b))
        edges.append((a, b))
    return HardwareGraph(data["topology"], m, frozenset(qubits), frozenset(edges),
                         frozenset(dead), shore)


def load_graph(path: str | Path) -> HardwareGraph:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return graph_from_dict(data)
