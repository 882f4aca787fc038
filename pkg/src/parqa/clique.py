"""Exact Maximum Clique, maximum-clique enumeration and random graph generation.

Vertex sets are handled as Python ints used as bitsets, which keeps the
branch-and-bound tight for the graph sizes used here (up to a few dozen
vertices).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import networkx as nx
import numpy as np

from .errors import GenerationError, GraphFormatError, ParameterError, ValidationError

__all__ = [
    "Graph",
    "CliqueResult",
    "max_clique_exact",
    "all_max_cliques",
    "erdos_renyi_constrained",
    "density_sweep",
    "save_graph_json",
    "load_graph_json",
]


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"vertex count must be >= 0, got {self.n}")
        canon = set()
        for e in self.edges:
            a, b = int(e[0]), int(e[1])
            if a == b:
                raise ValidationError(f"self-loop on vertex {a}")
            if not (0 <= a < self.n and 0 <= b < self.n):
                raise ValidationError(f"edge ({a}, {b}) outside vertex range 0..{self.n - 1}")
            canon.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(canon))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable) -> "Graph":
        return cls(n, frozenset(tuple(e) for e in edges))

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        nodes = sorted(g.nodes())
        if nodes != list(range(len(nodes))):
            g = nx.convert_node_labels_to_integers(g, ordering="sorted")
        return cls(g.number_of_nodes(), frozenset(tuple(e) for e in g.edges()))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(sorted(self.edges))
        return g

    def adjacency_bits(self) -> list[int]:
        adj = [0] * self.n
        for a, b in self.edges:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return adj

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def complement_edges(self) -> list[tuple[int, int]]:
        return [(a, b) for a in range(self.n) for b in range(a + 1, self.n)
                if (a, b) not in self.edges]

    def is_clique(self, vertices: Iterable[int]) -> bool:
        vs = sorted(set(vertices))
        return all((a, b) in self.edges for i, a in enumerate(vs) for b in vs[i + 1:])

    @property
    def density(self) -> float:
        pairs = self.n * (self.n - 1) // 2
        return len(self.edges) / pairs if pairs else 0.0

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        adj = self.adjacency_bits()
        seen, frontier = 1, 1
        while frontier:
            nxt = 0
            bits = frontier
            while bits:
                low = bits & -bits
                nxt |= adj[low.bit_length() - 1]
                bits ^= low
            frontier = nxt & ~seen
            seen |= nxt
        return seen == (1 << self.n) - 1

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in sorted(self.edges)]}

    def digest(self) -> str:
        """Short content hash used to pair records across runs."""
        payload = json.dumps(self.to_dict(), separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CliqueResult:
    omega: int
    witness: tuple[int, ...]
    all_maximum_cliques: tuple[tuple[int, ...], ...] | None
    cpu_seconds: float


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _color_sort(cand: int, adj: list[int]) -> tuple[list[int], list[int]]:
    # greedy colouring; vertices come out with non-decreasing colour numbers
    order, bounds = [], []
    uncolored = cand
    color = 0
    while uncolored:
        color += 1
        q = uncolored
        while q:
            low = q & -q
            v = low.bit_length() - 1
            q &= ~low & ~adj[v]
            uncolored &= ~low
            order.append(v)
            bounds.append(color)
    return order, bounds


def _branch_and_bound(n: int, adj: list[int]) -> list[int]:
    best: list[int] = []
    current: list[int] = []

    def expand(cand: int) -> None:
        nonlocal best
        order, bounds = _color_sort(cand, adj)
        for i in range(len(order) - 1, -1, -1):
            if len(current) + bounds[i] <= len(best):
                return
            v = order[i]
            current.append(v)
            sub = cand & adj[v]
            if sub:
                expand(sub)
            elif len(current) > len(best):
                best = current.copy()
            current.pop()
            cand &= ~(1 << v)

    expand((1 << n) - 1)
    return best


def max_clique_exact(g: Graph, enumerate_all: bool = False) -> CliqueResult:
    """Maximum clique by branch and bound with greedy-colouring bounds.

    Vertices are relabelled by non-increasing degree first, which tightens the
    colouring bound. With ``enumerate_all`` the result also carries every
    maximum clique (see :func:`all_max_cliques`).
    """
    if g.n < 1:
        raise ParameterError("graph must have at least one vertex")
    start = time.process_time()
    deg = g.degrees()
    order = sorted(range(g.n), key=lambda v: (-deg[v], v))
    pos = {v: i for i, v in enumerate(order)}
    adj_orig = g.adjacency_bits()
    adj = [0] * g.n
    for v in range(g.n):
        adj[pos[v]] = sum(1 << pos[u] for u in _bits(adj_orig[v]))
    best = _branch_and_bound(g.n, adj)
    witness = tuple(sorted(order[i] for i in best))
    elapsed = time.process_time() - start
    cliques = tuple(all_max_cliques(g, omega=len(witness))) if enumerate_all else None
    return CliqueResult(len(witness), witness, cliques, elapsed)


def all_max_cliques(g: Graph, omega: int | None = None) -> list[tuple[int, ...]]:
    """Every maximum clique of ``g``, sorted canonically.

    Bron-Kerbosch with Tomita pivoting, pruned to branches that can still
    reach ``omega`` vertices. ``omega`` is computed when not supplied.
    """
    if g.n < 1:
        raise ParameterError("graph must have at least one vertex")
    if omega is None:
        omega = max_clique_exact(g).omega
    adj = g.adjacency_bits()
    found: list[tuple[int, ...]] = []

    def bk(r: list[int], p: int, x: int) -> None:
        if len(r) + p.bit_count() < omega:
            return
        if not p and not x:
            if len(r) == omega:
                found.append(tuple(sorted(r)))
            return
        px = p | x
        pivot = max(_bits(px), key=lambda u: (p & adj[u]).bit_count())
        for v in _bits(p & ~adj[pivot]):
            r.append(v)
            bk(r, p & adj[v], x & adj[v])
            r.pop()
            p &= ~(1 << v)
            x |= 1 << v

    bk([], (1 << g.n) - 1, 0)
    return sorted(set(found))


def erdos_renyi_constrained(n: int, p: float, seed, max_attempts: int = 1000) -> Graph:
    """First ``G(n, p)`` sample that is connected, has no isolated vertex and
    is not complete.

    Raises:
        GenerationError: if ``max_attempts`` samples are all rejected.
    """
    if n < 3:
        raise ParameterError(f"n must be >= 3, got {n}")
    if not 0.0 < p < 1.0:
        raise ParameterError(f"edge probability must lie in (0, 1), got {p}")
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    full = len(iu)
    for _ in range(max_attempts):
        mask = rng.random(full) < p
        if mask.sum() == full:
            continue
        g = Graph(n, frozenset(zip(iu[mask].tolist(), ju[mask].tolist())))
        if min(g.degrees()) >= 1 and g.is_connected():
            return g
    raise GenerationError(f"no acceptable G({n}, {p}) sample in {max_attempts} attempts")


def density_sweep(start: float = 0.10, stop: float = 0.95, step: float = 0.05) -> list[float]:
    count = int(round((stop - start) / step)) + 1
    return [round(start + i * step, 10) for i in range(count)]


def save_graph_json(g: Graph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.to_dict()) + "\n", encoding="utf-8")


def graph_from_json_dict(data) -> Graph:
    if not isinstance(data, dict) or "n" not in data or "edges" not in data:
        raise GraphFormatError("expected an object with fields 'n' and 'edges'")
    if not isinstance(data["n"], int):
        raise GraphFormatError(f"field 'n': expected int, got {data['n']!r}")
    edges = []
    for i, e in enumerate(data["edges"]):
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e)):
            raise GraphFormatError(f"field 'edges'[{i}]: expected [int, int], got {e!r}")
        edges.append(tuple(e))
    return Graph.from_edges(data["n"], edges)


def load_graph_json(path: str | Path) -> Graph:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return graph_from_json_dict(data)
