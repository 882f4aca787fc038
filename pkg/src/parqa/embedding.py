"""Disjoint minor embeddings of complete graphs onto hardware graphs.

An :class:`Embedding` maps each logical variable ``0..N-1`` of ``K_N`` to a
chain of physical qubits. Because every pair of chains is coupled, any
problem on at most ``N`` variables can reuse the same embedding.

The deterministic Chimera tiling places the triangular clique layout in
``b x b`` cell blocks (``b = ceil(N / shore)``): logical variable ``i`` with
``d = i // shore`` and ``k = i % shore`` uses the horizontal qubits ``k`` of
block row ``d`` in block columns ``0..d`` and the vertical qubits ``k`` of
block column ``d`` in block rows ``d..b-1``, a chain of ``b + 1`` qubits.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .errors import CapacityError, EmbeddingError, GraphFormatError, ParameterError, ValidationError
from .hardware import HardwareGraph, chimera_index

__all__ = [
    "Embedding",
    "DisjointEmbeddingSet",
    "EmbeddingCheck",
    "ValidationReport",
    "ChainLengthStats",
    "validate",
    "tile_clique_chimera",
    "chain_length_stats",
    "save_embeddings",
    "load_embeddings",
]


@dataclass(frozen=True)
class Embedding:
    """Chains for the logical variables of ``K_N`` (``N = logical_size``)."""

    chains: Mapping[int, tuple[int, ...]]
    logical_size: int

    def __post_init__(self):
        chains = {int(v): tuple(int(q) for q in c) for v, c in sorted(self.chains.items())}
        for v, c in chains.items():
            if not c:
                raise ValidationError(f"chain for logical variable {v} is empty")
        object.__setattr__(self, "chains", chains)

    @property
    def qubits(self) -> frozenset[int]:
        return frozenset(q for c in self.chains.values() for q in c)

    def chain_of(self) -> dict[int, int]:
        """Map qubit -> logical variable."""
        return {q: v for v, c in self.chains.items() for q in c}

    def chain_edges(self, hw: HardwareGraph, v: int) -> list[tuple[int, int]]:
        """Usable couplers inside the chain of ``v``."""
        chain = set(self.chains[v])
        return sorted((a, b) for a in chain for b in hw.adjacency.get(a, ()) if b in chain and a < b)

    def couplers_between(self, hw: HardwareGraph, u: int, v: int) -> list[tuple[int, int]]:
        """Usable couplers from chain ``u`` to chain ``v`` as ``(qubit_u, qubit_v)``."""
        cv = set(self.chains[v])
        return sorted((a, b) for a in self.chains[u] for b in hw.adjacency.get(a, ()) if b in cv)


@dataclass(frozen=True)
class DisjointEmbeddingSet:
    embeddings: tuple[Embedding, ...]
    target: HardwareGraph = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "embeddings", tuple(self.embeddings))

    def __len__(self) -> int:
        return len(self.embeddings)

    def __iter__(self):
        return iter(self.embeddings)

    def __getitem__(self, i: int) -> Embedding:
        return self.embeddings[i]

    @property
    def logical_size(self) -> int:
        return self.embeddings[0].logical_size if self.embeddings else 0


@dataclass(frozen=True)
class EmbeddingCheck:
    index: int
    chains_connected: bool
    chains_disjoint: bool
    clique_covered: bool
    qubits_usable: bool
    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.chains_connected and self.chains_disjoint and self.clique_covered and self.qubits_usable


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[EmbeddingCheck, ...]
    cross_disjoint: bool
    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.cross_disjoint and all(c.ok for c in self.checks)

    def summary(self) -> str:
        bad = [c for c in self.checks if not c.ok]
        head = "pass" if self.ok else "FAIL"
        lines = [f"{head}: {len(self.checks)} embeddings, {len(bad)} failing, "
                 f"cross-disjoint={self.cross_disjoint}"]
        for c in bad:
            lines.extend(f"  embedding {c.index}: {p}" for p in c.problems)
        lines.extend(f"  {p}" for p in self.problems)
        return "\n".join(lines)


def _connected(qubits: Sequence[int], adjacency: Mapping[int, frozenset[int]]) -> bool:
    members = set(qubits)
    start = qubits[0]
    seen = {start}
    stack = [start]
    while stack:
        q = stack.pop()
        for r in adjacency.get(q, ()):
            if r in members and r not in seen:
                seen.add(r)
                stack.append(r)
    return seen == members


def _check_embedding(index: int, emb: Embedding, hw: HardwareGraph) -> EmbeddingCheck:
    problems = []
    usable = hw.usable_qubits
    bad_qubits = sorted(q for q in emb.qubits if q not in usable)
    if bad_qubits:
        problems.append(f"uses dead or unknown qubits {bad_qubits[:5]}")
    owner: dict[int, int] = {}
    disjoint = True
    for v, chain in emb.chains.items():
        for q in chain:
            if q in owner and owner[q] != v:
                disjoint = False
                problems.append(f"qubit {q} shared by chains {owner[q]} and {v}")
            owner[q] = v
    connected = True
    for v, chain in emb.chains.items():
        if not _connected(chain, hw.adjacency):
            connected = False
            problems.append(f"chain {v} is not connected")
    covered: set[tuple[int, int]] = set()
    for q, v in owner.items():
        for r in hw.adjacency.get(q, ()):
            u = owner.get(r)
            if u is not None and u != v:
                covered.add((min(u, v), max(u, v)))
    logical = sorted(emb.chains)
    missing = [(a, b) for i, a in enumerate(logical) for b in logical[i + 1:] if (a, b) not in covered]
    if missing:
        problems.append(f"{len(missing)} clique edges without a coupler, e.g. {missing[:3]}")
    if len(logical) != emb.logical_size:
        missing.append((-1, -1))
        problems.append(f"{len(logical)} chains for a clique of size {emb.logical_size}")
    return EmbeddingCheck(index, connected, disjoint, not missing, not bad_qubits, tuple(problems))


def validate(emb_set: DisjointEmbeddingSet) -> ValidationReport:
    """Check chain connectivity, chain disjointness, clique-edge coverage and
    disjointness between embeddings. Failures are reported, never raised."""
    hw = emb_set.target
    checks = tuple(_check_embedding(i, e, hw) for i, e in enumerate(emb_set.embeddings))
    owner: dict[int, int] = {}
    problems = []
    for i, e in enumerate(emb_set.embeddings):
        for q in e.qubits:
            if q in owner:
                problems.append(f"qubit {q} used by embeddings {owner[q]} and {i}")
            else:
                owner[q] = i
    return ValidationReport(checks, not problems, tuple(problems[:20]))


def _triangle_chains(m: int, shore: int, b: int, row0: int, col0: int, N: int) -> dict[int, tuple[int, ...]]:
    chains = {}
    for i in range(N):
        d, k = divmod(i, shore)
        horiz = [chimera_index(m, row0 + d, col0 + c, 1, k, shore) for c in range(d + 1)]
        vert = [chimera_index(m, row0 + r, col0 + d, 0, k, shore) for r in range(d, b)]
        chains[i] = tuple(horiz + vert)
    return chains


def tile_clique_chimera(hw: HardwareGraph, N: int) -> DisjointEmbeddingSet:
    """Deterministic tiling of ``K_N`` over disjoint ``b x b`` Chimera blocks.

    Yields ``floor(m / b)**2`` embeddings on an ideal chip; blocks touching a
    dead qubit are skipped.
    """
    if hw.topology != "chimera" or hw.shore is None:
        raise ParameterError("tiling requires a Chimera hardware graph")
    if N < 1:
        raise ParameterError(f"clique size must be >= 1, got {N}")
    shore = hw.shore
    b = -(-N // shore)
    if b > hw.m:
        raise CapacityError(f"K_{N} needs a {b}x{b} cell block; chip is only {hw.m}x{hw.m}")
    embeddings = []
    for br in range(hw.m // b):
        for bc in range(hw.m // b):
            emb = Embedding(_triangle_chains(hw.m, shore, b, br * b, bc * b, N), N)
            if emb.qubits & hw.dead:
                continue
            if _check_embedding(len(embeddings), emb, hw).ok:
                embeddings.append(emb)
    return DisjointEmbeddingSet(tuple(embeddings), hw)


@dataclass(frozen=True)
class ChainLengthStats:
    min: int
    max: int
    mean: float
    histogram: dict[int, int]


def chain_length_stats(emb_set: DisjointEmbeddingSet | Sequence[Embedding]) -> ChainLengthStats:
    embeddings = emb_set.embeddings if isinstance(emb_set, DisjointEmbeddingSet) else tuple(emb_set)
    lengths = [len(c) for e in embeddings for c in e.chains.values()]
    if not lengths:
        raise EmbeddingError("chain statistics need at least one chain")
    hist = Counter(lengths)
    return ChainLengthStats(min(lengths), max(lengths), sum(lengths) / len(lengths),
                            dict(sorted(hist.items())))


def embeddings_to_dict(emb_set: DisjointEmbeddingSet) -> dict:
    hw = emb_set.target
    return {
        "topology": hw.topology,
        "m": hw.m,
        "N": emb_set.logical_size,
        "embeddings": [{"chains": {str(v): list(c) for v, c in e.chains.items()}}
                       for e in emb_set.embeddings],
    }


def save_embeddings(emb_set: DisjointEmbeddingSet, path: str | Path) -> None:
    Path(path).write_text(json.dumps(embeddings_to_dict(emb_set)) + "\n", encoding="utf-8")


def load_embeddings(path: str | Path, hw: HardwareGraph) -> DisjointEmbeddingSet:
    """Load an embedding file and re-validate it against ``hw``.

    Raises:
        ValidationError: topology mismatch or a failed validation check.
        EmbeddingError: a chain references a qubit missing from ``hw``.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        topology, m, N = data["topology"], int(data["m"]), int(data["N"])
        raw = data["embeddings"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphFormatError(f"{path}: malformed embedding file ({exc})") from exc
    if topology != hw.topology or m != hw.m:
        raise ValidationError(f"embeddings target {topology}({m}), hardware is {hw.topology}({hw.m})")
    embeddings = []
    for i, entry in enumerate(raw):
        chains = {int(v): tuple(c) for v, c in entry["chains"].items()}
        unknown = sorted(q for c in chains.values() for q in c if q not in hw.qubits)
        if unknown:
            raise EmbeddingError(f"embedding {i} references unknown qubits {unknown[:5]}")
        embeddings.append(Embedding(chains, N))
    emb_set = DisjointEmbeddingSet(tuple(embeddings), hw)
    report = validate(emb_set)
    if not report.ok:
        raise ValidationError(report.summary())
    return emb_set
