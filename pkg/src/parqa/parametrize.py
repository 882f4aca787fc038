"""Place logical problems on embeddings and model QPU access time.

A logical QUBO is converted to Ising form and spread over its chains: each
linear bias is split equally over the chain's qubits, each coupler equally
over the physical couplers joining the two chains, and every coupler induced
inside a chain gets ``-chain_strength``. The Ising offset is carried over, so
for a chain-consistent physical state

    E_logical = E_physical + chain_offset,

where ``chain_offset`` sums ``chain_strength * (intra-chain coupler count)``
over all placed problems.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .embedding import DisjointEmbeddingSet, Embedding
from .errors import CapacityError, EmbeddingError, ParameterError
from .hardware import HardwareGraph
from .model import IsingModel, Model, to_ising

__all__ = [
    "PhysicalProblem",
    "QpuTimeModel",
    "chain_strength_utc",
    "embed_problem",
    "embed_composite",
    "qpu_time",
]

UTC_PREFACTOR = 0.2


@dataclass(frozen=True)
class PhysicalProblem:
    """Physical Ising problem plus what is needed to read results back.

    ``parts[i]`` was placed on ``embeddings[i]`` with ``chain_strengths[i]``;
    logical variable ``v`` of part ``i`` lives on ``embeddings[i].chains[v]``.
    """

    ising: IsingModel
    parts: tuple[Model, ...]
    embeddings: tuple[Embedding, ...]
    chain_strengths: tuple[float, ...]
    chain_edge_counts: tuple[int, ...]

    @property
    def chain_strength(self) -> float:
        """The common chain strength (the largest one if parts differ)."""
        return max(self.chain_strengths)

    @property
    def chain_offset(self) -> float:
        return sum(cs * n for cs, n in zip(self.chain_strengths, self.chain_edge_counts))

    def chains_for(self, i: int) -> dict[int, tuple[int, ...]]:
        """Chains used by part ``i``, keyed by its logical variables."""
        chains = self.embeddings[i].chains
        return {v: chains[v] for v in self.parts[i].variables}


@dataclass(frozen=True)
class QpuTimeModel:
    """Modelled QPU access time; all durations in seconds."""

    anneal_time: float = 50e-6
    readout_time: float = 0.0
    programming_time: float = 0.0
    delay_time: float = 0.0

    def __post_init__(self):
        for name in ("anneal_time", "readout_time", "programming_time", "delay_time"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
                raise ParameterError(f"{name} must be a finite value >= 0, got {value!r}")


def qpu_time(model: QpuTimeModel, num_reads: int) -> float:
    """Programming once plus anneal, readout and delay for every read."""
    if num_reads < 1:
        raise ParameterError(f"num_reads must be >= 1, got {num_reads}")
    return model.programming_time + num_reads * (model.anneal_time + model.readout_time + model.delay_time)


def chain_strength_utc(logical: Model, prefactor: float = UTC_PREFACTOR) -> float:
    """Uniform torque compensation on the coefficients of ``logical`` as given.

    ``prefactor * rms(J) * sqrt(mean degree)``, the mean taken over the
    variables that appear in at least one interaction. Without interactions
    the strength falls back to 1.0 with a warning.
    """
    if prefactor < 0:
        raise ParameterError(f"prefactor must be >= 0, got {prefactor}")
    weights = [w for w in logical.quadratic.values() if w != 0.0]
    if not weights:
        warnings.warn("problem has no quadratic terms; using chain strength 1.0", RuntimeWarning,
                      stacklevel=2)
        return 1.0
    if prefactor == 0:
        warnings.warn("UTC prefactor 0 gives chain strength 0", RuntimeWarning, stacklevel=2)
    rms = math.sqrt(sum(w * w for w in weights) / len(weights))
    deg: dict[int, int] = {}
    for (a, b), w in logical.quadratic.items():
        if w != 0.0:
            deg[a] = deg.get(a, 0) + 1
            deg[b] = deg.get(b, 0) + 1
    mean_degree = sum(deg.values()) / len(deg)
    return prefactor * rms * math.sqrt(mean_degree)


def _place(logical: Model, emb: Embedding, hw: HardwareGraph, chain_strength: float,
           h: dict[int, float], J: dict[tuple[int, int], float]) -> tuple[float, int]:
    """Add one problem's physical terms into ``h``/``J``; return (offset, chain edges)."""
    missing = [v for v in logical.variables if v not in emb.chains]
    if missing:
        raise EmbeddingError(f"logical variables {missing[:5]} have no chain in a K_{emb.logical_size} embedding")
    ising = to_ising(logical)
    for v in ising.variables:
        chain = emb.chains[v]
        share = ising.linear.get(v, 0.0) / len(chain)
        for q in chain:
            h[q] = h.get(q, 0.0) + share
    for (a, b), w in ising.quadratic.items():
        couplers = emb.couplers_between(hw, a, b)
        if not couplers:
            raise EmbeddingError(f"no physical coupler between the chains of {a} and {b}")
        share = w / len(couplers)
        for p, q in couplers:
            key = (p, q) if p < q else (q, p)
            J[key] = J.get(key, 0.0) + share
    edges = 0
    for v in ising.variables:
        for key in emb.chain_edges(hw, v):
            J[key] = J.get(key, 0.0) - chain_strength
            edges += 1
    return ising.offset, edges


def embed_problem(logical: Model, embedding: Embedding, hw: HardwareGraph,
                  chain_strength: float | None = None) -> PhysicalProblem:
    """Physical Ising problem for ``logical`` on one embedding.

    ``chain_strength`` defaults to :func:`chain_strength_utc` of ``logical``.
    """
    if chain_strength is None:
        chain_strength = chain_strength_utc(logical)
    if chain_strength < 0:
        raise ParameterError(f"chain strength must be >= 0, got {chain_strength}")
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset, edges = _place(logical, embedding, hw, chain_strength, h, J)
    variables = tuple(sorted(h))
    return PhysicalProblem(IsingModel(h, J, offset, variables), (logical,), (embedding,),
                           (float(chain_strength),), (edges,))


def embed_composite(parts: Sequence[Model], emb_set: DisjointEmbeddingSet, hw: HardwareGraph,
                    chain_strength: float | None = None,
                    prefactor: float = UTC_PREFACTOR) -> PhysicalProblem:
    """Place ``parts[i]`` on ``emb_set[i]`` and merge them into one problem.

    Each part gets its own UTC chain strength unless ``chain_strength`` is
    given as a global override.

    Raises:
        CapacityError: more parts than embeddings.
    """
    parts = tuple(parts)
    if not parts:
        raise ParameterError("embed_composite needs at least one part")
    if len(parts) > len(emb_set):
        raise CapacityError(f"{len(parts)} problems but only {len(emb_set)} embeddings")
    h: dict[int, float] = {}
    J: dict[tuple[int, int], float] = {}
    offset = 0.0
    strengths, counts = [], []
    for part, emb in zip(parts, emb_set.embeddings):
        cs = chain_strength if chain_strength is not None else chain_strength_utc(part, prefactor)
        part_offset, edges = _place(part, emb, hw, cs, h, J)
        offset += part_offset
        strengths.append(float(cs))
        counts.append(edges)
    variables = tuple(sorted(h))
    return PhysicalProblem(IsingModel(h, J, offset, variables), parts,
                           tuple(emb_set.embeddings[:len(parts)]), tuple(strengths), tuple(counts))
