"""Turn physical reads back into logical assignments.

A chain is broken when its qubits disagree. ``majority_vote`` takes the
majority value with a fair coin on ties; ``weighted_random`` picks +1 with
probability equal to the fraction of the chain's qubits at +1. Both leave
intact chains untouched.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .embedding import Embedding
from .errors import EvaluationError, ParameterError, ValidationError
from .model import Qubo
from .parametrize import PhysicalProblem
from .sampler import SampleSet

__all__ = [
    "UnembedResult",
    "detect_broken",
    "majority_vote",
    "weighted_random",
    "unembed_sampleset",
    "METHODS",
]

METHODS = ("weighted_random", "majority_vote")


def _chain_values(read: Mapping[int, int], embedding: Embedding) -> dict[int, list[int]]:
    out = {}
    for v, chain in embedding.chains.items():
        try:
            out[v] = [read[q] for q in chain]
        except KeyError as exc:
            raise EvaluationError(f"read has no value for qubit {exc.args[0]} (chain of {v})") from None
    return out


def detect_broken(read: Mapping[int, int], embedding: Embedding) -> set[int]:
    """Logical variables whose chain qubits disagree."""
    return {v for v, vals in _chain_values(read, embedding).items() if len(set(vals)) > 1}


def majority_vote(read: Mapping[int, int], embedding: Embedding, rng: np.random.Generator) -> dict[int, int]:
    out = {}
    for v, vals in _chain_values(read, embedding).items():
        total = sum(vals)
        if total == 0:
            out[v] = 1 if rng.random() < 0.5 else -1
        else:
            out[v] = 1 if total > 0 else -1
    return out


def weighted_random(read: Mapping[int, int], embedding: Embedding, rng: np.random.Generator) -> dict[int, int]:
    out = {}
    for v, vals in _chain_values(read, embedding).items():
        up = sum(1 for x in vals if x > 0) / len(vals)
        if up in (0.0, 1.0):
            out[v] = 1 if up else -1
        else:
            out[v] = 1 if rng.random() < up else -1
    return out


@dataclass(frozen=True)
class UnembedResult:
    """Per-part logical reads; ``broken_counts[r, i]`` counts broken chains of
    part ``i`` in read ``r``."""

    logical_samples: tuple[np.ndarray, ...]
    logical_energies: tuple[np.ndarray, ...]
    broken_counts: np.ndarray
    chain_counts: tuple[int, ...]
    unembed_seconds: float
    method: str

    @property
    def num_reads(self) -> int:
        return self.broken_counts.shape[0]

    def broken_fraction(self, part: int | None = None) -> float:
        """Fraction of broken chains over all reads (and parts unless given)."""
        if part is None:
            total = self.num_reads * sum(self.chain_counts)
            return float(self.broken_counts.sum() / total) if total else 0.0
        total = self.num_reads * self.chain_counts[part]
        return float(self.broken_counts[:, part].sum() / total) if total else 0.0

    def broken_per_read(self) -> np.ndarray:
        return self.broken_counts.sum(axis=1)


def unembed_sampleset(samples: SampleSet, physical: PhysicalProblem, method: str = "weighted_random",
                      seed=0) -> UnembedResult:
    """Resolve every read for every part of ``physical``.

    ``unembed_seconds`` is the wall time of this call.

    Raises:
        ValidationError: a chain qubit is missing from the sample variables.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown unembedding method {method!r}; choose from {METHODS}")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    column = {q: i for i, q in enumerate(samples.variables)}
    spins = np.asarray(samples.assignments)
    if spins.size and not np.all(np.abs(spins) == 1):
        raise ValidationError("unembedding expects spin samples of the physical Ising problem")
    reads = spins.shape[0]
    logical, energies, broken, counts = [], [], [], []
    for i, part in enumerate(physical.parts):
        chains = physical.chains_for(i)
        variables = part.variables
        try:
            cols = np.array([column[q] for v in variables for q in chains[v]], dtype=np.int64)
        except KeyError as exc:
            raise ValidationError(f"sample set has no column for chain qubit {exc.args[0]}") from None
        lengths = np.array([len(chains[v]) for v in variables], dtype=np.int64)
        starts = np.concatenate([[0], np.cumsum(lengths)[:-1]])
        sums = np.add.reduceat(spins[:, cols].astype(np.int64), starts, axis=1)
        is_broken = np.abs(sums) != lengths
        u = rng.random((reads, len(variables)))
        if method == "majority_vote":
            values = np.where(sums > 0, 1, -1)
            values = np.where(sums == 0, np.where(u < 0.5, 1, -1), values)
        else:
            up = (sums + lengths) / (2 * lengths)
            values = np.where(u < up, 1, -1)
        values = values.astype(np.int8)
        if isinstance(part, Qubo):
            values = ((values + 1) // 2).astype(np.int8)
        logical.append(values)
        energies.append(part.energies(values))
        broken.append(is_broken.sum(axis=1))
        counts.append(len(variables))
    broken_counts = np.stack(broken, axis=1) if broken else np.zeros((reads, 0), dtype=np.int64)
    elapsed = time.perf_counter() - start
    return UnembedResult(tuple(logical), tuple(energies), broken_counts, tuple(counts), elapsed, method)
