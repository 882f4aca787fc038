"""Simulated-annealing stand-in for the annealer, and a brute-force oracle.

Each read is an independent single-spin-flip Metropolis run over a fixed
inverse-temperature schedule, sweeping spins in variable order. Uphill moves
whose acceptance probability is below 2**-53 are rejected without a draw. Read ``r`` draws all of its randomness from a
splitmix64 stream seeded with ``read_seed(master_seed, r)``, so results do
not depend on how reads are spread over threads.
"""

from __future__ import annotations

import csv
import math
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numba
import numpy as np

from .errors import CapacityError, ParameterError
from .model import IsingModel, Model, Qubo, qubo_to_ising
from .parametrize import QpuTimeModel, qpu_time

__all__ = ["SamplerConfig", "SampleSet", "BruteForceResult", "anneal", "brute_force", "read_seeds"]

# numba probes an old system TBB before falling back to OpenMP; the probe is harmless
warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)

BRUTE_FORCE_LIMIT = 26
# exp(-x) < 2**-53 beyond this, so a 53-bit uniform draw would (all but) never accept
_REJECT_CUTOFF = 36.7
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@dataclass(frozen=True)
class SamplerConfig:
    num_reads: int = 1000
    sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0
    schedule: str = "geometric"
    master_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.num_reads, (int, np.integer)) or self.num_reads < 1:
            raise ParameterError(f"num_reads must be >= 1, got {self.num_reads!r}")
        if not isinstance(self.sweeps, (int, np.integer)) or self.sweeps < 1:
            raise ParameterError(f"sweeps must be >= 1, got {self.sweeps!r}")
        if not 0 < self.beta_initial <= self.beta_final:
            raise ParameterError(f"need 0 < beta_initial <= beta_final, got "
                                 f"{self.beta_initial}, {self.beta_final}")
        if self.schedule not in ("geometric", "linear"):
            raise ParameterError(f"schedule must be 'geometric' or 'linear', got {self.schedule!r}")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ParameterError("master_seed must fit in 64 unsigned bits")

    def betas(self) -> np.ndarray:
        if self.sweeps == 1:
            return np.array([self.beta_final])
        if self.schedule == "geometric":
            return np.geomspace(self.beta_initial, self.beta_final, self.sweeps)
        return np.linspace(self.beta_initial, self.beta_final, self.sweeps)


@dataclass(frozen=True)
class SampleSet:
    """Reads over ``variables``; values are spins or bits to match the problem."""

    variables: tuple[int, ...]
    assignments: np.ndarray
    energies: np.ndarray
    read_seeds: np.ndarray
    timing: dict = field(default_factory=dict)

    @property
    def num_reads(self) -> int:
        return self.assignments.shape[0]

    def to_csv(self, path: str | Path, broken_chain_count: Sequence[int] | None = None,
               include_assignment: bool = False) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            header = ["read_index", "energy", "broken_chain_count"]
            if include_assignment:
                header.append("assignment")
            w.writerow(header)
            for r in range(self.num_reads):
                row = [r, repr(float(self.energies[r])),
                       "" if broken_chain_count is None else int(broken_chain_count[r])]
                if include_assignment:
                    row.append("".join("1" if x > 0 else "0" for x in self.assignments[r]))
                w.writerow(row)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def read_seeds(master_seed: int, num_reads: int, start: int = 0) -> np.ndarray:
    """Per-read seeds: splitmix64 finaliser of the master seed mixed with the index."""
    with np.errstate(over="ignore"):
        base = _mix(np.array([master_seed], dtype=np.uint64) + _GOLDEN)[0]
        idx = np.arange(start, start + num_reads, dtype=np.uint64)
        return _mix(base ^ _mix((idx + np.uint64(1)) * _GOLDEN))


@numba.njit(cache=True, inline="always")
def _next(state):
    state = state + np.uint64(0x9E3779B97F4A7C15)
    z = state
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return state, z ^ (z >> np.uint64(31))


@numba.njit(cache=True, parallel=True)
def _anneal_kernel(h, indptr, indices, data, betas, seeds, out):
    n = h.shape[0]
    for r in numba.prange(seeds.shape[0]):
        state = seeds[r]
        s = out[r]
        for i in range(n):
            state, x = _next(state)
            s[i] = 1 if (x >> np.uint64(63)) else -1
        local = np.empty(n)
        for i in range(n):
            f = h[i]
            for k in range(indptr[i], indptr[i + 1]):
                f += data[k] * s[indices[k]]
            local[i] = f
        for beta in betas:
            for i in range(n):
                delta = -2.0 * s[i] * local[i]
                if delta > 0.0:
                    if beta * delta > _REJECT_CUTOFF:
                        continue
                    state, x = _next(state)
                    u = (x >> np.uint64(11)) * (1.0 / 9007199254740992.0)
                    if u >= math.exp(-beta * delta):
                        continue
                s[i] = -s[i]
                step = 2.0 * s[i]
                for k in range(indptr[i], indptr[i + 1]):
                    local[indices[k]] += step * data[k]


def _csr(ising: IsingModel):
    h, rows, cols, J = ising.arrays()
    n = len(h)
    r = np.concatenate([rows, cols])
    c = np.concatenate([cols, rows])
    d = np.concatenate([J, J])
    order = np.lexsort((c, r))
    r, c, d = r[order], c[order], d[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, r + 1, 1)
    return h, np.cumsum(indptr), c.astype(np.int64), d


def anneal(problem: Model, config: SamplerConfig = SamplerConfig(),
           time_model: QpuTimeModel = QpuTimeModel(), first_read: int = 0) -> SampleSet:
    """``config.num_reads`` independent anneals of ``problem``.

    A :class:`Qubo` is annealed through its Ising form and read out as bits.
    ``first_read`` offsets the read indices used for seeding, so consecutive
    calls of one experiment draw disjoint streams.
    """
    if problem.num_variables == 0:
        raise ParameterError("cannot anneal an empty problem")
    ising = qubo_to_ising(problem) if isinstance(problem, Qubo) else problem
    start = time.perf_counter()
    h, indptr, indices, data = _csr(ising)
    seeds = read_seeds(int(config.master_seed), config.num_reads, first_read)
    spins = np.empty((config.num_reads, len(h)), dtype=np.int8)
    _anneal_kernel(h, indptr, indices, data, config.betas(), seeds, spins)
    values = ((spins + 1) // 2).astype(np.int8) if isinstance(problem, Qubo) else spins
    energies = problem.energies(values)
    wall = time.perf_counter() - start
    timing = {"modeled_qpu_seconds": qpu_time(time_model, config.num_reads), "wall_seconds": wall}
    return SampleSet(problem.variables, values, energies, seeds, timing)


@dataclass(frozen=True)
class BruteForceResult:
    min_energy: float
    minimizers: tuple[tuple[int, ...], ...]
    variables: tuple[int, ...]


def _states(n: int, lo: int, hi: int) -> np.ndarray:
    codes = np.arange(1 << n, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return np.where(bits == 1, hi, lo).astype(np.float64)


def brute_force(problem: Model, tol: float = 1e-9, chunk_bits: int = 18) -> BruteForceResult:
    """Exact minimum and every minimiser (values in ``problem.variables`` order).

    Variables are split into a low and a high half. Energies of all states are
    ``e_low[i] + e_high[j] + cross[i, j]``, evaluated one block of high states
    at a time so a block holds at most ``2**chunk_bits`` states.
    """
    n = problem.num_variables
    if n > BRUTE_FORCE_LIMIT:
        raise CapacityError(f"brute force is limited to {BRUTE_FORCE_LIMIT} variables, got {n}")
    lo, hi = problem.domain
    if n == 0:
        return BruteForceResult(float(problem.offset), ((),), ())
    h, rows, cols, J = problem.arrays()
    W = np.zeros((n, n))
    np.add.at(W, (np.minimum(rows, cols), np.maximum(rows, cols)), J)
    a = n // 2
    XL, XH = _states(a, lo, hi), _states(n - a, lo, hi)
    e_low = XL @ h[:a] + np.einsum("ij,jk,ik->i", XL, W[:a, :a], XL)
    e_high = XH @ h[a:] + np.einsum("ij,jk,ik->i", XH, W[a:, a:], XH) + problem.offset
    proj = XL @ W[:a, a:]
    block = max(1, (1 << chunk_bits) >> a)
    best = math.inf
    found: list[np.ndarray] = []
    for first in range(0, len(XH), block):
        xh = XH[first:first + block]
        e = e_low[:, None] + e_high[None, first:first + block] + proj @ xh.T
        m = float(e.min())
        if m < best - tol:
            best = m
            found = []
        if m <= best + tol:
            i, j = np.nonzero(e <= best + tol)
            found.append(np.hstack([XL[i], xh[j]]))
    rows_found = np.concatenate(found).astype(np.int8)
    exact = problem.energies(rows_found)
    best = float(exact.min())
    best_rows = rows_found[exact <= best + tol]
    minimizers = tuple(sorted(tuple(int(x) for x in r) for r in best_rows))
    return BruteForceResult(best, minimizers, problem.variables)
