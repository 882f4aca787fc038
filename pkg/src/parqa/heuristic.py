"""Randomised search for many disjoint clique embeddings on any topology.

Embeddings are placed one at a time. Seed qubits sweep outward from one
corner of the chip so that embeddings pack densely. For each seed a ball of
free qubits is grown and a single ``K_N`` minor is searched inside it with
minorminer's chain-growth heuristic (rip-up and re-route with restarts). A
failed region is retried once at a larger size before moving on. Accepted
embeddings retire their qubits.

Every random choice is drawn from one generator seeded by ``seed`` and each
minorminer call terminates by its restart count rather than a clock, so the
sequence of attempts is fixed by the seed. A larger time budget only
extends that sequence and never yields fewer embeddings.
"""

from __future__ import annotations

import math
import time
from collections import deque

import minorminer
import numpy as np

from .embedding import DisjointEmbeddingSet, Embedding, _check_embedding, tile_clique_chimera
from .errors import CapacityError, ParameterError
from .hardware import HardwareGraph

__all__ = ["greedy_disjoint_embedder", "find_clique_embedding"]

REGION_SCALES = (2.0, 3.0)


def find_clique_embedding(hw: HardwareGraph, N: int, qubits, seed: int, tries: int = 4) -> Embedding | None:
    """One ``K_N`` minor using only ``qubits``, or None."""
    allowed = set(qubits)
    edges = [e for q in allowed for e in ((q, r) for r in hw.adjacency[q] if r in allowed and q < r)]
    if len(allowed) < N:
        return None
    if N == 1:
        return Embedding({0: (min(allowed),)}, 1)
    clique = [(a, b) for a in range(N) for b in range(a + 1, N)]
    # huge timeout: the restart count, not the clock, ends the search
    found = minorminer.find_embedding(clique, sorted(edges), random_seed=seed, tries=tries,
                                      threads=1, timeout=10_000)
    if len(found) != N:
        return None
    return Embedding({v: tuple(sorted(c)) for v, c in found.items()}, N)


def _sweep_order(hw: HardwareGraph, rng) -> list[int]:
    """Usable qubits ordered by BFS distance from the lowest-id qubit."""
    usable = sorted(hw.usable_qubits)
    order: list[int] = []
    seen = set()
    for start in usable:
        if start in seen:
            continue
        seen.add(start)
        level = [start]
        while level:
            order.extend(level[i] for i in rng.permutation(len(level)))
            nxt = []
            for q in level:
                for r in sorted(hw.adjacency[q]):
                    if r not in seen:
                        seen.add(r)
                        nxt.append(r)
            level = nxt
    return order


def _ball(hw: HardwareGraph, start: int, free: set[int], size: int) -> list[int]:
    seen = {start}
    out = [start]
    queue = deque([start])
    while queue and len(out) < size:
        q = queue.popleft()
        for r in sorted(hw.adjacency[q]):
            if r in free and r not in seen:
                seen.add(r)
                out.append(r)
                queue.append(r)
                if len(out) >= size:
                    break
    return out


def greedy_disjoint_embedder(hw: HardwareGraph, N: int, k_target: int | str = "max", seed=0,
                             time_budget: float = 60.0, max_attempts: int | None = None,
                             fallback_tiling: bool = True) -> DisjointEmbeddingSet:
    """Embed as many vertex-disjoint copies of ``K_N`` as the budget allows.

    Args:
        hw: target hardware graph (any topology; dead qubits are avoided).
        N: clique size.
        k_target: stop after this many embeddings, or ``"max"``.
        seed: seed for every random choice.
        time_budget: wall-clock cap in seconds, checked between attempts.
        max_attempts: work cap in seed qubits tried; set it (and a generous
            time budget) for results that do not depend on machine speed.
        fallback_tiling: on Chimera, return the deterministic tiling instead
            when it holds more embeddings than the search found.

    Returns:
        A set that always passes :func:`~parqa.embedding.validate`; it may be
        empty.
    """
    if N < 1:
        raise ParameterError(f"clique size must be >= 1, got {N}")
    if k_target != "max" and (not isinstance(k_target, int) or k_target < 1):
        raise ParameterError(f"k_target must be a positive int or 'max', got {k_target!r}")
    if time_budget <= 0:
        raise ParameterError(f"time budget must be positive, got {time_budget}")
    cap = math.inf if k_target == "max" else k_target
    rng = np.random.default_rng(seed)
    deadline = time.monotonic() + time_budget

    if N == 1:
        qubits = sorted(hw.usable_qubits)
        if cap != math.inf:
            qubits = qubits[:cap]
        return DisjointEmbeddingSet(tuple(Embedding({0: (q,)}, 1) for q in qubits), hw)

    free = set(hw.usable_qubits)
    order = _sweep_order(hw, rng)
    mean_degree = 2 * len(hw.usable_edges) / max(1, len(hw.usable_qubits))
    base_size = N * max(2, math.ceil(2 * N / max(mean_degree, 1.0)))
    embeddings: list[Embedding] = []
    attempts = 0
    for start in order:
        if len(embeddings) >= cap:
            break
        if max_attempts is not None and attempts >= max_attempts:
            break
        if time.monotonic() > deadline:
            break
        if start not in free:
            continue
        attempts += 1
        for scale in REGION_SCALES:
            nodes = _ball(hw, start, free, int(base_size * scale))
            if len(nodes) < N:
                break
            emb = find_clique_embedding(hw, N, nodes, int(rng.integers(2**31)))
            if emb is not None and _check_embedding(len(embeddings), emb, hw).ok and not (emb.qubits - free):
                embeddings.append(emb)
                free -= emb.qubits
                break
            if len(nodes) < int(base_size * scale):
                break  # the ball is already everything reachable
    result = DisjointEmbeddingSet(tuple(embeddings), hw)
    if fallback_tiling and hw.topology == "chimera" and hw.shore is not None:
        try:
            tiled = tile_clique_chimera(hw, N)
        except CapacityError:
            tiled = None
        if tiled is not None:
            if cap != math.inf:
                tiled = DisjointEmbeddingSet(tiled.embeddings[:cap], hw)
            if len(tiled) > len(result):
                return tiled
    return result
