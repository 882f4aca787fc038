"""Parallel quantum annealing of many small problems, with a simulated annealer.

Submodules: ``hardware`` (Chimera/Pegasus graphs), ``model`` (QUBO/Ising),
``embedding`` and ``heuristic`` (disjoint clique embeddings), ``parametrize``
(physical problems, QPU time model), ``sampler`` (simulated annealing),
``unembed``, ``clique`` (exact maximum clique), ``metrics`` (GSP, TTS) and
``experiments`` (protocols and reports).
"""

__version__ = "0.1.0"
