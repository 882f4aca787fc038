"""Parallel, sequential and replica protocols plus report emission.

Every random quantity is drawn from a seed derived from the master seed and
a fixed key path (protocol, density index, problem slot, attempt, call), so
a run is a pure function of its configuration. Reports carry only such
derived quantities and are byte-identical across repeated runs; measured
wall times go to a separate ``timings.json``.

The unembedding time U in the TTS formulas is modelled by default as
``unembed_seconds_per_qubit_read * reads * chain qubits`` so that it stays
deterministic; ``u_source = "measured"`` uses the measured wall time.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import clique as clq
from .embedding import DisjointEmbeddingSet, load_embeddings, tile_clique_chimera
from .errors import CapacityError, ParameterError, UndefinedTTSError
from .hardware import HardwareGraph, chimera_graph, load_graph, pegasus_graph
from .heuristic import greedy_disjoint_embedder
from .metrics import any_replica_gsp, gsp, p_ensemble, speedup, tts_ensemble, tts_replicas, tts_sequential
from .model import Qubo, max_clique_qubo, normalize
from .parametrize import QpuTimeModel, embed_composite
from .sampler import SamplerConfig, anneal
from .unembed import METHODS, unembed_sampleset

__all__ = [
    "ExperimentConfig",
    "Problem",
    "RunRecord",
    "EnsembleRecord",
    "ExperimentResult",
    "derive_seed",
    "build_hardware",
    "build_embeddings",
    "generate_problems",
    "run_parallel",
    "run_sequential",
    "run_comparison",
    "run_replicas",
    "emit_reports",
]

# key-path tags for derived seeds
_GRAPH, _PAR_SAMPLE, _PAR_UNEMBED, _SEQ_SAMPLE, _SEQ_UNEMBED, _REP_SAMPLE, _REP_UNEMBED, _EMBED = range(8)


@dataclass(frozen=True)
class ExperimentConfig:
    topology: str = "chimera"
    m: int = 16
    N: int = 8
    densities: tuple[float, ...] = tuple(clq.density_sweep())
    calls: int = 100
    anneals_per_call: int = 1000
    sweeps: int = 1000
    beta_initial: float = 0.1
    beta_final: float = 10.0
    schedule: str = "geometric"
    unembed_method: str = "weighted_random"
    anneal_time: float = 50e-6
    readout_time: float = 0.0
    programming_time: float = 0.0
    delay_time: float = 0.0
    utc_prefactor: float = 0.2
    seed: int | None = None
    retry_limit: int = 3
    outdir: str = "results"
    embedder: str = "auto"
    embeddings_file: str | None = None
    embed_time_budget: float = 60.0
    k: int | None = None
    normalize: bool = False
    u_source: str = "modeled"
    unembed_seconds_per_qubit_read: float = 5e-9
    replicas: int = 8
    replica_density: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "densities", tuple(float(d) for d in self.densities))
        for name in ("m", "N", "calls", "anneals_per_call", "sweeps", "replicas"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.retry_limit < 0:
            raise ParameterError(f"retry_limit must be >= 0, got {self.retry_limit}")
        if self.k is not None and self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if not self.densities:
            raise ParameterError("at least one density is required")
        for d in (*self.densities, self.replica_density):
            if not 0.0 < d < 1.0:
                raise ParameterError(f"densities must lie in (0, 1), got {d}")
        if self.unembed_method not in METHODS:
            raise ParameterError(f"unembed_method must be one of {METHODS}")
        if self.embedder not in ("auto", "tile", "greedy", "file"):
            raise ParameterError(f"unknown embedder {self.embedder!r}")
        if self.u_source not in ("modeled", "measured"):
            raise ParameterError(f"u_source must be 'modeled' or 'measured', got {self.u_source!r}")
        self.time_model()
        self.sampler_config(0)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParameterError(f"unknown config fields: {unknown}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["densities"] = list(self.densities)
        return d

    def time_model(self) -> QpuTimeModel:
        return QpuTimeModel(self.anneal_time, self.readout_time, self.programming_time, self.delay_time)

    def sampler_config(self, seed: int) -> SamplerConfig:
        return SamplerConfig(self.anneals_per_call, self.sweeps, self.beta_initial, self.beta_final,
                             self.schedule, seed)

    def require_seed(self) -> int:
        if self.seed is None:
            raise ParameterError("a master seed is required for runs")
        return int(self.seed)


def derive_seed(master: int, *path: int) -> int:
    """64-bit seed for a key path below ``master``."""
    ss = np.random.SeedSequence(master, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])


def build_hardware(config: ExperimentConfig) -> HardwareGraph:
    if config.topology == "chimera":
        return chimera_graph(config.m)
    if config.topology == "pegasus":
        return pegasus_graph(config.m)
    return load_graph(config.topology)


def build_embeddings(config: ExperimentConfig, hw: HardwareGraph) -> DisjointEmbeddingSet:
    """Embedding set of the configured kind, trimmed to ``k`` when given.

    Raises:
        CapacityError: fewer embeddings than requested, or none at all.
    """
    kind = config.embedder
    if config.embeddings_file:
        kind = "file"
    if kind == "auto":
        kind = "tile" if hw.topology == "chimera" and hw.shore == 4 else "greedy"
    if kind == "file":
        if not config.embeddings_file:
            raise ParameterError("embedder 'file' needs embeddings_file")
        emb_set = load_embeddings(config.embeddings_file, hw)
        if emb_set.logical_size < config.N:
            raise CapacityError(f"embeddings are for K_{emb_set.logical_size}, need K_{config.N}")
    elif kind == "tile":
        emb_set = tile_clique_chimera(hw, config.N)
    else:
        emb_set = greedy_disjoint_embedder(hw, config.N, config.k or "max",
                                           seed=derive_seed(config.require_seed(), _EMBED),
                                           time_budget=config.embed_time_budget)
    if len(emb_set) == 0:
        raise CapacityError(f"no embedding of K_{config.N} found on {hw.topology}({hw.m})")
    if config.k is not None:
        if config.k > len(emb_set):
            raise CapacityError(f"{config.k} problems requested but only {len(emb_set)} embeddings")
        emb_set = DisjointEmbeddingSet(emb_set.embeddings[:config.k], hw)
    return emb_set


@dataclass(frozen=True)
class Problem:
    density_index: int
    density: float
    slot: int
    attempt: int
    graph: clq.Graph
    omega: int

    @property
    def ground_energy(self) -> float:
        return -float(self.omega)

    @property
    def qubo(self) -> Qubo:
        return max_clique_qubo(self.graph)

    def to_dict(self) -> dict:
        return {"density_index": self.density_index, "density": self.density, "slot": self.slot,
                "attempt": self.attempt, "omega": self.omega, "graph": self.graph.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Problem":
        return cls(d["density_index"], d["density"], d["slot"], d["attempt"],
                   clq.graph_from_json_dict(d["graph"]), d["omega"])


def make_problem(config: ExperimentConfig, density_index: int, slot: int, attempt: int) -> Problem:
    seed = config.require_seed()
    density = config.densities[density_index]
    g = clq.erdos_renyi_constrained(config.N, density, derive_seed(seed, _GRAPH, density_index, slot, attempt))
    return Problem(density_index, density, slot, attempt, g, clq.max_clique_exact(g).omega)


def generate_problems(config: ExperimentConfig, K: int) -> list[Problem]:
    """First-attempt problems for every density and slot."""
    return [make_problem(config, j, i, 0) for j in range(len(config.densities)) for i in range(K)]


@dataclass
class RunRecord:
    mode: str
    density: float
    slot: int
    embedding_index: int
    attempt: int
    graph_hash: str
    problem_size: int
    omega: int
    hits: int
    anneals: int
    gsp: float
    tts: float | None
    T_qpu: float
    U: float
    broken_fraction: float
    chain_strength: float
    seeds: list[int] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.hits > 0


@dataclass
class EnsembleRecord:
    mode: str
    density: float
    K: int
    p_ensemble: float | None
    tts_parallel: float | None
    tts_sequential_total: float | None
    speedup: float | None
    T_qpu: float
    U: float
    attempts: int
    solved: bool


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[RunRecord] = field(default_factory=list)
    ensembles: list[EnsembleRecord] = field(default_factory=list)
    problems: list[Problem] = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def unsolved(self) -> list[RunRecord]:
        return [r for r in self.records if not r.solved]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "records": [asdict(r) for r in self.records],
            "ensembles": [asdict(e) for e in self.ensembles],
            "problems": [p.to_dict() for p in self.problems],
        }


def _unembed_cost(config: ExperimentConfig, measured: float, chain_qubits: int) -> float:
    if config.u_source == "measured":
        return measured
    return config.unembed_seconds_per_qubit_read * config.anneals_per_call * chain_qubits


def _sample_parts(config: ExperimentConfig, parts: Sequence[Qubo], emb_set: DisjointEmbeddingSet,
                  hw: HardwareGraph, sample_key: tuple, unembed_key: tuple, timings: dict):
    """Run ``config.calls`` backend calls on the composite of ``parts``.

    Returns per-part logical energies (calls concatenated), broken fractions,
    chain strengths, total modelled T_qpu and total U.
    """
    seed = config.require_seed()
    physical = embed_composite(parts, emb_set, hw, prefactor=config.utc_prefactor)
    chain_qubits = sum(len(c) for i in range(len(parts)) for c in physical.chains_for(i).values())
    energies = [[] for _ in parts]
    broken = np.zeros(len(parts))
    chains = np.array([p.num_variables for p in parts], dtype=np.float64)
    T = U = wall = 0.0
    seeds = []
    for call in range(config.calls):
        s = derive_seed(seed, *sample_key, call)
        seeds.append(s)
        samples = anneal(physical.ising, config.sampler_config(s), config.time_model())
        result = unembed_sampleset(samples, physical, config.unembed_method, derive_seed(seed, *unembed_key, call))
        for i, e in enumerate(result.logical_energies):
            energies[i].append(e)
        broken += result.broken_counts.sum(axis=0)
        T += samples.timing["modeled_qpu_seconds"]
        U += _unembed_cost(config, result.unembed_seconds, chain_qubits)
        wall += samples.timing["wall_seconds"]
        timings.setdefault("measured_unembed_seconds", 0.0)
        timings["measured_unembed_seconds"] += result.unembed_seconds
    timings["sampler_wall_seconds"] = timings.get("sampler_wall_seconds", 0.0) + wall
    A = config.calls * config.anneals_per_call
    fractions = broken / (A * chains)
    return [np.concatenate(e) for e in energies], fractions, physical.chain_strengths, T, U, seeds


def run_parallel(config: ExperimentConfig, hw: HardwareGraph | None = None,
                 emb_set: DisjointEmbeddingSet | None = None) -> ExperimentResult:
    """Solve ``K`` random problems per density in one composite per call.

    Problems never solved are regenerated (new attempt index) and the whole
    batch is rerun, up to ``retry_limit`` times; what remains is reported as
    unsolved with no ensemble TTS.
    """
    config.require_seed()
    hw = hw or build_hardware(config)
    emb_set = emb_set or build_embeddings(config, hw)
    K = len(emb_set)
    result = ExperimentResult(config)
    A = config.calls * config.anneals_per_call
    for j in range(len(config.densities)):
        batch = [make_problem(config, j, i, 0) for i in range(K)]
        for attempt in range(config.retry_limit + 1):
            parts = [p.qubo for p in batch]
            if config.normalize:
                parts, _ = normalize(parts)
            energies, broken, strengths, T, U, seeds = _sample_parts(
                config, parts, emb_set, hw, (_PAR_SAMPLE, j, attempt), (_PAR_UNEMBED, j, attempt), result.timings)
            probs = [gsp(e * (1.0 / _scale(p, config)), p.ground_energy) for e, p in zip(energies, batch)]
            unsolved = [i for i, p in enumerate(probs) if p == 0.0]
            if not unsolved or attempt == config.retry_limit:
                break
            for i in unsolved:
                batch[i] = make_problem(config, j, i, batch[i].attempt + 1)
        records = []
        for i, (p, prob) in enumerate(zip(batch, probs)):
            records.append(RunRecord("parallel", p.density, i, i, p.attempt, p.graph.digest(), config.N,
                                     p.omega, round(prob * A), A, prob, None, T, U, float(broken[i]),
                                     strengths[i], seeds))
        result.records.extend(records)
        result.problems.extend(batch)
        solved = not unsolved
        tts = tts_ensemble(K, p_ensemble(probs), A, T, U) if solved else None
        result.ensembles.append(EnsembleRecord("parallel", config.densities[j], K,
                                               p_ensemble(probs) if solved else None, tts, None, None,
                                               T, U, attempt + 1, solved))
    return result


def _scale(problem: Problem, config: ExperimentConfig) -> float:
    # multiplier applied to a part by normalisation (max-clique QUBOs peak at B = 2)
    if not config.normalize:
        return 1.0
    return 1.0 / problem.qubo.max_abs_coefficient()


def run_sequential(config: ExperimentConfig, problems: Sequence[Problem] | None = None,
                   hw: HardwareGraph | None = None,
                   emb_set: DisjointEmbeddingSet | None = None) -> ExperimentResult:
    """Solve each problem alone on the embedding of its slot.

    ``problems`` defaults to the first-attempt problems of every slot, which
    is what a parallel run with no retries uses.
    """
    config.require_seed()
    hw = hw or build_hardware(config)
    emb_set = emb_set or build_embeddings(config, hw)
    if problems is None:
        problems = generate_problems(config, len(emb_set))
    A = config.calls * config.anneals_per_call
    result = ExperimentResult(config, problems=list(problems))
    for p in problems:
        if p.slot >= len(emb_set):
            raise CapacityError(f"problem slot {p.slot} has no embedding (only {len(emb_set)})")
        single = DisjointEmbeddingSet((emb_set[p.slot],), hw)
        part = p.qubo.scaled(_scale(p, config)) if config.normalize else p.qubo
        energies, broken, strengths, T, U, seeds = _sample_parts(
            config, [part], single, hw, (_SEQ_SAMPLE, p.density_index, p.slot, p.attempt),
            (_SEQ_UNEMBED, p.density_index, p.slot, p.attempt), result.timings)
        prob = gsp(energies[0] * (1.0 / _scale(p, config)), p.ground_energy)
        tts = tts_sequential(prob, A, T, U) if prob > 0 else None
        result.records.append(RunRecord("sequential", p.density, p.slot, p.slot, p.attempt, p.graph.digest(),
                                        config.N, p.omega, round(prob * A), A, prob, tts, T, U,
                                        float(broken[0]), strengths[0], seeds))
    for j, d in enumerate(config.densities):
        recs = [r for r in result.records if r.density == d]
        if not recs:
            continue
        solved = all(r.solved for r in recs)
        total = math.fsum(r.tts for r in recs) if solved else None
        result.ensembles.append(EnsembleRecord("sequential", d, len(recs), None, None, total, None,
                                               math.fsum(r.T_qpu for r in recs), math.fsum(r.U for r in recs),
                                               1, solved))
    return result


def run_comparison(config: ExperimentConfig, hw: HardwareGraph | None = None,
                   emb_set: DisjointEmbeddingSet | None = None) -> ExperimentResult:
    """Parallel run, then the same problems sequentially; adds speedups."""
    hw = hw or build_hardware(config)
    emb_set = emb_set or build_embeddings(config, hw)
    par = run_parallel(config, hw, emb_set)
    seq = run_sequential(config, par.problems, hw, emb_set)
    merged = ExperimentResult(config, par.records + seq.records, [], par.problems, {})
    for key in set(par.timings) | set(seq.timings):
        merged.timings[key] = par.timings.get(key, 0.0) + seq.timings.get(key, 0.0)
    for pe in par.ensembles:
        se = next(e for e in seq.ensembles if e.density == pe.density)
        combined = replace(pe, mode="comparison", tts_sequential_total=se.tts_sequential_total)
        if pe.tts_parallel is not None and se.tts_sequential_total is not None:
            combined.speedup = speedup(se.tts_sequential_total, pe.tts_parallel)
        combined.solved = pe.solved and se.solved
        merged.ensembles.append(combined)
    return merged


def run_replicas(config: ExperimentConfig, K: int | None = None, problem: Problem | None = None,
                 hw: HardwareGraph | None = None,
                 emb_set: DisjointEmbeddingSet | None = None) -> ExperimentResult:
    """K copies of one problem per call versus a single copy.

    An anneal succeeds when any replica reaches the ground energy. The
    result holds one record per replica count (1 and K) and an ensemble row
    whose speedup is TTS(1) / TTS(K).
    """
    seed = config.require_seed()
    K = K or config.replicas
    hw = hw or build_hardware(config)
    emb_set = emb_set or build_embeddings(replace(config, k=None), hw)
    if K > len(emb_set):
        raise CapacityError(f"{K} replicas but only {len(emb_set)} embeddings")
    if problem is None:
        g = clq.erdos_renyi_constrained(config.N, config.replica_density, derive_seed(seed, _GRAPH, 999, 0, 0))
        problem = Problem(0, config.replica_density, 0, 0, g, clq.max_clique_exact(g).omega)
    A = config.calls * config.anneals_per_call
    result = ExperimentResult(config, problems=[problem])
    tts_by_k = {}
    for k in sorted({1, K}):
        subset = DisjointEmbeddingSet(emb_set.embeddings[:k], hw)
        energies, broken, strengths, T, U, seeds = _sample_parts(
            config, [problem.qubo] * k, subset, hw, (_REP_SAMPLE, k), (_REP_UNEMBED, k), result.timings)
        p_any = any_replica_gsp(energies, problem.ground_energy)
        tts = tts_replicas(p_any, A, T, U) if p_any > 0 else None
        tts_by_k[k] = tts
        hits = round(p_any * A)
        result.records.append(RunRecord(f"replicas-{k}", problem.density, 0, 0, 0, problem.graph.digest(),
                                        config.N, problem.omega, hits, A, p_any, tts, T, U,
                                        float(np.mean(broken)), strengths[0], seeds))
    base, par = tts_by_k[1], tts_by_k[K]
    both = base is not None and par is not None
    result.ensembles.append(EnsembleRecord("replicas", problem.density, K, result.records[-1].gsp, par, base,
                                           speedup(base, par) if both else None,
                                           result.records[-1].T_qpu, result.records[-1].U, 1, both))
    return result


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


PROBLEM_COLUMNS = ("mode", "problem_size", "density", "slot", "embedding_index", "attempt", "graph_hash",
                   "omega", "hits", "anneals", "gsp", "tts", "T_qpu", "U", "broken_fraction", "chain_strength")
ENSEMBLE_COLUMNS = ("mode", "density", "K", "p_ensemble", "tts_parallel", "tts_sequential_total", "speedup",
                    "T_qpu", "U", "attempts", "solved")


def emit_reports(result: ExperimentResult, outdir: str | Path) -> dict[str, Path]:
    """Write problems.csv, ensemble.csv, report.json and timings.json.

    Everything but timings.json is a deterministic function of the config.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in ("problems.csv", "ensemble.csv", "report.json", "timings.json")}
    with open(paths["problems.csv"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROBLEM_COLUMNS)
        for r in result.records:
            w.writerow([_fmt(getattr(r, c)) for c in PROBLEM_COLUMNS])
    with open(paths["ensemble.csv"], "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENSEMBLE_COLUMNS)
        for e in result.ensembles:
            w.writerow([_fmt(getattr(e, c)) for c in ENSEMBLE_COLUMNS])
    paths["report.json"].write_text(json.dumps(result.to_dict(), sort_keys=True, indent=1) + "\n",
                                    encoding="utf-8")
    paths["timings.json"].write_text(json.dumps(result.timings, sort_keys=True, indent=1) + "\n",
                                     encoding="utf-8")
    return paths


def load_report(path: str | Path) -> ExperimentResult:
    """Rebuild an :class:`ExperimentResult` from report.json (without timings)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    config = ExperimentConfig.from_dict(data["config"])
    return ExperimentResult(config, [RunRecord(**r) for r in data["records"]],
                            [EnsembleRecord(**e) for e in data["ensembles"]],
                            [Problem.from_dict(p) for p in data["problems"]], {})


def check_solved(result: ExperimentResult) -> None:
    """Raise :class:`UndefinedTTSError` listing unsolved problems, if any."""
    if result.unsolved:
        labels = [f"{r.mode}:d={r.density}:slot={r.slot}" for r in result.unsolved[:10]]
        raise UndefinedTTSError(f"{len(result.unsolved)} problems never solved: {labels}")
