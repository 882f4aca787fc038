"""Command-line interface: ``parqa <subcommand> ...`` (or ``python -m parqa``).

Exit codes: 0 success, 1 parameter error, 2 capacity or embedding error,
3 problems left unsolved after all retries.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

from . import clique as clq
from .embedding import chain_length_stats, save_embeddings, tile_clique_chimera, validate
from .errors import (CapacityError, EmbeddingError, GenerationError, GraphFormatError, ParameterError,
                     UndefinedTTSError, ValidationError)
from .experiments import (ExperimentConfig, derive_seed, emit_reports, load_report, run_comparison,
                          run_parallel, run_replicas, run_sequential)
from .hardware import apply_yield_mask, chimera_graph, pegasus_graph, save_graph
from .heuristic import greedy_disjoint_embedder

EXIT_OK, EXIT_PARAMETER, EXIT_CAPACITY, EXIT_UNSOLVED = 0, 1, 2, 3


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _bool(text: str) -> bool:
    if text.lower() in ("1", "true", "yes", "on"):
        return True
    if text.lower() in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


# config field -> (flag type, help)
_OVERRIDES = {
    "topology": (str, "chimera, pegasus or a hardware graph JSON file"),
    "m": (int, "grid size of the topology"),
    "N": (int, "clique (problem) size"),
    "densities": (_floats, "comma-separated edge densities"),
    "calls": (int, "backend calls per problem"),
    "anneals_per_call": (int, "anneals (reads) per backend call"),
    "sweeps": (int, "Metropolis sweeps per anneal"),
    "beta_initial": (float, "first inverse temperature"),
    "beta_final": (float, "last inverse temperature"),
    "schedule": (str, "geometric or linear"),
    "unembed_method": (str, "weighted_random or majority_vote"),
    "anneal_time": (float, "modelled seconds per anneal"),
    "readout_time": (float, "modelled readout seconds per anneal"),
    "programming_time": (float, "modelled programming seconds per call"),
    "delay_time": (float, "modelled delay seconds per anneal"),
    "utc_prefactor": (float, "uniform torque compensation prefactor"),
    "retry_limit": (int, "regenerations allowed for unsolved problems"),
    "outdir": (str, "output directory"),
    "embedder": (str, "auto, tile, greedy or file"),
    "embeddings_file": (str, "precomputed embedding JSON"),
    "embed_time_budget": (float, "seconds for the randomised embedder"),
    "k": (int, "number of simultaneous problems"),
    "normalize": (_bool, "scale each QUBO to max |coefficient| 1"),
    "u_source": (str, "modeled or measured unembedding time"),
    "unembed_seconds_per_qubit_read": (float, "coefficient of the modelled unembedding time"),
    "replicas": (int, "replica count for run-replicas"),
    "replica_density": (float, "edge density of the replica problem"),
}


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with ExperimentConfig fields")
    p.add_argument("--seed", type=int, required=True, help="master seed (required)")
    for name, (kind, text) in _OVERRIDES.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=kind, default=None, help=text)


def _config_from_args(args) -> ExperimentConfig:
    data = {}
    if args.config is not None:
        try:
            data = json.loads(args.config.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config {args.config}: {exc}") from exc
    for f in fields(ExperimentConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            data[f.name] = value
    data["seed"] = args.seed
    return ExperimentConfig.from_dict(data)


def _hardware(args):
    hw = chimera_graph(args.m) if args.kind == "chimera" else pegasus_graph(args.m)
    if args.dead:
        dead = json.loads(Path(args.dead).read_text(encoding="utf-8"))
        hw = apply_yield_mask(hw, dead)
    return hw


def cmd_topology(args) -> int:
    hw = _hardware(args)
    degrees = [hw.degree(q) for q in hw.usable_qubits]
    print(f"{hw.topology}({hw.m}): {hw.num_qubits} qubits, {hw.num_edges} couplers, "
          f"{len(hw.dead)} dead, max degree {max(degrees, default=0)}")
    if args.out:
        save_graph(hw, args.out)
    return EXIT_OK


def cmd_embed(args) -> int:
    hw = _hardware(args)
    if args.method == "tile":
        emb_set = tile_clique_chimera(hw, args.N)
    else:
        emb_set = greedy_disjoint_embedder(hw, args.N, args.k or "max", seed=args.seed,
                                           time_budget=args.time_budget, fallback_tiling=False)
    report = validate(emb_set)
    print(f"{len(emb_set)} embeddings of K_{args.N} on {hw.topology}({hw.m}); {report.summary().splitlines()[0]}")
    if len(emb_set):
        stats = chain_length_stats(emb_set)
        print(f"chain lengths: min {stats.min}, max {stats.max}, mean {stats.mean:.3f}, histogram {stats.histogram}")
    if args.out:
        save_embeddings(emb_set, args.out)
    return EXIT_OK if report.ok else EXIT_CAPACITY


def cmd_gen_graphs(args) -> int:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    densities = args.densities or tuple(clq.density_sweep())
    for j, d in enumerate(densities):
        for i in range(args.count):
            g = clq.erdos_renyi_constrained(args.n, d, derive_seed(args.seed, j, i))
            path = out / f"graph_n{args.n}_d{d:.2f}_{i:03d}.json"
            clq.save_graph_json(g, path)
            print(f"{path} density={g.density:.3f} hash={g.digest()}")
    return EXIT_OK


def cmd_solve_exact(args) -> int:
    g = clq.load_graph_json(args.graph)
    res = clq.max_clique_exact(g, enumerate_all=args.all)
    out = {"omega": res.omega, "witness": list(res.witness), "cpu_seconds": res.cpu_seconds}
    if res.all_maximum_cliques is not None:
        out["all_maximum_cliques"] = [list(c) for c in res.all_maximum_cliques]
    print(json.dumps(out))
    return EXIT_OK


def _finish(result, config) -> int:
    paths = emit_reports(result, config.outdir)
    for e in result.ensembles:
        print(f"{e.mode} density={e.density} K={e.K} p={e.p_ensemble} tts_parallel={e.tts_parallel} "
              f"tts_sequential_total={e.tts_sequential_total} speedup={e.speedup}")
    print(f"reports written to {paths['report.json'].parent}")
    if result.unsolved:
        print(f"{len(result.unsolved)} problems unsolved after retries", file=sys.stderr)
        return EXIT_UNSOLVED
    return EXIT_OK


def cmd_run_parallel(args) -> int:
    config = _config_from_args(args)
    if args.with_sequential:
        return _finish(run_comparison(config), config)
    return _finish(run_parallel(config), config)


def cmd_run_sequential(args) -> int:
    config = _config_from_args(args)
    problems = None
    if args.problems:
        problems = load_report(args.problems).problems
    return _finish(run_sequential(config, problems), config)


def cmd_run_replicas(args) -> int:
    config = _config_from_args(args)
    return _finish(run_replicas(config), config)


def cmd_report(args) -> int:
    result = load_report(Path(args.outdir) / "report.json")
    print(f"{'mode':<12}{'density':>8}{'K':>5}{'p_K':>10}{'tts_par':>14}{'tts_seq':>14}{'speedup':>10}")
    for e in result.ensembles:
        def f(x, spec):
            return format(x, spec) if x is not None else "-"
        print(f"{e.mode:<12}{e.density:>8.2f}{e.K:>5}{f(e.p_ensemble, '10.4f')}"
              f"{f(e.tts_parallel, '14.4e')}{f(e.tts_sequential_total, '14.4e')}{f(e.speedup, '10.2f')}")
    return EXIT_UNSOLVED if result.unsolved else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="parqa", description="Parallel quantum-annealing experiments "
                                     "on a simulated annealer.")
    sub = parser.add_subparsers(dest="command", required=True)

    def hw_options(p):
        p.add_argument("--kind", choices=("chimera", "pegasus"), default="chimera")
        p.add_argument("--m", type=int, default=16)
        p.add_argument("--dead", help="JSON list of dead qubit ids")

    p = sub.add_parser("topology", help="build a hardware graph and print a summary")
    hw_options(p)
    p.add_argument("--out", help="write the graph as JSON")
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("embed", help="compute disjoint clique embeddings")
    hw_options(p)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--method", choices=("tile", "greedy"), default="tile")
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--time-budget", type=float, default=60.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("gen-graphs", help="write constrained random graphs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--densities", type=_floats)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--outdir", required=True)
    p.set_defaults(func=cmd_gen_graphs)

    p = sub.add_parser("solve-exact", help="exact maximum clique of a graph file")
    p.add_argument("graph")
    p.add_argument("--all", action="store_true", help="also list every maximum clique")
    p.set_defaults(func=cmd_solve_exact)

    p = sub.add_parser("run-parallel", help="composite runs with ensemble TTS")
    _add_run_options(p)
    p.add_argument("--with-sequential", action="store_true", help="also run the paired sequential protocol")
    p.set_defaults(func=cmd_run_parallel)

    p = sub.add_parser("run-sequential", help="one problem per call")
    _add_run_options(p)
    p.add_argument("--problems", help="report.json of a parallel run whose problems to reuse")
    p.set_defaults(func=cmd_run_sequential)

    p = sub.add_parser("run-replicas", help="K copies of one problem per call")
    _add_run_options(p)
    p.set_defaults(func=cmd_run_replicas)

    p = sub.add_parser("report", help="summarise report.json in a directory")
    p.add_argument("outdir")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, GraphFormatError, ValidationError, GenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except (CapacityError, EmbeddingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except UndefinedTTSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSOLVED


if __name__ == "__main__":
    sys.exit(main())
