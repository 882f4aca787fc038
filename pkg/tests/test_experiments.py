import json

import pytest

from parqa.errors import CapacityError, ParameterError, UndefinedTTSError
from parqa.experiments import (ExperimentConfig, build_embeddings, build_hardware, check_solved, derive_seed,
                               emit_reports, generate_problems, load_report, run_comparison, run_parallel,
                               run_replicas, run_sequential)

SMALL = dict(m=4, N=8, densities=(0.5,), calls=2, anneals_per_call=50, sweeps=300, seed=5)


def small(**kw):
    return ExperimentConfig(**{**SMALL, **kw})


def test_config_validation(tmp_path):
    with pytest.raises(ParameterError):
        ExperimentConfig(calls=0)
    with pytest.raises(ParameterError):
        ExperimentConfig(densities=(1.2,))
    with pytest.raises(ParameterError):
        ExperimentConfig.from_dict({"nonsense": 1})
    with pytest.raises(ParameterError):
        ExperimentConfig().require_seed()
    cfg = small()
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.load(path) == cfg


def test_derive_seed():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    assert derive_seed(1, 2, 3) != derive_seed(1, 3, 2)
    assert derive_seed(1, 2) != derive_seed(2, 2)


def test_build_embeddings():
    cfg = small()
    hw = build_hardware(cfg)
    assert len(build_embeddings(cfg, hw)) == 4
    assert len(build_embeddings(small(k=2), hw)) == 2
    with pytest.raises(CapacityError):
        build_embeddings(small(k=5), hw)


def test_problems_deterministic():
    a = generate_problems(small(), 4)
    b = generate_problems(small(), 4)
    assert [p.graph for p in a] == [p.graph for p in b]
    assert len({p.graph.digest() for p in a}) == 4


def test_comparison_end_to_end(tmp_path):
    result = run_comparison(small())
    par = [r for r in result.records if r.mode == "parallel"]
    seq = [r for r in result.records if r.mode == "sequential"]
    assert len(par) == len(seq) == 4
    assert [r.graph_hash for r in par] == [r.graph_hash for r in seq]
    (ens,) = result.ensembles
    assert ens.mode == "comparison" and ens.K == 4
    assert ens.speedup == pytest.approx(ens.tts_sequential_total / ens.tts_parallel)
    # seq T covers K separate runs of the same length as the single parallel run
    assert sum(r.T_qpu for r in seq) == pytest.approx(4 * par[0].T_qpu)
    paths = emit_reports(result, tmp_path)
    header = paths["problems.csv"].read_text().splitlines()[0]
    assert header.startswith("mode,problem_size,density")
    back = load_report(paths["report.json"])
    assert back.records == result.records
    assert back.problems == result.problems


def test_sequential_reuses_problems():
    par = run_parallel(small(k=2))
    seq = run_sequential(small(k=2), par.problems)
    assert [r.graph_hash for r in seq.records] == [r.graph_hash for r in par.records]


def test_replicas():
    result = run_replicas(small(N=8, replicas=4))
    one, many = result.records
    assert one.mode == "replicas-1" and many.mode == "replicas-4"
    assert many.gsp >= one.gsp - 0.1
    (ens,) = result.ensembles
    assert ens.K == 4


def test_unsolved_is_reported():
    # one read of one cold sweep misses the ground state of this instance
    cfg = small(N=12, densities=(0.7,), calls=1, anneals_per_call=1, sweeps=1, beta_initial=10.0,
                retry_limit=0, m=3)
    result = run_parallel(cfg)
    assert len(result.unsolved) == 1
    assert result.ensembles[0].tts_parallel is None and not result.ensembles[0].solved
    with pytest.raises(UndefinedTTSError):
        check_solved(result)
