import numpy as np
import pytest

from parqa.embedding import Embedding
from parqa.errors import EvaluationError, ParameterError, ValidationError
from parqa.hardware import chimera_graph
from parqa.model import IsingModel, Qubo
from parqa.parametrize import embed_problem
from parqa.sampler import SampleSet
from parqa.unembed import detect_broken, majority_vote, unembed_sampleset, weighted_random

EMB = Embedding({0: (0, 4, 1)}, 1)


def test_detect_broken():
    assert detect_broken({0: 1, 4: 1, 1: -1}, EMB) == {0}
    assert detect_broken({0: 1, 4: 1, 1: 1}, EMB) == set()


def test_intact_chain_unchanged():
    rng = np.random.default_rng(0)
    read = {0: -1, 4: -1, 1: -1}
    assert majority_vote(read, EMB, rng) == {0: -1}
    assert weighted_random(read, EMB, rng) == {0: -1}


def test_majority_vote():
    rng = np.random.default_rng(0)
    assert majority_vote({0: 1, 4: 1, 1: -1}, EMB, rng) == {0: 1}


def test_weighted_random_frequency():
    rng = np.random.default_rng(1)
    read = {0: 1, 4: 1, 1: -1}
    ups = sum(weighted_random(read, EMB, rng)[0] == 1 for _ in range(5000))
    assert abs(ups / 5000 - 2 / 3) < 0.03


def test_missing_qubit():
    with pytest.raises(EvaluationError):
        majority_vote({0: 1}, EMB, np.random.default_rng(0))


def _physical():
    hw = chimera_graph(1)
    emb = Embedding({0: (0, 4), 1: (1, 5)}, 2)
    return embed_problem(Qubo({0: -1, 1: -1}, {(0, 1): 2}), emb, hw, chain_strength=1.0)


def test_unembed_sampleset():
    physical = _physical()
    variables = physical.ising.variables
    assert variables == (0, 1, 4, 5)
    rows = np.array([[1, -1, 1, -1], [1, 1, 1, 1], [1, -1, -1, -1]], dtype=np.int8)
    samples = SampleSet(variables, rows, np.zeros(3), np.zeros(3, dtype=np.uint64))
    res = unembed_sampleset(samples, physical, method="majority_vote")
    np.testing.assert_array_equal(res.logical_samples[0][:2], [[1, 0], [1, 1]])
    np.testing.assert_allclose(res.logical_energies[0][:2], [-1, 0])
    np.testing.assert_array_equal(res.broken_per_read(), [0, 0, 1])
    assert res.broken_fraction() == pytest.approx(1 / 6)


def test_unembed_errors():
    physical = _physical()
    ok = SampleSet((0, 1, 4), np.ones((1, 3), dtype=np.int8), np.zeros(1), np.zeros(1, dtype=np.uint64))
    with pytest.raises(ValidationError):
        unembed_sampleset(ok, physical)
    bits = SampleSet((0, 1, 4, 5), np.zeros((1, 4), dtype=np.int8), np.zeros(1), np.zeros(1, dtype=np.uint64))
    with pytest.raises(ValidationError):
        unembed_sampleset(bits, physical)
    with pytest.raises(ParameterError):
        unembed_sampleset(bits, physical, method="discard")


def test_ising_part_returns_spins():
    hw = chimera_graph(1)
    physical = embed_problem(IsingModel({0: 1.0}, {(0, 1): -1.0}), Embedding({0: (0,), 1: (4,)}, 2), hw, 1.0)
    samples = SampleSet((0, 4), np.array([[-1, -1]], dtype=np.int8), np.zeros(1), np.zeros(1, dtype=np.uint64))
    res = unembed_sampleset(samples, physical)
    np.testing.assert_array_equal(res.logical_samples[0], [[-1, -1]])
    assert res.logical_energies[0][0] == -2
