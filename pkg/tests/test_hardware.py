import json

import pytest

from parqa.errors import GraphFormatError, ParameterError, ValidationError
from parqa.hardware import apply_yield_mask, chimera_graph, load_graph, pegasus_graph, save_graph


@pytest.mark.parametrize("m, qubits, edges", [(1, 8, 16), (2, 32, 80), (16, 2048, 6016)])
def test_chimera_counts(m, qubits, edges):
    hw = chimera_graph(m)
    assert hw.num_qubits == qubits
    assert hw.num_edges == edges


def test_chimera_count_formula_all_sizes():
    for m in range(1, 17):
        hw = chimera_graph(m)
        assert hw.num_qubits == 8 * m * m
        assert hw.num_edges == 16 * m * m + 8 * m * (m - 1)


def test_chimera_degree_bound():
    hw = chimera_graph(4)
    assert max(hw.degree(q) for q in hw.usable_qubits) == 6


@pytest.mark.parametrize("m, qubits", [(2, 40), (3, 128), (16, 5640)])
def test_pegasus_counts(m, qubits):
    assert pegasus_graph(m).num_qubits == qubits


def test_pegasus_degree_bound():
    hw = pegasus_graph(6)
    assert max(hw.degree(q) for q in hw.usable_qubits) == 15


def test_pegasus_rejects_m1():
    with pytest.raises((ParameterError, ValidationError)):
        pegasus_graph(1)


def test_chimera_rejects_zero():
    with pytest.raises((ParameterError, ValidationError)):
        chimera_graph(0)


@pytest.mark.filterwarnings("ignore::DeprecationWarning")
def test_against_dwave_networkx():
    dnx = pytest.importorskip("dwave_networkx")
    ref = dnx.chimera_graph(3)
    hw = chimera_graph(3)
    assert set(hw.qubits) == set(ref.nodes)
    assert hw.edges == {tuple(sorted(e)) for e in ref.edges}
    for m in (2, 4, 6):
        ref = dnx.pegasus_graph(m)
        hw = pegasus_graph(m)
        assert set(hw.qubits) == set(ref.nodes)
        assert hw.edges == {tuple(sorted(e)) for e in ref.edges}


def test_yield_mask():
    hw = chimera_graph(1)
    assert apply_yield_mask(hw, set()).usable_edges == hw.usable_edges
    masked = apply_yield_mask(hw, {0})
    assert len(masked.usable_qubits) == 7
    assert len(masked.usable_edges) == 12
    assert masked.qubits == hw.qubits
    with pytest.raises(ParameterError):
        apply_yield_mask(hw, {10**9})


def test_yield_mask_idempotent_and_monotone():
    hw = chimera_graph(2)
    a = apply_yield_mask(hw, {1, 5})
    assert apply_yield_mask(a, {1, 5}).usable_edges == a.usable_edges
    b = apply_yield_mask(a, {9})
    assert b.usable_edges <= a.usable_edges


def test_save_load_round_trip(tmp_path):
    hw = apply_yield_mask(chimera_graph(2), {3})
    path = tmp_path / "hw.json"
    save_graph(hw, path)
    assert load_graph(path) == hw


def test_load_truncated(tmp_path):
    path = tmp_path / "hw.json"
    save_graph(chimera_graph(2), path)
    path.write_text(path.read_text()[:50])
    with pytest.raises(GraphFormatError):
        load_graph(path)


def test_load_asymmetric_edges(tmp_path):
    data = chimera_graph(1).to_dict()
    data["edges"].append([data["edges"][0][1], data["edges"][0][0]])
    path = tmp_path / "hw.json"
    path.write_text(json.dumps(data))
    with pytest.raises(ValidationError):
        load_graph(path)
