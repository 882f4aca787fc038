import json

from parqa.cli import main


def test_topology(tmp_path, capsys):
    out = tmp_path / "hw.json"
    assert main(["topology", "--kind", "chimera", "--m", "2", "--out", str(out)]) == 0
    assert "32 qubits, 80 couplers" in capsys.readouterr().out
    assert json.loads(out.read_text())["m"] == 2


def test_topology_bad_size(capsys):
    assert main(["topology", "--kind", "pegasus", "--m", "1"]) == 1


def test_embed_tile(tmp_path, capsys):
    out = tmp_path / "e.json"
    assert main(["embed", "--kind", "chimera", "--m", "4", "--N", "8", "--out", str(out)]) == 0
    assert capsys.readouterr().out.startswith("4 embeddings of K_8")
    assert len(json.loads(out.read_text())["embeddings"]) == 4


def test_embed_capacity():
    assert main(["embed", "--kind", "chimera", "--m", "2", "--N", "20"]) == 2


def test_gen_graphs_and_solve(tmp_path, capsys):
    assert main(["gen-graphs", "--n", "10", "--densities", "0.5", "--seed", "1", "--outdir", str(tmp_path)]) == 0
    (path,) = tmp_path.glob("*.json")
    capsys.readouterr()
    assert main(["solve-exact", str(path), "--all"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["omega"] == len(result["witness"])
    assert result["witness"] in result["all_maximum_cliques"]


def test_run_parallel_and_report(tmp_path, capsys):
    args = ["run-parallel", "--seed", "3", "--m", "4", "--N", "8", "--densities", "0.5", "--calls", "2",
            "--anneals-per-call", "50", "--sweeps", "300", "--outdir", str(tmp_path), "--with-sequential"]
    assert main(args) == 0
    assert (tmp_path / "ensemble.csv").exists()
    capsys.readouterr()
    assert main(["report", str(tmp_path)]) == 0
    assert "comparison" in capsys.readouterr().out


def test_run_requires_valid_config(tmp_path):
    assert main(["run-parallel", "--seed", "1", "--calls", "0"]) == 1
    bad = tmp_path / "c.json"
    bad.write_text('{"bogus": 1}')
    assert main(["run-replicas", "--seed", "1", "--config", str(bad)]) == 1
