import json
import subprocess
import sys
from pathlib import Path

import pytest

from elastic_self.cli import OUTPUT_DIR_ENV, main

DOCS = Path(__file__).resolve().parent.parent / "docs"


def test_analyze_pd(capsys):
    assert main(["analyze", "--pd"]) == 0
    out = capsys.readouterr().out
    assert "pure Nash: {DD}" in out
    assert "strictly dominant for A: D" in out
    assert "Pareto frontier: {CC, CD, DC}" in out


def test_analyze_transformed(capsys):
    assert main(["analyze", "--pd", "--gamma", "1", "--mutual"]) == 0
    out = capsys.readouterr().out
    transformed = out.split("== transformed game")[1]
    assert "pure Nash: {CC}" in transformed


def test_analyze_json(capsys):
    assert main(["analyze", "--pd", "--gamma", "1", "--mutual", "--json"]) == 0
    reports = json.loads(capsys.readouterr().out)
    assert [r["pure_nash"] for r in reports] == [["DD"], ["CC"]]


def test_analyze_with_identity_file(capsys):
    args = ["analyze", "--game", str(DOCS / "three_player.yaml"), "--identity", str(DOCS / "identity.yaml")]
    assert main(args) == 0
    assert "transformed game" in capsys.readouterr().out


def test_missing_file_exit_1(capsys):
    assert main(["analyze", "--game", "/no/such/game.yaml"]) == 1
    assert "/no/such/game.yaml" in capsys.readouterr().err


def test_syntax_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("players: [A, B\n")
    assert main(["analyze", "--game", str(bad)]) == 1
    assert "line" in capsys.readouterr().err


def test_semantic_error_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("players: [A]\nactions: {A: [x, y]}\npayoffs:\n  - {outcome: [x], values: [1]}\n")
    assert main(["analyze", "--game", str(bad)]) == 2
    assert "missing outcome" in capsys.readouterr().err


def test_bad_option_values_exit_2(capsys):
    assert main(["analyze", "--pd", "--gamma", "2", "--mutual"]) == 2
    assert main(["sweep", "--pd", "--grid", "1:0:0.1"]) == 2
    assert main(["invade", "--resident-gamma", "1", "--invader-gamma", "0", "--fraction", "0"]) == 2
    assert main(["analyze", "--pd", "--gamma", "0.5"]) == 2


def test_sweep_to_file(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--pd", "--player", "A", "--grid", "0:1:0.01", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("gamma,action,expected_utility\n")
    assert "# crossover C,D gamma*=0.333333333 direction=+" in text
    assert "gamma*=0.333333" in capsys.readouterr().out


def test_sweep_stdout(capsys):
    assert main(["sweep", "--pd", "--grid", "0:1:0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[:3] == ["gamma,action,expected_utility", "0,C,3", "0,D,5.5"]


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert main(["sweep", "--pd"]) == 0
    assert (tmp_path / "sweep.csv").exists()
    assert main(["evolve", "--pd", "--gens", "2", "--out", "runs/e.csv"]) == 0
    assert (tmp_path / "runs" / "e.csv").exists()


def test_evolve_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["evolve", "--pd", "--pop", "100", "--gens", "200", "--gamma", "1", "--seed", "7",
                     "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert "final_coop_freq=1" in capsys.readouterr().out


def test_evolve_mix_and_uniform(tmp_path):
    assert main(["evolve", "--mix", "1:0.5,0:0.5", "--gens", "3", "--out", str(tmp_path / "m.csv")]) == 0
    assert "share[0]" in (tmp_path / "m.csv").read_text().splitlines()[0]
    assert main(["evolve", "--init", "uniform", "--gens", "3", "--mutation-rate", "0.1",
                 "--out", str(tmp_path / "u.csv")]) == 0


def test_invade_summary(tmp_path, capsys):
    out = tmp_path / "inv.csv"
    args = ["invade", "--resident-gamma", "1", "--invader-gamma", "0", "--fraction", "0.1", "--seed", "7",
            "--out", str(out)]
    assert main(args) == 0
    summary = capsys.readouterr().out
    fields = dict(line.split(": ", 1) for line in summary.strip().splitlines())
    total = float(fields["final resident share"]) + float(fields["final invader share"])
    assert total == pytest.approx(1.0)
    assert fields["share total"] == "1"
    assert out.exists() and out.with_suffix(".summary.txt").read_text() == summary


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "elastic_self", "analyze", "--pd"],
                          capture_output=True, text=True, check=True)
    assert "pure Nash: {DD}" in proc.stdout
