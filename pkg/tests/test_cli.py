import json

import pytest

from hamorient.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def complete10(tmp_path, capsys):
    path = tmp_path / "k10.dg"
    code, _, _ = run(capsys, "generate", "complete", "--n", 10, "-o", path)
    assert code == 0
    return path


def test_generate_writes_loadable_file(tmp_path, capsys):
    path = tmp_path / "tc.dg"
    code, out, _ = run(capsys, "generate", "two_cliques", "--n", 8, "-o", path)
    assert code == 0
    meta = json.loads(out)
    assert meta["n"] == 8 and meta["arcs"] == 2 * 4 * 3
    assert "digraph v1" in path.read_text().splitlines()


def test_embed_found_and_verify(complete10, capsys):
    code, out, err = run(capsys, "embed", complete10, "--pattern", "FFBFFBFFBF")
    assert code == 0
    res = json.loads(out)
    assert res["status"] == "found" and "timings" not in res
    assert "timings" in err
    code, out, _ = run(capsys, "verify", complete10, "--pattern", "FFBFFBFFBF", "--embedding",
                       json.dumps(res["embedding"]))
    assert code == 0 and json.loads(out)["valid"]


def test_verify_rejects_corrupted_embedding(tmp_path, capsys):
    path = tmp_path / "cyc.dg"
    run(capsys, "generate", "cycle", "--n", 6, "-o", path)
    code, out, _ = run(capsys, "verify", path, "--pattern", "F" * 6, "--embedding", "[0,1,2,3,4,5]")
    assert code == 0
    code, out, _ = run(capsys, "verify", path, "--pattern", "F" * 6, "--embedding", "[0,2,1,3,4,5]")
    assert code == 1 and not json.loads(out)["valid"]


def test_oracle_not_found_exit_code(tmp_path, capsys):
    path = tmp_path / "tc.dg"
    run(capsys, "generate", "two_cliques", "--n", 8, "-o", path)
    code, out, err = run(capsys, "oracle", path, "--pattern", "F" * 8)
    assert code == 1
    assert json.loads(out)["status"] == "not_found"
    assert "nodes=" in err


def test_oracle_limit_exit_code(tmp_path, capsys):
    path = tmp_path / "k16.dg"
    run(capsys, "generate", "complete", "--n", 16, "-o", path)
    code, _, _ = run(capsys, "oracle", path, "--pattern", "F" * 16, "--limit", 14)
    assert code == 3


def test_antidirected_embed_above_limit(tmp_path, capsys):
    path = tmp_path / "k16.dg"
    run(capsys, "generate", "complete", "--n", 16, "-o", path)
    code, _, err = run(capsys, "embed", path, "--pattern", "FB" * 8, "--oracle-limit", 10)
    assert code == 3 and "AntidirectedUnsupported" in err


def test_usage_errors(complete10, tmp_path, capsys):
    code, _, err = run(capsys, "embed", complete10, "--pattern", "FFX")
    assert code == 2 and "pattern" in err
    code, _, _ = run(capsys, "embed", complete10, "--pattern", "F" * 9)
    assert code == 2
    code, _, _ = run(capsys, "classify", tmp_path / "missing.dg")
    assert code == 2
    code, _, _ = run(capsys, "verify", complete10, "--pattern", "F" * 10, "--embedding", "{bad")
    assert code == 2
    with pytest.raises(SystemExit) as ei:
        main(["embed"])
    assert ei.value.code == 2
    capsys.readouterr()


def test_global_options_after_subcommand(complete10, capsys):
    code, out, _ = run(capsys, "embed", complete10, "--pattern", "F" * 10, "--profile", "cover", "--seed", 1,
                       "--threads", 2)
    assert code == 0 and json.loads(out)["status"] == "found"


def test_classify_json(tmp_path, capsys):
    path = tmp_path / "kb.dg"
    run(capsys, "generate", "complete_bipartite", "--n", 40, "-o", path)
    code, out, _ = run(capsys, "classify", path, "--profile", "classify")
    assert code == 0
    assert json.loads(out)["tag"] == "ABExtremal"


def test_scan_csv_is_deterministic(tmp_path, capsys):
    args = ("scan", "--family", "two_cliques", "--range", "n=6:8", "--patterns", "consistent")
    code, out1, _ = run(capsys, *args)
    assert code == 0
    code, out2, _ = run(capsys, *args)
    assert out1 == out2
    lines = out1.strip().splitlines()
    assert lines[0].startswith("family,")
    assert len(lines) == 1 + 2
    target = tmp_path / "scan.csv"
    run(capsys, *args, "-o", target)
    assert target.read_text() == out1
