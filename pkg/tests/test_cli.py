"""CLI behavior: exit codes, printed output, and file side effects for the
index, query, serve, and eval commands."""

from __future__ import annotations

import json

import pytest

from conftest import write_library
from vrag.cli import main
from vrag.storage import META_FILE, PAYLOAD_FILES


@pytest.fixture(autouse=True)
def _no_ambient_config(monkeypatch):
    monkeypatch.delenv("VRAG_CONFIG", raising=False)


@pytest.fixture(scope="module")
def cli_index(tmp_path_factory):
    """Library + index built once through the real `index` command."""
    root = tmp_path_factory.mktemp("cli")
    with pytest.MonkeyPatch.context() as mp:
        mp.delenv("VRAG_CONFIG", raising=False)
        manifest = write_library(root / "lib")
        out = root / "index"
        assert main(["index", "--manifest", str(manifest),
                     "--out", str(out)]) == 0
    return manifest, out


def test_index_builds_and_reports_counts(cli_index, capsys):
    manifest, out = cli_index
    assert sorted(p.name for p in out.iterdir()) == \
        sorted((META_FILE,) + PAYLOAD_FILES)
    # rebuilding over the existing directory needs --force
    assert main(["index", "--manifest", str(manifest), "--out", str(out)]) == 1
    assert "use --force" in capsys.readouterr().err
    assert main(["index", "--manifest", str(manifest), "--out", str(out),
                 "--force"]) == 0
    stdout = capsys.readouterr().out
    assert "indexed 3 videos: 12 clips, 3 chunks" in stdout
    assert str(out) in stdout


def test_index_missing_manifest_is_user_error(tmp_path, capsys):
    rc = main(["index", "--manifest", str(tmp_path / "nope.json"),
               "--out", str(tmp_path / "index")])
    assert rc == 1
    assert capsys.readouterr().err.startswith("error:")


def test_index_bad_config_is_user_error(tmp_path, capsys):
    manifest = write_library(tmp_path / "lib")
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"clip_length": 30}))
    rc = main(["index", "--manifest", str(manifest), "--config", str(config),
               "--out", str(tmp_path / "index")])
    assert rc == 1
    assert "unknown config keys" in capsys.readouterr().err


def test_query_prints_answer_and_provenance(cli_index, capsys):
    _, out = cli_index
    rc = main(["query", "--index", str(out),
               "--text", "What happens during the chase?"])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("MOCK-CHAT(")
    assert lines[1] == ""
    assert lines[2] == "PROVENANCE"
    body = lines[3:]
    assert body
    clip_lines = [l for l in body if l.startswith("clip ")]
    chunk_lines = [l for l in body if l.startswith("chunk ")]
    assert body == clip_lines + chunk_lines  # clips first, then chunks
    for line in clip_lines:
        assert "[video0" in line and "s–" in line
    for line in chunk_lines:
        assert "#h" in line


def test_query_against_missing_index_is_user_error(tmp_path, capsys):
    rc = main(["query", "--index", str(tmp_path / "no-index"), "--text", "hm?"])
    assert rc == 1
    assert "not an index directory" in capsys.readouterr().err


def test_query_with_dead_endpoint_is_provider_error(cli_index, tmp_path, capsys):
    _, out = cli_index
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"provider": {
        "endpoint_url": "http://127.0.0.1:9", "model_name": "m",
        "timeout_s": 0.5, "retry_count": 0}}))
    rc = main(["query", "--index", str(out), "--text", "hm?",
               "--config", str(config)])
    assert rc == 2
    assert capsys.readouterr().err.startswith("provider error:")


def test_serve_rejects_bad_bind(cli_index, capsys):
    _, out = cli_index
    for bind in ("8080", "localhost:", "host:notaport"):
        rc = main(["serve", "--index", str(out), "--bind", bind])
        assert rc == 1
        assert "--bind must be HOST:PORT" in capsys.readouterr().err


def write_eval_inputs(tmp_path, n_queries=2):
    queries = tmp_path / "queries.jsonl"
    queries.write_text("".join(
        json.dumps({"query_id": f"q{i}", "text": f"question {i}?"}) + "\n"
        for i in range(n_queries)))
    answer_files = {}
    for side in ("a", "b"):
        path = tmp_path / f"{side}.jsonl"
        path.write_text("".join(
            json.dumps({"query_id": f"q{i}", "answer": f"{side} answer {i}"}) + "\n"
            for i in range(n_queries)))
        answer_files[side] = path
    return queries, answer_files


def test_eval_winrate_writes_reports(tmp_path, capsys):
    queries, answer_files = write_eval_inputs(tmp_path)
    out = tmp_path / "report-dir"
    rc = main(["eval", "winrate", "--queries", str(queries),
               "--a", str(answer_files["a"]), "--b", str(answer_files["b"]),
               "--reps", "2", "--out", str(out)])
    assert rc == 0
    stdout = capsys.readouterr().out
    assert stdout.startswith("protocol: winrate")
    assert "report files:" in stdout
    assert sorted(p.name for p in out.iterdir()) == [
        "judgments.jsonl", "report.csv", "report.json", "report.png",
        "report.txt"]
    # 2 queries x 2 reps x 2 orders, with the one re-ask the records persist
    records = [json.loads(l) for l in
               (out / "judgments.jsonl").read_text().splitlines()]
    assert len(records) == 8
    # the mock chat judge emits no JSON verdicts, so everything is discarded
    assert all(r["status"] == "discarded" for r in records)
    report = json.loads((out / "report.json").read_text())
    assert report["counts"] == {"judgments": 8, "valid": 0, "discarded": 8}
    assert (out / "report.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_eval_quant_writes_reports(tmp_path, capsys):
    queries, answer_files = write_eval_inputs(tmp_path)
    out = tmp_path / "quant-dir"
    rc = main(["eval", "quant", "--queries", str(queries),
               "--baseline", str(answer_files["a"]),
               "--eval", str(answer_files["b"]),
               "--reps", "1", "--out", str(out)])
    assert rc == 0
    assert capsys.readouterr().out.startswith("protocol: quant")
    report = json.loads((out / "report.json").read_text())
    assert report["protocol"] == "quant"
    assert report["counts"]["judgments"] == 2


def test_eval_missing_coverage_is_user_error(tmp_path, capsys):
    queries, answer_files = write_eval_inputs(tmp_path)
    short = tmp_path / "short.jsonl"
    short.write_text(json.dumps({"query_id": "q0", "answer": "only one"}) + "\n")
    rc = main(["eval", "winrate", "--queries", str(queries),
               "--a", str(answer_files["a"]), "--b", str(short),
               "--out", str(tmp_path / "x")])
    assert rc == 1
    assert "answers missing queries" in capsys.readouterr().err


def test_eval_rejects_bad_query_file(tmp_path, capsys):
    _, answer_files = write_eval_inputs(tmp_path)
    bad = tmp_path / "broken-queries.jsonl"
    bad.write_text("{broken\n")
    rc = main(["eval", "quant", "--queries", str(bad),
               "--baseline", str(answer_files["a"]),
               "--eval", str(answer_files["b"]),
               "--out", str(tmp_path / "x")])
    assert rc == 1
    assert "bad query record" in capsys.readouterr().err
