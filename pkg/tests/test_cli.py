import json

import pytest
from click.testing import CliRunner

from vakya.cli import main

from .fixtures import build_rag_fixture


@pytest.fixture
def runner():
    return CliRunner()


class TestTransliterateCommand:
    def test_round_trip(self, runner):
        result = runner.invoke(
            main, ["transliterate", "rāmaḥ", "--from", "iast", "--to", "devanagari"]
        )
        assert result.exit_code == 0, result.output
        assert result.output.strip() == "रामः"


class TestIndexCommands:
    def test_build_index_and_search(self, runner, tmp_path):
        fx = build_rag_fixture(tmp_path, n=8)
        index_path = tmp_path / "corpus.idx"
        result = runner.invoke(main, [
            "build-index", "--config", str(fx["rag_cfg"]), "--out", str(index_path),
        ])
        assert result.exit_code == 0, result.output
        assert index_path.is_file()
        body = json.loads(result.output)
        assert body["chunks"] == 8

        result = runner.invoke(main, [
            "search", "q002q", "--config", str(fx["rag_cfg"]), "-k", "1",
        ])
        assert result.exit_code == 0, result.output
        assert "chunk-00004-00006" in result.output


class TestRunScoreReportCommands:
    def test_full_cycle(self, runner, tmp_path):
        fx = build_rag_fixture(tmp_path / "fx", n=12)
        cache = tmp_path / "cache"
        out1 = tmp_path / "out1"

        result = runner.invoke(main, [
            "run", "--config", str(fx["rag_cfg"]),
            "--cache-dir", str(cache), "--out", str(out1),
        ])
        assert result.exit_code == 0, result.output
        body = json.loads(result.output)
        assert body["aggregates"]["em_inflected"] == 1.0
        assert (out1 / "per_item.csv").is_file()

        out2 = tmp_path / "out2"
        result = runner.invoke(main, [
            "score", "--config", str(fx["rag_cfg"]),
            "--cache-dir", str(cache), "--out", str(out2),
        ])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["aggregates"]["em_inflected"] == 1.0

        out3 = tmp_path / "out3"
        result = runner.invoke(main, [
            "report", "--report", str(out1 / "report.json"), "--out", str(out3),
        ])
        assert result.exit_code == 0, result.output
        assert (out3 / "boxplot.json").read_bytes() == (out1 / "boxplot.json").read_bytes()

    def test_replay_only_flag(self, runner, tmp_path):
        fx = build_rag_fixture(tmp_path / "fx", n=5)
        cache = tmp_path / "cache"
        runner.invoke(main, [
            "run", "--config", str(fx["rag_cfg"]),
            "--cache-dir", str(cache), "--out", str(tmp_path / "o1"),
        ])
        result = runner.invoke(main, [
            "run", "--config", str(fx["rag_cfg"]), "--replay-only",
            "--cache-dir", str(cache), "--out", str(tmp_path / "o2"),
        ])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["aggregates"]["em_inflected"] == 1.0

    def test_missing_config_reports_error(self, runner, tmp_path):
        result = runner.invoke(main, [
            "run", "--config", str(tmp_path / "none.cfg"), "--out", str(tmp_path / "o"),
        ])
        assert result.exit_code != 0
        assert "not found" in result.output
