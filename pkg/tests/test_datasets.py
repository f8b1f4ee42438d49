import json

import pytest

from vakya.config import ExperimentConfig, parse_config_file
from vakya.errors import ConfigError, SchemaError
from vakya.datasets import load_mt, load_ner, load_qa


def write(path, text):
    path.write_text(text, "utf-8")
    return path


QA_LINE = {
    "id": "r1",
    "topic": "Ramayana",
    "category": "Kinship",
    "question": "rāmasya pitā kaḥ?",
    "acceptable_answers": ["daśarathaḥ"],
}


class TestLoadQa:
    def test_two_records(self, tmp_path):
        second = dict(QA_LINE, id="r2", choices=["a", "b"], answer_in_retrieved_context=True)
        path = write(tmp_path / "qa.jsonl", json.dumps(QA_LINE) + "\n" + json.dumps(second) + "\n")
        records = load_qa(path)
        assert len(records) == 2
        assert records[0].acceptable_answers == ["daśarathaḥ"]
        assert records[1].choices == ["a", "b"]
        assert records[1].answer_in_retrieved_context is True
        assert records[0].answer_in_retrieved_context is None

    def test_missing_field(self, tmp_path):
        bad = {k: v for k, v in QA_LINE.items() if k != "acceptable_answers"}
        path = write(tmp_path / "qa.jsonl", json.dumps(bad) + "\n")
        with pytest.raises(SchemaError) as exc:
            load_qa(path)
        assert exc.value.line_no == 1

    def test_empty_answers(self, tmp_path):
        bad = dict(QA_LINE, acceptable_answers=[])
        with pytest.raises(SchemaError):
            load_qa(write(tmp_path / "qa.jsonl", json.dumps(bad) + "\n"))

    def test_bad_topic(self, tmp_path):
        bad = dict(QA_LINE, topic="Mahabharata")
        with pytest.raises(SchemaError, match="topic"):
            load_qa(write(tmp_path / "qa.jsonl", json.dumps(bad) + "\n"))

    def test_duplicate_id(self, tmp_path):
        path = write(tmp_path / "qa.jsonl", json.dumps(QA_LINE) + "\n" + json.dumps(QA_LINE) + "\n")
        with pytest.raises(SchemaError, match="duplicate"):
            load_qa(path)

    def test_invalid_json_line_number(self, tmp_path):
        path = write(tmp_path / "qa.jsonl", json.dumps(QA_LINE) + "\n{broken\n")
        with pytest.raises(SchemaError) as exc:
            load_qa(path)
        assert exc.value.line_no == 2


class TestLoadNer:
    def test_sentences_split_on_blank(self, tmp_path):
        path = write(tmp_path / "ner.txt", "rāmaḥ B-PER\ngacchati O\n\nsītā B-PER\n")
        records = load_ner(path, "san")
        assert len(records) == 2
        assert records[0].tokens == ["rāmaḥ", "gacchati"]
        assert records[0].gold_tags == ["B-PER", "O"]

    def test_token_count_equals_tag_count(self, tmp_path):
        path = write(tmp_path / "ner.txt", "a B-X\nb I-X\nc O\n")
        rec = load_ner(path, "lat")[0]
        assert len(rec.tokens) == len(rec.gold_tags) == 3

    def test_field_count_mismatch(self, tmp_path):
        path = write(tmp_path / "ner.txt", "a B-X\nbroken-line\n")
        with pytest.raises(SchemaError) as exc:
            load_ner(path, "lat")
        assert exc.value.line_no == 2

    def test_malformed_tag(self, tmp_path):
        path = write(tmp_path / "ner.txt", "a X-PER\n")
        with pytest.raises(SchemaError, match="malformed tag"):
            load_ner(path, "lat")

    def test_tagset_validation(self, tmp_path):
        path = write(tmp_path / "ner.txt", "a B-GPE\n")
        with pytest.raises(SchemaError, match="not in tagset"):
            load_ner(path, "lat", tagset=["PER", "LOC"])


class TestLoadMt:
    def test_single_and_multi_reference(self, tmp_path):
        path = write(tmp_path / "mt.tsv", "src one\tref one\nsrc two\tref a\tref b\n")
        records = load_mt(path)
        assert records[0].references == ["ref one"]
        assert records[1].references == ["ref a", "ref b"]

    def test_missing_reference(self, tmp_path):
        path = write(tmp_path / "mt.tsv", "only source\n")
        with pytest.raises(SchemaError, match="reference"):
            load_mt(path)

    def test_empty_source(self, tmp_path):
        path = write(tmp_path / "mt.tsv", "\tref\n")
        with pytest.raises(SchemaError, match="empty source"):
            load_mt(path)


class TestConfig:
    def test_parse_with_include(self, tmp_path):
        write(tmp_path / "base.cfg", "task = qa\nmodel = mock\nk = 4\n")
        main = write(
            tmp_path / "main.cfg",
            "include base.cfg\ndataset = qa.jsonl\nk = 2\nmock_script = m.json\n",
        )
        mapping = parse_config_file(main)
        assert mapping["task"] == "qa"
        assert mapping["k"] == "2"  # later keys override includes

    def test_comments_and_blanks(self, tmp_path):
        path = write(tmp_path / "c.cfg", "# a comment\n\ntask = qa\n")
        assert parse_config_file(path) == {"task": "qa"}

    def test_typed_fields(self, tmp_path):
        cfg = ExperimentConfig.from_mapping(
            {"task": "qa", "dataset": "d.jsonl", "k": "7", "bm25_b": "0.6",
             "replay_only": "true", "tagset": "PER, LOC", "mock_script": "m.json"}
        )
        assert cfg.k == 7
        assert cfg.bm25_b == 0.6
        assert cfg.replay_only is True
        assert cfg.tagset == ["PER", "LOC"]

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown config key"):
            ExperimentConfig.from_mapping({"task": "qa", "dataset": "d", "typo_key": "x"})

    def test_k_zero_rejected(self):
        with pytest.raises(ConfigError, match="k must be >= 1"):
            ExperimentConfig.from_mapping({"task": "qa", "dataset": "d", "k": "0"})

    def test_rag_requires_corpus(self):
        with pytest.raises(ConfigError, match="rag mode needs"):
            ExperimentConfig.from_mapping(
                {"task": "qa", "dataset": "d", "qa_mode": "rag"}
            )

    def test_tog_requires_kg(self):
        with pytest.raises(ConfigError, match="tog mode needs"):
            ExperimentConfig.from_mapping({"task": "qa", "dataset": "d", "qa_mode": "tog"})

    def test_serialize_round_trip(self):
        cfg = ExperimentConfig.from_mapping({"task": "mt", "dataset": "d.tsv", "k": "9"})
        text = cfg.serialize()
        from vakya.config import parse_config_text

        again = ExperimentConfig.from_mapping(parse_config_text(text))
        assert again == cfg
        assert "k = 9" in text
