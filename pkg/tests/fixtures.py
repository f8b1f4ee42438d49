"""Builders for synthetic end-to-end fixtures shared by the harness,
service, CLI, and acceptance tests."""

from __future__ import annotations

import json
from pathlib import Path


def build_rag_fixture(root: Path, n: int = 100, n_missing: int = 0) -> dict[str, Path]:
    """Synthetic QA-over-corpus setup for the context-echo mock.

    Each of ``n`` answers appears in exactly one corpus chunk, keyed by a
    unique token shared between the question and that chunk. Questions are
    annotated with whether their answer is retrievable; ``n_missing`` adds
    questions whose key and answer appear nowhere in the corpus.
    """
    root.mkdir(parents=True, exist_ok=True)
    corpus_lines = []
    for i in range(n):
        corpus_lines.append(f"kathā q{i:03d}q viṣaye vartate")
        corpus_lines.append(f"uttaraṃ phala{i:03d}m iti prasiddham")
    corpus = root / "corpus.txt"
    corpus.write_text("\n".join(corpus_lines) + "\n", "utf-8")

    answers: dict[str, list[str]] = {}
    qa_lines = []
    topics = ["Ramayana", "Ayurveda"]
    for i in range(n):
        key = f"q{i:03d}q"
        answer = f"phala{i:03d}m"
        answers[key] = [answer]
        qa_lines.append(json.dumps({
            "id": f"q{i:03d}",
            "topic": topics[i % 2],
            "category": "Synthetic",
            "question": f"{key} kim phalam",
            "acceptable_answers": [answer],
            "answer_in_retrieved_context": True,
        }, ensure_ascii=False))
    for i in range(n_missing):
        key = f"x{i:03d}x"
        answer = f"nāsti{i:03d}m"
        answers[key] = [answer]
        qa_lines.append(json.dumps({
            "id": f"x{i:03d}",
            "topic": topics[i % 2],
            "category": "Synthetic",
            "question": f"{key} kim phalam",
            "acceptable_answers": [answer],
            "answer_in_retrieved_context": False,
        }, ensure_ascii=False))
    qa = root / "qa.jsonl"
    qa.write_text("\n".join(qa_lines) + "\n", "utf-8")

    mock = root / "echo_mock.json"
    mock.write_text(json.dumps({
        "kind": "echo",
        "key_pattern": r"[qx]\d{3}[qx]",
        "answers": answers,
        "miss_text": "na jānāmi",
    }, ensure_ascii=False, indent=1), "utf-8")

    base = {
        "task": "qa",
        "dataset": str(qa),
        "model": "mock",
        "prompt_language": "en",
        "script": "iast",
        "dataset_script": "iast",
        "corpus_path": str(corpus),
        "corpus_script": "iast",
        "chunk_lines": "2",
        "overlap_lines": "0",
        "k": "4",
        "lemmatizer": "identity",
        "mock_script": str(mock),
    }
    rag_cfg = root / "qa_rag.cfg"
    rag_cfg.write_text(
        "\n".join(f"{k} = {v}" for k, v in {**base, "qa_mode": "rag"}.items()) + "\n", "utf-8"
    )
    closed_cfg = root / "qa_closed.cfg"
    closed_cfg.write_text(
        "\n".join(f"{k} = {v}" for k, v in {**base, "qa_mode": "closed"}.items()) + "\n", "utf-8"
    )
    return {
        "corpus": corpus, "qa": qa, "mock": mock,
        "rag_cfg": rag_cfg, "closed_cfg": closed_cfg,
    }


def build_ner_fixture(root: Path, n_sentences: int = 12) -> dict[str, Path]:
    """NER dataset plus a gold-echoing scripted mock (one response per
    sentence, in dataset order)."""
    root.mkdir(parents=True, exist_ok=True)
    sentences = []
    for i in range(n_sentences):
        tokens = [f"urbs{i}", f"dux{i}", "et", f"gens{i}"]
        tags = ["B-LOC", "B-PER", "O", "B-GRP"]
        sentences.append((tokens, tags))
    lines = []
    for tokens, tags in sentences:
        lines.extend(f"{tok} {tag}" for tok, tag in zip(tokens, tags))
        lines.append("")
    data = root / "ner.txt"
    data.write_text("\n".join(lines), "utf-8")

    responses = []
    for tokens, tags in sentences:
        grouped: dict[str, list[str]] = {}
        for tok, tag in zip(tokens, tags):
            if tag != "O":
                grouped.setdefault(tag, []).append(tok)
        responses.append(json.dumps(grouped, ensure_ascii=False).replace('"', "'"))
    mock = root / "gold_mock.json"
    mock.write_text(json.dumps({"kind": "script", "responses": responses}), "utf-8")

    empty_mock = root / "empty_mock.json"
    empty_mock.write_text(
        json.dumps({"kind": "script", "responses": ["{}"] * n_sentences}), "utf-8"
    )

    cfg = root / "ner.cfg"
    cfg.write_text(
        "\n".join([
            "task = ner",
            f"dataset = {data}",
            "model = mock",
            "prompt_language = en",
            "language = lat",
            "script = iast",
            "dataset_script = iast",
            f"mock_script = {mock}",
        ]) + "\n", "utf-8",
    )
    return {"data": data, "mock": mock, "empty_mock": empty_mock, "cfg": cfg}


def build_mt_fixture(root: Path, n_sentences: int = 12) -> dict[str, Path]:
    """MT dataset plus a reference-echoing scripted mock."""
    root.mkdir(parents=True, exist_ok=True)
    pairs = [
        (f"vākyam {i} asti", f"this is sentence number {i} indeed")
        for i in range(n_sentences)
    ]
    data = root / "mt.tsv"
    data.write_text("\n".join(f"{s}\t{r}" for s, r in pairs) + "\n", "utf-8")
    mock = root / "ref_mock.json"
    mock.write_text(
        json.dumps({"kind": "script", "responses": [r for _, r in pairs]}), "utf-8"
    )
    cfg = root / "mt.cfg"
    cfg.write_text(
        "\n".join([
            "task = mt",
            f"dataset = {data}",
            "model = mock",
            "prompt_language = en",
            "language = san",
            "script = iast",
            "dataset_script = iast",
            f"mock_script = {mock}",
        ]) + "\n", "utf-8",
    )
    return {"data": data, "mock": mock, "cfg": cfg}
