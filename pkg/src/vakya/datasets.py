"""Dataset loaders: QA (JSON lines), NER (token/tag columns), MT (TSV).

All loaders validate strictly and report failures with line numbers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SchemaError

TOPICS = ("Ramayana", "Ayurveda")

_TAG_RE = re.compile(r"^(O|[BI]-\S+)$")


@dataclass
class QaRecord:
    id: str
    topic: str
    category: str
    question: str
    acceptable_answers: list[str]
    acceptable_answers_lemmatized: list[str] | None = None
    choices: list[str] | None = None
    requires_reasoning: bool = False
    answer_in_retrieved_context: bool | None = None


@dataclass
class NerRecord:
    tokens: list[str]
    gold_tags: list[str]
    language: str


@dataclass
class MtRecord:
    source: str
    references: list[str]
    language_pair: str = "san-en"


def load_qa(path: str | Path) -> list[QaRecord]:
    records: list[QaRecord] = []
    seen_ids: set[str] = set()
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(line_no, f"invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise SchemaError(line_no, "expected a JSON object")
            for key in ("id", "topic", "question", "acceptable_answers"):
                if key not in obj:
                    raise SchemaError(line_no, f"missing field {key!r}")
            if obj["topic"] not in TOPICS:
                raise SchemaError(line_no, f"topic must be one of {TOPICS}")
            answers = obj["acceptable_answers"]
            if not isinstance(answers, list) or not answers:
                raise SchemaError(line_no, "acceptable_answers must be a nonempty list")
            rid = str(obj["id"])
            if rid in seen_ids:
                raise SchemaError(line_no, f"duplicate id {rid!r}")
            seen_ids.add(rid)
            choices = obj.get("choices")
            if choices is not None and (
                not isinstance(choices, list) or not all(isinstance(c, str) for c in choices)
            ):
                raise SchemaError(line_no, "choices must be a list of strings")
            aic = obj.get("answer_in_retrieved_context")
            if aic is not None and not isinstance(aic, bool):
                raise SchemaError(line_no, "answer_in_retrieved_context must be boolean")
            records.append(
                QaRecord(
                    id=rid,
                    topic=obj["topic"],
                    category=str(obj.get("category", "")),
                    question=str(obj["question"]),
                    acceptable_answers=[str(a) for a in answers],
                    acceptable_answers_lemmatized=(
                        [str(a) for a in obj["acceptable_answers_lemmatized"]]
                        if obj.get("acceptable_answers_lemmatized")
                        else None
                    ),
                    choices=choices,
                    requires_reasoning=bool(obj.get("requires_reasoning", False)),
                    answer_in_retrieved_context=aic,
                )
            )
    return records


def load_ner(path: str | Path, language: str, tagset: list[str] | None = None) -> list[NerRecord]:
    """Two columns (token, tag) per line, blank line between sentences."""
    records: list[NerRecord] = []
    tokens: list[str] = []
    tags: list[str] = []
    valid_types = set(tagset) if tagset else None

    def _flush() -> None:
        if tokens:
            records.append(
                NerRecord(tokens=list(tokens), gold_tags=list(tags), language=language)
            )
            tokens.clear()
            tags.clear()

    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                _flush()
                continue
            parts = line.split()
            if len(parts) != 2:
                raise SchemaError(line_no, f"expected 'token tag', got {len(parts)} fields")
            token, tag = parts
            if not _TAG_RE.match(tag):
                raise SchemaError(line_no, f"malformed tag {tag!r}")
            if valid_types is not None and tag != "O":
                if tag.split("-", 1)[1] not in valid_types:
                    raise SchemaError(line_no, f"tag type {tag!r} not in tagset")
            tokens.append(token)
            tags.append(tag)
    _flush()
    return records


def load_mt(path: str | Path, language_pair: str = "san-en") -> list[MtRecord]:
    """Tab-separated: source, then one or more references."""
    records: list[MtRecord] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) < 2:
                raise SchemaError(line_no, "expected 'source<TAB>reference[<TAB>...]'")
            source, refs = parts[0], [r for r in parts[1:] if r.strip()]
            if not source.strip():
                raise SchemaError(line_no, "empty source")
            if not refs:
                raise SchemaError(line_no, "missing reference column")
            records.append(MtRecord(source=source, references=refs, language_pair=language_pair))
    return records
