"""Experiment configuration: flat key-value files with includes.

Syntax, one ``key = value`` pair per line::

    # retrieval run
    include base.cfg
    task = qa
    qa_mode = rag
    k = 4

Later keys override earlier ones (including included files). The fully
resolved mapping is serialized into every report for provenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

TASKS = ("ner", "mt", "qa")
QA_MODES = ("closed", "rag", "tog")
RETRIEVERS = ("bm25", "embedding")
LEMMATIZERS = ("identity", "lexicon", "external")
PROMPT_LANGUAGES = ("en", "san", "lat", "grc")
SCRIPTS = ("devanagari", "iast")


def parse_config_text(text: str, base_dir: Path | None = None) -> dict[str, str]:
    result: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("include "):
            target = stripped.removeprefix("include ").strip()
            include_path = (base_dir / target) if base_dir else Path(target)
            result.update(parse_config_file(include_path))
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        result[key.strip()] = value.strip()
    return result


def parse_config_file(path: str | Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text("utf-8"), base_dir=path.parent)


def _as_bool(value: str) -> bool:
    if value.lower() in ("1", "true", "yes", "on"):
        return True
    if value.lower() in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {value!r}")


@dataclass
class ExperimentConfig:
    task: str = "qa"
    dataset: str = ""
    model: str = "mock"
    prompt_language: str = "en"
    script: str = "devanagari"  # script shown to the model
    dataset_script: str = "iast"  # script of dataset text fields
    language: str = "san"  # dataset language (NER/MT)
    tagset: list[str] = field(default_factory=list)

    qa_mode: str = "closed"
    retriever: str = "bm25"
    k: int = 4
    bm25_k1: float = 1.5
    bm25_b: float = 0.75
    embeddings_path: str = ""
    corpus_path: str = ""
    corpus_script: str = "iast"
    index_path: str = ""
    chunk_lines: int = 2
    overlap_lines: int = 0

    lemmatizer: str = "identity"
    lexicon_path: str = ""
    lexicon_script: str = "iast"
    external_command: str = ""

    kg_path: str = ""
    tog_sample_limit: int = 15
    tog_depth_limit: int = 1
    tog_width_limit: int = 3

    temperature: float = 0.0
    max_tokens: int = 512
    seed: int = 0
    n_chunks: int = 10
    shuffle_chunks: bool = False
    concurrency: int = 1

    cache_dir: str = ""
    replay_only: bool = False
    mock_script: str = ""
    out_dir: str = ""

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"task must be one of {TASKS}, got {self.task!r}")
        if self.qa_mode not in QA_MODES:
            raise ConfigError(f"qa_mode must be one of {QA_MODES}")
        if self.retriever not in RETRIEVERS:
            raise ConfigError(f"retriever must be one of {RETRIEVERS}")
        if self.lemmatizer not in LEMMATIZERS:
            raise ConfigError(f"lemmatizer must be one of {LEMMATIZERS}")
        if self.prompt_language not in PROMPT_LANGUAGES:
            raise ConfigError(f"prompt_language must be one of {PROMPT_LANGUAGES}")
        if self.script not in SCRIPTS:
            raise ConfigError(f"script must be one of {SCRIPTS}")
        if not self.dataset:
            raise ConfigError("dataset path is required")
        if self.k < 1:
            raise ConfigError("k must be >= 1 (use qa_mode = closed for no contexts)")
        if self.task == "qa" and self.qa_mode == "rag":
            if not (self.corpus_path or self.index_path):
                raise ConfigError("rag mode needs corpus_path or index_path")
            if self.retriever == "embedding" and not self.embeddings_path:
                raise ConfigError("embedding retriever needs embeddings_path")
        if self.task == "qa" and self.qa_mode == "tog" and not self.kg_path:
            raise ConfigError("tog mode needs kg_path")
        if self.lemmatizer == "lexicon" and not self.lexicon_path:
            raise ConfigError("lexicon lemmatizer needs lexicon_path")
        if self.lemmatizer == "external" and not self.external_command:
            raise ConfigError("external lemmatizer needs external_command")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if self.n_chunks < 1:
            raise ConfigError("n_chunks must be >= 1")

    @classmethod
    def from_mapping(cls, mapping: dict[str, str]) -> "ExperimentConfig":
        cfg = cls()
        valid = {f.name: f.type for f in fields(cls)}
        for key, raw in mapping.items():
            if key not in valid:
                raise ConfigError(f"unknown config key {key!r}")
            current = getattr(cfg, key)
            if isinstance(current, bool):
                value: object = _as_bool(raw)
            elif isinstance(current, int):
                try:
                    value = int(raw)
                except ValueError:
                    raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
            elif isinstance(current, float):
                try:
                    value = float(raw)
                except ValueError:
                    raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
            elif isinstance(current, list):
                value = [p.strip() for p in raw.split(",") if p.strip()]
            else:
                value = raw
            setattr(cfg, key, value)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_mapping(parse_config_file(path))

    def to_mapping(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                out[f.name] = "true" if value else "false"
            elif isinstance(value, list):
                out[f.name] = ", ".join(value)
            else:
                out[f.name] = str(value)
        return out

    def serialize(self) -> str:
        pairs = sorted(self.to_mapping().items())
        return "\n".join(f"{k} = {v}" for k, v in pairs) + "\n"
