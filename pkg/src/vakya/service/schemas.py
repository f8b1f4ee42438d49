"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class TransliterateRequest(BaseModel):
    text: str
    from_script: str
    to_script: str


class TextResponse(BaseModel):
    text: str


class NormalizeRequest(BaseModel):
    text: str
    strip_punctuation: bool = False


class TokenizeRequest(BaseModel):
    text: str


class TokenModel(BaseModel):
    surface: str
    index: int


class TokenizeResponse(BaseModel):
    tokens: list[TokenModel]


class LemmatizerSpec(BaseModel):
    kind: str = "identity"
    path: str | None = None
    command: list[str] | None = None
    script: str = "iast"


class LemmatizeRequest(BaseModel):
    sentence: str
    input_script: str = "iast"
    lemmatizer: LemmatizerSpec = Field(default_factory=LemmatizerSpec)


class LemmatizeResponse(BaseModel):
    lemmas: list[str]


class LemmaF1Request(BaseModel):
    predicted: list[str]
    gold: list[str]


class LemmaF1Response(BaseModel):
    precision: float
    recall: float
    f1: float


class BuildIndexRequest(BaseModel):
    config_path: str
    overrides: dict[str, str] = Field(default_factory=dict)


class BuildIndexResponse(BaseModel):
    index_path: str
    chunks: int
    vocabulary: int
    avg_len: float


class SearchRequest(BaseModel):
    config_path: str
    query: str
    k: int | None = None
    overrides: dict[str, str] = Field(default_factory=dict)


class SearchHit(BaseModel):
    chunk_id: str
    score: float
    rank: int
    text: str


class SearchResponse(BaseModel):
    results: list[SearchHit]
    query_lemmas: list[str]


class RunRequest(BaseModel):
    config_path: str
    overrides: dict[str, str] = Field(default_factory=dict)


class RunResponse(BaseModel):
    task: str
    out_dir: str
    files: list[str]
    aggregates: dict
    subsets: dict | None = None
    flags_summary: dict[str, int] = Field(default_factory=dict)


class ReportRequest(BaseModel):
    report_path: str
    out_dir: str


class ReportResponse(BaseModel):
    out_dir: str
    files: list[str]


class TogAnswerRequest(BaseModel):
    kg_path: str
    question: str
    choices: str = ""
    topic: str = ""
    script: str = "devanagari"
    kg_lemma_script: str = "iast"
    model: str = "mock"
    mock_script: str | None = None
    cache_dir: str | None = None
    replay_only: bool = False
    lemmatizer: LemmatizerSpec = Field(default_factory=LemmatizerSpec)
    sample_limit: int = 15
    depth_limit: int = 1
    width_limit: int = 3
    seed: int = 0


class TogAnswerResponse(BaseModel):
    answer: str
    llm_calls: int
    flags: list[str]
    trace: dict


class ParseRequest(BaseModel):
    raw: str


class TaggedDictResponse(BaseModel):
    tags: dict[str, list[str]]
    failed: bool


class ScoredListResponse(BaseModel):
    pairs: list[tuple[str, float]]
    failed: bool


class BinaryResponse(BaseModel):
    value: int
    failed: bool


class RenderRequest(BaseModel):
    template_id: str
    binding: dict[str, str]
    script: str | None = None


class MessageModel(BaseModel):
    role: str
    content: str


class RenderResponse(BaseModel):
    messages: list[MessageModel]


class TemplatesResponse(BaseModel):
    ids: list[str]
