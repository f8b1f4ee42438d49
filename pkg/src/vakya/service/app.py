"""FastAPI service wrapping the core package.

All state lives in files named by the request (configs, indexes, caches,
knowledge graphs), so the service itself is stateless and safe to run for
many clients. The CLI is a thin client of these endpoints.
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import ExperimentConfig, parse_config_file
from ..errors import ConfigError, VakyaError
from ..harness import (
    build_client,
    build_index_from_config,
    report_from_dict,
    run_experiment,
    write_report,
    _make_lemmatizer,
)
from ..kg import load_kg
from ..lemma import lemma_f1, make_lemmatizer
from ..llm import parse_binary, parse_scored_list, parse_tagged_dict
from ..prompts import PromptRegistry
from ..retrieval import load_embeddings, top_k
from ..textproc import normalize, to_canonical, tokenize, transliterate
from ..textproc import DEFAULT_STRIP_CHARS
from ..tog import TogConfig, TogEngine
from . import schemas as s

app = FastAPI(title="vakya", version=__version__)

_registry = PromptRegistry.load()


@app.exception_handler(VakyaError)
async def _domain_error(_request: Request, exc: VakyaError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc), "error": type(exc).__name__})


@app.exception_handler(FileNotFoundError)
async def _missing_file(_request: Request, exc: FileNotFoundError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc), "error": "FileNotFound"})


@app.get("/health", response_model=s.HealthResponse)
def health() -> s.HealthResponse:
    return s.HealthResponse(status="ok", version=__version__)


@app.post("/v1/transliterate", response_model=s.TextResponse)
def transliterate_endpoint(req: s.TransliterateRequest) -> s.TextResponse:
    return s.TextResponse(text=transliterate(req.text, req.from_script, req.to_script))


@app.post("/v1/normalize", response_model=s.TextResponse)
def normalize_endpoint(req: s.NormalizeRequest) -> s.TextResponse:
    strip = DEFAULT_STRIP_CHARS if req.strip_punctuation else None
    return s.TextResponse(text=normalize(req.text, strip_chars=strip))


@app.post("/v1/tokenize", response_model=s.TokenizeResponse)
def tokenize_endpoint(req: s.TokenizeRequest) -> s.TokenizeResponse:
    return s.TokenizeResponse(
        tokens=[s.TokenModel(surface=t.surface, index=t.index) for t in tokenize(req.text)]
    )


def _lemmatizer_from_spec(spec: s.LemmatizerSpec):
    return make_lemmatizer(spec.kind, path=spec.path, command=spec.command, script=spec.script)


@app.post("/v1/lemmatize", response_model=s.LemmatizeResponse)
def lemmatize_endpoint(req: s.LemmatizeRequest) -> s.LemmatizeResponse:
    lem = _lemmatizer_from_spec(req.lemmatizer)
    lemmas = lem.lemmatize(to_canonical(req.sentence, req.input_script))
    return s.LemmatizeResponse(lemmas=lemmas)


@app.post("/v1/lemma-f1", response_model=s.LemmaF1Response)
def lemma_f1_endpoint(req: s.LemmaF1Request) -> s.LemmaF1Response:
    score = lemma_f1(req.predicted, req.gold)
    return s.LemmaF1Response(precision=score.precision, recall=score.recall, f1=score.f1)


def _config_with_overrides(config_path: str, overrides: dict[str, str]) -> ExperimentConfig:
    mapping = parse_config_file(config_path)
    mapping.update(overrides)
    return ExperimentConfig.from_mapping(mapping)


@app.post("/v1/index/build", response_model=s.BuildIndexResponse)
def build_index_endpoint(req: s.BuildIndexRequest) -> s.BuildIndexResponse:
    cfg = _config_with_overrides(req.config_path, req.overrides)
    if not cfg.index_path:
        raise ConfigError("index_path required (config key index_path or override)")
    index = build_index_from_config(cfg)
    return s.BuildIndexResponse(
        index_path=cfg.index_path,
        chunks=index.size,
        vocabulary=len(index.doc_freq),
        avg_len=index.avg_len,
    )


@app.post("/v1/index/search", response_model=s.SearchResponse)
def search_endpoint(req: s.SearchRequest) -> s.SearchResponse:
    cfg = _config_with_overrides(req.config_path, req.overrides)
    lemmatizer = _make_lemmatizer(cfg)
    index = build_index_from_config(cfg, lemmatizer)
    table = load_embeddings(cfg.embeddings_path) if cfg.retriever == "embedding" else None
    query_lemmas = lemmatizer.lemmatize(to_canonical(req.query, cfg.dataset_script))
    hits = top_k(index, query_lemmas, req.k or cfg.k, table=table)
    return s.SearchResponse(
        results=[
            s.SearchHit(
                chunk_id=h.chunk_id,
                score=h.score,
                rank=h.rank,
                text=index.chunk(h.chunk_id).raw_text,
            )
            for h in hits
        ],
        query_lemmas=query_lemmas,
    )


def _run_and_write(cfg: ExperimentConfig) -> s.RunResponse:
    if not cfg.out_dir:
        raise ConfigError("out_dir required (config key out_dir or override)")
    report = run_experiment(cfg)
    files = write_report(report, cfg.out_dir)
    return s.RunResponse(
        task=report.task,
        out_dir=cfg.out_dir,
        files=[str(p.relative_to(cfg.out_dir)) for p in files],
        aggregates=report.aggregates,
        subsets=report.subsets,
        flags_summary=report.flags_summary,
    )


@app.post("/v1/experiment/run", response_model=s.RunResponse)
def run_endpoint(req: s.RunRequest) -> s.RunResponse:
    return _run_and_write(_config_with_overrides(req.config_path, req.overrides))


@app.post("/v1/experiment/score", response_model=s.RunResponse)
def score_endpoint(req: s.RunRequest) -> s.RunResponse:
    overrides = dict(req.overrides)
    overrides["replay_only"] = "true"
    overrides.pop("mock_script", None)
    return _run_and_write(_config_with_overrides(req.config_path, overrides))


@app.post("/v1/report", response_model=s.ReportResponse)
def report_endpoint(req: s.ReportRequest) -> s.ReportResponse:
    data = json.loads(Path(req.report_path).read_text("utf-8"))
    report = report_from_dict(data)
    files = write_report(report, req.out_dir)
    return s.ReportResponse(
        out_dir=req.out_dir,
        files=[str(p.relative_to(req.out_dir)) for p in files],
    )


@app.post("/v1/kg/answer", response_model=s.TogAnswerResponse)
def tog_answer_endpoint(req: s.TogAnswerRequest) -> s.TogAnswerResponse:
    cfg = ExperimentConfig(
        task="qa",
        dataset="-",
        qa_mode="tog",
        kg_path=req.kg_path,
        mock_script=req.mock_script or "",
        cache_dir=req.cache_dir or "",
        replay_only=req.replay_only,
        model=req.model,
    )
    client = build_client(cfg)
    engine = TogEngine(
        kg=load_kg(req.kg_path, lemma_script=req.kg_lemma_script),
        llm=client,
        registry=_registry,
        lemmatizer=_lemmatizer_from_spec(req.lemmatizer),
        cfg=TogConfig(
            sample_limit=req.sample_limit,
            depth_limit=req.depth_limit,
            width_limit=req.width_limit,
            rng_seed=req.seed,
            model=req.model,
        ),
        script=req.script,
    )
    result = engine.answer(req.question, req.choices, req.topic)
    return s.TogAnswerResponse(
        answer=result.answer,
        llm_calls=result.trace.llm_calls,
        flags=result.trace.flags,
        trace=json.loads(result.trace.to_json()),
    )


@app.post("/v1/parse/tagged-dict", response_model=s.TaggedDictResponse)
def parse_tagged_endpoint(req: s.ParseRequest) -> s.TaggedDictResponse:
    result = parse_tagged_dict(req.raw)
    return s.TaggedDictResponse(tags=result.tags, failed=result.failed)


@app.post("/v1/parse/scored-list", response_model=s.ScoredListResponse)
def parse_scored_endpoint(req: s.ParseRequest) -> s.ScoredListResponse:
    result = parse_scored_list(req.raw)
    return s.ScoredListResponse(pairs=result.pairs, failed=result.failed)


@app.post("/v1/parse/binary", response_model=s.BinaryResponse)
def parse_binary_endpoint(req: s.ParseRequest) -> s.BinaryResponse:
    result = parse_binary(req.raw)
    return s.BinaryResponse(value=result.value, failed=result.failed)


@app.get("/v1/templates", response_model=s.TemplatesResponse)
def templates_endpoint() -> s.TemplatesResponse:
    return s.TemplatesResponse(ids=_registry.ids())


@app.post("/v1/templates/render", response_model=s.RenderResponse)
def render_endpoint(req: s.RenderRequest) -> s.RenderResponse:
    messages = _registry.render(req.template_id, req.binding, target=req.script)
    return s.RenderResponse(
        messages=[s.MessageModel(role=r, content=c) for r, c in messages]
    )
