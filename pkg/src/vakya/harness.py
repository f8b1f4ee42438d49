"""Experiment orchestration: NER, MT, and QA (closed-book, retrieval, or
graph) runs driven by an :class:`~vakya.config.ExperimentConfig`, plus
report generation.

Contract: a run aborts only on configuration or dataset schema errors.
Per-item LLM failures or unparseable outputs are recorded with flags and
scored 0, so one bad response never kills a batch.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import metrics
from .config import ExperimentConfig
from .datasets import MtRecord, NerRecord, QaRecord, load_mt, load_ner, load_qa
from .errors import ConfigError, VakyaError
from .kg import load_kg
from .lemma import Lemmatizer, lemmatize_corpus, make_lemmatizer
from .llm import (
    CachingChatClient,
    ChatClient,
    ChatRequest,
    HttpChatClient,
    load_mock,
    parse_tagged_dict,
)
from .metrics import ConfusionMatrix, EmMode
from .prompts import PromptRegistry, default_tagset, entity_type_list
from .retrieval import (
    Bm25Params,
    build_index,
    load_embeddings,
    load_index,
    save_index,
    top_k,
)
from .textproc import Script, Token, chunk_corpus, to_canonical, transliterate
from .tog import TogConfig, TogEngine

log = logging.getLogger(__name__)

LANGUAGE_NAMES = {"san": "Sanskrit", "lat": "Latin", "grc": "Ancient Greek"}

# topic display forms, canonical romanization
_TOPIC_CANONICAL = {"Ramayana": "rAmAyaRa", "Ayurveda": "Ayurveda"}
_TOPIC_ENGLISH = {"Ramayana": "Rāmāyaṇa", "Ayurveda": "Āyurveda"}

API_BASE_ENV = "VAKYA_API_BASE"
API_KEY_ENV = "VAKYA_API_KEY"


@dataclass
class MetricReport:
    task: str
    config: dict[str, str]
    per_item: list[dict] = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    chunked: dict | None = None
    confusion: dict | None = None
    subsets: dict | None = None
    flags_summary: dict[str, int] = field(default_factory=dict)
    reference: dict | None = None


def reference_constants() -> dict:
    path = resources.files("vakya").joinpath("reference_data/constants.json")
    return json.loads(path.read_text("utf-8"))


def build_client(cfg: ExperimentConfig) -> ChatClient:
    inner: ChatClient | None = None
    if cfg.mock_script:
        inner = load_mock(cfg.mock_script)
    elif not cfg.replay_only:
        base = os.environ.get(API_BASE_ENV)
        if base:
            inner = HttpChatClient(base_url=base, api_key_env=API_KEY_ENV)
    if cfg.replay_only:
        if not cfg.cache_dir:
            raise ConfigError("replay_only requires cache_dir")
        return CachingChatClient(cfg.cache_dir, inner=None)
    if inner is None:
        raise ConfigError(
            f"no LLM backend: set mock_script, replay_only, or the {API_BASE_ENV} environment variable"
        )
    if cfg.cache_dir:
        return CachingChatClient(cfg.cache_dir, inner=inner)
    return inner


def _topic_display(topic: str, cfg: ExperimentConfig) -> str:
    if cfg.prompt_language == "san":
        return transliterate(_TOPIC_CANONICAL[topic], Script.CANONICAL, cfg.script)
    return _TOPIC_ENGLISH[topic]


def _to_prompt_script(text: str, cfg: ExperimentConfig, source_script: str) -> str:
    """Dataset/corpus text into the script shown to the model. Only
    Sanskrit-script text is converted; lat/grc text passes through."""
    if cfg.language != "san" and cfg.task in ("ner", "mt"):
        return text
    return transliterate(text, source_script, cfg.script)


def _chunked(scores: list[float], cfg: ExperimentConfig) -> dict | None:
    if len(scores) < cfg.n_chunks:
        return None
    summary = metrics.chunked_summary(
        scores, cfg.n_chunks, shuffle_seed=cfg.seed if cfg.shuffle_chunks else None
    )
    return {
        "n_chunks": summary.n_chunks,
        "per_chunk_means": summary.per_chunk_means,
        "chunk_sizes": summary.chunk_sizes,
        "mean": summary.mean,
        "median": summary.median,
        "q1": summary.q1,
        "q3": summary.q3,
        "min": summary.min,
        "max": summary.max,
    }


def _confusion_dict(cm: ConfusionMatrix) -> dict:
    return {
        "labels": cm.labels,
        "counts": cm.counts,
        "row_normalized": cm.row_normalized(),
    }


def build_index_from_config(cfg: ExperimentConfig, lemmatizer: Lemmatizer | None = None):
    """Chunk, lemmatize, and index the configured corpus (or load a
    previously saved index)."""
    if cfg.index_path and Path(cfg.index_path).is_file():
        return load_index(cfg.index_path)
    if not cfg.corpus_path:
        raise ConfigError("corpus_path required to build an index")
    lemmatizer = lemmatizer or _make_lemmatizer(cfg)
    lines = Path(cfg.corpus_path).read_text("utf-8").splitlines()
    chunks = chunk_corpus(lines, cfg.chunk_lines, cfg.overlap_lines)
    lemmatize_corpus(
        chunks, lemmatizer, script=cfg.corpus_script,
        cache_dir=cfg.cache_dir or None,
    )
    index = build_index(chunks, Bm25Params(k1=cfg.bm25_k1, b=cfg.bm25_b))
    if cfg.index_path:
        save_index(index, cfg.index_path)
    return index


def _make_lemmatizer(cfg: ExperimentConfig) -> Lemmatizer:
    return make_lemmatizer(
        cfg.lemmatizer,
        path=cfg.lexicon_path or None,
        command=cfg.external_command.split() if cfg.external_command else None,
        script=cfg.lexicon_script,
    )


def _summarize_flags(per_item: list[dict]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for row in per_item:
        for flag in row.get("flags", []):
            name = flag.split(":", 1)[0]
            counts[name] = counts.get(name, 0) + 1
    return counts


def run_experiment(
    cfg: ExperimentConfig,
    client: ChatClient | None = None,
    registry: PromptRegistry | None = None,
) -> MetricReport:
    cfg.validate()
    registry = registry or PromptRegistry.load()
    client = client or build_client(cfg)
    if cfg.task == "qa":
        report = _run_qa(cfg, client, registry)
    elif cfg.task == "ner":
        report = _run_ner(cfg, client, registry)
    elif cfg.task == "mt":
        report = _run_mt(cfg, client, registry)
    else:  # pragma: no cover - validate() guards this
        raise ConfigError(f"unknown task {cfg.task!r}")
    report.config = cfg.to_mapping()
    report.reference = reference_constants()
    report.flags_summary = _summarize_flags(report.per_item)
    return report


def _complete(client: ChatClient, cfg: ExperimentConfig, messages) -> tuple[str, list[str]]:
    """One guarded LLM call: returns (text, flags)."""
    req = ChatRequest(
        model=cfg.model,
        messages=tuple(messages),
        temperature=cfg.temperature,
        max_tokens=cfg.max_tokens,
    )
    try:
        return client.complete(req).text, []
    except VakyaError as exc:
        log.warning("LLM call failed: %s", exc)
        return "", [f"llm_error:{type(exc).__name__}"]


def _map_items(fn, items, concurrency: int) -> list:
    if concurrency <= 1:
        return [fn(i, item) for i, item in enumerate(items)]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(fn, range(len(items)), items))


# --- QA ---

def _run_qa(cfg: ExperimentConfig, client: ChatClient, registry: PromptRegistry) -> MetricReport:
    records = load_qa(cfg.dataset)
    lemmatizer = _make_lemmatizer(cfg)

    index = None
    table = None
    if cfg.qa_mode == "rag":
        index = build_index_from_config(cfg, lemmatizer)
        if cfg.retriever == "embedding":
            table = load_embeddings(cfg.embeddings_path)
    engine = None
    if cfg.qa_mode == "tog":
        engine = TogEngine(
            kg=load_kg(cfg.kg_path, lemma_script=cfg.dataset_script),
            llm=client,
            registry=registry,
            lemmatizer=lemmatizer,
            cfg=TogConfig(
                sample_limit=cfg.tog_sample_limit,
                depth_limit=cfg.tog_depth_limit,
                width_limit=cfg.tog_width_limit,
                rng_seed=cfg.seed,
                model=cfg.model,
                max_tokens=cfg.max_tokens,
            ),
            script=cfg.script,
        )

    template_id = {
        "closed": f"qa-closed-{cfg.prompt_language}",
        "rag": f"qa-rag-{cfg.prompt_language}",
        "tog": None,
    }[cfg.qa_mode]

    def run_one(i: int, rec: QaRecord) -> dict:
        question = transliterate(rec.question, cfg.dataset_script, cfg.script)
        choices = (
            " ".join(transliterate(c, cfg.dataset_script, cfg.script) for c in rec.choices)
            if rec.choices
            else ""
        )
        topic = _topic_display(rec.topic, cfg)
        flags: list[str] = []
        row: dict = {"index": i, "id": rec.id, "topic": rec.topic, "category": rec.category}

        if cfg.qa_mode == "tog":
            assert engine is not None
            try:
                result = engine.answer(question, choices, topic)
                prediction = result.answer
                flags.extend(result.trace.flags)
                row["llm_calls"] = result.trace.llm_calls
                row["trace"] = json.loads(result.trace.to_json())
            except VakyaError as exc:
                prediction = ""
                flags.append(f"llm_error:{type(exc).__name__}")
        else:
            binding = {"TOPIC": topic, "QUESTION": question, "CHOICES": choices}
            if cfg.qa_mode == "rag":
                assert index is not None
                query = lemmatizer.lemmatize(to_canonical(rec.question, cfg.dataset_script))
                scored = top_k(index, query, cfg.k, table=table)
                row["retrieved"] = [s.chunk_id for s in scored]
                contexts = []
                for rank, s in enumerate(scored, start=1):
                    text = transliterate(index.chunk(s.chunk_id).raw_text, cfg.corpus_script, cfg.script)
                    contexts.append(f"{rank}. {text}")
                binding["CONTEXTS"] = "\n".join(contexts)
            messages = registry.render(template_id, binding, target=cfg.script)
            prediction, call_flags = _complete(client, cfg, messages)
            flags.extend(call_flags)

        row["prediction"] = prediction
        answers = rec.acceptable_answers
        row["em_inflected"] = (
            metrics.exact_match(
                prediction, answers, EmMode.INFLECTED,
                script=cfg.dataset_script, prediction_script=cfg.script,
            )
            if prediction
            else 0
        )
        lem_answers = answers + (rec.acceptable_answers_lemmatized or [])
        row["em_lemmatized"] = (
            metrics.exact_match(
                prediction, lem_answers, EmMode.LEMMATIZED,
                script=cfg.dataset_script, lemmatizer=lemmatizer,
                prediction_script=cfg.script,
            )
            if prediction
            else 0
        )
        if rec.answer_in_retrieved_context is not None:
            row["answer_in_context"] = rec.answer_in_retrieved_context
        if rec.requires_reasoning:
            row["requires_reasoning"] = True
        row["flags"] = flags
        return row

    concurrency = 1 if cfg.qa_mode == "tog" else cfg.concurrency
    per_item = _map_items(run_one, records, concurrency)

    em_inf = [r["em_inflected"] for r in per_item]
    em_lem = [r["em_lemmatized"] for r in per_item]
    aggregates = {
        "n": len(per_item),
        "em_inflected": sum(em_inf) / len(em_inf) if em_inf else 0.0,
        "em_lemmatized": sum(em_lem) / len(em_lem) if em_lem else 0.0,
        "qa_mode": cfg.qa_mode,
    }
    subsets = None
    annotated = [r for r in per_item if "answer_in_context" in r]
    if annotated:
        inside = [r for r in annotated if r["answer_in_context"]]
        outside = [r for r in annotated if not r["answer_in_context"]]
        subsets = {
            "answer_in_context": _subset_stats(inside),
            "answer_not_in_context": _subset_stats(outside),
            "n_annotated": len(annotated),
        }
    report = MetricReport(task="qa", config={}, per_item=per_item, aggregates=aggregates)
    report.subsets = subsets
    report.chunked = _chunked([float(x) for x in em_inf], cfg)
    return report


def _subset_stats(rows: list[dict]) -> dict:
    n = len(rows)
    return {
        "n": n,
        "em_inflected": sum(r["em_inflected"] for r in rows) / n if n else 0.0,
        "em_lemmatized": sum(r["em_lemmatized"] for r in rows) / n if n else 0.0,
    }


# --- NER ---

def _run_ner(cfg: ExperimentConfig, client: ChatClient, registry: PromptRegistry) -> MetricReport:
    records = load_ner(cfg.dataset, cfg.language, cfg.tagset or None)
    if cfg.tagset:
        tagset = cfg.tagset
    else:
        try:
            tagset = default_tagset(cfg.language)
        except VakyaError:
            tagset = []
            for rec in records:
                for tag in rec.gold_tags:
                    if tag != "O":
                        t = tag.split("-", 1)[1]
                        if t not in tagset:
                            tagset.append(t)
    types_text = entity_type_list(tagset)
    template = registry.get(f"ner-{cfg.prompt_language}")

    def run_one(i: int, rec: NerRecord) -> dict:
        display_tokens = [
            Token(_to_prompt_script(t, cfg, cfg.dataset_script), j)
            for j, t in enumerate(rec.tokens)
        ]
        sentence = " ".join(t.surface for t in display_tokens)
        binding = {"ENTITY TYPES": types_text, "INPUT": sentence}
        if "LANGUAGE" in template.placeholders:
            binding["LANGUAGE"] = LANGUAGE_NAMES.get(cfg.language, cfg.language)
        messages = template.render(binding, target=cfg.script)
        raw, flags = _complete(client, cfg, messages)
        parsed = parse_tagged_dict(raw)
        if parsed.failed and raw:
            flags.append("parse_failure")
        score = metrics.ner_macro_f1([display_tokens], [rec.gold_tags], [parsed.tags])
        return {
            "index": i,
            "sentence": sentence,
            "raw_response": raw,
            "prediction": parsed.tags,
            "sentence_macro_f1": score.macro_f1,
            "flags": flags,
        }

    per_item = _map_items(run_one, records, cfg.concurrency)

    corpus = metrics.ner_macro_f1(
        [
            [Token(_to_prompt_script(t, cfg, cfg.dataset_script), j) for j, t in enumerate(rec.tokens)]
            for rec in records
        ],
        [rec.gold_tags for rec in records],
        [row["prediction"] for row in per_item],
    )
    aggregates = {
        "n": len(per_item),
        "macro_f1": corpus.macro_f1,
        "per_tag": corpus.per_tag,
        "spurious_predictions": corpus.spurious_count,
        "tagset": tagset,
    }
    report = MetricReport(task="ner", config={}, per_item=per_item, aggregates=aggregates)
    report.confusion = _confusion_dict(corpus.confusion)
    report.chunked = _chunked([r["sentence_macro_f1"] for r in per_item], cfg)
    return report


# --- MT ---

def _run_mt(cfg: ExperimentConfig, client: ChatClient, registry: PromptRegistry) -> MetricReport:
    records = load_mt(cfg.dataset)
    template = registry.get(f"mt-{cfg.prompt_language}")

    def run_one(i: int, rec: MtRecord) -> dict:
        source = _to_prompt_script(rec.source, cfg, cfg.dataset_script)
        binding = {"INPUT": source}
        if "LANGUAGE" in template.placeholders:
            binding["LANGUAGE"] = LANGUAGE_NAMES.get(cfg.language, cfg.language)
        messages = template.render(binding, target=cfg.script)
        raw, flags = _complete(client, cfg, messages)
        return {
            "index": i,
            "source": source,
            "prediction": raw.strip(),
            "sentence_bleu": metrics.sentence_bleu(raw, rec.references),
            "flags": flags,
        }

    per_item = _map_items(run_one, records, cfg.concurrency)
    bleu = metrics.corpus_bleu(
        [r["prediction"] for r in per_item], [rec.references for rec in records]
    )
    aggregates = {
        "n": len(per_item),
        "corpus_bleu": bleu,
        "corpus_bleu_x100": 100.0 * bleu,
        "mean_sentence_bleu": sum(r["sentence_bleu"] for r in per_item) / len(per_item)
        if per_item
        else 0.0,
    }
    report = MetricReport(task="mt", config={}, per_item=per_item, aggregates=aggregates)
    report.chunked = _chunked([r["sentence_bleu"] for r in per_item], cfg)
    return report


# --- report files ---

def report_to_dict(report: MetricReport) -> dict:
    return {
        "task": report.task,
        "config": report.config,
        "aggregates": report.aggregates,
        "subsets": report.subsets,
        "chunked": report.chunked,
        "confusion": report.confusion,
        "flags_summary": report.flags_summary,
        "reference": report.reference,
        "per_item": report.per_item,
    }


def report_from_dict(data: dict) -> MetricReport:
    return MetricReport(
        task=data["task"],
        config=data.get("config", {}),
        per_item=data.get("per_item", []),
        aggregates=data.get("aggregates", {}),
        chunked=data.get("chunked"),
        confusion=data.get("confusion"),
        subsets=data.get("subsets"),
        flags_summary=data.get("flags_summary", {}),
        reference=data.get("reference"),
    )


def _dump_json(payload, path: Path) -> None:
    path.write_text(
        json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        "utf-8",
    )


def write_report(report: MetricReport, out_dir: str | Path) -> list[Path]:
    """Write report files; byte-stable given identical inputs.

    Emits report.json (everything), summary.json, per_item.csv, config.cfg,
    boxplot.json, confusion CSVs (NER), and per-item traces (graph QA).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    full = report_to_dict(report)
    report_path = out / "report.json"
    _dump_json(full, report_path)
    written.append(report_path)

    summary = {k: v for k, v in full.items() if k != "per_item"}
    summary_path = out / "summary.json"
    _dump_json(summary, summary_path)
    written.append(summary_path)

    config_path = out / "config.cfg"
    config_path.write_text(
        "\n".join(f"{k} = {v}" for k, v in sorted(report.config.items())) + "\n", "utf-8"
    )
    written.append(config_path)

    rows = []
    for item in report.per_item:
        row = dict(item)
        row.pop("trace", None)
        for key, value in list(row.items()):
            if isinstance(value, (dict, list)):
                row[key] = json.dumps(value, ensure_ascii=False, sort_keys=True)
        rows.append(row)
    columns = sorted({key for row in rows for key in row})
    csv_path = out / "per_item.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    written.append(csv_path)

    if report.chunked is not None:
        box_path = out / "boxplot.json"
        _dump_json(
            {
                "five_number": {
                    "min": report.chunked["min"],
                    "q1": report.chunked["q1"],
                    "median": report.chunked["median"],
                    "q3": report.chunked["q3"],
                    "max": report.chunked["max"],
                },
                "per_chunk_means": report.chunked["per_chunk_means"],
                "chunk_sizes": report.chunked["chunk_sizes"],
            },
            box_path,
        )
        written.append(box_path)

    if report.confusion is not None:
        labels = report.confusion["labels"]
        for name, grid in (
            ("confusion.csv", report.confusion["row_normalized"]),
            ("confusion_counts.csv", report.confusion["counts"]),
        ):
            path = out / name
            with path.open("w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["gold\\pred"] + labels)
                for label, row in zip(labels, grid):
                    writer.writerow([label] + list(row))
            written.append(path)

    traces = [(item["id"], item["trace"]) for item in report.per_item if "trace" in item]
    if traces:
        trace_dir = out / "traces"
        trace_dir.mkdir(exist_ok=True)
        for item_id, trace in traces:
            path = trace_dir / f"{item_id}.json"
            _dump_json(trace, path)
            written.append(path)

    return written
