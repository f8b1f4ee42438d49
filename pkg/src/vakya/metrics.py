"""Scoring: exact match, corpus BLEU, BI-tag NER macro-F1 with confusion
matrices, and fixed-count chunked score summaries."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .errors import (
    LengthMismatchError,
    SentenceCountMismatchError,
    TooFewItemsError,
)
from .lemma import Lemmatizer
from .textproc import DEFAULT_STRIP_CHARS, Script, Token, normalize, to_canonical


class EmMode(str, Enum):
    INFLECTED = "inflected"
    LEMMATIZED = "lemmatized"


def _match_form(text: str, script: Script | str, lemmatizer: Lemmatizer | None) -> str:
    """Canonical comparison form: normalized, punctuation-stripped,
    canonical script, optionally lemmatized."""
    canonical = to_canonical(text, script)
    canonical = normalize(canonical, strip_chars=DEFAULT_STRIP_CHARS)
    if lemmatizer is not None:
        return " ".join(lemmatizer.lemmatize(canonical))
    return canonical


def exact_match(
    prediction: str,
    acceptable: set[str] | list[str],
    mode: EmMode = EmMode.INFLECTED,
    script: Script | str = Script.IAST,
    lemmatizer: Lemmatizer | None = None,
    prediction_script: Script | str | None = None,
) -> int:
    """1 iff the prediction equals any acceptable answer after
    normalization (and lemmatization of both sides in lemmatized mode).

    ``script`` is the acceptable answers' script; the prediction may come
    in a different one (``prediction_script``), e.g. when the model was
    prompted in Devanagari but the gold answers are stored romanized.
    Comparison happens in the canonical internal script either way.
    """
    if not acceptable:
        raise ValueError("acceptable answer set must be nonempty")
    if mode == EmMode.LEMMATIZED and lemmatizer is None:
        raise ValueError("lemmatized mode requires a lemmatizer")
    lem = lemmatizer if mode == EmMode.LEMMATIZED else None
    pred = _match_form(prediction, prediction_script or script, lem)
    for answer in acceptable:
        if pred == _match_form(answer, script, lem):
            return 1
    return 0


# --- BLEU ---

def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _closest_ref_len(cand_len: int, ref_lens: list[int]) -> int:
    # ties go to the shorter reference
    return min(ref_lens, key=lambda r: (abs(r - cand_len), r))


def corpus_bleu(
    candidates: list[str],
    references: list[list[str]],
    max_n: int = 4,
) -> float:
    """Corpus-level BLEU on a 0-1 scale: geometric mean of modified n-gram
    precisions times the brevity penalty. Tokenization is whitespace over
    normalized text; no smoothing (any zero precision gives 0.0)."""
    if len(candidates) != len(references):
        raise LengthMismatchError(
            f"{len(candidates)} candidates vs {len(references)} reference sets"
        )
    if any(not refs for refs in references):
        raise LengthMismatchError("every item needs at least one reference")

    matched = [0] * max_n
    total = [0] * max_n
    cand_len = 0
    ref_len = 0
    for cand, refs in zip(candidates, references):
        cand_toks = normalize(cand).split()
        ref_toks = [normalize(r).split() for r in refs]
        cand_len += len(cand_toks)
        ref_len += _closest_ref_len(len(cand_toks), [len(r) for r in ref_toks])
        for n in range(1, max_n + 1):
            cand_counts = _ngrams(cand_toks, n)
            if not cand_counts:
                continue
            max_ref: Counter = Counter()
            for rt in ref_toks:
                for gram, count in _ngrams(rt, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            total[n - 1] += sum(cand_counts.values())
            matched[n - 1] += sum(
                min(count, max_ref[gram]) for gram, count in cand_counts.items()
            )

    if cand_len == 0:
        return 0.0
    log_sum = 0.0
    for n in range(max_n):
        if total[n] == 0 or matched[n] == 0:
            return 0.0
        log_sum += math.log(matched[n] / total[n])
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_sum / max_n)


def sentence_bleu(
    candidate: str, references: list[str], max_n: int = 4, epsilon: float = 1e-9
) -> float:
    """Single-sentence BLEU with add-epsilon smoothing for zero precisions
    (used for per-item score distributions, not headline numbers)."""
    cand_toks = normalize(candidate).split()
    ref_toks = [normalize(r).split() for r in references]
    if not references:
        raise LengthMismatchError("at least one reference required")
    if not cand_toks:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngrams(cand_toks, n)
        total = sum(cand_counts.values())
        if total == 0:
            precision = epsilon
        else:
            max_ref: Counter = Counter()
            for rt in ref_toks:
                for gram, count in _ngrams(rt, n).items():
                    if count > max_ref[gram]:
                        max_ref[gram] = count
            hits = sum(min(c, max_ref[g]) for g, c in cand_counts.items())
            precision = hits / total if hits else epsilon
        log_sum += math.log(precision)
    ref_len = _closest_ref_len(len(cand_toks), [len(r) for r in ref_toks])
    bp = 1.0 if len(cand_toks) > ref_len else math.exp(1.0 - ref_len / len(cand_toks))
    return bp * math.exp(log_sum / max_n)


# --- NER ---

NerPrediction = dict[str, list[str]]  # tag -> predicted surface words


@dataclass
class NerAlignment:
    tags: list[str]  # one per sentence token, "O" when unclaimed
    spurious: list[tuple[str, str]]  # (tag, word) pairs matching no token


def align_ner(sentence_tokens: list[Token], pred: NerPrediction) -> NerAlignment:
    """Assign each predicted (tag, word) to the first not-yet-assigned
    token with the same surface; leftovers are returned as spurious."""
    tags = ["O"] * len(sentence_tokens)
    assigned = [False] * len(sentence_tokens)
    spurious: list[tuple[str, str]] = []
    for tag, words in pred.items():
        for word in words:
            for pos, tok in enumerate(sentence_tokens):
                if not assigned[pos] and tok.surface == word:
                    assigned[pos] = True
                    tags[pos] = tag
                    break
            else:
                spurious.append((tag, word))
    return NerAlignment(tags=tags, spurious=spurious)


@dataclass
class ConfusionMatrix:
    """Gold-type rows vs predicted-type columns over entity types with the
    BI prefix stripped, plus an "O" row/column."""

    labels: list[str]
    counts: list[list[int]]

    def row_normalized(self) -> list[list[float]]:
        out = []
        for row in self.counts:
            total = sum(row)
            out.append([c / total for c in row] if total else [0.0] * len(row))
        return out


def _entity_type(tag: str) -> str:
    if tag == "O":
        return "O"
    return tag.split("-", 1)[1] if "-" in tag else tag


@dataclass
class NerScore:
    per_tag: dict[str, dict[str, float]]  # tag -> {precision, recall, f1, tp, fp, fn}
    macro_f1: float
    confusion: ConfusionMatrix
    spurious_count: int = 0


def ner_macro_f1(
    sentences: list[list[Token]],
    gold_tags: list[list[str]],
    predictions: list[NerPrediction],
) -> NerScore:
    """Token-level P/R/F1 per BI tag (O excluded); spurious predicted words
    count as false positives for their tag. Macro-F1 averages over tags
    appearing in gold or predictions."""
    if not (len(sentences) == len(gold_tags) == len(predictions)):
        raise SentenceCountMismatchError(
            f"{len(sentences)} sentences, {len(gold_tags)} gold, {len(predictions)} predicted"
        )
    tp: Counter = Counter()
    fp: Counter = Counter()
    fn: Counter = Counter()
    type_labels: list[str] = []
    pair_counts: Counter = Counter()  # (gold type, pred type)
    spurious_total = 0

    def _remember(label: str) -> None:
        if label not in type_labels:
            type_labels.append(label)

    for tokens, gold, pred in zip(sentences, gold_tags, predictions):
        if len(tokens) != len(gold):
            raise SentenceCountMismatchError(
                f"sentence has {len(tokens)} tokens but {len(gold)} gold tags"
            )
        alignment = align_ner(tokens, pred)
        for g, p in zip(gold, alignment.tags):
            if g != "O":
                _remember(_entity_type(g))
            if p != "O":
                _remember(_entity_type(p))
            pair_counts[(_entity_type(g), _entity_type(p))] += 1
            if g == p:
                if g != "O":
                    tp[g] += 1
            else:
                if p != "O":
                    fp[p] += 1
                if g != "O":
                    fn[g] += 1
        for tag, _word in alignment.spurious:
            fp[tag] += 1
            spurious_total += 1
            _remember(_entity_type(tag))

    tags = sorted(set(tp) | set(fp) | set(fn))
    per_tag: dict[str, dict[str, float]] = {}
    f1_sum = 0.0
    for tag in tags:
        t, p_, n_ = tp[tag], fp[tag], fn[tag]
        precision = t / (t + p_) if t + p_ else 0.0
        recall = t / (t + n_) if t + n_ else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_tag[tag] = {
            "precision": precision, "recall": recall, "f1": f1,
            "tp": float(t), "fp": float(p_), "fn": float(n_),
        }
        f1_sum += f1
    macro = f1_sum / len(tags) if tags else 0.0

    labels = type_labels + ["O"]
    grid = [[pair_counts[(g, p)] for p in labels] for g in labels]
    return NerScore(
        per_tag=per_tag,
        macro_f1=macro,
        confusion=ConfusionMatrix(labels=labels, counts=grid),
        spurious_count=spurious_total,
    )


# --- chunked summaries ---

@dataclass
class ChunkedSummary:
    n_chunks: int
    per_chunk_means: list[float]
    chunk_sizes: list[int]
    mean: float
    median: float
    q1: float
    q3: float
    min: float = 0.0
    max: float = 0.0


def _quantile(sorted_vals: list[float], q: float) -> float:
    # linear interpolation between closest ranks
    if len(sorted_vals) == 1:
        return sorted_vals[0]
    pos = q * (len(sorted_vals) - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    if lo == hi:
        return sorted_vals[lo]
    return sorted_vals[lo] + (pos - lo) * (sorted_vals[hi] - sorted_vals[lo])


def chunked_summary(
    per_item_scores: list[float],
    n_chunks: int = 10,
    shuffle_seed: int | None = None,
) -> ChunkedSummary:
    """Split scores into ``n_chunks`` contiguous, near-equal chunks in
    dataset order and summarize the distribution of per-chunk means.

    Chunk sizes differ by at most one. ``shuffle_seed`` optionally applies
    a seeded permutation before chunking.
    """
    scores = list(per_item_scores)
    if len(scores) < n_chunks:
        raise TooFewItemsError(f"need at least {n_chunks} items, got {len(scores)}")
    if shuffle_seed is not None:
        random.Random(shuffle_seed).shuffle(scores)
    q, r = divmod(len(scores), n_chunks)
    sizes = [q + 1] * r + [q] * (n_chunks - r)
    means: list[float] = []
    start = 0
    for size in sizes:
        block = scores[start:start + size]
        means.append(sum(block) / size)
        start += size
    ordered = sorted(means)
    return ChunkedSummary(
        n_chunks=n_chunks,
        per_chunk_means=means,
        chunk_sizes=sizes,
        mean=sum(scores) / len(scores),
        median=_quantile(ordered, 0.5),
        q1=_quantile(ordered, 0.25),
        q3=_quantile(ordered, 0.75),
        min=ordered[0],
        max=ordered[-1],
    )
