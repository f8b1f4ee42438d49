"""Pluggable lemmatization and lemma-bag F1 scoring.

The default lemmatizer is lexicon-backed: a UTF-8 TSV mapping each surface
form to one or more lemmas, with greedy longest-match segmentation for
compounds whose parts are lexicon surfaces. An external-process adapter
lets any trained lemmatizer plug in over a newline-delimited stream
protocol (one sentence in, one line of space-separated lemmas out).
"""

from __future__ import annotations

import hashlib
import json
import logging
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .errors import ExternalLemmatizerUnavailableError, LexiconMissingError
from .textproc import DocumentChunk, Script, to_canonical, tokenize

log = logging.getLogger(__name__)

LemmaSequence = list[str]


class Lemmatizer:
    """Interface: maps a sentence (canonical script) to a lemma sequence.

    The sequence may be longer than the token count when compounds or
    sandhi are split.
    """

    kind = "abstract"

    def lemmatize(self, sentence: str) -> LemmaSequence:
        raise NotImplementedError

    def fingerprint(self) -> str:
        """Stable identifier recorded in reports and cache keys."""
        raise NotImplementedError


class IdentityLemmatizer(Lemmatizer):
    kind = "identity"

    def lemmatize(self, sentence: str) -> LemmaSequence:
        return [t.surface for t in tokenize(sentence)]

    def fingerprint(self) -> str:
        return "identity"


class LexiconLemmatizer(Lemmatizer):
    """Lexicon lookup with greedy longest-match compound segmentation.

    TSV format: ``surface<TAB>lemma1 lemma2 ...``. Surfaces and lemmas are
    converted to the canonical script at load (``script`` declares the
    file's script). Out-of-vocabulary tokens pass through unchanged.
    """

    kind = "lexicon"

    def __init__(self, path: str | Path, script: Script | str = Script.IAST):
        path = Path(path)
        if not path.is_file():
            raise LexiconMissingError(f"lexicon not found: {path}")
        self.path = path
        self.entries: dict[str, list[str]] = {}
        raw = path.read_bytes()
        self._digest = hashlib.sha256(raw).hexdigest()[:16]
        for line_no, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise LexiconMissingError(
                    f"{path}:{line_no}: expected 'surface<TAB>lemmas'"
                )
            surface = to_canonical(parts[0].strip(), script)
            lemmas = [to_canonical(w, script) for w in parts[1].split()]
            if not surface or not lemmas:
                raise LexiconMissingError(f"{path}:{line_no}: empty surface or lemmas")
            self.entries[surface] = lemmas
        self._max_surface = max((len(s) for s in self.entries), default=0)

    def _segment(self, token: str) -> list[str] | None:
        """Greedy longest-prefix split of ``token`` into lexicon surfaces."""
        parts: list[str] = []
        rest = token
        while rest:
            for width in range(min(self._max_surface, len(rest)), 0, -1):
                if rest[:width] in self.entries:
                    parts.append(rest[:width])
                    rest = rest[width:]
                    break
            else:
                return None
        return parts

    def lemmatize(self, sentence: str) -> LemmaSequence:
        lemmas: LemmaSequence = []
        for token in (t.surface for t in tokenize(sentence)):
            if token in self.entries:
                lemmas.extend(self.entries[token])
                continue
            parts = self._segment(token)
            if parts is None:
                lemmas.append(token)  # OOV fallback: pass through
            else:
                for part in parts:
                    lemmas.extend(self.entries[part])
        return lemmas

    def fingerprint(self) -> str:
        return f"lexicon:{self._digest}"


class ExternalLemmatizer(Lemmatizer):
    """Adapter to a child process speaking the line protocol.

    One sentence is written per request; the reply is a single line of
    space-separated lemmas. A single request is in flight per process.
    """

    kind = "external"

    def __init__(self, command: list[str], timeout: float = 30.0):
        if not command:
            raise ExternalLemmatizerUnavailableError("empty command")
        self.command = list(command)
        self.timeout = timeout
        self._proc: subprocess.Popen | None = None

    def _ensure_proc(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self.command,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise ExternalLemmatizerUnavailableError(
                    f"cannot start {self.command[0]!r}: {exc}"
                ) from exc
        return self._proc

    def lemmatize(self, sentence: str) -> LemmaSequence:
        proc = self._ensure_proc()
        try:
            assert proc.stdin is not None and proc.stdout is not None
            proc.stdin.write(sentence.replace("\n", " ") + "\n")
            proc.stdin.flush()
            line = proc.stdout.readline()
        except (OSError, ValueError) as exc:
            raise ExternalLemmatizerUnavailableError(str(exc)) from exc
        if line == "":
            status = proc.poll()
            raise ExternalLemmatizerUnavailableError(
                f"child closed stream (exit status {status})"
            )
        return line.split()

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            self._proc.stdin.close()  # type: ignore[union-attr]
            try:
                self._proc.wait(timeout=self.timeout)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        self._proc = None

    def fingerprint(self) -> str:
        return "external:" + " ".join(self.command)


def make_lemmatizer(
    kind: str,
    path: str | None = None,
    command: list[str] | None = None,
    script: Script | str = Script.IAST,
) -> Lemmatizer:
    if kind == "identity":
        return IdentityLemmatizer()
    if kind == "lexicon":
        if path is None:
            raise LexiconMissingError("lexicon kind requires a path")
        return LexiconLemmatizer(path, script=script)
    if kind == "external":
        if not command:
            raise ExternalLemmatizerUnavailableError("external kind requires a command")
        return ExternalLemmatizer(command)
    raise ValueError(f"unknown lemmatizer kind {kind!r}")


@dataclass(frozen=True)
class F1Score:
    precision: float
    recall: float
    f1: float


def lemma_f1(predicted: LemmaSequence, gold: LemmaSequence) -> F1Score:
    """Multiset-intersection precision/recall and their harmonic mean.

    Both sides empty scores 1.0 (vacuous truth, keeps corpus means finite);
    exactly one side empty scores 0.0.
    """
    if not predicted and not gold:
        return F1Score(1.0, 1.0, 1.0)
    if not predicted or not gold:
        return F1Score(0.0, 0.0, 0.0)
    counts: dict[str, int] = {}
    for lemma in gold:
        counts[lemma] = counts.get(lemma, 0) + 1
    hits = 0
    for lemma in predicted:
        if counts.get(lemma, 0) > 0:
            counts[lemma] -= 1
            hits += 1
    precision = hits / len(predicted)
    recall = hits / len(gold)
    f1 = 0.0 if hits == 0 else 2 * precision * recall / (precision + recall)
    return F1Score(precision, recall, f1)


def _corpus_digest(chunks: list[DocumentChunk]) -> str:
    h = hashlib.sha256()
    for chunk in chunks:
        h.update(chunk.id.encode("utf-8"))
        h.update(b"\x00")
        h.update(chunk.raw_text.encode("utf-8"))
        h.update(b"\x01")
    return h.hexdigest()[:16]


def lemmatize_corpus(
    chunks: list[DocumentChunk],
    lemmatizer: Lemmatizer,
    script: Script | str = Script.IAST,
    cache_dir: str | Path | None = None,
) -> list[DocumentChunk]:
    """Fill ``lemmatized_text`` on every chunk, in order.

    Chunk text is converted from ``script`` to canonical before
    lemmatization. Results are cached on disk keyed by (corpus digest,
    lemmatizer fingerprint); a warm cache performs zero lemmatizer calls.
    """
    cache_path = None
    if cache_dir is not None:
        key = hashlib.sha256(
            f"{_corpus_digest(chunks)}|{lemmatizer.fingerprint()}|{Script(script).value}".encode()
        ).hexdigest()
        cache_path = Path(cache_dir) / f"lemmas-{key}.json"
        if cache_path.is_file():
            cached = json.loads(cache_path.read_text("utf-8"))
            for chunk in chunks:
                chunk.lemmatized_text = list(cached[chunk.id])
            log.debug("lemma cache hit: %s", cache_path.name)
            return chunks

    for chunk in chunks:
        try:
            canonical = to_canonical(chunk.raw_text, script)
            chunk.lemmatized_text = lemmatizer.lemmatize(canonical)
        except Exception as exc:
            raise type(exc)(f"chunk {chunk.id}: {exc}") from exc

    if cache_path is not None:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        payload = {c.id: c.lemmatized_text for c in chunks}
        tmp = cache_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(payload, ensure_ascii=False, sort_keys=True), "utf-8")
        tmp.replace(cache_path)
    return chunks
