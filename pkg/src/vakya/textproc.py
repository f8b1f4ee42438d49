"""Script handling, normalization, tokenization, and corpus chunking.

Transliteration goes through a canonical one-character-per-phoneme
romanization (uppercase marks aspirates/long vowels, e.g. ``A`` = ``ā``,
``K`` = ``kh``), so Devanagari and IAST are peripheral codecs parsed into
a phoneme/literal segment stream and re-emitted in the target script.
Characters outside the source script's alphabet pass through unchanged;
only orphaned script-internal combiners (a vowel sign or virama with no
consonant base) are rejected.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass
from enum import Enum

from .errors import EmptyCorpusError, MalformedTextError, UnknownScriptError


class Script(str, Enum):
    DEVANAGARI = "devanagari"
    IAST = "iast"
    CANONICAL = "canonical"


# Canonical phoneme inventory. Order is shared by every script table below.
_CANON_VOWELS = list("aAiIuUfFxXeEoO")
_CANON_CONSONANTS = list("kKgGNcCjJYwWqQRtTdDnpPbBmyrlvSzshL")
_CANON_OTHER = ["M", "H", "~", "'"]  # anusvara, visarga, candrabindu, avagraha

_IAST_VOWELS = ["a", "ā", "i", "ī", "u", "ū", "ṛ", "ṝ", "ḷ", "ḹ", "e", "ai", "o", "au"]
_IAST_CONSONANTS = [
    "k", "kh", "g", "gh", "ṅ",
    "c", "ch", "j", "jh", "ñ",
    "ṭ", "ṭh", "ḍ", "ḍh", "ṇ",
    "t", "th", "d", "dh", "n",
    "p", "ph", "b", "bh", "m",
    "y", "r", "l", "v",
    "ś", "ṣ", "s", "h",
    "ḻ",
]
_IAST_OTHER = ["ṃ", "ḥ", "m̐", "'"]

_DEVA_VOWELS = list("अआइईउऊऋॠऌॡएऐओऔ")
# Dependent vowel signs; the inherent "a" has no sign.
_DEVA_MATRAS = [""] + list("ािीुूृॄॢॣेैोौ")
_DEVA_CONSONANTS = list("कखगघङचछजझञटठडढणतथदधनपफबभमयरलवशषसहळ")
_DEVA_OTHER = list("ंःँऽ")
_VIRAMA = "्"

_IAST_TO_CANON = {
    **dict(zip(_IAST_VOWELS, _CANON_VOWELS)),
    **dict(zip(_IAST_CONSONANTS, _CANON_CONSONANTS)),
    **dict(zip(_IAST_OTHER, _CANON_OTHER)),
}
_CANON_TO_IAST = {v: k for k, v in _IAST_TO_CANON.items()}
_IAST_MAXLEN = max(len(t) for t in _IAST_TO_CANON)

_DEVA_VOWEL_TO_CANON = dict(zip(_DEVA_VOWELS, _CANON_VOWELS))
_DEVA_MATRA_TO_CANON = {
    m: c for m, c in zip(_DEVA_MATRAS, _CANON_VOWELS) if m
}
_DEVA_CONS_TO_CANON = dict(zip(_DEVA_CONSONANTS, _CANON_CONSONANTS))
_DEVA_OTHER_TO_CANON = dict(zip(_DEVA_OTHER, _CANON_OTHER))

_CANON_TO_DEVA_VOWEL = {v: k for k, v in _DEVA_VOWEL_TO_CANON.items()}
_CANON_TO_DEVA_MATRA = dict(zip(_CANON_VOWELS, _DEVA_MATRAS))
_CANON_TO_DEVA_CONS = {v: k for k, v in _DEVA_CONS_TO_CANON.items()}
_CANON_TO_DEVA_OTHER = {v: k for k, v in _DEVA_OTHER_TO_CANON.items()}

_CANON_VOWEL_SET = set(_CANON_VOWELS)
_CANON_CONS_SET = set(_CANON_CONSONANTS)
_CANON_ALL = _CANON_VOWEL_SET | _CANON_CONS_SET | set(_CANON_OTHER)

# A segment is (is_phoneme, text): phonemes carry one canonical character,
# literals pass through each emitter untouched.
_Segment = tuple[bool, str]


def _nfc(text: str) -> str:
    return unicodedata.normalize("NFC", text)


def _parse_iast(text: str) -> list[_Segment]:
    segments: list[_Segment] = []
    i = 0
    n = len(text)
    while i < n:
        for width in range(min(_IAST_MAXLEN, n - i), 0, -1):
            token = text[i:i + width]
            canon = _IAST_TO_CANON.get(token)
            if canon is not None:
                segments.append((True, canon))
                i += width
                break
        else:
            segments.append((False, text[i]))
            i += 1
    return segments


def _parse_devanagari(text: str) -> list[_Segment]:
    segments: list[_Segment] = []
    pending: str | None = None  # consonant awaiting its vowel or virama

    def flush_with_a() -> None:
        nonlocal pending
        if pending is not None:
            segments.append((True, pending))
            segments.append((True, "a"))
            pending = None

    for offset, ch in enumerate(text):
        if ch in _DEVA_CONS_TO_CANON:
            flush_with_a()
            pending = _DEVA_CONS_TO_CANON[ch]
        elif ch in _DEVA_MATRA_TO_CANON:
            if pending is None:
                raise MalformedTextError("vowel sign without consonant base", offset)
            segments.append((True, pending))
            segments.append((True, _DEVA_MATRA_TO_CANON[ch]))
            pending = None
        elif ch == _VIRAMA:
            if pending is None:
                raise MalformedTextError("virama without consonant base", offset)
            segments.append((True, pending))
            pending = None
        elif ch in _DEVA_VOWEL_TO_CANON:
            flush_with_a()
            segments.append((True, _DEVA_VOWEL_TO_CANON[ch]))
        elif ch in _DEVA_OTHER_TO_CANON:
            flush_with_a()
            segments.append((True, _DEVA_OTHER_TO_CANON[ch]))
        else:
            flush_with_a()
            segments.append((False, ch))
    flush_with_a()
    return segments


def _parse_canonical(text: str) -> list[_Segment]:
    return [(ch in _CANON_ALL, ch) for ch in text]


def _emit_iast(segments: list[_Segment]) -> str:
    return "".join(_CANON_TO_IAST[s] if is_ph else s for is_ph, s in segments)


def _emit_canonical(segments: list[_Segment]) -> str:
    return "".join(s for _, s in segments)


def _emit_devanagari(segments: list[_Segment]) -> str:
    out: list[str] = []
    i = 0
    n = len(segments)
    while i < n:
        is_ph, s = segments[i]
        if not is_ph:
            out.append(s)
            i += 1
            continue
        if s in _CANON_CONS_SET:
            out.append(_CANON_TO_DEVA_CONS[s])
            nxt = segments[i + 1] if i + 1 < n else None
            if nxt is not None and nxt[0] and nxt[1] in _CANON_VOWEL_SET:
                out.append(_CANON_TO_DEVA_MATRA[nxt[1]])
                i += 2
            else:
                out.append(_VIRAMA)
                i += 1
        elif s in _CANON_VOWEL_SET:
            out.append(_CANON_TO_DEVA_VOWEL[s])
            i += 1
        else:
            out.append(_CANON_TO_DEVA_OTHER[s])
            i += 1
    return "".join(out)


_PARSERS = {
    Script.IAST: _parse_iast,
    Script.DEVANAGARI: _parse_devanagari,
    Script.CANONICAL: _parse_canonical,
}
_EMITTERS = {
    Script.IAST: _emit_iast,
    Script.DEVANAGARI: _emit_devanagari,
    Script.CANONICAL: _emit_canonical,
}


def transliterate(text: str, frm: Script | str, to: Script | str) -> str:
    """Convert ``text`` from one script to another.

    Deterministic; characters outside the source alphabet pass through
    unchanged. Raises :class:`MalformedTextError` (with offset) for a
    Devanagari vowel sign or virama that has no consonant base.
    """
    try:
        frm = Script(frm)
        to = Script(to)
    except ValueError as exc:
        raise UnknownScriptError(str(exc)) from None
    segments = _PARSERS[frm](_nfc(text))
    return _EMITTERS[to](segments)


def to_canonical(text: str, script: Script | str) -> str:
    return transliterate(text, script, Script.CANONICAL)


def iast_alphabet() -> list[str]:
    """All IAST tokens the codec understands (for property-based tests)."""
    return list(_IAST_TO_CANON)


# Danda, double danda, and common editorial punctuation. Hyphen and
# apostrophe are deliberately kept: compounds and avagraha are phonemic.
DEFAULT_STRIP_CHARS = "।॥|.,;:!?\"()[]{}"

_WS_RE = re.compile(r"\s+")


def normalize(text: str, strip_chars: str | None = None) -> str:
    """NFC-compose, collapse whitespace runs, and optionally drop punctuation.

    Idempotent for any fixed ``strip_chars``.
    """
    text = _nfc(text)
    if strip_chars:
        text = text.translate({ord(c): " " for c in strip_chars})
    return _WS_RE.sub(" ", text).strip()


@dataclass(frozen=True)
class Token:
    surface: str
    index: int


def tokenize(text: str, strip_chars: str | None = DEFAULT_STRIP_CHARS) -> list[Token]:
    """Split normalized text on whitespace; positions are 0-based."""
    words = normalize(text, strip_chars=strip_chars).split()
    return [Token(surface=w, index=i) for i, w in enumerate(words)]


@dataclass
class DocumentChunk:
    """A contiguous span of corpus lines; ``lemmatized_text`` is None until
    a lemmatizer has run over the chunk."""

    id: str
    source_ref: tuple[int, int]  # [start_line, end_line) within the corpus
    raw_text: str
    lemmatized_text: list[str] | None = None


def chunk_corpus(
    lines: list[str],
    chunk_lines: int = 2,
    overlap_lines: int = 0,
    id_prefix: str = "chunk",
) -> list[DocumentChunk]:
    """Split verse-lines into chunks of ``chunk_lines`` lines.

    Consecutive chunks share exactly ``overlap_lines`` lines; the final
    chunk may be shorter. Chunk ids encode the line span.
    """
    if not lines:
        raise EmptyCorpusError("no lines to chunk")
    if chunk_lines < 1:
        raise ValueError("chunk_lines must be >= 1")
    if not 0 <= overlap_lines < chunk_lines:
        raise ValueError("overlap_lines must satisfy 0 <= overlap < chunk_lines")

    step = chunk_lines - overlap_lines
    chunks: list[DocumentChunk] = []
    start = 0
    while True:
        end = min(start + chunk_lines, len(lines))
        chunks.append(
            DocumentChunk(
                id=f"{id_prefix}-{start:05d}-{end:05d}",
                source_ref=(start, end),
                raw_text="\n".join(lines[start:end]),
            )
        )
        if end == len(lines):
            break
        start += step
    return chunks
