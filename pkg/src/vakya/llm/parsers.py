"""Tolerant parsers for structured LLM output.

All parsers are total: malformed input never raises, it comes back as an
empty result with ``failed`` set so runs keep going and reports can count
format violations.
"""

from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field

# LaTeX-style and typographic quotes the models echo back from prompts.
_QUOTE_TRANS = str.maketrans({"`": "'", "‘": "'", "’": "'",
                              "“": '"', "”": '"'})


@dataclass
class TaggedDictResult:
    tags: dict[str, list[str]] = field(default_factory=dict)
    failed: bool = False


@dataclass
class ScoredListResult:
    pairs: list[tuple[str, float]] = field(default_factory=list)
    failed: bool = False


@dataclass
class BinaryResult:
    value: int
    failed: bool = False


def _first_balanced_braces(raw: str) -> str | None:
    start = raw.find("{")
    if start < 0:
        return None
    depth = 0
    for i in range(start, len(raw)):
        if raw[i] == "{":
            depth += 1
        elif raw[i] == "}":
            depth -= 1
            if depth == 0:
                return raw[start:i + 1]
    return None


_PAIR_RE = re.compile(r"['\"]([^'\"]+)['\"]\s*:\s*\[([^\]]*)\]")
_QUOTED_RE = re.compile(r"['\"]([^'\"]+)['\"]")


def parse_tagged_dict(raw: str) -> TaggedDictResult:
    """Extract ``{'B-TYPE': ['word', ...], ...}`` from arbitrary prose.

    The first balanced brace block is parsed; single/double quotes and
    trailing commas are tolerated. Keys of 'O' are dropped (outside tokens
    are implicit). No parsable block means an empty, flagged prediction.
    """
    block = _first_balanced_braces(raw.translate(_QUOTE_TRANS))
    if block is None:
        return TaggedDictResult(failed=True)
    # models sometimes echo the doubled braces from the format example
    inner = block[1:-1].strip()
    if inner.startswith("{") and inner.endswith("}"):
        block = inner

    parsed: dict | None = None
    try:
        value = ast.literal_eval(block)
        if isinstance(value, dict):
            parsed = value
    except (ValueError, SyntaxError):
        parsed = None

    tags: dict[str, list[str]] = {}
    if parsed is not None:
        for key, val in parsed.items():
            if not isinstance(key, str):
                continue
            if isinstance(val, str):
                val = [val]
            if isinstance(val, (list, tuple)):
                words = [w for w in val if isinstance(w, str)]
                if words:
                    tags[key] = words
    else:
        for m in _PAIR_RE.finditer(block):
            words = _QUOTED_RE.findall(m.group(2))
            if words:
                tags[m.group(1)] = words
        if not tags:
            return TaggedDictResult(failed=True)

    tags.pop("O", None)
    return TaggedDictResult(tags=tags)


_SCORED_RE = re.compile(
    r"\(\s*['\"]?([^'\"(),]+?)['\"]?\s*,\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*\)"
)


def parse_scored_list(raw: str) -> ScoredListResult:
    """Extract ``('item', score)`` pairs in order of appearance.

    Scores are clamped to [0, 1]; duplicate items keep their maximum score
    at their first position. No pairs found means an empty, flagged list.
    """
    pairs: list[tuple[str, float]] = []
    position: dict[str, int] = {}
    for m in _SCORED_RE.finditer(raw.translate(_QUOTE_TRANS)):
        item = m.group(1).strip()
        if not item:
            continue
        score = min(1.0, max(0.0, float(m.group(2))))
        if item in position:
            i = position[item]
            pairs[i] = (item, max(pairs[i][1], score))
        else:
            position[item] = len(pairs)
            pairs.append((item, score))
    if not pairs:
        return ScoredListResult(failed=True)
    return ScoredListResult(pairs=pairs)


_BINARY_RE = re.compile(r"(?<![0-9])[01](?![0-9])")


def parse_binary(raw: str) -> BinaryResult:
    """First standalone '0' or '1' wins; none found means 0 (keep
    exploring) with the failure flag set."""
    m = _BINARY_RE.search(raw)
    if m is None:
        return BinaryResult(value=0, failed=True)
    return BinaryResult(value=int(m.group(0)))
