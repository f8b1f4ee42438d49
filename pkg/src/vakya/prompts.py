"""Registry of multilingual prompt templates with placeholder binding.

Template files carry a front-matter header (id, task, language, script,
placeholder list) followed by role-delimited sections::

    id: qa-closed-san
    task: QA_closed
    language: san
    script: canonical
    placeholders: TOPIC, QUESTION, CHOICES
    ---human---
    <text with {PLACEHOLDER} slots>

Sanskrit templates are stored in the canonical romanization and are
transliterated to Devanagari or IAST at render time. Spans wrapped in
``⟦…⟧`` (code-mixed technical terms, tag names) are emitted verbatim,
never transliterated; placeholders are likewise protected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import (
    EmptyTagsetError,
    MissingPlaceholderError,
    UnknownTemplateError,
)
from .textproc import Script, transliterate

PLACEHOLDER_RE = re.compile(r"\{([A-Z][A-Z ]*)\}")
_LITERAL_RE = re.compile(r"⟦(.*?)⟧", re.DOTALL)
_SPLIT_RE = re.compile(r"(⟦.*?⟧|\{[A-Z][A-Z ]*\})", re.DOTALL)

ROLES = ("system", "human")


@dataclass(frozen=True)
class PromptTemplate:
    id: str
    task: str
    language: str
    script: str  # script of the stored text
    messages: tuple[tuple[str, str], ...]
    placeholders: frozenset[str]

    def render_text(self, text: str, binding: dict[str, str] | None, target: Script | str) -> str:
        """Substitute placeholders and transliterate the literal text.

        ``binding=None`` keeps placeholder tokens verbatim (used for
        template inspection and round-trip checks).
        """
        needs_translit = (
            self.script == Script.CANONICAL.value
            and Script(target) != Script.CANONICAL
        )
        out: list[str] = []
        for part in _SPLIT_RE.split(text):
            if not part:
                continue
            literal = _LITERAL_RE.fullmatch(part)
            if literal:
                out.append(literal.group(1))
                continue
            ph = PLACEHOLDER_RE.fullmatch(part)
            if ph:
                name = ph.group(1)
                if binding is None:
                    out.append(part)
                elif name in binding:
                    out.append(binding[name])
                else:
                    raise MissingPlaceholderError(name)
                continue
            out.append(
                transliterate(part, Script.CANONICAL, target) if needs_translit else part
            )
        return "".join(out)

    def render(
        self, binding: dict[str, str], target: Script | str | None = None
    ) -> list[tuple[str, str]]:
        """Render all messages. For canonically-stored (Sanskrit) templates
        ``target`` picks the output script, defaulting to Devanagari; other
        templates are emitted as stored."""
        if self.script == Script.CANONICAL.value:
            tgt = Script(target) if target is not None else Script.DEVANAGARI
        else:
            tgt = Script.CANONICAL
        return [(role, self.render_text(text, binding, tgt)) for role, text in self.messages]


def _parse_template(name: str, content: str) -> PromptTemplate:
    header: dict[str, str] = {}
    lines = content.split("\n")
    i = 0
    while i < len(lines) and not lines[i].startswith("---"):
        line = lines[i].strip()
        i += 1
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(":")
        header[key.strip()] = value.strip()
    for required in ("id", "task", "language", "script"):
        if required not in header:
            raise ValueError(f"template {name}: missing header field {required!r}")

    messages: list[tuple[str, str]] = []
    role: str | None = None
    buf: list[str] = []

    def _close() -> None:
        if role is not None:
            messages.append((role, "\n".join(buf).strip("\n")))

    while i < len(lines):
        line = lines[i]
        m = re.fullmatch(r"---(\w+)---", line.strip())
        if m:
            _close()
            role = m.group(1)
            if role not in ROLES:
                raise ValueError(f"template {name}: unknown role {role!r}")
            buf = []
        else:
            buf.append(line)
        i += 1
    _close()
    if not messages:
        raise ValueError(f"template {name}: no message sections")

    declared = frozenset(
        p.strip() for p in header.get("placeholders", "").split(",") if p.strip()
    )
    found: set[str] = set()
    for _, text in messages:
        stripped = _LITERAL_RE.sub("", text)
        found.update(PLACEHOLDER_RE.findall(stripped))
    if found != declared:
        raise ValueError(
            f"template {name}: declared placeholders {sorted(declared)} != found {sorted(found)}"
        )
    return PromptTemplate(
        id=header["id"],
        task=header["task"],
        language=header["language"],
        script=header["script"],
        messages=tuple(messages),
        placeholders=declared,
    )


class PromptRegistry:
    """Immutable-after-load collection of templates, keyed by id."""

    def __init__(self, templates: dict[str, PromptTemplate]):
        self._templates = dict(templates)

    @classmethod
    def load(cls, directory: str | Path | None = None) -> "PromptRegistry":
        """Load every template named in the directory's manifest.json.

        With no argument, loads the registry shipped with the package.
        """
        if directory is None:
            root = resources.files("vakya").joinpath("templates")
        else:
            root = Path(directory)
        manifest = json.loads(root.joinpath("manifest.json").read_text("utf-8"))
        templates: dict[str, PromptTemplate] = {}
        for filename in manifest["templates"]:
            tpl = _parse_template(filename, root.joinpath(filename).read_text("utf-8"))
            if tpl.id in templates:
                raise ValueError(f"duplicate template id {tpl.id!r}")
            templates[tpl.id] = tpl
        return cls(templates)

    def get(self, template_id: str) -> PromptTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise UnknownTemplateError(template_id) from None

    def ids(self) -> list[str]:
        return sorted(self._templates)

    def render(
        self,
        template_id: str,
        binding: dict[str, str],
        target: Script | str | None = None,
    ) -> list[tuple[str, str]]:
        return self.get(template_id).render(binding, target)


def entity_type_list(tagset: list[str]) -> str:
    """Comma-separated entity type names in dataset order, for the
    {ENTITY TYPES} slot."""
    if not tagset:
        raise EmptyTagsetError("tagset is empty")
    return ", ".join(tagset)


# Entity types of the bundled language defaults, in dataset order.
DEFAULT_TAGSETS: dict[str, list[str]] = {
    "lat": ["PER", "LOC", "GRP"],
    "grc": ["NORP", "ORG", "GOD", "LANGUAGE", "LOC", "PERSON"],
}


def default_tagset(language: str) -> list[str]:
    try:
        return list(DEFAULT_TAGSETS[language])
    except KeyError:
        raise EmptyTagsetError(
            f"no bundled tagset for {language!r}; supply one from dataset metadata"
        ) from None
