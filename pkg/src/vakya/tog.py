"""Think-on-Graph engine: iterative KG exploration with LLM pruning.

One run is a fixed prompt chain. Extract the question's entities, then per
depth: fetch incident relations, have the LLM prune them to the width
limit, fetch unvisited neighbor entities over the kept relations, prune
those likewise, and ask whether the accumulated path triples suffice to
answer. On a yes (or when the depth limit exhausts) the final Answer
prompt runs over the collected paths. With the depth limit at 1 the chain
costs exactly 5 LLM calls.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .kg import KnowledgeGraph, PathTriple, fetch_entities, fetch_relations
from .lemma import Lemmatizer
from .llm import ChatClient, ChatRequest, parse_binary, parse_scored_list
from .prompts import PromptRegistry
from .textproc import Script, to_canonical, transliterate


@dataclass(frozen=True)
class TogConfig:
    sample_limit: int = 15  # KG fetch cap per step
    depth_limit: int = 1
    width_limit: int = 3  # kept after each LLM prune
    rng_seed: int = 0
    model: str = "mock"
    max_tokens: int = 512


@dataclass
class TogStep:
    step: str
    template_id: str
    raw_response: str
    parsed: object
    kept: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    depth: int = 0


@dataclass
class TogTrace:
    steps: list[TogStep] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    llm_calls: int = 0
    answer: str = ""
    paths: list[PathTriple] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "llm_calls": self.llm_calls,
            "answer": self.answer,
            "flags": self.flags,
            "paths": [
                [t.src_lemma, t.relation, t.dst_lemma, t.depth] for t in self.paths
            ],
            "steps": [
                {
                    "step": s.step,
                    "template_id": s.template_id,
                    "depth": s.depth,
                    "raw_response": s.raw_response,
                    "parsed": s.parsed,
                    "kept": s.kept,
                    "flags": s.flags,
                }
                for s in self.steps
            ],
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=1)


@dataclass
class TogResult:
    answer: str
    trace: TogTrace


def _serialize_names(names: list[str]) -> str:
    return ", ".join(f"'{n}'" for n in names)


def _serialize_paths(paths: list[PathTriple], script: Script) -> str:
    parts = []
    for t in paths:
        src = transliterate(t.src_lemma, Script.CANONICAL, script)
        dst = transliterate(t.dst_lemma, Script.CANONICAL, script)
        parts.append(f"('{src}', '{t.relation}', '{dst}')")
    return ", ".join(parts)


class TogEngine:
    """Holds the shared pieces of a run (KG, LLM client, templates) and
    executes the prompt chain per question."""

    def __init__(
        self,
        kg: KnowledgeGraph,
        llm: ChatClient,
        registry: PromptRegistry,
        lemmatizer: Lemmatizer,
        cfg: TogConfig | None = None,
        script: Script | str = Script.DEVANAGARI,
    ):
        self.kg = kg
        self.llm = llm
        self.registry = registry
        self.lemmatizer = lemmatizer
        self.cfg = cfg or TogConfig()
        self.script = Script(script)

    def _call(
        self,
        trace: TogTrace,
        step: str,
        template_id: str,
        binding: dict[str, str],
        depth: int,
    ) -> str:
        messages = self.registry.render(template_id, binding, target=self.script)
        req = ChatRequest(
            model=self.cfg.model,
            messages=tuple(messages),
            max_tokens=self.cfg.max_tokens,
        )
        resp = self.llm.complete(req)
        trace.llm_calls += 1
        trace.steps.append(
            TogStep(
                step=step,
                template_id=template_id,
                raw_response=resp.text,
                parsed=None,
                depth=depth,
            )
        )
        return resp.text

    def _prune(
        self,
        trace: TogTrace,
        step: str,
        template_id: str,
        binding: dict[str, str],
        candidates: list[str],
        aliases: dict[str, tuple[str, ...]],
        depth: int,
    ) -> list[str]:
        """Run one LLM prune over ``candidates`` (graph order), keeping the
        top width-limit by score; ties break by graph order. One retry on
        parse failure, then graph-order truncation.

        ``aliases`` maps a candidate to every string the LLM may call it
        (model output is often code-mixed across scripts).
        """
        w = self.cfg.width_limit
        for attempt in range(2):
            raw = self._call(trace, step, template_id, binding, depth)
            result = parse_scored_list(raw)
            record = trace.steps[-1]
            record.parsed = result.pairs
            if result.failed:
                record.flags.append("parse_failure")
                if attempt == 0:
                    continue
                record.flags.append("fallback_graph_order")
                kept = candidates[:w]
                record.kept = kept
                return kept
            scores = {item: score for item, score in result.pairs}

            def best_score(cand: str) -> float | None:
                matched = [scores[a] for a in aliases[cand] if a in scores]
                return max(matched) if matched else None

            ranked = sorted(
                range(len(candidates)),
                key=lambda i: (-(best_score(candidates[i]) or -1.0), i),
            )
            kept = [
                candidates[i] for i in ranked[:w] if best_score(candidates[i]) is not None
            ]
            if not kept:
                record.flags.append("no_overlap_fallback")
                kept = candidates[:w]
            record.kept = kept
            return kept
        raise AssertionError("unreachable")

    def answer(self, question: str, choices: str = "", topic: str = "") -> TogResult:
        """Run the full chain for one question (strings already in the
        prompt script)."""
        cfg = self.cfg
        rng = random.Random(cfg.rng_seed)
        trace = TogTrace()
        base = {"QUESTION": question, "CHOICES": choices}

        raw = self._call(trace, "extract_entities", "tog-extract-entities", base, 0)
        extraction = parse_scored_list(raw)
        trace.steps[-1].parsed = extraction.pairs
        if extraction.failed:
            trace.steps[-1].flags.append("parse_failure")

        entities: list[str] = []  # resolved node ids
        guess_scripts = [self.script]
        if self.script != Script.IAST:
            guess_scripts.append(Script.IAST)  # outputs are often code-mixed
        for item, _score in extraction.pairs:
            resolved = False
            for guess in guess_scripts:
                for lemma in self.lemmatizer.lemmatize(to_canonical(item, guess)):
                    for node_id in self.kg.resolve_lemma(lemma):
                        if node_id not in entities:
                            entities.append(node_id)
                        resolved = True
                if resolved:
                    break
            if not resolved:
                trace.flags.append(f"unresolved_entity:{item}")
        trace.steps[-1].kept = list(entities)

        visited = set(entities)
        paths: list[PathTriple] = []
        answered = False
        depth = 0
        while depth < cfg.depth_limit:
            relations = fetch_relations(self.kg, entities, cfg.sample_limit, rng)
            if not relations:
                trace.flags.append("exploration_exhausted")
                break
            relations = self._prune(
                trace,
                "relation_prune",
                "tog-relation-prune",
                {**base, "RELATIONS": _serialize_names(relations)},
                relations,
                {r: (r,) for r in relations},
                depth,
            )
            new_entities, new_triples = fetch_entities(
                self.kg, entities, relations, cfg.sample_limit, rng, visited, depth
            )
            display = {
                node_id: transliterate(
                    self.kg.nodes[node_id].lemma, Script.CANONICAL, self.script
                )
                for node_id in new_entities
            }
            aliases = {
                node_id: (
                    display[node_id],
                    transliterate(self.kg.nodes[node_id].lemma, Script.CANONICAL, Script.IAST),
                    self.kg.nodes[node_id].lemma,
                )
                for node_id in new_entities
            }
            kept_entities = self._prune(
                trace,
                "entity_prune",
                "tog-entity-prune",
                {
                    **base,
                    "RELATIONS": _serialize_names(relations),
                    "ENTITIES": _serialize_names([display[e] for e in new_entities]),
                },
                new_entities,
                aliases,
                depth,
            ) if new_entities else []
            kept_set = set(kept_entities)
            paths.extend(
                t for e, t in zip(new_entities, new_triples) if e in kept_set
            )
            entities = kept_entities
            visited.update(kept_entities)
            if not new_entities:
                # nothing new reachable: still ask Reason so the chain shape
                # (and call count) stays depth-driven
                pass

            raw = self._call(
                trace,
                "reason",
                "tog-reason",
                {**base, "PATHS": _serialize_paths(paths, self.script)},
                depth,
            )
            verdict = parse_binary(raw)
            trace.steps[-1].parsed = verdict.value
            if verdict.failed:
                trace.steps[-1].flags.append("parse_failure")
            if verdict.value == 1:
                answered = True
                break
            depth += 1

        raw = self._call(
            trace,
            "answer",
            "tog-answer",
            {**base, "TOPIC": topic, "PATHS": _serialize_paths(paths, self.script)},
            depth,
        )
        trace.answer = raw.strip()
        trace.paths = paths
        if not answered and not paths:
            trace.flags.append("answered_without_paths")
        return TogResult(answer=trace.answer, trace=trace)
