"""File-backed knowledge graph: lemma-keyed nodes, directed typed edges,
and the traversal primitives used by the graph-QA engine.

Triples file format (UTF-8, tab-separated)::

    # comment
    !node<TAB>id<TAB>lemma[<TAB>label1,label2]
    src_id<TAB>relation<TAB>dst_id

Edges referencing undeclared nodes auto-create them with ``lemma == id``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DanglingEdgeError, KgParseError
from .textproc import Script, to_canonical


@dataclass
class KgNode:
    id: str
    lemma: str
    labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class Edge:
    src: str
    relation: str
    dst: str


@dataclass
class KnowledgeGraph:
    nodes: dict[str, KgNode] = field(default_factory=dict)
    edges: list[Edge] = field(default_factory=list)
    out_edges: dict[str, list[int]] = field(default_factory=dict)
    in_edges: dict[str, list[int]] = field(default_factory=dict)
    by_lemma: dict[str, list[str]] = field(default_factory=dict)

    def add_node(self, node_id: str, lemma: str | None = None, labels: tuple[str, ...] = ()) -> None:
        if node_id in self.nodes:
            return
        node = KgNode(id=node_id, lemma=lemma or node_id, labels=labels)
        self.nodes[node_id] = node
        self.by_lemma.setdefault(node.lemma, []).append(node_id)

    def add_edge(self, src: str, relation: str, dst: str) -> None:
        if not src or not dst:
            raise DanglingEdgeError(f"edge {src!r} -[{relation}]-> {dst!r} has an empty endpoint")
        if not relation:
            raise DanglingEdgeError(f"edge {src!r} -> {dst!r} has an empty relation")
        self.add_node(src)
        self.add_node(dst)
        idx = len(self.edges)
        self.edges.append(Edge(src, relation, dst))
        self.out_edges.setdefault(src, []).append(idx)
        self.in_edges.setdefault(dst, []).append(idx)

    def resolve_lemma(self, lemma: str) -> list[str]:
        """Node ids whose lemma matches (empty if absent)."""
        return list(self.by_lemma.get(lemma, ()))

    def incident(self, node_id: str) -> list[Edge]:
        """Edges touching the node, in insertion order, both directions."""
        idxs = sorted(set(self.out_edges.get(node_id, [])) | set(self.in_edges.get(node_id, [])))
        return [self.edges[i] for i in idxs]

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def load_kg(path: str | Path, lemma_script: Script | str = Script.IAST) -> KnowledgeGraph:
    """Load a triples file. Node lemmas (and auto-created ids used as
    lemmas) are converted from ``lemma_script`` to the canonical script so
    lemmatizer output can be matched against them directly."""
    kg = KnowledgeGraph()
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if parts[0] == "!node":
                if len(parts) not in (3, 4):
                    raise KgParseError(line_no, "!node needs id, lemma[, labels]")
                labels = tuple(l for l in parts[3].split(",") if l) if len(parts) == 4 else ()
                lemma = parts[2].strip() or parts[1].strip()
                kg.add_node(parts[1].strip(), to_canonical(lemma, lemma_script), labels)
                continue
            if len(parts) != 3:
                raise KgParseError(line_no, f"expected 3 tab-separated fields, got {len(parts)}")
            src, relation, dst = (p.strip() for p in parts)
            for endpoint in (src, dst):
                # undeclared endpoints become nodes with lemma == id
                if endpoint and endpoint not in kg.nodes:
                    kg.add_node(endpoint, to_canonical(endpoint, lemma_script))
            try:
                kg.add_edge(src, relation, dst)
            except DanglingEdgeError as exc:
                raise KgParseError(line_no, str(exc)) from exc
    return kg


def fetch_relations(kg: KnowledgeGraph, entities: list[str], n: int, rng: random.Random) -> list[str]:
    """Distinct relation names incident (either direction) to any entity
    node id, in edge insertion order; uniformly sampled down to ``n``."""
    seen: list[str] = []
    for node_id in entities:
        for edge in kg.incident(node_id):
            if edge.relation not in seen:
                seen.append(edge.relation)
    if len(seen) > n:
        seen = rng.sample(seen, n)
    return seen


@dataclass(frozen=True)
class PathTriple:
    src_lemma: str
    relation: str
    dst_lemma: str
    depth: int

    def as_tuple_text(self) -> str:
        return f"('{self.src_lemma}', '{self.relation}', '{self.dst_lemma}')"


def fetch_entities(
    kg: KnowledgeGraph,
    entities: list[str],
    relations: list[str],
    n: int,
    rng: random.Random,
    visited: set[str],
    depth: int,
) -> tuple[list[str], list[PathTriple]]:
    """Unvisited neighbors reached from ``entities`` via the listed
    relations (both directions), with one path triple per reach. More than
    ``n`` candidates are down-sampled with the run's seeded RNG."""
    wanted = set(relations)
    reached: list[tuple[str, PathTriple]] = []
    claimed: set[str] = set()
    for node_id in entities:
        for edge in kg.incident(node_id):
            if edge.relation not in wanted:
                continue
            neighbor = edge.dst if edge.src == node_id else edge.src
            if neighbor in visited or neighbor in claimed:
                continue
            claimed.add(neighbor)
            triple = PathTriple(
                src_lemma=kg.nodes[edge.src].lemma,
                relation=edge.relation,
                dst_lemma=kg.nodes[edge.dst].lemma,
                depth=depth,
            )
            reached.append((neighbor, triple))
    if len(reached) > n:
        reached = rng.sample(reached, n)
    new_entities = [node_id for node_id, _ in reached]
    triples = [t for _, t in reached]
    return new_entities, triples
