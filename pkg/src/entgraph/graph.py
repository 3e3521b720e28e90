"""Entailment graph data model: construction, serialization, neighbor
queries, soft-transitivity diagnostics and the RTE augmentation bridge.

The on-disk format (".egg") is plain UTF-8 lines with sorted sections so
that serialization is byte-deterministic:

    #EGG<TAB>1
    T<TAB>t1<TAB>t2
    P<TAB><canonical predicate>          (one per node)
    E<TAB><src><TAB><dst><TAB><weight>   (one per edge)

Weights are written as the shortest round-tripping decimal of the 64-bit
float, so deserialize(serialize(G)) reproduces the graph bit-exactly.
"""

from __future__ import annotations

import logging

from .lexicon import Lexicon
from .predicates import (ArgType, TypedPredicate, TypePair, format_predicate,
                         parse_predicate, type_pair_of)
from .surface import UnsupportedShape, normalize_sentence, render_sentence

log = logging.getLogger(__name__)


class EndpointMissing(ValueError):
    pass


class FormatError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EntailmentGraph:
    """One typed graph: predicate set plus sparse weighted adjacency."""

    def __init__(self, type_pair: TypePair, predicates, edges):
        self.type_pair = type_pair
        self.predicates = frozenset(predicates)
        self.edges = dict(edges)   # (src, dst) -> weight
        for (src, dst), w in self.edges.items():
            if src not in self.predicates or dst not in self.predicates:
                raise EndpointMissing(f"edge endpoint not among predicates: "
                                      f"{format_predicate(src)} -> {format_predicate(dst)}")
            if src == dst:
                raise ValueError("self-loop edge")
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"edge weight outside [0, 1]: {w}")
        self._out = {}
        self._in = {}
        for (src, dst), w in self.edges.items():
            self._out.setdefault(src, []).append((dst, w))
            self._in.setdefault(dst, []).append((src, w))
        self._sentence_index = None

    @classmethod
    def build(cls, type_pair, predicates, weighted_edges) -> "EntailmentGraph":
        """Build from weigher output; duplicate pairs keep the last weight."""
        edges = {}
        for e in weighted_edges:
            key = (e.src, e.dst)
            if key in edges:
                log.warning("duplicate edge %s -> %s; keeping last weight",
                            format_predicate(e.src), format_predicate(e.dst))
            edges[key] = e.weight
        return cls(type_pair, predicates, edges)

    def __eq__(self, other):
        return (isinstance(other, EntailmentGraph)
                and self.type_pair == other.type_pair
                and self.predicates == other.predicates
                and self.edges == other.edges)

    def __len__(self):
        return len(self.predicates)

    # -- queries ---------------------------------------------------------

    def _sentences(self, lexicon=None):
        if self._sentence_index is None:
            index = {}
            for p in self.predicates:
                try:
                    text = normalize_sentence(
                        render_sentence(p, self.type_pair, lexicon).text)
                except UnsupportedShape:
                    continue
                index.setdefault(text, []).append(p)
            self._sentence_index = index
        return self._sentence_index

    def _relaxed_matches(self, p, lexicon=None):
        if p in self.predicates:
            yield p
            return
        try:
            text = normalize_sentence(
                render_sentence(p, self.type_pair, lexicon).text)
        except UnsupportedShape:
            return
        yield from self._sentences(lexicon).get(text, [])

    def lookup(self, p, q, relaxed=False, lexicon=None):
        """Edge weight of p -> q, or None.

        With relaxed=True a missing exact pair falls back to any stored
        pair whose rendered sentences coincide with p's and q's.
        """
        w = self.edges.get((p, q))
        if w is not None or not relaxed:
            return w
        for p2 in self._relaxed_matches(p, lexicon):
            for q2 in self._relaxed_matches(q, lexicon):
                w = self.edges.get((p2, q2))
                if w is not None:
                    return w
        return None

    def neighbors(self, p, direction="out", k=None):
        """Top-k neighbors by weight: direction 'out' ranks hypotheses of
        p, 'in' ranks premises.  Descending weight, canonical tie-break."""
        if direction not in ("out", "in"):
            raise ValueError("direction must be 'out' or 'in'")
        if k is not None and k < 1:
            raise ValueError("k must be >= 1")
        table = self._out if direction == "out" else self._in
        ranked = sorted(table.get(p, ()),
                        key=lambda it: (-it[1], format_predicate(it[0])))
        return ranked[:k] if k is not None else ranked

    def soft_transitivity_violations(self, epsilon):
        """Stored-edge 2-paths with both weights above epsilon whose
        product exceeds the direct weight (absent direct edge counts 0)."""
        if not 0.0 < epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        out = []
        for (a, b), w_ab in self.edges.items():
            if w_ab <= epsilon:
                continue
            for c, w_bc in self._out.get(b, ()):
                if w_bc <= epsilon or c == a:
                    continue
                w_ac = self.edges.get((a, c), 0.0)
                if w_ab * w_bc > w_ac:
                    out.append((a, b, c))
        return out

    # -- serialization ---------------------------------------------------

    def serialize(self) -> str:
        lines = ["#EGG\t1",
                 f"T\t{self.type_pair.t1}\t{self.type_pair.t2}"]
        for p in sorted(self.predicates, key=format_predicate):
            lines.append(f"P\t{format_predicate(p)}")
        for (src, dst) in sorted(self.edges,
                                 key=lambda e: (format_predicate(e[0]),
                                                format_predicate(e[1]))):
            w = self.edges[(src, dst)]
            lines.append(f"E\t{format_predicate(src)}\t{format_predicate(dst)}"
                         f"\t{repr(float(w))}")
        return "\n".join(lines) + "\n"

    @classmethod
    def deserialize(cls, text: str) -> "EntailmentGraph":
        lines = text.splitlines()
        if not lines or lines[0] != "#EGG\t1":
            raise FormatError("missing #EGG header", line=1)
        type_pair = None
        predicates = set()
        edges = {}
        for no, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split("\t")
            try:
                if parts[0] == "T" and len(parts) == 3:
                    type_pair = TypePair(ArgType(parts[1]), ArgType(parts[2]))
                elif parts[0] == "P" and len(parts) == 2:
                    predicates.add(parse_predicate(parts[1]))
                elif parts[0] == "E" and len(parts) == 4:
                    w = float(parts[3])
                    if not 0.0 <= w <= 1.0:
                        raise FormatError(f"weight outside [0, 1]: {parts[3]}",
                                          line=no)
                    edges[(parse_predicate(parts[1]),
                           parse_predicate(parts[2]))] = w
                else:
                    raise FormatError(f"unrecognized record: {line!r}", line=no)
            except FormatError:
                raise
            except ValueError as exc:
                raise FormatError(str(exc), line=no) from exc
        if type_pair is None:
            raise FormatError("missing T record")
        try:
            return cls(type_pair, predicates, edges)
        except (EndpointMissing, ValueError) as exc:
            raise FormatError(str(exc)) from exc

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.serialize())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.deserialize(fh.read())


class GraphCollection:
    """At most one graph per (unordered) type pair."""

    def __init__(self, graphs=()):
        self._graphs = {}
        for g in graphs:
            self.add(g)

    @staticmethod
    def _key(tp: TypePair):
        return tuple(sorted((tp.t1.name, tp.t2.name)))

    def add(self, graph: EntailmentGraph):
        key = self._key(graph.type_pair)
        if key in self._graphs:
            raise ValueError(f"collection already holds a graph for {key}")
        self._graphs[key] = graph

    def get(self, tp: TypePair):
        return self._graphs.get(self._key(tp))

    def graph_for(self, p: TypedPredicate):
        return self.get(type_pair_of(p))

    def __iter__(self):
        return iter(self._graphs.values())

    def __len__(self):
        return len(self._graphs)


def augment_rte_input(premise_sentence: str, hypothesis_sentence: str,
                      premise_predicates, hypothesis_predicates,
                      collection: GraphCollection, k_nbr: int,
                      lexicon: Lexicon | None = None):
    """Expand an RTE input pair with graph neighbors.

    Each matched premise predicate contributes up to k_nbr heaviest
    out-neighbor replacement sentences; hypothesis predicates contribute
    in-neighbors.  Replacements are appended with "; " separators;
    unmatched predicates contribute nothing.
    """
    if k_nbr < 1:
        raise ValueError("k_nbr must be >= 1")

    def expansions(preds, direction):
        parts = []
        for p in preds:
            graph = collection.graph_for(p)
            if graph is None:
                continue
            for nbr, _w in graph.neighbors(p, direction=direction, k=k_nbr):
                try:
                    parts.append(render_sentence(nbr, graph.type_pair,
                                                 lexicon).text)
                except UnsupportedShape:
                    continue
        return parts

    pm_parts = [premise_sentence] + expansions(premise_predicates, "out")
    h_parts = [hypothesis_sentence] + expansions(hypothesis_predicates, "in")
    return "; ".join(pm_parts), "; ".join(h_parts)
