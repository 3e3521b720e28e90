"""Edge weight calculation from entailment logits.

The weight of edge p -> q is the softmax probability of the entailment
class given the rendered sentences of p and q.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .backend import Backend, BackendError
from .lexicon import Lexicon
from .predicates import TypedPredicate, TypePair, format_predicate
from .surface import UnsupportedShape, render_sentence

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class WeightedEdge:
    src: TypedPredicate
    dst: TypedPredicate
    weight: float

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"edge weight outside [0, 1]: {self.weight}")
        if self.src == self.dst:
            raise ValueError("self-loop edge")


def softmax3(logits):
    """Stable 3-way softmax; returns probabilities summing to 1."""
    x = np.asarray(logits, dtype=np.float64)
    x = x - np.max(x)
    e = np.exp(x)
    return e / np.sum(e)


def entailment_weight(logits) -> float:
    """The entailment-class probability from an (E, N, C) logit triple."""
    return float(softmax3(logits)[0])


def edge_weight(p: TypedPredicate, q: TypedPredicate, tp: TypePair,
                backend: Backend, lexicon: Lexicon | None = None) -> float:
    premise = render_sentence(p, tp, lexicon).text
    hypothesis = render_sentence(q, tp, lexicon).text
    resp = backend.score(premise, hypothesis)
    return entailment_weight(resp.logits)


def score_edges(edges, tp: TypePair, backend: Backend,
                lexicon: Lexicon | None = None):
    """Weight each (p, q) pair; order preserved.

    Pairs that fail (unrenderable shape or backend error) are skipped and
    reported: returns (weighted_edges, failures) where failures is a list
    of (p, q, reason) tuples.
    """
    weighted = []
    failures = []
    for p, q in edges:
        try:
            w = edge_weight(p, q, tp, backend, lexicon)
            weighted.append(WeightedEdge(p, q, w))
        except (UnsupportedShape, BackendError) as exc:
            log.warning("edge %s -> %s failed: %s",
                        format_predicate(p), format_predicate(q), exc)
            failures.append((p, q, str(exc)))
    return weighted, failures
