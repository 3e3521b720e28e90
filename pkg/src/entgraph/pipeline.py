"""End-to-end graph construction: the staged pipeline as one function,
plus the per-stage helpers the command-line driver composes.

Every stage is deterministic given (config, backend); chaining the stage
helpers through files reproduces ``end_to_end`` bit-for-bit.
"""

from __future__ import annotations

import logging

from .backend import Backend
from .config import PipelineConfig
from .generator import ExpansionResult, GenerationConfig, expand
from .graph import EntailmentGraph
from .lexicon import Lexicon, default_lexicon
from .predicates import TypePair, format_predicate
from .selector import (PredicateSphere, SphereHead, select_top_edges,
                       spheres_of)
from .surface import UnsupportedShape, render_sentence
from .weigher import score_edges

log = logging.getLogger(__name__)


def generation_config(cfg: PipelineConfig) -> GenerationConfig:
    return GenerationConfig(max_predicates=cfg.k_p, beam=cfg.k_beam,
                            num_return=cfg.k_sent,
                            max_fill_tokens=cfg.max_fill_tokens)


def type_pair_for(seeds) -> TypePair:
    first = min(seeds, key=format_predicate)
    return TypePair(first.type1, first.type2)


def embed_predicates(preds, tp: TypePair, backend: Backend,
                     lexicon: Lexicon | None = None,
                     max_workers: int = 1) -> dict:
    """Canonical predicate string -> embedding of the rendered sentence.
    Predicates without a renderable sentence are skipped with a warning."""
    lex = lexicon or default_lexicon()
    keyed = []
    for p in sorted(preds, key=format_predicate):
        try:
            keyed.append((p, render_sentence(p, tp, lex).text))
        except UnsupportedShape as exc:
            log.warning("skipping unrenderable predicate: %s", exc)
    responses = backend.embed_many([s for _, s in keyed], max_workers)
    return {format_predicate(p): r.vector for (p, _), r in zip(keyed, responses)}


def spheres_for(embeddings: dict, head: SphereHead) -> dict:
    """Canonical string -> PredicateSphere, via one vectorized pass."""
    import numpy as np
    keys = sorted(embeddings)
    if not keys:
        return {}
    centers, radii = spheres_of(np.stack([embeddings[k] for k in keys]), head)
    return {k: PredicateSphere(centers[i], float(radii[i]))
            for i, k in enumerate(keys)}


def default_head(cfg: PipelineConfig) -> SphereHead:
    return SphereHead.initialize(d_v=cfg.d_v, d_c=cfg.d_c, hidden=cfg.hidden,
                                 f_plus=cfg.f_plus, seed=cfg.seed)


def end_to_end(seeds, cfg: PipelineConfig, backend: Backend,
               head: SphereHead | None = None,
               lexicon: Lexicon | None = None):
    """seeds -> generate -> embed -> select -> weigh -> graph.

    Returns (graph, expansion_result, failures).
    """
    lex = lexicon or default_lexicon()
    tp = type_pair_for(seeds)
    result: ExpansionResult = expand(seeds, generation_config(cfg), backend,
                                     tp=tp, lexicon=lex)
    preds = result.predicates
    # downstream stages re-derive the pair from the predicate list alone,
    # exactly as the file-driven stage commands do, so chained runs match
    tp = type_pair_for(preds)
    embeddings = embed_predicates(preds, tp, backend, lex)
    if head is None:
        head = default_head(cfg)
    spheres = spheres_for(embeddings, head)

    from .predicates import parse_predicate
    sphere_by_pred = {parse_predicate(k): s for k, s in spheres.items()}
    edges = select_top_edges(sphere_by_pred, cfg.k_edge)
    weighted, failures = score_edges(edges, tp, backend, lex)
    graph = EntailmentGraph.build(tp, set(sphere_by_pred), weighted)
    return graph, result, failures
