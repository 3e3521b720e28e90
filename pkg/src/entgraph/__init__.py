"""Typed entailment graph construction toolkit."""

from .predicates import (ArgType, MalformedPredicate, RelSlot, TypedPredicate,
                         TypePair, format_predicate, parse_predicate,
                         type_pair_of)
from .surface import (TemplateSentence, UnsupportedShape, render_sentence,
                      resolve_sentence)
from .backend import (Backend, BackendError, BackendUnreachable, HTTPBackend,
                      MockBackend, SchemaViolation, make_backend)
from .generator import GenerationConfig, ExpansionResult, expand
from .selector import (PredicateSphere, SphereHead, overlap_prob,
                       selector_score, select_top_edges, train_head)
from .weigher import WeightedEdge, entailment_weight, score_edges
from .graph import EntailmentGraph, GraphCollection, augment_rte_input
from .pipeline import end_to_end

__version__ = "0.1.0"
