"""Predicate expansion: prompt construction, output resolution and the
staged generation loop with the two-source parity filter.

Starting from seed predicates, each stage renders the frontier as
sentences, asks the backend to complete entailment prompts in both
argument orders, resolves the completions back into predicates, and
promotes a predicate once it has been produced for a second distinct
prompt query.  The loop stops at a fixpoint or once the accumulated set
exceeds the size cap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .backend import Backend, BackendUnreachable, FILL_MARKER, GenRequest
from .lexicon import Lexicon, default_lexicon
from .predicates import TypedPredicate, TypePair, format_predicate, parse_predicate
from .surface import render_sentence, resolve_sentence


@dataclass(frozen=True)
class GenerationConfig:
    max_predicates: int = 5000      # size cap on the accumulated set
    beam: int = 50
    num_return: int = 50
    max_fill_tokens: int = 5

    def __post_init__(self):
        if min(self.max_predicates, self.beam, self.num_return,
               self.max_fill_tokens) < 1:
            raise ValueError("all generation parameters must be positive")
        if self.num_return > self.beam:
            raise ValueError("num_return must not exceed beam")


@dataclass
class ExpansionResult:
    predicates: set[TypedPredicate]
    stages: int
    complete: bool = True            # False if a backend failure cut the run short
    emission_counts: dict = field(default_factory=dict)  # predicate -> distinct queries


def build_prompts(p: TypedPredicate, tp: TypePair,
                  lexicon: Lexicon | None = None) -> tuple[str, str]:
    """The two entailment prompts for p, one per argument order."""
    s = render_sentence(p, tp, lexicon).text
    a = f"{tp.t1.title()} A"
    b = f"{tp.t2.title()} B"
    prompt_ab = f"{s}, which entails that {a} {FILL_MARKER} {b}."
    prompt_ba = f"{s}, which entails that {b} {FILL_MARKER} {a}."
    return prompt_ab, prompt_ba


def fill_frame(fill: str, orientation: str, tp: TypePair) -> str:
    """Wrap a generated fill in the argument frame for its orientation."""
    a = f"{tp.t1.title()} A"
    b = f"{tp.t2.title()} B"
    if orientation == "AB":
        return f"{a} {fill} {b}."
    if orientation == "BA":
        return f"{b} {fill} {a}."
    raise ValueError(f"orientation must be 'AB' or 'BA', got {orientation!r}")


def resolve_outputs(fills, orientation: str, tp: TypePair,
                    lexicon: Lexicon | None = None) -> set[TypedPredicate]:
    """Resolve fills into predicates; unresolvable fills are dropped and
    duplicates collapse."""
    out = set()
    for fill in fills:
        p = resolve_sentence(fill_frame(fill, orientation, tp), tp, lexicon)
        if p is not None:
            out.add(p)
    return out


def _canonical(preds) -> list[TypedPredicate]:
    return sorted(preds, key=format_predicate)


def expand(seeds, cfg: GenerationConfig, backend: Backend,
           tp: TypePair | None = None,
           lexicon: Lexicon | None = None) -> ExpansionResult:
    """Run the staged generation loop.

    All seeds must share one type pair; by default the pair is taken from
    the first seed's own type order (which fixes the letter assignment).
    Deterministic given a deterministic backend: the frontier is processed
    in canonical predicate-string order.
    """
    seeds = set(seeds)
    if not seeds:
        raise ValueError("need at least one seed predicate")
    first = _canonical(seeds)[0]
    if tp is None:
        tp = TypePair(first.type1, first.type2)
    for p in seeds:
        if {p.type1, p.type2} - tp.types():
            raise ValueError(f"seed {format_predicate(p)} outside type pair {tp}")

    accumulated = set(seeds)
    frontier = _canonical(seeds)
    once_seen: set[TypedPredicate] = set()   # parity set, persists across stages
    counts: dict[TypedPredicate, int] = {}
    stage = 0

    while len(accumulated) <= cfg.max_predicates:
        promoted: set[TypedPredicate] = set()
        try:
            for p in frontier:
                prompt_ab, prompt_ba = build_prompts(p, tp, lexicon)
                produced: set[TypedPredicate] = set()
                for prompt, orientation in ((prompt_ab, "AB"), (prompt_ba, "BA")):
                    resp = backend.generate(GenRequest(
                        prompt, cfg.beam, cfg.num_return, cfg.max_fill_tokens))
                    produced |= resolve_outputs(resp.sequences, orientation,
                                                tp, lexicon)
                for q in produced:
                    counts[q] = counts.get(q, 0) + 1
                produced -= accumulated
                promoted |= produced & once_seen
                once_seen ^= produced
        except BackendUnreachable:
            return ExpansionResult(accumulated, stage, complete=False,
                                   emission_counts=counts)
        promoted -= accumulated
        if not promoted:
            return ExpansionResult(accumulated, stage + 1,
                                   emission_counts=counts)
        accumulated |= promoted
        frontier = _canonical(promoted)
        stage += 1

    return ExpansionResult(accumulated, stage, emission_counts=counts)


# ---------------------------------------------------------------------------
# seed / predicate list files: one canonical string per line, '#' comments
# ---------------------------------------------------------------------------

def read_predicate_file(path) -> list[TypedPredicate]:
    preds = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                preds.append(parse_predicate(line))
    return preds


def write_predicate_file(path, preds) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in _canonical(set(preds)):
            fh.write(format_predicate(p) + "\n")
