"""Bidirectional mapping between typed predicates and template sentences.

``render_sentence`` turns a predicate into a sentence such as
"Government A is elected in Time B"; ``resolve_sentence`` is the rule-based
reverse mapping, total over arbitrary strings (returning None for anything
that is not a valid predicate sentence).
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexicon import Lexicon, default_lexicon
from .predicates import ArgType, RelSlot, TypedPredicate, TypePair


class UnsupportedShape(ValueError):
    """Predicate pattern outside the renderable rule table."""


@dataclass(frozen=True)
class TemplateSentence:
    text: str
    type_pair: TypePair
    slot1_letter: str
    slot2_letter: str


def normalize_sentence(text: str) -> str:
    """Trim a trailing period and collapse whitespace for comparisons."""
    s = " ".join(text.split())
    while s and s[-1] in ".!?>":
        s = s[:-1].rstrip()
    return s


# ---------------------------------------------------------------------------
# renderer
# ---------------------------------------------------------------------------

def relation_surface(p: TypedPredicate, lexicon: Lexicon | None = None) -> list[str]:
    """The middle tokens of S(p), between the two argument phrases.

    Raises UnsupportedShape for patterns outside the rule table; the table
    is exactly the set of shapes the resolver can emit, so every rendered
    sentence round-trips (up to paraphrase collisions of copular forms).
    """
    lex = lexicon or default_lexicon()
    w1, i1 = p.slot1.words, p.slot1.index
    w2, i2 = p.slot2.words, p.slot2.index
    head = w1[0]
    if w2[0] != head:
        raise UnsupportedShape(f"slots do not share a center word: {p}")

    if head == "be":
        # (be.1, be.2) copula and (be.1, be.X...2) copular tails
        if w1 != ("be",) or i1 != 1 or i2 != 2:
            raise UnsupportedShape(f"unsupported copula shape: {p}")
        mid = ["is"] + (["not"] if p.negated else []) + list(w2[1:])
        return mid

    if i1 == 1:
        if w1 != (head,) or i2 != 2:
            raise UnsupportedShape(f"unsupported active shape: {p}")
        rest = list(w2[1:])
        if rest and lex.pos_class(rest[-1]) != "preposition":
            raise UnsupportedShape(f"active tail must end in a preposition: {p}")
        cls = lex.pos_class(head)
        if cls in ("noun", "adjective"):
            # copular nominal, e.g. "is magnet for"
            if not rest:
                raise UnsupportedShape(f"nominal shape needs a preposition tail: {p}")
            return ["is"] + (["not"] if p.negated else []) + [head] + rest
        if cls == "verb":
            if p.negated:
                return ["does", "not", head] + rest
            return [lex.third_person(head)] + rest
        raise UnsupportedShape(f"center word class {cls!r} not renderable: {p}")

    if i1 == 2:
        # passive voice; index 2 needs a trailing preposition, index 3 not
        if w1 != (head,) or lex.pos_class(head) != "verb":
            raise UnsupportedShape(f"unsupported passive shape: {p}")
        rest = list(w2[1:])
        ends_prep = bool(rest) and lex.pos_class(rest[-1]) == "preposition"
        if i2 == 2 and not ends_prep:
            raise UnsupportedShape(f"passive .2 shape needs a preposition tail: {p}")
        if i2 == 3 and ends_prep:
            raise UnsupportedShape(f"passive .3 shape must not end in a preposition: {p}")
        if i2 not in (2, 3):
            raise UnsupportedShape(f"unsupported passive index: {p}")
        return ["is"] + (["not"] if p.negated else []) + [lex.past_participle(head)] + rest

    raise UnsupportedShape(f"unsupported slot-1 index: {p}")


def render_sentence(p: TypedPredicate, tp: TypePair,
                    lexicon: Lexicon | None = None) -> TemplateSentence:
    """Render S(p): slot-1 argument first, letters from tp's letter map."""
    if tp.t1 != tp.t2:
        if {p.type1, p.type2} != tp.types():
            raise UnsupportedShape(f"predicate types {p.type1},{p.type2} "
                                   f"do not match pair {tp}")
        l1, l2 = tp.letter_of(p.type1), tp.letter_of(p.type2)
    else:
        if p.type1 != tp.t1 or p.type2 != tp.t1:
            raise UnsupportedShape(f"predicate types {p.type1},{p.type2} "
                                   f"do not match pair {tp}")
        l1, l2 = "A", "B"
    mid = relation_surface(p, lexicon)
    text = " ".join([p.type1.title(), l1, *mid, p.type2.title(), l2])
    return TemplateSentence(text, tp, l1, l2)


# ---------------------------------------------------------------------------
# resolver
# ---------------------------------------------------------------------------

def _match_arg(tokens, tp, from_start):
    """Match 'TitleCase(type) letter' at one end; returns (type, letter, rest)."""
    for t in (tp.t1, tp.t2):
        title = t.title().split()
        n = len(title)
        if from_start:
            if (len(tokens) >= n + 1 and tokens[:n] == title
                    and tokens[n] in ("A", "B")):
                return t, tokens[n], tokens[n + 1:]
        else:
            if (len(tokens) >= n + 1 and tokens[-n - 1:-1] == title
                    and tokens[-1] in ("A", "B")):
                return t, tokens[-1], tokens[:-n - 1]
    return None


def resolve_sentence(sentence: str, tp: TypePair,
                     lexicon: Lexicon | None = None) -> TypedPredicate | None:
    """Map a sentence back to a predicate, or None if it does not parse.

    Never raises on arbitrary input.  The argument appearing first in the
    sentence becomes the predicate's first type.
    """
    lex = lexicon or default_lexicon()
    tokens = normalize_sentence(sentence).split()

    first = _match_arg(tokens, tp, from_start=True)
    if first is None:
        return None
    t_first, letter_first, tokens = first
    second = _match_arg(tokens, tp, from_start=False)
    if second is None:
        return None
    t_second, letter_second, tokens = second
    if letter_first == letter_second:
        return None

    l = [t.lower() for t in tokens]
    if not l:
        return None

    # negation: contracted on the first token, or "not" after the auxiliary
    negated = False
    if l[0] == "not":
        negated = True
        l = l[1:]
    elif "n't" in l[0]:
        negated = True
        l[0] = l[0].replace("n't", "")
    elif len(l) > 1 and l[1] == "not":
        negated = True
        l = [l[0]] + l[2:]

    l = [t for t in l if t not in lex.modals]

    if len(l) > 1 and l[0] in ("have", "has") and l[1] == "been":
        l = l[1:]
    if len(l) > 1 and l[0] in ("have", "has", "had") and lex.is_pp_verb(l[1]):
        l = l[1:]
    if len(l) > 2 and lex.lemmatize(l[0]) == "have" and l[1] == "to":
        l = l[2:]
    if not l:
        return None

    def is_verb(tok):
        return lex.pos_class(tok) in ("verb", "pp_verb")

    i_head, i_tail = 0, len(l) - 1
    while i_head <= i_tail and not is_verb(l[i_head]):
        i_head += 1
    while i_head <= i_tail and not (is_verb(l[i_tail])
                                    or lex.pos_class(l[i_tail]) == "preposition"):
        i_tail -= 1
    if i_head > i_tail:
        return None
    lp = l[i_head:i_tail + 1]

    # progressive: "is doing X" -> "doing X"
    if len(lp) >= 2 and lex.lemmatize(lp[0]) == "be" and lex.is_gerund(lp[1]):
        lp = lp[1:]

    def make(slot1_words, i1, slot2_words, i2):
        return TypedPredicate(negated,
                              RelSlot(tuple(slot1_words), i1),
                              RelSlot(tuple(slot2_words), i2),
                              ArgType(t_first.name), ArgType(t_second.name))

    head = lex.lemmatize(lp[0])
    if head == "be":
        if len(lp) == 1:
            return make(["be"], 1, ["be"], 2)
        if lex.pos_class(lp[1]) != "preposition":
            if lex.pos_class(lp[1]) == "adverb":
                lp = lp[:1] + lp[2:]
            if len(lp) > 1:
                cls1 = lex.pos_class(lp[1])
                if cls1 in ("adjective", "noun") and lex.pos_class(lp[-1]) == "preposition":
                    w = lex.lemmatize(lp[1])
                    return make([w], 1, [w] + lp[2:], 2)
                if lex.is_pp_verb(lp[1]):
                    w = lex.lemmatize(lp[1])
                    if lex.pos_class(lp[-1]) == "preposition":
                        return make([w], 2, [w] + lp[2:], 2)
                    return make([w], 2, [w] + lp[2:], 3)
        # copular tail: "is after", "is gravitate towards"
        lp = ["be"] + lp[1:]
        if len(lp) == 1:
            return make(["be"], 1, ["be"], 2)
        if lex.pos_class(lp[-1]) == "preposition":
            return make(["be"], 1, lp, 2)
        return None

    lp[0] = head
    if len(lp) == 1:
        return make([head], 1, [head], 2)
    if lex.pos_class(lp[-1]) == "preposition":
        return make([head], 1, lp, 2)
    return None
