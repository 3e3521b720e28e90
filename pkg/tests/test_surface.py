import os
import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entgraph.lexicon import default_lexicon
from entgraph.predicates import (ArgType, TypePair, format_predicate,
                                 parse_predicate)
from entgraph.surface import (UnsupportedShape, normalize_sentence,
                              render_sentence, resolve_sentence)

TP = TypePair(ArgType("person"), ArgType("government"))
GOLDEN = os.path.join(os.path.dirname(__file__), "data",
                      "golden_sentences.tsv")


def golden_rows():
    rows = []
    with open(GOLDEN, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            sent, canon, rt = line.rstrip("\n").split("\t")
            rows.append((sent, canon, rt == "1"))
    return rows


@pytest.mark.parametrize("sent,canon,_rt", golden_rows())
def test_golden_resolve(sent, canon, _rt):
    assert resolve_sentence(sent + ".", TP) == parse_predicate(canon)


@pytest.mark.parametrize("sent,canon,rt", golden_rows())
def test_golden_render_round_trip(sent, canon, rt):
    if not rt:
        pytest.skip("resolve-only row")
    p = parse_predicate(canon)
    rendered = render_sentence(p, TP)
    assert rendered.text == sent
    assert resolve_sentence(rendered.text, TP) == p


def test_render_reference_example():
    tp = TypePair(ArgType("government"), ArgType("time"))
    p = parse_predicate("(elect.2,elect.in.2,government,time)")
    assert render_sentence(p, tp).text == "Government A is elected in Time B"


def test_render_letters_follow_type_pair():
    s = render_sentence(parse_predicate("(draw.2,draw.to.2,government,person)"),
                        TP)
    assert s.slot1_letter == "B" and s.slot2_letter == "A"
    assert s.text.startswith("Government B")


def test_render_same_type_pair():
    tp = TypePair(ArgType("thing"), ArgType("thing"))
    p = parse_predicate("(eat.1,eat.2,thing,thing)")
    s = render_sentence(p, tp)
    assert s.text == "Thing A eats Thing B"
    assert resolve_sentence(s.text, tp) == p


def test_render_type_mismatch():
    with pytest.raises(UnsupportedShape):
        render_sentence(parse_predicate("(eat.1,eat.2,thing,thing)"), TP)


def test_render_unsupported_shape():
    # a tail that ends in a non-preposition content word has no template
    with pytest.raises(UnsupportedShape):
        render_sentence(parse_predicate("(adore.1,adore.thing.2,person,government)"),
                        TP)


def test_negation_round_trip():
    for canon in ["NEG__(adore.1,adore.2,person,government)",
                  "NEG__(be.1,be.2,person,government)",
                  "NEG__(associate.2,associate.with.2,person,government)"]:
        p = parse_predicate(canon)
        s = render_sentence(p, TP)
        assert resolve_sentence(s.text, TP) == p


def test_negation_surface_forms():
    p = parse_predicate("NEG__(adore.1,adore.2,person,government)")
    assert render_sentence(p, TP).text == \
        "Person A does not adore Government B"
    q = parse_predicate("NEG__(be.1,be.2,person,government)")
    assert render_sentence(q, TP).text == "Person A is not Government B"


def test_resolve_contracted_negation():
    p = resolve_sentence("Person A doesn't adore Government B", TP)
    assert p == parse_predicate("NEG__(adore.1,adore.2,person,government)")
    q = resolve_sentence("Person A isn't Government B", TP)
    assert q == parse_predicate("NEG__(be.1,be.2,person,government)")


def test_resolve_modal_removal():
    p = resolve_sentence("Person A might adore Government B", TP)
    assert p == parse_predicate("(adore.1,adore.2,person,government)")
    q = resolve_sentence("Person A would have been drawn to Government B", TP)
    assert q == parse_predicate("(draw.2,draw.to.2,person,government)")


def test_resolve_perfect_constructions():
    assert resolve_sentence("Person A has adored Government B", TP) == \
        parse_predicate("(adore.1,adore.2,person,government)")
    assert resolve_sentence("Person A has to adore Government B", TP) == \
        parse_predicate("(adore.1,adore.2,person,government)")


def test_resolve_progressive():
    assert resolve_sentence("Person A is adoring Government B", TP) == \
        parse_predicate("(adore.1,adore.2,person,government)")


def test_resolve_no_verb_head():
    assert resolve_sentence("Person A the the Government B.", TP) is None


def test_resolve_missing_arguments():
    assert resolve_sentence("Person A adores somebody", TP) is None
    assert resolve_sentence("adores Government B", TP) is None
    assert resolve_sentence("Person A adores Person A", TP) is None


def test_resolve_trailing_punctuation_and_whitespace():
    base = resolve_sentence("Person A adores Government B", TP)
    assert resolve_sentence("  Person A   adores Government B. ", TP) == base
    assert resolve_sentence("Person A adores Government B>", TP) == base


def test_paraphrase_collision():
    tp = TypePair(ArgType("thing"), ArgType("event"))
    a = parse_predicate("(use.2,use.in.2,thing,event)")
    b = parse_predicate("(be.1,be.used.in.2,thing,event)")
    sa, sb = render_sentence(a, tp), render_sentence(b, tp)
    assert sa.text == sb.text == "Thing A is used in Event B"


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=string.ascii_letters + " .,'", max_size=60))
def test_resolver_total_over_noise(text):
    # never raises, whatever the input
    resolve_sentence(text, TP)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(
    ["adores", "is", "with", "magnet", "not", "quickly", "Person", "A",
     "Government", "B", "the", "drawn", "to"]), max_size=10))
def test_resolver_total_over_token_soup(tokens):
    resolve_sentence(" ".join(tokens), TP)


def test_normalize_sentence():
    assert normalize_sentence("  Person A  adores  Government B. ") == \
        "Person A adores Government B"
    assert normalize_sentence("x?!") == "x"


class TestLexicon:
    lex = default_lexicon()

    @pytest.mark.parametrize("token,lemma", [
        ("adores", "adore"), ("drawn", "draw"), ("be", "be"), ("is", "be"),
        ("worshipped", "worship"), ("embodies", "embody"),
        ("identified", "identify"), ("sought", "seek"), ("used", "use"),
        ("preaches", "preach"), ("issues", "issue"), ("devoted", "devote"),
        ("gravitate", "gravitate"), ("wants", "want"),
    ])
    def test_lemmatize(self, token, lemma):
        assert self.lex.lemmatize(token) == lemma

    @given(st.text(alphabet=string.ascii_lowercase, min_size=1, max_size=12))
    @settings(max_examples=300, deadline=None)
    def test_lemmatize_idempotent(self, token):
        once = self.lex.lemmatize(token)
        assert self.lex.lemmatize(once) == once

    @pytest.mark.parametrize("token,cls", [
        ("with", "preposition"), ("elected", "pp_verb"),
        ("quickly", "adverb"), ("might", "modal"), ("magnet", "noun"),
        ("adore", "verb"), ("xyzzy", "other"), ("towards", "preposition"),
    ])
    def test_pos_class(self, token, cls):
        assert self.lex.pos_class(token) == cls

    def test_third_person(self):
        assert self.lex.third_person("adore") == "adores"
        assert self.lex.third_person("embody") == "embodies"
        assert self.lex.third_person("preach") == "preaches"
        assert self.lex.third_person("be") == "is"

    def test_past_participle(self):
        assert self.lex.past_participle("associate") == "associated"
        assert self.lex.past_participle("draw") == "drawn"
        assert self.lex.past_participle("worship") == "worshipped"
        assert self.lex.past_participle("identify") == "identified"
