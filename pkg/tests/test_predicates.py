import pytest

from entgraph.predicates import (ArgType, MalformedPredicate, RelSlot,
                                 TypedPredicate, TypePair, format_predicate,
                                 parse_predicate, type_pair_of)


def test_parse_basic():
    p = parse_predicate("(adore.1,adore.2,person,government)")
    assert p.slot1 == RelSlot(("adore",), 1)
    assert p.slot2 == RelSlot(("adore",), 2)
    assert p.type1 == ArgType("person")
    assert p.type2 == ArgType("government")
    assert not p.negated


def test_parse_negated():
    p = parse_predicate("NEG__(be.1,be.2,person,government)")
    q = parse_predicate("(be.1,be.2,person,government)")
    assert p.negated and not q.negated
    assert (p.slot1, p.slot2, p.type1, p.type2) == (q.slot1, q.slot2,
                                                    q.type1, q.type2)


def test_parse_whitespace_insensitive():
    a = parse_predicate("( adore.1 , adore.2 , person , government )")
    b = parse_predicate("(adore.1,adore.2,person,government)")
    assert a == b


@pytest.mark.parametrize("bad", [
    "(adore.1,adore.2,person)",            # wrong arity
    "(adore.x,adore.2,person,government)", # non-integer index
    "(adore.1,adore.2,person,government",  # missing paren
    "(.1,adore.2,person,government)",      # empty slot words
    "(adore.1,adore.2,Person,government)", # uppercase type
    "(adore.1,adore.4,person,government)", # index out of range
    "",
])
def test_parse_malformed(bad):
    with pytest.raises(MalformedPredicate):
        parse_predicate(bad)


def test_format_examples():
    p = TypedPredicate(False, RelSlot(("elect",), 2), RelSlot(("elect", "in"), 2),
                       ArgType("government"), ArgType("time"))
    assert format_predicate(p) == "(elect.2,elect.in.2,government,time)"
    q = TypedPredicate(False, RelSlot(("magnet",), 1),
                       RelSlot(("magnet", "for"), 2),
                       ArgType("government"), ArgType("person"))
    assert format_predicate(q) == "(magnet.1,magnet.for.2,government,person)"


def test_format_negated():
    p = parse_predicate("NEG__(be.1,be.2,person,government)")
    assert format_predicate(p) == "NEG__(be.1,be.2,person,government)"


@pytest.mark.parametrize("text", [
    "(adore.1,adore.2,person,government)",
    "NEG__(be.1,be.2,person,government)",
    "(issue.1,issue.call.for.2,government,person)",
    "(be.1,be.gravitate.towards.2,government,person)",
    "(eat.1,eat.2,thing,thing)",
])
def test_round_trip(text):
    assert format_predicate(parse_predicate(text)) == text


def test_type_pair_of_ordering():
    p = parse_predicate("(adore.1,adore.2,person,government)")
    tp = type_pair_of(p)
    assert (tp.t1.name, tp.t2.name) == ("government", "person")
    q = parse_predicate("(elect.2,elect.in.2,government,time)")
    assert (type_pair_of(q).t1.name, type_pair_of(q).t2.name) == ("government",
                                                                  "time")


def test_type_pair_of_same_type():
    p = parse_predicate("(eat.1,eat.2,thing,thing)")
    tp = type_pair_of(p)
    assert tp.t1 == tp.t2 == ArgType("thing")


def test_type_pair_of_swap_invariant():
    a = parse_predicate("(adore.1,adore.2,person,government)")
    b = parse_predicate("(adore.1,adore.2,government,person)")
    assert type_pair_of(a) == type_pair_of(b)


def test_letter_map():
    tp = TypePair(ArgType("person"), ArgType("government"))
    assert tp.letter_of(ArgType("person")) == "A"
    assert tp.letter_of(ArgType("government")) == "B"


def test_argtype_validation():
    with pytest.raises(ValueError):
        ArgType("Person")
    with pytest.raises(ValueError):
        ArgType("")
    assert ArgType("living_thing").title() == "Living Thing"


def test_relslot_validation():
    with pytest.raises(ValueError):
        RelSlot((), 1)
    with pytest.raises(ValueError):
        RelSlot(("adore",), 0)
