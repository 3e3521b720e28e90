"""Typed binary predicates and their canonical text form.

A predicate is a neo-Davidsonian binary relation with two slots, each a
relation word sequence plus an argument index, and two argument types.
The canonical string looks like ``(adore.1,adore.2,person,government)``,
optionally prefixed with ``NEG__`` for a negated relation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

NEG_PREFIX = "NEG__"

_TYPE_RE = re.compile(r"^[a-z_]+$")
_TOKEN_RE = re.compile(r"^[a-z']+$")


class MalformedPredicate(ValueError):
    """Raised when a canonical predicate string cannot be parsed."""


@dataclass(frozen=True, order=True)
class ArgType:
    """An argument type such as ``person`` or ``living_thing``."""

    name: str

    def __post_init__(self):
        if not self.name or not _TYPE_RE.match(self.name):
            raise MalformedPredicate(
                f"argument type must be lowercase letters/underscores: {self.name!r}"
            )

    def title(self) -> str:
        """Human-readable form used in sentences: ``living_thing`` -> ``Living Thing``."""
        return " ".join(part.capitalize() for part in self.name.split("_"))

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class RelSlot:
    """One relation slot: its word sequence and the argument's order index."""

    words: tuple[str, ...]
    index: int

    def __post_init__(self):
        if not self.words:
            raise MalformedPredicate("slot needs at least one word")
        for w in self.words:
            if not w or not _TOKEN_RE.match(w):
                raise MalformedPredicate(f"bad slot token: {w!r}")
        if self.index not in (1, 2, 3):
            raise MalformedPredicate(f"slot index must be 1, 2 or 3: {self.index}")

    def __str__(self):
        return ".".join(self.words) + f".{self.index}"


@dataclass(frozen=True, order=True)
class TypedPredicate:
    negated: bool
    slot1: RelSlot
    slot2: RelSlot
    type1: ArgType
    type2: ArgType


@dataclass(frozen=True, order=True)
class TypePair:
    """An ordered pair of argument types with the A/B letter assignment.

    The first type carries letter "A" and the second "B".  When both
    types coincide the single type carries both letters and the letters
    alone distinguish the two argument roles.
    """

    t1: ArgType
    t2: ArgType

    @classmethod
    def ordered(cls, ta: ArgType, tb: ArgType) -> "TypePair":
        """Canonical housing pair: lexicographic order for distinct types."""
        if ta.name <= tb.name:
            return cls(ta, tb)
        return cls(tb, ta)

    def letter_of(self, t: ArgType) -> str:
        if t == self.t1:
            return "A"
        if t == self.t2:
            return "B"
        raise KeyError(f"type {t} not in pair {self}")

    def types(self) -> set[ArgType]:
        return {self.t1, self.t2}

    def __str__(self):
        return f"({self.t1},{self.t2})"


def _parse_slot(text: str) -> RelSlot:
    parts = text.split(".")
    if len(parts) < 2:
        raise MalformedPredicate(f"slot needs a trailing index: {text!r}")
    try:
        index = int(parts[-1])
    except ValueError:
        raise MalformedPredicate(f"non-integer slot index: {parts[-1]!r}") from None
    return RelSlot(tuple(parts[:-1]), index)


def parse_predicate(text: str) -> TypedPredicate:
    """Parse a canonical predicate string.

    Whitespace between the comma-separated fields is ignored.  Raises
    MalformedPredicate on wrong arity, bad indices or empty fields.
    """
    s = text.strip()
    negated = False
    if s.startswith(NEG_PREFIX):
        negated = True
        s = s[len(NEG_PREFIX):]
    if not (s.startswith("(") and s.endswith(")")):
        raise MalformedPredicate(f"predicate must be parenthesized: {text!r}")
    fields = [f.strip() for f in s[1:-1].split(",")]
    if len(fields) != 4:
        raise MalformedPredicate(
            f"expected 4 comma-separated fields, got {len(fields)}: {text!r}"
        )
    slot1 = _parse_slot(fields[0])
    slot2 = _parse_slot(fields[1])
    return TypedPredicate(negated, slot1, slot2, ArgType(fields[2]), ArgType(fields[3]))


def format_predicate(p: TypedPredicate) -> str:
    """Inverse of parse_predicate; output carries no internal whitespace."""
    body = f"({p.slot1},{p.slot2},{p.type1},{p.type2})"
    return (NEG_PREFIX + body) if p.negated else body


def type_pair_of(p: TypedPredicate) -> TypePair:
    """The canonical TypePair housing p, invariant under swapping p's types."""
    return TypePair.ordered(p.type1, p.type2)
