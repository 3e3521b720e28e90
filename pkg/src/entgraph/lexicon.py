"""Closed-class word lists, inflection tables and rule-based lemmatization.

The lexicon is loaded from a plain-text data file (one section per word
class) and is immutable afterwards.  Coverage targets the template
sentence grammar used by the surface mapper, not open-domain English.
"""

from __future__ import annotations

import importlib.resources

_VOWELS = set("aeiou")

POS_CLASSES = ("verb", "pp_verb", "preposition", "adverb", "adjective",
               "noun", "modal", "other")


class Lexicon:
    def __init__(self, modals, prepositions, adverbs, adjectives, nouns,
                 verbs, irregular_rows, extra_inflections, suffix_rules):
        self.modals = frozenset(modals)
        self.prepositions = frozenset(prepositions)
        self.adverbs = frozenset(adverbs)
        self.adjectives = frozenset(adjectives)
        self.nouns = frozenset(nouns)
        self.verbs = frozenset(verbs)
        self.suffix_rules = tuple(suffix_rules)

        # base -> (3sg, past participle, gerund)
        self.irregular = {row[0]: tuple(row[1:]) for row in irregular_rows}
        self._inflection_to_base = {}
        self._inflection_class = {}
        for base, tsg, pp, ger in irregular_rows:
            self._inflection_to_base[tsg] = base
            self._inflection_to_base[ger] = base
            self._inflection_to_base[pp] = base
            self._inflection_class[tsg] = "verb"
            self._inflection_class[ger] = "verb"
            self._inflection_class[pp] = "pp_verb"
        for form, base, cls in extra_inflections:
            self._inflection_to_base[form] = base
            self._inflection_class[form] = cls

        self._known = (self.verbs | self.nouns | self.adjectives
                       | self.adverbs | self.prepositions | self.modals)

    @classmethod
    def from_file(cls, path=None) -> "Lexicon":
        """Load the bundled lexicon, or one from an explicit path."""
        if path is None:
            ref = importlib.resources.files("entgraph") / "data" / "lexicon.txt"
            text = ref.read_text(encoding="utf-8")
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        sections = {}
        current = None
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1]
                sections.setdefault(current, [])
                continue
            if current is None:
                raise ValueError(f"lexicon entry outside any section: {line!r}")
            sections[current].append(line)
        irregular = [tuple(row.split()) for row in sections.get("irregular", [])]
        for row in irregular:
            if len(row) != 4:
                raise ValueError(f"irregular row needs 4 columns: {row}")
        extra = [tuple(row.split()) for row in sections.get("inflection", [])]
        suffix = []
        for row in sections.get("suffix", []):
            suf, _, rep = row.partition(">")
            suffix.append((suf, rep))
        return cls(
            sections.get("modal", []), sections.get("preposition", []),
            sections.get("adverb", []), sections.get("adjective", []),
            sections.get("noun", []), sections.get("verb", []),
            irregular, extra, suffix,
        )

    # -- lemmatization ---------------------------------------------------

    def lemmatize(self, token: str) -> str:
        """Reduce a token to its base form; idempotent, identity on unknowns."""
        t = token.lower()
        if t in self._inflection_to_base:
            return self._inflection_to_base[t]
        if t in self._known:
            return t
        candidates = []
        for suf, rep in self.suffix_rules:
            if not t.endswith(suf):
                continue
            stem = t[: len(t) - len(suf)] + rep
            if len(stem) < 2:
                continue
            if suf == "s" and t.endswith("ss"):
                continue
            candidates.append(stem)
            # undo consonant doubling: worshipped -> worshipp -> worship
            if (len(stem) >= 3 and stem[-1] == stem[-2]
                    and stem[-1] not in _VOWELS and stem[-1] != "s"):
                candidates.append(stem[:-1])
        for c in candidates:
            if c in self._known or c in self.irregular:
                return c
        return candidates[0] if candidates else t

    # -- classification --------------------------------------------------

    def is_pp_verb(self, token: str) -> bool:
        t = token.lower()
        if self._inflection_class.get(t) == "pp_verb":
            return True
        return t.endswith("ed") and self.lemmatize(t) in self.verbs

    def is_gerund(self, token: str) -> bool:
        t = token.lower()
        if t in self._inflection_to_base:
            base = self._inflection_to_base[t]
            return self.irregular.get(base, ("", "", ""))[2] == t
        return t.endswith("ing") and self.lemmatize(t) in self.verbs

    def is_verb_form(self, token: str) -> bool:
        """Any verb form, participles included; used by the head scans."""
        t = token.lower()
        if t in self._inflection_to_base or t in self.verbs:
            return True
        lemma = self.lemmatize(t)
        return lemma != t and lemma in self.verbs

    def pos_class(self, token: str) -> str:
        """Single class per token; priority modal > preposition > adverb >
        verb forms > adjective/noun > other."""
        t = token.lower()
        if t in self.modals:
            return "modal"
        if t in self.prepositions:
            return "preposition"
        if t in self.adverbs or (t.endswith("ly") and len(t) > 3
                                 and t not in self.adjectives
                                 and t not in self.nouns
                                 and t not in self.verbs):
            return "adverb"
        if self.is_pp_verb(t):
            return "pp_verb"
        if self.is_verb_form(t):
            return "verb"
        if t in self.adjectives:
            return "adjective"
        if t in self.nouns:
            return "noun"
        return "other"

    # -- inflection ------------------------------------------------------

    def third_person(self, base: str) -> str:
        if base in self.irregular:
            return self.irregular[base][0]
        if base.endswith(("s", "x", "z", "ch", "sh", "o")):
            return base + "es"
        if base.endswith("y") and len(base) > 1 and base[-2] not in _VOWELS:
            return base[:-1] + "ies"
        return base + "s"

    def past_participle(self, base: str) -> str:
        if base in self.irregular:
            return self.irregular[base][1]
        if base.endswith("e"):
            return base + "d"
        if base.endswith("y") and len(base) > 1 and base[-2] not in _VOWELS:
            return base[:-1] + "ied"
        return base + "ed"


_default = None


def default_lexicon() -> Lexicon:
    """The bundled lexicon, loaded once per process."""
    global _default
    if _default is None:
        _default = Lexicon.from_file()
    return _default
