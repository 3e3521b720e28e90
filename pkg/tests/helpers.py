"""Shared test fixtures: the golden generation trace and a scripted backend.

The trace is a three-seed expansion over the (person, government) type
pair whose per-prompt outputs and stage-by-stage promotions are known by
hand, so the generation loop can be replayed and checked exactly.
"""

from entgraph.backend import Backend, GenResponse, MockBackend
from entgraph.predicates import parse_predicate

SEED_STRINGS = [
    "(adore.1,adore.2,person,government)",
    "(recognize.1,recognize.2,person,government)",
    "(know.1,know.2,person,government)",
]

STAGE1_STRINGS = [
    "(associate.2,associate.with.2,person,government)",
    "(identify.1,identify.with.2,person,government)",
    "(connect.2,connect.with.2,person,government)",
    "(draw.2,draw.to.2,government,person)",
    "(associate.2,associate.with.2,government,person)",
]

STAGE2_STRINGS = [
    "(identify.2,identify.with.2,person,government)",
    "(magnet.1,magnet.for.2,government,person)",
    "(issue.1,issue.call.for.2,government,person)",
    "(award.1,award.2,government,person)",
    "(practice.1,practice.2,person,government)",
    "(embody.1,embody.2,person,government)",
    "(be.1,be.gravitate.towards.2,government,person)",
    "(want.1,want.2,government,person)",
    "(magnet.1,magnet.of.2,government,person)",
]


def seeds():
    return {parse_predicate(s) for s in SEED_STRINGS}


def expected_final():
    return {parse_predicate(s)
            for s in SEED_STRINGS + STAGE1_STRINGS + STAGE2_STRINGS}


# Fills returned for each frontier sentence, per prompt orientation.
# AB prompts ask for a completion of "Person A <FILL> Government B.",
# BA prompts of "Government B <FILL> Person A.".
TRACE_FILLS = {
    "Person A adores Government B": {
        "AB": ["is identified with", "is", "is devoted to",
               "is associated with"],
        "BA": ["is magnet for", "is worshipped in", "is drawn to",
               "is magnet of"],
    },
    "Person A recognizes Government B": {
        "AB": ["identifies with", "identifies with", "is associated with",
               "is connected with"],
        "BA": ["is family of", "is associated with", "is drawn to", "wants"],
    },
    "Person A knows Government B": {
        "AB": ["identifies with", "embodies", "is associated with",
               "is connected with"],
        "BA": ["is associated with", "awards", "is drawn to", "is enemy of"],
    },
    "Person A is associated with Government B": {
        "AB": ["is identified with", "practices"],
        "BA": ["awards", "is gravitate towards", "is sought after by"],
    },
    "Person A identifies with Government B": {
        "AB": ["declares", "embodies", "declares war on"],
        "BA": ["issues call for"],
    },
    "Person A is connected with Government B": {
        "AB": ["is identified with", "practices", "embodies"],
        "BA": ["is after", "issues call for", "is identified with"],
    },
    "Government B is drawn to Person A": {
        "AB": ["submits", "believes in"],
        "BA": ["is attracted to", "is magnet for", "is magnet of"],
    },
    "Government B is associated with Person A": {
        "AB": ["is identified with", "preaches", "practices", "demands"],
        "BA": ["issues call for", "is gravitate towards", "wants"],
    },
}


class ScriptedBackend(Backend):
    """Replays the golden trace: fills are looked up by prompt."""

    def __init__(self, fills=TRACE_FILLS):
        self.fills = fills
        self.requests = []

    def generate(self, req):
        self.requests.append(req.prompt)
        sentence, _, frame = req.prompt.partition(", which entails that ")
        if frame.startswith("Person A"):
            orientation = "AB"
        elif frame.startswith("Government B"):
            orientation = "BA"
        else:
            raise AssertionError(f"unexpected prompt frame: {frame!r}")
        fills = self.fills.get(sentence, {}).get(orientation, [])
        return GenResponse(tuple(fills[:req.num_return]))

    # embedding and scoring delegate to the mock for pipeline tests
    _mock = MockBackend(seed=0)

    def embed(self, sentence):
        return self._mock.embed(sentence)

    def score(self, premise, hypothesis):
        return self._mock.score(premise, hypothesis)
