"""Evaluation harness: dataset loading, graph-based pair scoring with
backup strategies, precision-recall / ROC curves with endpoint anchoring,
AUC, ensemble averaging, and fine-tuning data export.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .generator import build_prompts
from .graph import FormatError, GraphCollection
from .lexicon import Lexicon, default_lexicon
from .predicates import (ArgType, RelSlot, TypedPredicate, TypePair,
                         format_predicate, parse_predicate, type_pair_of)
from .surface import UnsupportedShape, render_sentence


class DegenerateLabels(ValueError):
    pass


@dataclass(frozen=True)
class LabeledPair:
    premise: TypedPredicate
    hypothesis: TypedPredicate
    label: bool
    split: str = "test"

    def __post_init__(self):
        if self.split not in ("valid", "test"):
            raise ValueError(f"split must be 'valid' or 'test': {self.split!r}")
        if type_pair_of(self.premise) != type_pair_of(self.hypothesis):
            raise ValueError("premise and hypothesis must share a type pair")


@dataclass(frozen=True)
class Curve:
    points: tuple   # ordered (x, y) pairs, x non-decreasing
    kind: str       # "PR" or "ROC"


@dataclass(frozen=True)
class ScoreStrategies:
    relaxed_match: bool = True
    lemma_backup: bool = True
    average_backup: bool = True


def load_dataset(path) -> list[LabeledPair]:
    """Parse a TSV of `premise<TAB>hypothesis<TAB>True|False[<TAB>split]`
    lines with canonical predicate strings."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (3, 4):
                raise FormatError(f"expected 3 or 4 tab-separated fields, "
                                  f"got {len(parts)}", line=no)
            if parts[2] not in ("True", "False"):
                raise FormatError(f"label must be True or False: {parts[2]!r}",
                                  line=no)
            split = parts[3] if len(parts) == 4 else "test"
            try:
                pair = LabeledPair(parse_predicate(parts[0]),
                                   parse_predicate(parts[1]),
                                   parts[2] == "True", split)
            except ValueError as exc:
                raise FormatError(str(exc), line=no) from exc
            pairs.append(pair)
    return pairs


def dataset_counts(pairs):
    valid = sum(1 for p in pairs if p.split == "valid")
    return {"total": len(pairs), "valid": valid, "test": len(pairs) - valid}


# ---------------------------------------------------------------------------
# pair scoring
# ---------------------------------------------------------------------------

def _lemma_key(p: TypedPredicate, lex: Lexicon):
    def slot_key(slot):
        return tuple(lex.lemmatize(w) for w in slot.words) + (slot.index,)
    return (p.negated, slot_key(p.slot1), slot_key(p.slot2))


def _retype(p: TypedPredicate, mapping) -> TypedPredicate:
    return TypedPredicate(p.negated, p.slot1, p.slot2,
                          mapping[p.type1], mapping[p.type2])


def _average_backup(pair, own_key, collection, lex):
    """Mean weight of the pair across other typed graphs where both
    predicates relax-match under a consistent retyping."""
    hits = []
    t1, t2 = pair.premise.type1, pair.premise.type2
    for graph in collection:
        tp = graph.type_pair
        if GraphCollection._key(tp) == own_key:
            continue
        mappings = [{t1: tp.t1, t2: tp.t2}]
        if t1 != t2 and tp.t1 != tp.t2:
            mappings.append({t1: tp.t2, t2: tp.t1})
        for mapping in mappings:
            if len(set(mapping.values())) != len(set(mapping.keys())):
                continue
            try:
                w = graph.lookup(_retype(pair.premise, mapping),
                                 _retype(pair.hypothesis, mapping),
                                 relaxed=True, lexicon=lex)
            except UnsupportedShape:
                continue
            if w is not None:
                hits.append(w)
    return float(np.mean(hits)) if hits else None


def score_pairs(collection: GraphCollection, pairs,
                strategies: ScoreStrategies = ScoreStrategies(),
                lexicon: Lexicon | None = None):
    """Score each pair against the graphs; returns [(pair, score)].

    Order of fallbacks: own-graph lookup (relaxed per flag), lemma
    equality (score 1), cross-graph average, else 0.
    """
    lex = lexicon or default_lexicon()
    out = []
    for pair in pairs:
        graph = collection.graph_for(pair.premise)
        score = None
        if graph is not None:
            score = graph.lookup(pair.premise, pair.hypothesis,
                                 relaxed=strategies.relaxed_match, lexicon=lex)
        if score is None and strategies.lemma_backup:
            if _lemma_key(pair.premise, lex) == _lemma_key(pair.hypothesis, lex):
                score = 1.0
        if score is None and strategies.average_backup:
            own_key = GraphCollection._key(type_pair_of(pair.premise))
            score = _average_backup(pair, own_key, collection, lex)
        out.append((pair, float(score) if score is not None else 0.0))
    return out


# ---------------------------------------------------------------------------
# curves and AUC
# ---------------------------------------------------------------------------

def _check_labels(labels):
    labels = np.asarray(labels, dtype=bool)
    if labels.all() or not labels.any():
        raise DegenerateLabels("need at least one positive and one negative label")
    return labels


def _threshold_sweep(scores, labels):
    """Cumulative TP/FP over descending score thresholds, tied scores
    grouped into one step.  Returns (tps, fps, n_pos, n_neg)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = _check_labels(labels)
    order = np.argsort(-scores, kind="stable")
    scores, labels = scores[order], labels[order]
    tps = np.cumsum(labels)
    fps = np.cumsum(~labels)
    distinct = np.nonzero(np.diff(scores))[0]
    last = np.r_[distinct, len(scores) - 1]
    return tps[last], fps[last], int(tps[-1]), int(fps[-1])


def pr_curve(scores, labels) -> Curve:
    """Precision-recall curve anchored at recall 0 (precision 1 by
    convention) and recall 1 (precision = base rate, the all-accept step)."""
    tps, fps, n_pos, _ = _threshold_sweep(scores, labels)
    recall = tps / n_pos
    precision = tps / (tps + fps)
    points = list(zip(recall.tolist(), precision.tolist()))
    if points[0][0] > 0.0:
        points.insert(0, (0.0, 1.0))
    else:
        points[0] = (0.0, 1.0)
    return Curve(tuple(points), "PR")


def roc_curve(scores, labels) -> Curve:
    tps, fps, n_pos, n_neg = _threshold_sweep(scores, labels)
    tpr = tps / n_pos
    fpr = fps / n_neg
    points = [(0.0, 0.0)] + list(zip(fpr.tolist(), tpr.tolist()))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    return Curve(tuple(points), "ROC")


def auc(curve: Curve, precision_floor: float | None = None) -> float:
    """Trapezoidal area under the curve.

    With precision_floor set, only curve segments with y >= floor
    contribute, clipping segments at the crossing point.
    """
    pts = curve.points
    total = 0.0
    for (x1, y1), (x2, y2) in zip(pts, pts[1:]):
        if x2 < x1:
            raise ValueError("curve x-coordinates must be non-decreasing")
        if precision_floor is None:
            total += (x2 - x1) * (y1 + y2) / 2.0
            continue
        f = precision_floor
        if y1 < f and y2 < f:
            continue
        if y1 >= f and y2 >= f:
            total += (x2 - x1) * (y1 + y2) / 2.0
            continue
        # one endpoint below the floor: clip at the crossing
        if y2 == y1:
            continue
        t = (f - y1) / (y2 - y1)
        xc = x1 + t * (x2 - x1)
        if y1 >= f:
            total += (xc - x1) * (y1 + f) / 2.0
        else:
            total += (x2 - xc) * (f + y2) / 2.0
    return float(total)


def curve_to_csv(curve: Curve, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y\n")
        for x, y in curve.points:
            fh.write(f"{repr(float(x))},{repr(float(y))}\n")


def ensemble_mean(logits1, logits2):
    """Average of the two softmax distributions, component-wise."""
    from .weigher import softmax3
    s = (softmax3(logits1) + softmax3(logits2)) / 2.0
    return tuple(float(x) for x in s)


# ---------------------------------------------------------------------------
# evaluation driver and report
# ---------------------------------------------------------------------------

def evaluate(collection, pairs, strategies=ScoreStrategies(),
             lexicon=None, precision_floor=None):
    """Score pairs and compute AUC-PR / AUC-ROC; returns a report dict."""
    scored = score_pairs(collection, pairs, strategies, lexicon)
    scores = [s for _, s in scored]
    labels = [p.label for p, _ in scored]
    report = {
        "pairs": len(pairs),
        "positives": int(sum(labels)),
        "strategies": {
            "relaxed_match": strategies.relaxed_match,
            "lemma_backup": strategies.lemma_backup,
            "average_backup": strategies.average_backup,
        },
        "auc_pr": auc(pr_curve(scores, labels), precision_floor),
        "auc_roc": auc(roc_curve(scores, labels)),
    }
    return report, scored


def write_report(path, report):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# fine-tuning data export
# ---------------------------------------------------------------------------

def _voice_flip(p: TypedPredicate, lex: Lexicon):
    """Swap a predicate's argument order where the grammar allows it:
    active <-> passive-with-by.  Returns the flipped predicate or None."""
    w1, i1 = p.slot1.words, p.slot1.index
    w2, i2 = p.slot2.words, p.slot2.index
    head = w1[0]
    if i1 == 1 and i2 == 2 and head != "be" and lex.pos_class(head) == "verb":
        return TypedPredicate(p.negated, RelSlot((head,), 2),
                              RelSlot(tuple(w2) + ("by",), 2),
                              p.type2, p.type1)
    if i1 == 2 and i2 == 2 and w2[-1] == "by":
        if len(w2) == 2:
            return TypedPredicate(p.negated, RelSlot((head,), 1),
                                  RelSlot((head,), 2), p.type2, p.type1)
        return TypedPredicate(p.negated, RelSlot((head,), 1),
                              RelSlot(tuple(w2[:-1]), 2), p.type2, p.type1)
    return None


def _fill_of(p, tp, lex):
    """The middle text of S(p) and the orientation its rendering fits."""
    sent = render_sentence(p, tp, lex)
    from .surface import relation_surface
    mid = " ".join(relation_surface(p, lex))
    orientation = "AB" if sent.slot1_letter == "A" else "BA"
    return mid, orientation


def export_finetune_data(pairs, target: str, out_path,
                         lexicon: Lexicon | None = None) -> int:
    """Write line-delimited JSON fine-tuning records; returns record count.

    target "generator": (prompt, fill) records from positive pairs, one
    per template orientation where the hypothesis (or its voice-flipped
    paraphrase) fits.  target "weigher": sentence pairs with a 3-way
    label, positives E and negatives N.
    """
    if target not in ("generator", "weigher"):
        raise ValueError(f"target must be 'generator' or 'weigher': {target!r}")
    lex = lexicon or default_lexicon()
    count = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            tp = TypePair(pair.premise.type1, pair.premise.type2)
            try:
                if target == "weigher":
                    rec = {
                        "premise": render_sentence(pair.premise, tp, lex).text,
                        "hypothesis": render_sentence(pair.hypothesis, tp, lex).text,
                        "label": "E" if pair.label else "N",
                    }
                    fh.write(json.dumps(rec, sort_keys=True) + "\n")
                    count += 1
                    continue
                if not pair.label:
                    continue
                prompt_ab, prompt_ba = build_prompts(pair.premise, tp, lex)
                prompts = {"AB": prompt_ab, "BA": prompt_ba}
                fills = {}
                mid, orient = _fill_of(pair.hypothesis, tp, lex)
                fills[orient] = mid
                flipped = _voice_flip(pair.hypothesis, lex)
                if flipped is not None:
                    try:
                        mid2, orient2 = _fill_of(flipped, tp, lex)
                        fills.setdefault(orient2, mid2)
                    except UnsupportedShape:
                        pass
                for orient in ("AB", "BA"):
                    if orient in fills:
                        fh.write(json.dumps({"prompt": prompts[orient],
                                             "fill": fills[orient]},
                                            sort_keys=True) + "\n")
                        count += 1
            except UnsupportedShape:
                continue
    return count
