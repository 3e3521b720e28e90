"""Sphere-embedding edge selector.

Each predicate embedding v is mapped to a sphere (center, radius) by two
small two-layer networks; directional entailment is modeled as sphere
enclosure.  The overlap ratio along the center line gives an entailment
probability with a soft-transitivity guarantee, and a sigmoid-smoothed
variant of the same geometry gives a trainable selection score.
"""

from __future__ import annotations

import hashlib
import struct
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

RADIUS_CLAMP = 1e-8  # floor for the square radius variant

PARAM_NAMES = ("W1c", "b1c", "W2c", "b2c", "W1r", "b1r", "W2r", "b2r")


class DimensionMismatch(ValueError):
    pass


class DegenerateData(ValueError):
    pass


@dataclass(frozen=True)
class PredicateSphere:
    center: np.ndarray = field(repr=False)
    radius: float


@dataclass
class SphereHead:
    """Parameters of the center network (d_v -> h -> d_c) and the radius
    network (d_v -> h -> 1), with a rectifier between the layers."""

    W1c: np.ndarray
    b1c: np.ndarray
    W2c: np.ndarray
    b2c: np.ndarray
    W1r: np.ndarray
    b1r: np.ndarray
    W2r: np.ndarray
    b2r: np.ndarray
    f_plus: str = "exp"

    def __post_init__(self):
        if self.f_plus not in ("exp", "square"):
            raise ValueError(f"f_plus must be 'exp' or 'square': {self.f_plus!r}")

    @property
    def d_v(self):
        return self.W1c.shape[1]

    @property
    def d_c(self):
        return self.W2c.shape[0]

    @classmethod
    def initialize(cls, d_v=768, d_c=16, hidden=16, f_plus="exp", seed=0):
        """Uniform init in +-1/sqrt(fan_in), seeded."""
        rng = np.random.default_rng(seed)

        def u(rows, cols):
            bound = 1.0 / np.sqrt(cols)
            return rng.uniform(-bound, bound, size=(rows, cols))

        return cls(
            W1c=u(hidden, d_v), b1c=np.zeros(hidden),
            W2c=u(d_c, hidden), b2c=np.zeros(d_c),
            W1r=u(hidden, d_v), b1r=np.zeros(hidden),
            W2r=u(1, hidden), b2r=np.zeros(1),
            f_plus=f_plus,
        )

    def params(self):
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self):
        return replace(self, **{k: v.copy() for k, v in self.params().items()})

    # -- checkpoint file -------------------------------------------------

    MAGIC = b"EGH1"

    def save(self, path):
        blobs = [self.MAGIC]
        blobs.append(struct.pack("<III", self.d_v, self.W1c.shape[0], self.d_c))
        blobs.append(b"E" if self.f_plus == "exp" else b"S")
        for name in PARAM_NAMES:
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            blobs.append(arr.tobytes())
        payload = b"".join(blobs)
        with open(path, "wb") as fh:
            fh.write(payload)
            fh.write(struct.pack("<I", zlib.crc32(payload)))

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            data = fh.read()
        payload, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
        if zlib.crc32(payload) != crc:
            raise ValueError("head checkpoint failed its checksum")
        if payload[:4] != cls.MAGIC:
            raise ValueError("not a head checkpoint file")
        d_v, hidden, d_c = struct.unpack("<III", payload[4:16])
        f_plus = "exp" if payload[16:17] == b"E" else "square"
        shapes = [(hidden, d_v), (hidden,), (d_c, hidden), (d_c,),
                  (hidden, d_v), (hidden,), (1, hidden), (1,)]
        offset = 17
        arrays = []
        for shape in shapes:
            n = int(np.prod(shape)) * 8
            arrays.append(np.frombuffer(payload[offset:offset + n],
                                        dtype=np.float64).reshape(shape).copy())
            offset += n
        return cls(*arrays, f_plus=f_plus)


def _relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    # increasing logistic; stable for large |x|
    out = np.empty_like(np.asarray(x, dtype=np.float64))
    x = np.asarray(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _radius(u, f_plus):
    if f_plus == "exp":
        return np.exp(u)
    return np.maximum(u * u, RADIUS_CLAMP)


def sphere_of(v, head: SphereHead) -> PredicateSphere:
    """Map one embedding to its sphere."""
    c, r = spheres_of(np.asarray(v, dtype=np.float64)[None, :], head)
    return PredicateSphere(c[0], float(r[0]))


def spheres_of(V, head: SphereHead):
    """Vectorized sphere mapping: (n, d_v) -> centers (n, d_c), radii (n,)."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[1] != head.d_v:
        raise DimensionMismatch(
            f"expected embeddings of dimension {head.d_v}, got shape {V.shape}")
    hc = _relu(V @ head.W1c.T + head.b1c)
    centers = hc @ head.W2c.T + head.b2c
    hr = _relu(V @ head.W1r.T + head.b1r)
    u = (hr @ head.W2r.T + head.b2r)[:, 0]
    return centers, _radius(u, head.f_plus)


# ---------------------------------------------------------------------------
# geometry: overlap probability and smoothed score
# ---------------------------------------------------------------------------

def overlap_prob(sp: PredicateSphere, sq: PredicateSphere) -> float:
    """Entailment probability from diameter overlap along the center line."""
    d = float(np.linalg.norm(sp.center - sq.center))
    return float(overlap_prob_arrays(np.array([sp.radius]),
                                     np.array([sq.radius]),
                                     np.array([d]))[0])


def overlap_prob_arrays(r_p, r_q, d):
    """Vectorized overlap: 0 / 1 outside the diameter, linear ramp inside."""
    mid = (r_p + r_q - d) / (2.0 * r_p)
    out = np.where(r_q <= d - r_p, 0.0, np.where(r_q >= d + r_p, 1.0, mid))
    return out


def selector_score(sp: PredicateSphere, sq: PredicateSphere) -> float:
    """Sigmoid-smoothed selection score; increasing in (r_q - d) for
    fixed premise radius, so it preserves the overlap ordering."""
    d = float(np.linalg.norm(sp.center - sq.center))
    return float(sigmoid(np.array([2.0 * (sq.radius - d) / sp.radius]))[0])


def score_matrix(centers, radii):
    """All-pairs selection scores: entry (i, j) scores edge i -> j."""
    centers = np.asarray(centers, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    sq = np.sum(centers * centers, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (centers @ centers.T)
    d = np.sqrt(np.maximum(d2, 0.0))
    return sigmoid(2.0 * (radii[None, :] - d) / radii[:, None])


def select_top_edges(spheres: dict, k_edge: int):
    """Top-k_edge ordered pairs (p, q), p != q, by selection score.

    Ties break by canonical string order of (p, q).  Returns all ordered
    pairs when k_edge covers them.
    """
    from .predicates import format_predicate

    if len(spheres) < 2:
        raise ValueError("need at least two predicates to select edges")
    preds = sorted(spheres, key=format_predicate)
    centers = np.stack([spheres[p].center for p in preds])
    radii = np.array([spheres[p].radius for p in preds])
    scores = score_matrix(centers, radii)
    n = len(preds)
    ii, jj = np.nonzero(~np.eye(n, dtype=bool))
    flat = scores[ii, jj]
    # stable sort on descending score keeps canonical (p, q) order on ties,
    # because (ii, jj) enumerates pairs in canonical order
    order = np.argsort(-flat, kind="stable")[:k_edge]
    return [(preds[ii[o]], preds[jj[o]]) for o in order]


# ---------------------------------------------------------------------------
# head training
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectorTrainConfig:
    learning_rate: float = 5e-4
    positive_repetition: int = 5
    patience: int = 10
    max_epochs: int = 1000
    weight_decay: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.positive_repetition < 1 or self.patience < 1:
            raise ValueError("repetition and patience must be >= 1")


def _forward_pairs(head: SphereHead, Vp, Vq):
    """Forward pass caching everything the backward pass needs."""
    cache = {}
    for tag, V in (("p", Vp), ("q", Vq)):
        z1c = V @ head.W1c.T + head.b1c
        hc = _relu(z1c)
        c = hc @ head.W2c.T + head.b2c
        z1r = V @ head.W1r.T + head.b1r
        hr = _relu(z1r)
        u = (hr @ head.W2r.T + head.b2r)[:, 0]
        r = _radius(u, head.f_plus)
        cache[tag] = dict(V=V, z1c=z1c, hc=hc, c=c, z1r=z1r, hr=hr, u=u, r=r)
    diff = cache["p"]["c"] - cache["q"]["c"]
    d = np.linalg.norm(diff, axis=1)
    z = 2.0 * (cache["q"]["r"] - d) / cache["p"]["r"]
    s = sigmoid(z)
    cache.update(diff=diff, d=d, z=z, s=s)
    return cache


def batch_loss(head: SphereHead, Vp, Vq, y):
    cache = _forward_pairs(head, np.asarray(Vp, float), np.asarray(Vq, float))
    s = np.clip(cache["s"], 1e-12, 1.0 - 1e-12)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(-(y * np.log(s) + (1.0 - y) * np.log(1.0 - s))))


def head_gradient(head: SphereHead, Vp, Vq, y):
    """Exact gradient of the mean cross-entropy of the selection score.

    Returns a dict of arrays keyed like SphereHead parameters.  The norm
    term uses subgradient 0 at coincident centers, and the rectifier uses
    subgradient 0 at its kink.
    """
    Vp = np.asarray(Vp, dtype=np.float64)
    Vq = np.asarray(Vq, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(Vp) == 0:
        raise ValueError("batch must be non-empty")
    n = len(Vp)
    cache = _forward_pairs(head, Vp, Vq)
    s, z, d, diff = cache["s"], cache["z"], cache["d"], cache["diff"]

    grads = {name: np.zeros_like(getattr(head, name)) for name in PARAM_NAMES}

    # dL/dz for mean BCE through the sigmoid
    dz = (s - y) / n

    rp = cache["p"]["r"]
    rq = cache["q"]["r"]
    dr_q = dz * (2.0 / rp)
    dd = dz * (-2.0 / rp)
    dr_p = dz * (-z / rp)

    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(d[:, None] > 0.0, diff / np.where(d[:, None] > 0.0,
                                                          d[:, None], 1.0), 0.0)
    dc = {"p": dd[:, None] * unit, "q": -dd[:, None] * unit}
    dr = {"p": dr_p, "q": dr_q}

    for tag in ("p", "q"):
        cc = cache[tag]
        # center network
        dhc = dc[tag] @ head.W2c
        dhc[cc["z1c"] <= 0.0] = 0.0
        grads["W2c"] += dc[tag].T @ cc["hc"]
        grads["b2c"] += dc[tag].sum(axis=0)
        grads["W1c"] += dhc.T @ cc["V"]
        grads["b1c"] += dhc.sum(axis=0)
        # radius network
        if head.f_plus == "exp":
            du = dr[tag] * cc["r"]
        else:
            du = dr[tag] * np.where(cc["u"] ** 2 > RADIUS_CLAMP,
                                    2.0 * cc["u"], 0.0)
        dhr = du[:, None] @ head.W2r
        dhr[cc["z1r"] <= 0.0] = 0.0
        grads["W2r"] += du[None, :] @ cc["hr"]
        grads["b2r"] += np.array([du.sum()])
        grads["W1r"] += dhr.T @ cc["V"]
        grads["b1r"] += dhr.sum(axis=0)

    return grads


def _f1(scores, labels, threshold=0.5):
    pred = scores >= threshold
    labels = labels.astype(bool)
    tp = np.sum(pred & labels)
    fp = np.sum(pred & ~labels)
    fn = np.sum(~pred & labels)
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def train_head(pairs, cfg: SelectorTrainConfig, head: SphereHead | None = None,
               val_pairs=None) -> SphereHead:
    """Train the sphere head on labeled embedding pairs.

    pairs: iterable of (v_p, v_q, label).  Positives are repeated
    cfg.positive_repetition times; optimization is full-batch with a
    decoupled-weight-decay adaptive-moment optimizer; early stop tracks
    validation F1 with the configured patience and the best-on-validation
    parameters are returned.  Deterministic given (data, config, seed).
    """
    pairs = list(pairs)
    labels = np.array([float(lab) for _, _, lab in pairs])
    if len(np.unique(labels)) < 2:
        raise DegenerateData("training needs both a positive and a negative pair")
    expanded = []
    for vp, vq, lab in pairs:
        reps = cfg.positive_repetition if lab else 1
        expanded.extend([(vp, vq, lab)] * reps)
    Vp = np.stack([np.asarray(vp, float) for vp, _, _ in expanded])
    Vq = np.stack([np.asarray(vq, float) for _, vq, _ in expanded])
    y = np.array([float(lab) for _, _, lab in expanded])

    if val_pairs is None:
        val_pairs = pairs
    Vp_val = np.stack([np.asarray(vp, float) for vp, _, _ in val_pairs])
    Vq_val = np.stack([np.asarray(vq, float) for _, vq, _ in val_pairs])
    y_val = np.array([float(lab) for _, _, lab in val_pairs])

    if head is None:
        head = SphereHead.initialize(d_v=Vp.shape[1], seed=cfg.seed)
    head = head.copy()

    # adaptive-moment state
    m = {k: np.zeros_like(v) for k, v in head.params().items()}
    v2 = {k: np.zeros_like(v) for k, v in head.params().items()}
    beta1, beta2, eps = 0.9, 0.999, 1e-8

    best = head.copy()
    best_f1 = _f1(_forward_pairs(head, Vp_val, Vq_val)["s"], y_val)
    since_best = 0

    for epoch in range(1, cfg.max_epochs + 1):
        grads = head_gradient(head, Vp, Vq, y)
        for name in PARAM_NAMES:
            g = grads[name]
            m[name] = beta1 * m[name] + (1 - beta1) * g
            v2[name] = beta2 * v2[name] + (1 - beta2) * g * g
            mhat = m[name] / (1 - beta1 ** epoch)
            vhat = v2[name] / (1 - beta2 ** epoch)
            param = getattr(head, name)
            param -= cfg.learning_rate * (mhat / (np.sqrt(vhat) + eps)
                                          + cfg.weight_decay * param)
        f1 = _f1(_forward_pairs(head, Vp_val, Vq_val)["s"], y_val)
        if f1 > best_f1:
            best_f1 = f1
            best = head.copy()
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                break
    return best


# ---------------------------------------------------------------------------
# soft-transitivity audit
# ---------------------------------------------------------------------------

def transitivity_audit(spheres, epsilon: float, trials: int, seed: int = 0,
                       slack: float = 1e-9):
    """Sample predicate triples and count soft-transitivity violations.

    Triples (a, b, c) qualify when both Pr(a->b) and Pr(b->c) exceed
    epsilon; a violation is Pr(a->c) <= epsilon - (1-epsilon) r_b/r_a
    minus the numeric slack.  A correct overlap implementation yields 0.
    Returns (violations, qualifying).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spheres = list(spheres)
    centers = np.stack([s.center for s in spheres])
    radii = np.array([s.radius for s in spheres])
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(spheres), size=(trials, 3))
    a, b, c = idx[:, 0], idx[:, 1], idx[:, 2]

    def pr(i, j):
        d = np.linalg.norm(centers[i] - centers[j], axis=1)
        return overlap_prob_arrays(radii[i], radii[j], d)

    qualifying = (pr(a, b) > epsilon) & (pr(b, c) > epsilon)
    bound = epsilon - (1.0 - epsilon) * radii[b] / radii[a]
    violations = qualifying & (pr(a, c) <= bound - slack)
    return int(np.sum(violations)), int(np.sum(qualifying))


# ---------------------------------------------------------------------------
# embedding cache file
# ---------------------------------------------------------------------------

_CACHE_MAGIC = b"EGEC"


def save_embedding_cache(path, entries: dict):
    """entries: canonical predicate string -> embedding vector."""
    keys = sorted(entries)
    vectors = [np.ascontiguousarray(entries[k], dtype=np.float64) for k in keys]
    d_v = len(vectors[0]) if vectors else 0
    blobs = [_CACHE_MAGIC, struct.pack("<II", d_v, len(keys))]
    for k, v in zip(keys, vectors):
        if len(v) != d_v:
            raise DimensionMismatch("inconsistent embedding dimensions in cache")
        kb = k.encode("utf-8")
        blobs.append(struct.pack("<I", len(kb)))
        blobs.append(kb)
        blobs.append(v.tobytes())
    payload = b"".join(blobs)
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as fh:
        fh.write(payload)
        fh.write(digest)


def load_embedding_cache(path) -> dict:
    with open(path, "rb") as fh:
        data = fh.read()
    payload, digest = data[:-32], data[-32:]
    if hashlib.sha256(payload).digest() != digest:
        raise ValueError("embedding cache failed its checksum")
    if payload[:4] != _CACHE_MAGIC:
        raise ValueError("not an embedding cache file")
    d_v, count = struct.unpack("<II", payload[4:12])
    offset = 12
    out = {}
    for _ in range(count):
        (klen,) = struct.unpack("<I", payload[offset:offset + 4])
        offset += 4
        key = payload[offset:offset + klen].decode("utf-8")
        offset += klen
        out[key] = np.frombuffer(payload[offset:offset + 8 * d_v],
                                 dtype=np.float64).copy()
        offset += 8 * d_v
    return out
