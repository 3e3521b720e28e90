"""Clients for the three inference capabilities: generate, embed, score.

Two implementations share one interface: an HTTP client speaking a small
JSON protocol (POST /generate, /embed, /score) and a deterministic
offline mock whose outputs are pure functions of (seed, inputs).
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import requests

log = logging.getLogger(__name__)

FILL_MARKER = "<FILL>"


class BackendError(Exception):
    pass


class BackendUnreachable(BackendError):
    pass


class SchemaViolation(BackendError):
    pass


@dataclass(frozen=True)
class GenRequest:
    prompt: str
    beam: int
    num_return: int
    max_fill_tokens: int = 5

    def __post_init__(self):
        if self.prompt.count(FILL_MARKER) != 1:
            raise SchemaViolation(
                f"prompt must contain exactly one {FILL_MARKER} marker")
        if self.beam < 1 or self.num_return < 1:
            raise SchemaViolation("beam and num_return must be positive")
        if self.num_return > self.beam:
            raise SchemaViolation("num_return must not exceed beam")
        if self.max_fill_tokens < 1:
            raise SchemaViolation("max_fill_tokens must be positive")


@dataclass(frozen=True)
class GenResponse:
    sequences: tuple[str, ...]


@dataclass(frozen=True)
class EmbedResponse:
    vector: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ScoreResponse:
    logits: tuple[float, float, float]  # (E, N, C)


def _truncate_fills(sequences, max_tokens):
    out = []
    for s in sequences:
        toks = s.split()
        if len(toks) > max_tokens:
            log.warning("truncating overlong fill (%d tokens): %r", len(toks), s)
            toks = toks[:max_tokens]
        out.append(" ".join(toks))
    return out


class Backend:
    """Interface shared by the HTTP client and the mock."""

    def generate(self, req: GenRequest) -> GenResponse:
        raise NotImplementedError

    def embed(self, sentence: str) -> EmbedResponse:
        raise NotImplementedError

    def score(self, premise: str, hypothesis: str) -> ScoreResponse:
        raise NotImplementedError

    def embed_many(self, sentences, max_workers: int = 1):
        """Embed a batch; results in input order, identical to sequential calls."""
        return self._map(self.embed, [(s,) for s in sentences], max_workers)

    def score_many(self, pairs, max_workers: int = 1):
        return self._map(lambda p, h: self.score(p, h), pairs, max_workers)

    @staticmethod
    def _map(fn, arg_tuples, max_workers):
        if max_workers <= 1:
            return [fn(*args) for args in arg_tuples]
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = [pool.submit(fn, *args) for args in arg_tuples]
            return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# deterministic offline mock
# ---------------------------------------------------------------------------

# Fill phrases the mock samples from.  The pool is deliberately small so
# different prompts repeat phrases, exercising the >=2-source filter
# downstream, and every phrase resolves under the surface mapper.
MOCK_FILL_POOL = (
    "is connected with",
    "recognizes",
    "is drawn to",
    "adores",
    "knows",
    "is associated with",
    "identifies with",
    "believes in",
    "is devoted to",
    "wants",
    "embodies",
    "supports",
    "opposes",
    "respects",
    "is magnet for",
    "depends on",
    "is attracted to",
    "trusts",
    "fears",
    "is",
)


class MockBackend(Backend):
    """Seeded offline backend; every output is a pure function of
    (seed, inputs) and stable across processes."""

    def __init__(self, seed: int = 0, d_v: int = 768, fill_pool=MOCK_FILL_POOL):
        self.seed = int(seed)
        self.d_v = int(d_v)
        self.fill_pool = tuple(fill_pool)

    def _rng(self, *parts) -> np.random.Generator:
        key = "\x1f".join([str(self.seed), *map(str, parts)])
        digest = hashlib.sha256(key.encode("utf-8")).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "little"))

    def generate(self, req: GenRequest) -> GenResponse:
        rng = self._rng("generate", req.prompt)
        k = min(req.num_return, len(self.fill_pool))
        idx = rng.choice(len(self.fill_pool), size=k, replace=False)
        fills = _truncate_fills([self.fill_pool[i] for i in idx],
                                req.max_fill_tokens)
        return GenResponse(tuple(fills))

    def embed(self, sentence: str) -> EmbedResponse:
        if not sentence:
            raise SchemaViolation("sentence must be non-empty")
        rng = self._rng("embed", sentence)
        v = rng.standard_normal(self.d_v)
        v /= np.linalg.norm(v)
        return EmbedResponse(v)

    def score(self, premise: str, hypothesis: str) -> ScoreResponse:
        if not premise or not hypothesis:
            raise SchemaViolation("premise and hypothesis must be non-empty")
        rng = self._rng("score", premise, hypothesis)
        e, n, c = rng.uniform(-2.0, 2.0, size=3)
        if premise == hypothesis:
            e = max(e, n, c) + 3.0
        return ScoreResponse((float(e), float(n), float(c)))


# ---------------------------------------------------------------------------
# HTTP client
# ---------------------------------------------------------------------------

class HTTPBackend(Backend):
    """JSON-over-HTTP client for a model server exposing the three endpoints."""

    def __init__(self, base_url: str, d_v: int = 768, timeout: float = 60.0,
                 session: requests.Session | None = None):
        self.base_url = base_url.rstrip("/")
        self.d_v = int(d_v)
        self.timeout = timeout
        self.session = session or requests.Session()

    def _post(self, path: str, payload: dict) -> dict:
        try:
            resp = self.session.post(self.base_url + path, json=payload,
                                     timeout=self.timeout)
        except requests.RequestException as exc:
            raise BackendUnreachable(f"{path}: {exc}") from exc
        if resp.status_code != 200:
            raise BackendUnreachable(f"{path}: HTTP {resp.status_code}")
        try:
            return resp.json()
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{path}: response is not JSON") from exc

    def generate(self, req: GenRequest) -> GenResponse:
        body = self._post("/generate", {
            "prompt": req.prompt, "beam": req.beam,
            "num_return": req.num_return,
            "max_fill_tokens": req.max_fill_tokens,
        })
        seqs = body.get("sequences")
        if not isinstance(seqs, list) or not all(isinstance(s, str) for s in seqs):
            raise SchemaViolation("/generate: 'sequences' must be a list of strings")
        if len(seqs) > req.num_return:
            raise SchemaViolation("/generate: more sequences than requested")
        return GenResponse(tuple(_truncate_fills(seqs, req.max_fill_tokens)))

    def embed(self, sentence: str) -> EmbedResponse:
        if not sentence:
            raise SchemaViolation("sentence must be non-empty")
        body = self._post("/embed", {"sentence": sentence})
        vec = body.get("vector")
        if not isinstance(vec, list) or len(vec) != self.d_v:
            raise SchemaViolation(
                f"/embed: expected vector of dimension {self.d_v}")
        arr = np.asarray(vec, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise SchemaViolation("/embed: vector has non-finite components")
        return EmbedResponse(arr)

    def score(self, premise: str, hypothesis: str) -> ScoreResponse:
        if not premise or not hypothesis:
            raise SchemaViolation("premise and hypothesis must be non-empty")
        body = self._post("/score", {"premise": premise, "hypothesis": hypothesis})
        logits = body.get("logits")
        if not isinstance(logits, list) or len(logits) != 3:
            raise SchemaViolation("/score: expected 3 logits (E, N, C)")
        vals = tuple(float(x) for x in logits)
        if not all(np.isfinite(vals)):
            raise SchemaViolation("/score: non-finite logits")
        return ScoreResponse(vals)


def make_backend(spec: str, seed: int = 0, d_v: int = 768,
                 timeout: float = 60.0) -> Backend:
    """Backend factory: 'mock' or a base URL like 'http://host:port'."""
    if spec == "mock":
        return MockBackend(seed=seed, d_v=d_v)
    if spec.startswith("http://") or spec.startswith("https://"):
        return HTTPBackend(spec, d_v=d_v, timeout=timeout)
    raise ValueError(f"backend must be 'mock' or an http(s) URL, got {spec!r}")
