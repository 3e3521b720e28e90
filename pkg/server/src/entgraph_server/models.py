"""Capability wrappers around the hosted transformer models.

Each wrapper owns its tokenizer and model and exposes one plain-Python
method. Inference is wrapped in a lock because the endpoints may be
served from a thread pool and the models are not re-entrant.
"""

from __future__ import annotations

import re
import threading

import numpy as np
import torch

from .config import ServerConfig


class CapabilityDisabled(RuntimeError):
    """Raised when a request hits an endpoint with no model behind it."""


class Generator:
    def __init__(self, cfg: ServerConfig):
        from transformers import AutoModelForSeq2SeqLM, AutoTokenizer
        self.cfg = cfg
        self.tokenizer = AutoTokenizer.from_pretrained(cfg.generator_model)
        self.model = AutoModelForSeq2SeqLM.from_pretrained(
            cfg.generator_model).to(cfg.device).eval()
        self._lock = threading.Lock()

    def generate(self, prompt: str, beam: int, num_return: int,
                 max_fill_tokens: int) -> list[str]:
        text = prompt.replace(self.cfg.fill_marker, self.cfg.fill_sentinel)
        num_return = min(num_return, beam)
        with self._lock, torch.no_grad():
            inputs = self.tokenizer(text, return_tensors="pt").to(
                self.cfg.device)
            out = self.model.generate(
                **inputs,
                num_beams=beam,
                num_return_sequences=num_return,
                max_new_tokens=max_fill_tokens + 4,
                early_stopping=True,
            )
        fills = []
        for seq in out:
            decoded = self.tokenizer.decode(seq, skip_special_tokens=False)
            fill = self._extract_fill(decoded)
            if fill:
                fills.append(" ".join(fill.split()[:max_fill_tokens]))
        # preserve beam order, drop duplicates and empty fills
        seen = set()
        unique = []
        for f in fills:
            if f not in seen:
                seen.add(f)
                unique.append(f)
        return unique[:num_return]

    def _extract_fill(self, decoded: str) -> str:
        # span-filling models answer "<extra_id_0> fill <extra_id_1> ...";
        # take the text between the first sentinel and the next special
        start = decoded.find(self.cfg.fill_sentinel)
        if start >= 0:
            decoded = decoded[start + len(self.cfg.fill_sentinel):]
        decoded = re.split(r"<extra_id_\d+>", decoded)[0]
        for tok in (self.tokenizer.eos_token, self.tokenizer.pad_token,
                    self.tokenizer.unk_token):
            if tok:
                decoded = decoded.replace(tok, " ")
        return decoded.strip()


class Embedder:
    def __init__(self, cfg: ServerConfig):
        from transformers import AutoModel, AutoTokenizer
        self.cfg = cfg
        self.tokenizer = AutoTokenizer.from_pretrained(cfg.embedder_model)
        self.model = AutoModel.from_pretrained(
            cfg.embedder_model).to(cfg.device).eval()
        self.d_v = int(self.model.config.hidden_size)
        self._lock = threading.Lock()

    def embed(self, sentence: str) -> list[float]:
        with self._lock, torch.no_grad():
            inputs = self.tokenizer(sentence, return_tensors="pt",
                                    truncation=True).to(self.cfg.device)
            hidden = self.model(**inputs).last_hidden_state[0]
        vec = hidden.mean(dim=0).double().cpu().numpy()
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
        return [float(x) for x in vec]


class Scorer:
    def __init__(self, cfg: ServerConfig):
        from transformers import (AutoModelForSequenceClassification,
                                  AutoTokenizer)
        self.cfg = cfg
        self.tokenizer = AutoTokenizer.from_pretrained(cfg.scorer_model)
        self.model = AutoModelForSequenceClassification.from_pretrained(
            cfg.scorer_model).to(cfg.device).eval()
        if self.model.config.num_labels != 3:
            raise ValueError("scorer model must emit exactly 3 logits")
        # position of E, N, C in the hosted model's output order
        order = cfg.scorer_label_order
        self._perm = [order.index(lab) for lab in ("E", "N", "C")]
        self._lock = threading.Lock()

    def score(self, premise: str, hypothesis: str) -> list[float]:
        with self._lock, torch.no_grad():
            inputs = self.tokenizer(premise, hypothesis,
                                    return_tensors="pt",
                                    truncation=True).to(self.cfg.device)
            logits = self.model(**inputs).logits[0].double().cpu().numpy()
        return [float(logits[i]) for i in self._perm]


class Capabilities:
    """Lazy holder for whichever capabilities the config enables."""

    def __init__(self, cfg: ServerConfig):
        self.cfg = cfg
        self.generator = Generator(cfg) if cfg.generator_model else None
        self.embedder = Embedder(cfg) if cfg.embedder_model else None
        self.scorer = Scorer(cfg) if cfg.scorer_model else None

    def require(self, name: str):
        cap = getattr(self, name)
        if cap is None:
            raise CapabilityDisabled(f"{name} capability is not configured")
        return cap
