"""Greedy decoding with stop tokens, over an incremental attention cache."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .net import SequenceTooLong, TransformerLM, _layer_norm, _softmax, gelu


@dataclass
class GenerationResult:
    ids: list[int]        # generated suffix; includes the stop token when one fired
    truncated: bool       # max_new or the model window was hit before any stop token


class DecodeSession:
    """Single-sequence inference state: cached keys/values per layer.

    Prefill runs the whole prefix in parallel; each appended token then costs
    one incremental step. Inference never applies dropout.
    """

    def __init__(self, model: TransformerLM, prefix_ids):
        self.model = model
        self.cfg = model.cfg
        self.scale = 1.0 / math.sqrt(self.cfg.embed_dim // self.cfg.heads)
        self.length = 0
        self.keys = [None] * self.cfg.layers   # per layer (H, T, dh)
        self.values = [None] * self.cfg.layers
        self.last_logits = None
        prefix_ids = list(prefix_ids)
        if not prefix_ids:
            raise ValueError("prefix must be nonempty")
        if len(prefix_ids) > self.cfg.max_seq_len:
            raise SequenceTooLong(f"prefix length {len(prefix_ids)} exceeds max")
        self._prefill(np.asarray(prefix_ids, dtype=np.int64))

    def _heads(self, x):
        T = x.shape[0]
        H = self.cfg.heads
        return x.reshape(T, H, -1).transpose(1, 0, 2)  # (H, T, dh)

    def _prefill(self, ids):
        p = self.model.params
        T = ids.shape[0]
        causal = np.triu(np.ones((T, T), dtype=bool), k=1)
        x = p["tok_emb"][ids] + p["pos_emb"][:T]
        for i in range(self.cfg.layers):
            pre = f"layers.{i}."
            a, _ = _layer_norm(x, p[pre + "ln1.g"], p[pre + "ln1.b"])
            qkv = a @ p[pre + "attn.w_qkv"] + p[pre + "attn.b_qkv"]
            q, k, v = np.split(qkv, 3, axis=-1)
            q, k, v = self._heads(q), self._heads(k), self._heads(v)
            att = (q @ k.transpose(0, 2, 1)) * self.scale
            att = np.where(causal[None, :, :], -np.inf, att)
            probs = _softmax(att)
            ctx = (probs @ v).transpose(1, 0, 2).reshape(T, -1)
            x = x + (ctx @ p[pre + "attn.w_out"] + p[pre + "attn.b_out"])
            a2, _ = _layer_norm(x, p[pre + "ln2.g"], p[pre + "ln2.b"])
            x = x + (gelu(a2 @ p[pre + "ffn.w1"] + p[pre + "ffn.b1"]) @ p[pre + "ffn.w2"]
                     + p[pre + "ffn.b2"])
            self.keys[i], self.values[i] = k, v
        xf, _ = _layer_norm(x[-1:], p["ln_f.g"], p["ln_f.b"])
        self.last_logits = (xf @ p["head"])[0]
        self.length = T

    def append(self, token_id: int) -> None:
        """Advance the session by one token; refreshes the last-position logits."""
        if self.length + 1 > self.cfg.max_seq_len:
            raise SequenceTooLong("session is at the model window")
        p = self.model.params
        t = self.length
        x = p["tok_emb"][token_id] + p["pos_emb"][t]  # (D,)
        x = x[None, :]
        for i in range(self.cfg.layers):
            pre = f"layers.{i}."
            a, _ = _layer_norm(x, p[pre + "ln1.g"], p[pre + "ln1.b"])
            qkv = a @ p[pre + "attn.w_qkv"] + p[pre + "attn.b_qkv"]
            q, k, v = np.split(qkv[0], 3, axis=-1)
            H = self.cfg.heads
            q = q.reshape(H, 1, -1)
            k = k.reshape(H, 1, -1)
            v = v.reshape(H, 1, -1)
            self.keys[i] = np.concatenate([self.keys[i], k], axis=1)
            self.values[i] = np.concatenate([self.values[i], v], axis=1)
            att = (q @ self.keys[i].transpose(0, 2, 1)) * self.scale  # (H, 1, T+1)
            probs = _softmax(att)
            ctx = (probs @ self.values[i]).transpose(1, 0, 2).reshape(1, -1)
            x = x + (ctx @ p[pre + "attn.w_out"] + p[pre + "attn.b_out"])
            a2, _ = _layer_norm(x, p[pre + "ln2.g"], p[pre + "ln2.b"])
            x = x + (gelu(a2 @ p[pre + "ffn.w1"] + p[pre + "ffn.b1"]) @ p[pre + "ffn.w2"]
                     + p[pre + "ffn.b2"])
        xf, _ = _layer_norm(x, p["ln_f.g"], p["ln_f.b"])
        self.last_logits = (xf @ p["head"])[0]
        self.length = t + 1

    def extend(self, token_ids) -> None:
        for tok in token_ids:
            self.append(int(tok))

    def next_token(self) -> int:
        # argmax takes the lowest id on ties
        return int(np.argmax(self.last_logits))


def generate_until(model: TransformerLM, prefix_ids, stop_ids, max_new: int) -> GenerationResult:
    """Greedily append argmax tokens until a stop token fires or budgets run out."""
    session = DecodeSession(model, prefix_ids)
    return continue_until(session, stop_ids, max_new)


def continue_until(session: DecodeSession, stop_ids, max_new: int) -> GenerationResult:
    stop_ids = set(int(s) for s in stop_ids)
    out: list[int] = []
    for _ in range(max_new):
        if session.length + 1 > session.cfg.max_seq_len:
            return GenerationResult(out, True)
        tok = session.next_token()
        session.append(tok)
        out.append(tok)
        if tok in stop_ids:
            return GenerationResult(out, False)
    return GenerationResult(out, True)
