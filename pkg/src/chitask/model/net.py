"""Decoder-only transformer language model in plain numpy.

Pre-norm GPT-style blocks with learned absolute positions, tanh-approximate
GELU, and a hand-written backward pass. Everything runs on the CPU in either
float32 (training/inference default) or float64 (gradient verification).
"""

from __future__ import annotations

import math

import numpy as np

from .config import ModelConfig

_GELU_C = math.sqrt(2.0 / math.pi)
_LN_EPS = 1e-5


class SequenceTooLong(ValueError):
    """Input longer than the model's maximum sequence length."""


def gelu(x):
    u = _GELU_C * (x + 0.044715 * x * x * x)
    return 0.5 * x * (1.0 + np.tanh(u))


def gelu_grad(x):
    u = _GELU_C * (x + 0.044715 * x * x * x)
    t = np.tanh(u)
    du = _GELU_C * (1.0 + 3.0 * 0.044715 * x * x)
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du


def _layer_norm(x, g, b):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + _LN_EPS)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv)


def _layer_norm_backward(dy, cache, g):
    xhat, inv = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


def _softmax(x):
    m = x.max(axis=-1, keepdims=True)
    e = np.exp(x - m)
    return e / e.sum(axis=-1, keepdims=True)


class TransformerLM:
    """Causal language model over token ids; owns its parameter arrays."""

    def __init__(self, cfg: ModelConfig, seed: int = 0, dtype=np.float32):
        self.cfg = cfg
        self.dtype = np.dtype(dtype)
        rng = np.random.Generator(np.random.PCG64(seed))
        D, F, V, S = cfg.embed_dim, cfg.ffn_dim, cfg.vocab_size, cfg.max_seq_len

        def normal(*shape):
            return rng.normal(0.0, 0.02, size=shape).astype(self.dtype)

        def zeros(*shape):
            return np.zeros(shape, dtype=self.dtype)

        def ones(*shape):
            return np.ones(shape, dtype=self.dtype)

        self.params: dict[str, np.ndarray] = {}
        p = self.params
        p["tok_emb"] = normal(V, D)
        p["pos_emb"] = normal(S, D)
        for i in range(cfg.layers):
            pre = f"layers.{i}."
            p[pre + "ln1.g"] = ones(D)
            p[pre + "ln1.b"] = zeros(D)
            p[pre + "attn.w_qkv"] = normal(D, 3 * D)
            p[pre + "attn.b_qkv"] = zeros(3 * D)
            p[pre + "attn.w_out"] = normal(D, D)
            p[pre + "attn.b_out"] = zeros(D)
            p[pre + "ln2.g"] = ones(D)
            p[pre + "ln2.b"] = zeros(D)
            p[pre + "ffn.w1"] = normal(D, F)
            p[pre + "ffn.b1"] = zeros(F)
            p[pre + "ffn.w2"] = normal(F, D)
            p[pre + "ffn.b2"] = zeros(D)
        p["ln_f.g"] = ones(D)
        p["ln_f.b"] = zeros(D)
        p["head"] = normal(D, V)

    def param_names(self) -> list[str]:
        """Fixed, documented parameter order; the checkpoint writes arrays in this order."""
        names = ["tok_emb", "pos_emb"]
        for i in range(self.cfg.layers):
            pre = f"layers.{i}."
            names.extend([
                pre + "ln1.g", pre + "ln1.b",
                pre + "attn.w_qkv", pre + "attn.b_qkv",
                pre + "attn.w_out", pre + "attn.b_out",
                pre + "ln2.g", pre + "ln2.b",
                pre + "ffn.w1", pre + "ffn.b1",
                pre + "ffn.w2", pre + "ffn.b2",
            ])
        names.extend(["ln_f.g", "ln_f.b", "head"])
        return names

    def num_params(self) -> int:
        return sum(int(v.size) for v in self.params.values())

    # --- forward ---

    def _split_heads(self, x):
        B, T, D = x.shape
        H = self.cfg.heads
        return x.reshape(B, T, H, D // H).transpose(0, 2, 1, 3)

    def _merge_heads(self, x):
        B, H, T, dh = x.shape
        return x.transpose(0, 2, 1, 3).reshape(B, T, H * dh)

    def _dropout_mask(self, shape, rng):
        prob = self.cfg.dropout
        keep = (rng.random(shape) >= prob).astype(self.dtype)
        return keep / self.dtype.type(1.0 - prob)

    def forward_logits(self, ids: np.ndarray, train: bool = False, rng=None,
                       pos_offset: int = 0, word_dropout: float = 0.0):
        """Causal logits for a (B, T) id batch; returns (logits, cache).

        ``pos_offset`` shifts the learned position slice (training-time jitter
        that teaches depth invariance); ``word_dropout`` zeroes whole token
        embeddings so no single context token stays load-bearing. Both are
        training-only; inference uses offset 0 and no dropout.
        """
        ids = np.asarray(ids)
        if ids.ndim == 1:
            ids = ids[None, :]
        B, T = ids.shape
        if T > self.cfg.max_seq_len:
            raise SequenceTooLong(f"sequence length {T} exceeds max {self.cfg.max_seq_len}")
        if pos_offset < 0 or T + pos_offset > self.cfg.max_seq_len:
            raise ValueError("position offset out of range")
        p = self.params
        use_drop = train and self.cfg.dropout > 0.0
        use_word_drop = train and word_dropout > 0.0
        if (use_drop or use_word_drop) and rng is None:
            raise ValueError("training-mode forward with dropout needs an rng")
        scale = 1.0 / math.sqrt(self.cfg.embed_dim // self.cfg.heads)
        causal = np.triu(np.ones((T, T), dtype=bool), k=1)

        tok = p["tok_emb"][ids]
        word_mask = None
        if use_word_drop:
            keep = (rng.random((B, T, 1)) >= word_dropout).astype(self.dtype)
            word_mask = keep / self.dtype.type(1.0 - word_dropout)
            tok = tok * word_mask
        x = tok + p["pos_emb"][pos_offset:pos_offset + T][None, :, :]
        emb_mask = self._dropout_mask(x.shape, rng) if use_drop else None
        if emb_mask is not None:
            x = x * emb_mask

        layer_caches = []
        for i in range(self.cfg.layers):
            pre = f"layers.{i}."
            x_in = x
            a, ln1_cache = _layer_norm(x_in, p[pre + "ln1.g"], p[pre + "ln1.b"])
            qkv = a @ p[pre + "attn.w_qkv"] + p[pre + "attn.b_qkv"]
            q, k, v = np.split(qkv, 3, axis=-1)
            q, k, v = self._split_heads(q), self._split_heads(k), self._split_heads(v)
            att = (q @ k.transpose(0, 1, 3, 2)) * scale
            att = np.where(causal[None, None, :, :], -np.inf, att)
            probs = _softmax(att)
            ctx = probs @ v
            merged = self._merge_heads(ctx)
            o = merged @ p[pre + "attn.w_out"] + p[pre + "attn.b_out"]
            attn_mask = self._dropout_mask(o.shape, rng) if use_drop else None
            if attn_mask is not None:
                o = o * attn_mask
            x = x_in + o

            x_mid = x
            a2, ln2_cache = _layer_norm(x_mid, p[pre + "ln2.g"], p[pre + "ln2.b"])
            z = a2 @ p[pre + "ffn.w1"] + p[pre + "ffn.b1"]
            h = gelu(z)
            f = h @ p[pre + "ffn.w2"] + p[pre + "ffn.b2"]
            ffn_mask = self._dropout_mask(f.shape, rng) if use_drop else None
            if ffn_mask is not None:
                f = f * ffn_mask
            x = x_mid + f
            layer_caches.append({
                "a": a, "ln1": ln1_cache, "q": q, "k": k, "v": v, "probs": probs,
                "merged": merged, "attn_mask": attn_mask,
                "a2": a2, "ln2": ln2_cache, "z": z, "h": h, "ffn_mask": ffn_mask,
            })

        xf, lnf_cache = _layer_norm(x, p["ln_f.g"], p["ln_f.b"])
        logits = xf @ p["head"]
        cache = {"ids": ids, "emb_mask": emb_mask, "word_mask": word_mask,
                 "layers": layer_caches, "xf": xf, "lnf": lnf_cache, "scale": scale,
                 "pos_offset": pos_offset}
        return logits, cache

    def forward(self, ids) -> np.ndarray:
        """Next-token probability distributions for a single id sequence (T, V)."""
        ids = np.asarray(ids, dtype=np.int64)
        if ids.ndim != 1:
            raise ValueError("forward expects a single id sequence")
        logits, _ = self.forward_logits(ids[None, :], train=False)
        return _softmax(logits[0])

    # --- loss and gradients ---

    def loss(self, ids, weights=None, loss_mask=None, train: bool = False, rng=None,
             pos_offset: int = 0, word_dropout: float = 0.0) -> float:
        """Weighted masked cross-entropy, normalized by the masked-in token count.

        ``weights=None`` is the unweighted path (no multiplications applied);
        ``loss_mask=None`` supervises every predictable position.
        """
        val, _, _ = self._loss_internal(ids, weights, loss_mask, train=train, rng=rng,
                                        want_grads=False, pos_offset=pos_offset,
                                        word_dropout=word_dropout)
        return val

    def loss_and_grads(self, ids, weights=None, loss_mask=None, train: bool = False, rng=None,
                       pos_offset: int = 0, word_dropout: float = 0.0):
        loss, grads, count = self._loss_internal(ids, weights, loss_mask, train=train,
                                                 rng=rng, want_grads=True,
                                                 pos_offset=pos_offset,
                                                 word_dropout=word_dropout)
        return loss, grads, count

    def _loss_internal(self, ids, weights, loss_mask, train, rng, want_grads, pos_offset=0,
                       word_dropout=0.0):
        ids = np.asarray(ids)
        if ids.ndim == 1:
            ids = ids[None, :]
            if weights is not None:
                weights = np.asarray(weights)[None, :]
            if loss_mask is not None:
                loss_mask = np.asarray(loss_mask)[None, :]
        B, T = ids.shape
        if loss_mask is None:
            loss_mask = np.ones((B, T), dtype=bool)
        loss_mask = np.asarray(loss_mask, dtype=bool).copy()
        loss_mask[:, 0] = False  # nothing to condition the first token on

        logits, cache = self.forward_logits(ids, train=train, rng=rng, pos_offset=pos_offset,
                                            word_dropout=word_dropout)
        # position i-1 predicts token i
        shift_logits = logits[:, :-1, :]
        targets = ids[:, 1:]
        m = logits.max(axis=-1, keepdims=True)[:, :-1, :]
        z = shift_logits - m
        lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
        logp_target = np.take_along_axis(z - lse, targets[..., None], axis=-1)[..., 0]
        nll = -logp_target
        mask = loss_mask[:, 1:]
        count = int(mask.sum())
        if count == 0:
            raise ValueError("loss_mask selects no tokens")
        if weights is not None:
            w = np.asarray(weights, dtype=self.dtype)[:, 1:]
            total = float((nll * w * mask).sum())
        else:
            total = float((nll * mask).sum())
        loss = total / count
        if not want_grads:
            return loss, None, count

        coeff = mask.astype(self.dtype) / self.dtype.type(count)
        if weights is not None:
            coeff = coeff * w
        probs = np.exp(z - lse)
        dshift = probs * coeff[..., None]
        np.put_along_axis(
            dshift, targets[..., None],
            np.take_along_axis(dshift, targets[..., None], axis=-1) - coeff[..., None],
            axis=-1,
        )
        dlogits = np.zeros_like(logits)
        dlogits[:, :-1, :] = dshift
        grads = self._backward(dlogits, cache)
        return loss, grads, count

    @staticmethod
    def _flat_matmul(x, dy):
        """Sum over batch and time of x^T dy, via one BLAS call."""
        xf = x.reshape(-1, x.shape[-1])
        dyf = dy.reshape(-1, dy.shape[-1])
        return xf.T @ dyf

    def _backward(self, dlogits, cache):
        p = self.params
        grads = {name: np.zeros_like(arr) for name, arr in p.items()}
        xf = cache["xf"]
        B, T, D = xf.shape

        grads["head"] += self._flat_matmul(xf, dlogits)
        dxf = dlogits @ p["head"].T
        dx, dg, db = _layer_norm_backward(dxf, cache["lnf"], p["ln_f.g"])
        grads["ln_f.g"] += dg
        grads["ln_f.b"] += db

        for i in reversed(range(self.cfg.layers)):
            pre = f"layers.{i}."
            c = cache["layers"][i]
            # FFN block
            df = dx * c["ffn_mask"] if c["ffn_mask"] is not None else dx
            grads[pre + "ffn.w2"] += self._flat_matmul(c["h"], df)
            grads[pre + "ffn.b2"] += df.sum(axis=(0, 1))
            dh = df @ p[pre + "ffn.w2"].T
            dz = dh * gelu_grad(c["z"])
            grads[pre + "ffn.w1"] += self._flat_matmul(c["a2"], dz)
            grads[pre + "ffn.b1"] += dz.sum(axis=(0, 1))
            da2 = dz @ p[pre + "ffn.w1"].T
            dx_mid, dg, db = _layer_norm_backward(da2, c["ln2"], p[pre + "ln2.g"])
            grads[pre + "ln2.g"] += dg
            grads[pre + "ln2.b"] += db
            dx = dx + dx_mid

            # attention block
            do = dx * c["attn_mask"] if c["attn_mask"] is not None else dx
            grads[pre + "attn.w_out"] += self._flat_matmul(c["merged"], do)
            grads[pre + "attn.b_out"] += do.sum(axis=(0, 1))
            dmerged = do @ p[pre + "attn.w_out"].T
            dctx = self._split_heads(dmerged)
            probs = c["probs"]
            dprobs = dctx @ c["v"].transpose(0, 1, 3, 2)
            dv = probs.transpose(0, 1, 3, 2) @ dctx
            datt = probs * (dprobs - (dprobs * probs).sum(axis=-1, keepdims=True))
            datt = datt * cache["scale"]
            dq = datt @ c["k"]
            dk = datt.transpose(0, 1, 3, 2) @ c["q"]
            dqkv = np.concatenate(
                [self._merge_heads(dq), self._merge_heads(dk), self._merge_heads(dv)], axis=-1
            )
            grads[pre + "attn.w_qkv"] += self._flat_matmul(c["a"], dqkv)
            grads[pre + "attn.b_qkv"] += dqkv.sum(axis=(0, 1))
            da = dqkv @ p[pre + "attn.w_qkv"].T
            dx_in, dg, db = _layer_norm_backward(da, c["ln1"], p[pre + "ln1.g"])
            grads[pre + "ln1.g"] += dg
            grads[pre + "ln1.b"] += db
            dx = dx + dx_in

        if cache["emb_mask"] is not None:
            dx = dx * cache["emb_mask"]
        o = cache["pos_offset"]
        grads["pos_emb"][o:o + T] += dx.sum(axis=0)
        dtok = dx if cache["word_mask"] is None else dx * cache["word_mask"]
        np.add.at(grads["tok_emb"], cache["ids"], dtok)
        return grads
