"""Bidirectional GRU encoder, additive attention and conditional-GRU
decoder with interchangeable output heads.

The word and BPE variants share a single softmax head; the factored
variant keeps one decoder state and diversifies the fused output layer
into two projections, one over lemmas and one over factor tags.  The
decoder feedback is the previous symbol embedding, or for the factored
variant the concatenation of the lemma and factor embeddings.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import tensor as T
from .params import CorruptModelError, ParamStore
from .tensor import Tensor

VARIANTS = ("word", "bpe", "factored")


@dataclass
class ModelConfig:
    variant: str
    src_vocab_size: int
    trg_vocab_size: int                 # word/bpe target or lemma vocab
    factor_vocab_size: int = 0
    emb_dim: int = 620
    rnn_dim: int = 1000
    factor_emb_dim: int = 64
    att_dim: int = 0                    # 0 means rnn_dim
    out_hidden_dim: int = 0             # 0 means emb_dim
    max_len: int = 120
    # resource references carried inside the model container
    src_vocab_file: str | None = None
    trg_vocab_file: str | None = None
    factor_vocab_file: str | None = None
    merges_file: str | None = None
    lexicon_file: str | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"ModelConfig: unknown variant {self.variant!r}")
        for name in ("src_vocab_size", "trg_vocab_size", "emb_dim", "rnn_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"ModelConfig: {name} must be >= 1")
        if self.variant == "factored":
            if self.factor_vocab_size < 1:
                raise ValueError(
                    "ModelConfig: factored variant needs factor_vocab_size")
            if self.factor_emb_dim < 1:
                raise ValueError(
                    "ModelConfig: factored variant needs factor_emb_dim")
        if self.att_dim == 0:
            self.att_dim = self.rnn_dim
        if self.out_hidden_dim == 0:
            self.out_hidden_dim = self.emb_dim

    @property
    def feedback_dim(self):
        if self.variant == "factored":
            return self.emb_dim + self.factor_emb_dim
        return self.emb_dim

    @property
    def ctx_dim(self):
        return 2 * self.rnn_dim

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class EncoderStates:
    annotations: Tensor           # (B, S, 2*rnn_dim), zero on masked slots
    mask: np.ndarray              # (B, S)
    att_keys: Tensor              # (B, S, att_dim), precomputed U @ h_j


def _zeros(shape, dtype):
    return Tensor(np.zeros(shape, dtype=dtype))


def param_layout(config):
    """Ordered (name, kind, shape) triples defining the parameter set."""
    c = config
    layout = []

    def weight(name, *shape):
        layout.append((name, "xavier", shape))

    def bias(name, dim):
        layout.append((name, "zeros", (dim,)))

    def gru(prefix, in_dim, dim):
        for gate in ("z", "r", "h"):
            weight(f"{prefix}_W{gate}", in_dim, dim)
            weight(f"{prefix}_U{gate}", dim, dim)
            bias(f"{prefix}_b{gate}", dim)

    weight("enc_emb", c.src_vocab_size, c.emb_dim)
    weight("dec_emb", c.trg_vocab_size, c.emb_dim)
    if c.variant == "factored":
        weight("fact_emb", c.factor_vocab_size, c.factor_emb_dim)
    gru("enc_fwd", c.emb_dim, c.rnn_dim)
    gru("enc_bwd", c.emb_dim, c.rnn_dim)
    weight("init_W", c.ctx_dim, c.rnn_dim)
    bias("init_b", c.rnn_dim)
    weight("att_W", c.rnn_dim, c.att_dim)
    weight("att_U", c.ctx_dim, c.att_dim)
    weight("att_v", c.att_dim)
    gru("dec1", c.feedback_dim, c.rnn_dim)
    gru("dec2", c.ctx_dim, c.rnn_dim)
    weight("out_W_state", c.rnn_dim, c.out_hidden_dim)
    weight("out_W_fb", c.feedback_dim, c.out_hidden_dim)
    weight("out_W_ctx", c.ctx_dim, c.out_hidden_dim)
    bias("out_b", c.out_hidden_dim)
    weight("out_proj", c.out_hidden_dim, c.trg_vocab_size)
    bias("out_proj_b", c.trg_vocab_size)
    if c.variant == "factored":
        weight("fact_proj", c.out_hidden_dim, c.factor_vocab_size)
        bias("fact_proj_b", c.factor_vocab_size)
    return layout


class NmtModel:
    def __init__(self, config: ModelConfig, params: ParamStore):
        self.config = config
        self.params = params

    @property
    def dtype(self):
        return next(iter(self.params.values())).data.dtype

    # -- construction -----------------------------------------------------

    @classmethod
    def build(cls, config, seed, dtype=np.float32):
        """Xavier-initialized parameters in a fixed, seed-stable order."""
        rng = np.random.default_rng(seed)
        store = ParamStore()
        for name, kind, shape in param_layout(config):
            if kind == "xavier":
                store.add(name, T.xavier_init(shape, rng, dtype=dtype))
            else:
                store.add(name, Tensor(np.zeros(shape, dtype=dtype)))
        return cls(config, store)

    # -- recurrent pieces ---------------------------------------------------

    def _gru_step(self, prefix, x, h, mask_col=None):
        p = self.params
        z = T.sigmoid(T.matmul(x, p[f"{prefix}_Wz"]) +
                      T.matmul(h, p[f"{prefix}_Uz"]) + p[f"{prefix}_bz"])
        r = T.sigmoid(T.matmul(x, p[f"{prefix}_Wr"]) +
                      T.matmul(h, p[f"{prefix}_Ur"]) + p[f"{prefix}_br"])
        hbar = T.tanh(T.matmul(x, p[f"{prefix}_Wh"]) +
                      T.matmul(T.mul(r, h), p[f"{prefix}_Uh"]) +
                      p[f"{prefix}_bh"])
        h_new = h + T.mul(z, hbar - h)
        if mask_col is not None:
            # masked rows keep their previous state
            h_new = h + T.mul(Tensor(mask_col), h_new - h)
        return h_new

    def encode(self, src_ids, src_mask=None):
        """Bidirectional pass; annotations zeroed on padded positions."""
        ids = np.asarray(src_ids)
        if ids.ndim == 1:
            ids = ids[None, :]
        if ids.shape[1] == 0:
            raise ValueError("encode: empty source sequence")
        b, s = ids.shape
        mask = np.ones((b, s), dtype=self.dtype) if src_mask is None \
            else np.asarray(src_mask, dtype=self.dtype)
        p = self.params
        dtype = self.dtype
        fwd, bwd = [], [None] * s
        h = _zeros((b, self.config.rnn_dim), dtype)
        for t in range(s):
            x = T.lookup(p["enc_emb"], ids[:, t])
            h = self._gru_step("enc_fwd", x, h, mask[:, t:t + 1])
            fwd.append(h)
        h = _zeros((b, self.config.rnn_dim), dtype)
        for t in reversed(range(s)):
            x = T.lookup(p["enc_emb"], ids[:, t])
            h = self._gru_step("enc_bwd", x, h, mask[:, t:t + 1])
            bwd[t] = h
        rows = [T.reshape(T.concat([f, bk], axis=1), (b, 1, self.config.ctx_dim))
                for f, bk in zip(fwd, bwd)]
        ann = T.concat(rows, axis=1)
        ann = T.mul(ann, Tensor(mask[:, :, None]))
        keys = T.reshape(
            T.matmul(T.reshape(ann, (b * s, self.config.ctx_dim)), p["att_U"]),
            (b, s, self.config.att_dim))
        return EncoderStates(ann, mask, keys)

    def init_state(self, enc):
        """tanh affine map of the mean annotation."""
        b, s, _ = enc.annotations.data.shape
        counts = enc.mask.sum(axis=1, keepdims=True)
        recip = Tensor((1.0 / np.maximum(counts, 1.0)).astype(self.dtype))
        mean = T.mul(T.tensor_sum(enc.annotations, axis=1), recip)
        return T.tanh(T.matmul(mean, self.params["init_W"])
                      + self.params["init_b"])

    def attend(self, state, enc):
        """Additive scoring v . tanh(W s + U h_j), masked softmax mix."""
        p = self.params
        b, s, _ = enc.annotations.data.shape
        k = state.data.shape[0]
        q = T.matmul(state, p["att_W"])
        scores3 = T.tanh(T.add(enc.att_keys, T.reshape(q, (k, 1, self.config.att_dim))))
        scores = T.reshape(
            T.matmul(T.reshape(scores3, (k * s, self.config.att_dim)), p["att_v"]),
            (k, s))
        weights = T.softmax(scores, axis=-1, mask=enc.mask)
        mixed = T.mul(T.reshape(weights, (k, s, 1)), enc.annotations)
        context = T.tensor_sum(mixed, axis=1)
        return context, weights

    def cgru_step(self, state, feedback, enc, mask_col=None):
        """GRU-1 on feedback, attention read, GRU-2 on the context."""
        s1 = self._gru_step("dec1", feedback, state, mask_col)
        context, weights = self.attend(s1, enc)
        s2 = self._gru_step("dec2", context, s1, mask_col)
        return s2, context, weights

    def feedback_embedding(self, lemma_ids, factor_ids=None, batch=1):
        """Previous-symbol embedding; zeros at the first step."""
        p = self.params
        if lemma_ids is None:
            return _zeros((batch, self.config.feedback_dim), self.dtype)
        fb = T.lookup(p["dec_emb"], np.asarray(lemma_ids))
        if self.config.variant == "factored":
            if factor_ids is None:
                raise ValueError("feedback_embedding: factored variant needs "
                                 "factor ids")
            fb = T.concat([fb, T.lookup(p["fact_emb"], np.asarray(factor_ids))],
                          axis=1)
        return fb

    # -- output heads -------------------------------------------------------

    def _fused_hidden(self, state, feedback, context):
        p = self.params
        return T.tanh(T.matmul(state, p["out_W_state"])
                      + T.matmul(feedback, p["out_W_fb"])
                      + T.matmul(context, p["out_W_ctx"])
                      + p["out_b"])

    def output_word(self, state, feedback, context):
        hidden = self._fused_hidden(state, feedback, context)
        return T.matmul(hidden, self.params["out_proj"]) + self.params["out_proj_b"]

    def output_factored(self, state, feedback, context):
        hidden = self._fused_hidden(state, feedback, context)
        lemma_logits = T.matmul(hidden, self.params["out_proj"]) \
            + self.params["out_proj_b"]
        factor_logits = T.matmul(hidden, self.params["fact_proj"]) \
            + self.params["fact_proj_b"]
        return lemma_logits, factor_logits

    # -- teacher-forced loss -------------------------------------------------

    def forward_loss(self, batch, lambda_lemma=1.0, lambda_factor=1.0):
        """Mean token cross-entropy per stream (weighted sum in 'total')."""
        c = self.config
        factored = c.variant == "factored"
        if factored and batch.factors is None:
            raise ValueError("forward_loss: factored model needs factor stream")
        enc = self.encode(batch.src, batch.src_mask)
        state = self.init_state(enc)
        b, t_max = batch.trg.shape
        if t_max == 0:
            zero = Tensor(np.zeros((), dtype=self.dtype))
            out = {"lemma" if factored else "word": zero, "total": zero}
            if factored:
                out["factor"] = zero
            return out
        lemma_terms, factor_terms = [], []
        for t in range(t_max):
            if t == 0:
                fb = self.feedback_embedding(None, batch=b)
            else:
                fb = self.feedback_embedding(
                    batch.trg[:, t - 1],
                    batch.factors[:, t - 1] if factored else None)
            state, context, _ = self.cgru_step(
                state, fb, enc, batch.trg_mask[:, t:t + 1])
            mask_col = Tensor(batch.trg_mask[:, t].astype(self.dtype))
            if factored:
                lemma_logits, factor_logits = self.output_factored(
                    state, fb, context)
                lemma_terms.append(T.tensor_sum(T.mul(
                    T.cross_entropy_logits(lemma_logits, batch.trg[:, t]),
                    mask_col)))
                factor_terms.append(T.tensor_sum(T.mul(
                    T.cross_entropy_logits(factor_logits, batch.factors[:, t]),
                    mask_col)))
            else:
                logits = self.output_word(state, fb, context)
                lemma_terms.append(T.tensor_sum(T.mul(
                    T.cross_entropy_logits(logits, batch.trg[:, t]),
                    mask_col)))
        tokens = max(float(batch.trg_mask.sum()), 1.0)
        losses = {}
        main = lemma_terms[0]
        for term in lemma_terms[1:]:
            main = main + term
        main = T.mul(main, 1.0 / tokens)
        losses["lemma" if factored else "word"] = main
        total = T.mul(main, lambda_lemma) if factored else main
        if factored:
            fact = factor_terms[0]
            for term in factor_terms[1:]:
                fact = fact + term
            fact = T.mul(fact, 1.0 / tokens)
            losses["factor"] = fact
            total = total + T.mul(fact, lambda_factor)
        losses["total"] = total
        return losses

    # -- container ------------------------------------------------------------

    def save(self, path):
        self.params.save(path, config=self.config.to_dict())

    @classmethod
    def load(cls, path):
        store, config_dict = ParamStore.load(path)
        if config_dict is None:
            raise CorruptModelError(f"{path}: container has no model config")
        try:
            config = ModelConfig.from_dict(config_dict)
        except (TypeError, ValueError) as exc:
            raise CorruptModelError(f"{path}: bad model config ({exc})") from None
        want = {name: shape for name, _, shape in param_layout(config)}
        have = {n: p.data.shape for n, p in store.items()}
        if want != have:
            raise CorruptModelError(
                f"{path}: parameter set does not match config "
                f"(variant {config.variant})")
        return cls(config, store)
