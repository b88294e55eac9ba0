"""Greedy and beam-search decoding, alignment extraction, UNK replacement
and the per-variant translation pipeline.

Factored decoding keeps the two output streams synchronized by
construction: the factor stream is slaved to the lemma stream, the
lemma end-of-sequence ends both, and a hypothesis never carries streams
of different lengths.  Beam scores are cumulative log probabilities,
compared after dividing by a length exponent so short hypotheses do
not win by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .bpe import bpe_apply, bpe_undo
from .morphology import fallback_tag, parse_factor_string, recombine
from .vocab import EOS_ID, UNK_TOKEN


@dataclass
class BeamConfig:
    beam_size: int = 12
    max_len: int | None = None      # None: 2 * source length + 5
    length_norm: float = 1.0        # score / length**exponent
    factor_mode: str = "argmax"     # or "product" (cross-product expansion)

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("BeamConfig: beam_size must be >= 1")
        if self.factor_mode not in ("argmax", "product"):
            raise ValueError(
                f"BeamConfig: unknown factor_mode {self.factor_mode!r}")

    def limit(self, src_len):
        return self.max_len if self.max_len is not None else 2 * src_len + 5


@dataclass
class Hypothesis:
    tokens: list = field(default_factory=list)        # emitted ids, no EOS
    factor_tokens: list | None = None
    score: float = 0.0                                # cumulative log prob
    state: np.ndarray | None = None
    attention: list = field(default_factory=list)     # one row per token
    finished: bool = False
    steps: int = 0                                    # scored steps incl. EOS

    def normalized(self, exponent):
        return self.score / max(self.steps, 1) ** exponent


@dataclass
class TranslationResult:
    tokens: list                     # native symbols (words/subwords/lemmas)
    attention: np.ndarray            # (target steps, source positions)
    origins: list                    # per token: model | unk-replaced-*
    score: float                     # length-normalized log prob
    raw_score: float
    factor_tokens: list | None = None


def log_softmax(logits):
    m = logits.max(axis=-1, keepdims=True)
    shifted = logits - m
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _decode_step(model, enc, states, prev_lemma, prev_factor):
    """Batched decoder step over live hypotheses; returns numpy views."""
    k = states.shape[0]
    state = T.Tensor(states)
    fb = model.feedback_embedding(prev_lemma, prev_factor, batch=k)
    new_state, context, weights = model.cgru_step(state, fb, enc)
    if model.config.variant == "factored":
        lemma_logits, factor_logits = model.output_factored(
            new_state, fb, context)
        return (log_softmax(lemma_logits.data),
                log_softmax(factor_logits.data),
                new_state.data, weights.data)
    logits = model.output_word(new_state, fb, context)
    return log_softmax(logits.data), None, new_state.data, weights.data


def _finish(hyp):
    hyp.finished = True
    return hyp


def beam_decode(model, src_ids, trg_vocab, factor_vocab=None,
                config=None, return_nbest=False):
    """Length-normalized beam search; beam_size 1 reproduces greedy.

    Factored models score a step as log P(lemma) + log P(factor).  In
    the default mode the factor is the per-step argmax (the factor
    distribution at a step does not depend on the lemma chosen in that
    same step); "product" mode expands the cross product instead.
    """
    config = config or BeamConfig()
    factored = model.config.variant == "factored"
    if factored and factor_vocab is None:
        raise ValueError("beam_decode: factored model needs a factor vocab")
    src = list(src_ids)
    enc = model.encode(np.asarray([src]))
    state0 = model.init_state(enc).data[0]
    root = Hypothesis(tokens=[], factor_tokens=[] if factored else None,
                      state=state0)
    live = [root]
    finished = []
    max_len = config.limit(len(src))
    for t in range(max_len):
        beam_room = config.beam_size - len(finished)
        if beam_room <= 0 or not live:
            break
        states = np.stack([h.state for h in live])
        if t == 0:
            prev_l = prev_f = None
        else:
            prev_l = np.array([h.tokens[-1] for h in live])
            prev_f = np.array([h.factor_tokens[-1] for h in live]) \
                if factored else None
        lem_lp, fact_lp, new_states, att = _decode_step(
            model, enc, states, prev_l, prev_f)
        k, v = lem_lp.shape
        base = np.array([h.score for h in live])[:, None]
        if not factored:
            cand = base + lem_lp
            flat = np.argsort(-cand, axis=None, kind="stable")[:beam_room]
            picks = [(i // v, i % v, None, float(cand.flat[i])) for i in flat]
        elif config.factor_mode == "argmax":
            fstar = np.argmax(fact_lp, axis=1)
            cand = base + lem_lp + fact_lp[np.arange(k), fstar][:, None]
            flat = np.argsort(-cand, axis=None, kind="stable")[:beam_room]
            picks = [(i // v, i % v, int(fstar[i // v]), float(cand.flat[i]))
                     for i in flat]
        else:
            vf = fact_lp.shape[1]
            cand = base[:, :, None] + lem_lp[:, :, None] + fact_lp[:, None, :]
            flat = np.argsort(-cand, axis=None, kind="stable")[:beam_room]
            picks = [(i // (v * vf), (i // vf) % v, i % vf,
                      float(cand.flat[i])) for i in flat]
        next_live = []
        for hyp_i, lemma_id, factor_id, score in picks:
            parent = live[hyp_i]
            if lemma_id == EOS_ID:
                # lemma EOS closes both streams; the paired factor and the
                # attention row of the closing step are dropped
                finished.append(_finish(Hypothesis(
                    tokens=list(parent.tokens),
                    factor_tokens=list(parent.factor_tokens)
                    if factored else None,
                    score=score, state=None,
                    attention=list(parent.attention),
                    steps=parent.steps + 1)))
            else:
                next_live.append(Hypothesis(
                    tokens=parent.tokens + [int(lemma_id)],
                    factor_tokens=(parent.factor_tokens + [factor_id])
                    if factored else None,
                    score=score, state=new_states[hyp_i],
                    attention=parent.attention + [att[hyp_i]],
                    steps=parent.steps + 1))
        live = next_live
    finished.extend(_finish(h) for h in live)   # cut off at max length
    order = sorted(range(len(finished)),
                   key=lambda i: (-finished[i].normalized(config.length_norm), i))
    ranked = [finished[i] for i in order]
    best = ranked[0] if ranked else _finish(Hypothesis())
    result = _to_result(best, model, trg_vocab, factor_vocab,
                        config.length_norm, len(src))
    if return_nbest:
        nbest = [_to_result(h, model, trg_vocab, factor_vocab,
                            config.length_norm, len(src)) for h in ranked]
        return result, nbest
    return result


def greedy_decode(model, src_ids, trg_vocab, factor_vocab=None, max_len=None):
    """Per-step argmax decode, written independently of the beam search
    so the two can be checked against each other."""
    factored = model.config.variant == "factored"
    if factored and factor_vocab is None:
        raise ValueError("greedy_decode: factored model needs a factor vocab")
    src = list(src_ids)
    enc = model.encode(np.asarray([src]))
    state = model.init_state(enc).data
    limit = max_len if max_len is not None else 2 * len(src) + 5
    tokens = []
    factors = [] if factored else None
    rows = []
    score = 0.0
    steps = 0
    for t in range(limit):
        prev_l = np.array([tokens[-1]]) if tokens else None
        prev_f = np.array([factors[-1]]) if factored and factors else None
        if t == 0:
            prev_l = prev_f = None
        lem_lp, fact_lp, state, att = _decode_step(
            model, enc, state, prev_l, prev_f)
        lemma_id = int(np.argmax(lem_lp[0]))
        steps += 1
        score += float(lem_lp[0, lemma_id])
        if factored:
            factor_id = int(np.argmax(fact_lp[0]))
            score += float(fact_lp[0, factor_id])
        if lemma_id == EOS_ID:
            break
        tokens.append(lemma_id)
        if factored:
            factors.append(factor_id)
        rows.append(att[0])
    hyp = Hypothesis(tokens=tokens, factor_tokens=factors, score=score,
                     attention=rows, finished=True, steps=steps)
    return _to_result(hyp, model, trg_vocab, factor_vocab, 1.0, len(src))


def _to_result(hyp, model, trg_vocab, factor_vocab, exponent, src_len):
    tokens = [trg_vocab.id_to_token(i) for i in hyp.tokens]
    factors = None
    if hyp.factor_tokens is not None:
        factors = [factor_vocab.id_to_token(i) for i in hyp.factor_tokens]
    if hyp.attention:
        attention = np.stack(hyp.attention)
    else:
        attention = np.zeros((0, src_len + 1))
    return TranslationResult(
        tokens=tokens, attention=attention,
        origins=["model"] * len(tokens),
        score=hyp.normalized(exponent), raw_score=hyp.score,
        factor_tokens=factors)


# -- alignment + UNK replacement -------------------------------------------


def extract_alignment(result):
    """Argmax source position per target token; ties take the lowest."""
    if result.attention.shape[0] == 0:
        return np.zeros(0, dtype=int)
    return np.argmax(result.attention, axis=1)


def load_dictionary(path):
    """Unigram source->target dictionary, TSV with two columns."""
    table = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("# "):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(f"{path}:{n}: expected 2 tab-separated columns")
            table.setdefault(parts[0], parts[1])
    return table


def unk_replace(result, source_tokens, dictionary=None):
    """Replace every UNK with the translation of its aligned source word,
    or a verbatim copy when the dictionary has no entry."""
    dictionary = dictionary or {}
    alignment = extract_alignment(result)
    tokens = list(result.tokens)
    origins = list(result.origins)
    for i, tok in enumerate(tokens):
        if tok != UNK_TOKEN:
            continue
        j = int(alignment[i])
        if j >= len(source_tokens):
            # attention argmax fell on the EOS column; realign over words
            j = int(np.argmax(result.attention[i, :len(source_tokens)]))
        src_word = source_tokens[j]
        if src_word in dictionary:
            tokens[i] = dictionary[src_word]
            origins[i] = "unk-replaced-dict"
        else:
            tokens[i] = src_word
            origins[i] = "unk-replaced-copy"
    return TranslationResult(
        tokens=tokens, attention=result.attention, origins=origins,
        score=result.score, raw_score=result.raw_score,
        factor_tokens=result.factor_tokens)


# -- the per-variant pipeline ------------------------------------------------


@dataclass
class TranslationOutput:
    words: list
    result: TranslationResult
    source_tokens: list = field(default_factory=list)  # model-side source
    nbest: list | None = None


class Translator:
    """Bundles a model with the resources its variant needs."""

    def __init__(self, model, src_vocab, trg_vocab, factor_vocab=None,
                 merge_table=None, lexicon=None, dictionary=None):
        variant = model.config.variant
        if variant == "bpe" and merge_table is None:
            raise ValueError("Translator: bpe variant needs a merge table")
        if variant == "factored" and (factor_vocab is None or lexicon is None):
            raise ValueError(
                "Translator: factored variant needs factor vocab and lexicon")
        self.model = model
        self.src_vocab = src_vocab
        self.trg_vocab = trg_vocab
        self.factor_vocab = factor_vocab
        self.merge_table = merge_table
        self.lexicon = lexicon
        self.dictionary = dictionary

    def translate_tokens(self, tokens, beam_config=None, greedy=False,
                         replace_unks=False, return_nbest=False):
        variant = self.model.config.variant
        source = list(tokens)
        model_input = bpe_apply(source, self.merge_table) \
            if variant == "bpe" else source
        src_ids = self.src_vocab.encode(model_input)
        nbest = None
        if greedy:
            result = greedy_decode(
                self.model, src_ids, self.trg_vocab, self.factor_vocab,
                max_len=beam_config.max_len if beam_config else None)
        else:
            config = beam_config or BeamConfig()
            out = beam_decode(self.model, src_ids, self.trg_vocab,
                              self.factor_vocab, config, return_nbest)
            result, nbest = out if return_nbest else (out, None)
        if replace_unks and variant != "bpe":
            result = unk_replace(result, model_input, self.dictionary)
        words = self._surface(result)
        return TranslationOutput(words=words, result=result,
                                 source_tokens=model_input, nbest=nbest)

    def translate_line(self, line, **kwargs):
        return self.translate_tokens(line.split(), **kwargs)

    def _surface(self, result):
        variant = self.model.config.variant
        if variant == "bpe":
            return bpe_undo(result.tokens)
        if variant == "factored":
            tags = []
            for tok, fact in zip(result.tokens, result.factor_tokens):
                try:
                    tags.append(parse_factor_string(fact))
                except ValueError:
                    # reserved or malformed factor symbol: neutral fallback
                    tags.append(fallback_tag(tok))
            return recombine(result.tokens, tags, self.lexicon)
        return list(result.tokens)
