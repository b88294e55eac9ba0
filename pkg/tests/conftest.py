"""Shared builders: random micro models and trained toy-corpus models."""

import time
from collections import Counter

import numpy as np
import pytest

from factored_nmt.bpe import bpe_apply, bpe_learn
from factored_nmt.corpus import Example, filter_corpus, read_parallel
from factored_nmt.decoding import Translator
from factored_nmt.fixtures import lexicon_path, toy_corpus_paths
from factored_nmt.model import ModelConfig, NmtModel
from factored_nmt.morphology import (Lexicon, factorize_sentence,
                                     format_factor_string)
from factored_nmt.training import train_loop
from factored_nmt.vocab import Vocabulary


def make_vocab(n_tokens, prefix="w"):
    """Synthetic vocabulary with n_tokens entries beyond the reserved ids."""
    return Vocabulary([f"{prefix}{i}" for i in range(n_tokens)])


def random_model(variant="word", seed=0, src_tokens=8, trg_tokens=9,
                 factor_tokens=6, emb=6, rnn=8):
    config = ModelConfig(
        variant=variant, src_vocab_size=src_tokens + 3,
        trg_vocab_size=trg_tokens + 3,
        factor_vocab_size=(factor_tokens + 3) if variant == "factored" else 0,
        emb_dim=emb, rnn_dim=rnn, att_dim=rnn, out_hidden_dim=emb,
        factor_emb_dim=4, max_len=30)
    model = NmtModel.build(config, seed=seed)
    trg_vocab = make_vocab(trg_tokens)
    factor_vocab = make_vocab(factor_tokens, "f") if variant == "factored" \
        else None
    return model, trg_vocab, factor_vocab


def random_source(rng, vocab_size, max_len=6):
    length = int(rng.integers(1, max_len + 1))
    return [int(x) for x in rng.integers(3, vocab_size, length)] + [1]  # EOS


# -- independent search oracles ---------------------------------------------

def force_score(model, src, lemma_seq, max_steps, factor_seq=None,
                factor_policy=None):
    """Teacher-forced, length-normalized log probability of a sequence.

    Sequences shorter than max_steps get a final EOS step; length
    max_steps means cut off, matching the beam semantics.  factor_policy:
    None (word models), "argmax" (factor stream follows the per-step
    argmax) or "explicit" (factor_seq gives the stream; the closing EOS
    step scores its best factor, as product-mode candidates do).
    """
    from factored_nmt.decoding import _decode_step
    from factored_nmt.vocab import EOS_ID

    enc = model.encode(np.asarray([src]))
    state = model.init_state(enc).data
    total = 0.0
    chosen_f = None
    emitted = list(lemma_seq) + ([EOS_ID] if len(lemma_seq) < max_steps else [])
    for t, sym in enumerate(emitted):
        prev_l = np.array([emitted[t - 1]]) if t > 0 else None
        if factor_policy is None or t == 0:
            prev_f = None
        elif factor_policy == "argmax":
            prev_f = np.array([chosen_f])
        else:
            prev_f = np.array([factor_seq[t - 1]])
        lem_lp, fact_lp, state, _ = _decode_step(
            model, enc, state, prev_l, prev_f)
        total += float(lem_lp[0, sym])
        if factor_policy == "argmax":
            chosen_f = int(np.argmax(fact_lp[0]))
            total += float(fact_lp[0, chosen_f])
        elif factor_policy == "explicit" and sym != EOS_ID:
            total += float(fact_lp[0, factor_seq[t]])
        elif factor_policy == "explicit":
            total += float(np.max(fact_lp[0]))
    steps = len(emitted)
    return total / max(steps, 1)


def enumerate_sequences(vocab_size, max_steps):
    """All emittable sequences: EOS-terminated short ones plus every
    cut-off sequence of exactly max_steps symbols."""
    from factored_nmt.vocab import EOS_ID

    symbols = [i for i in range(vocab_size) if i != EOS_ID]
    seqs = [[]]
    frontier = [[]]
    for _ in range(max_steps):
        frontier = [s + [x] for s in frontier for x in symbols]
        seqs.extend(frontier)
    return seqs


# -- toy corpus setups -------------------------------------------------------

TOY_DIMS = dict(emb_dim=24, rnn_dim=48, att_dim=48, out_hidden_dim=24)


def load_toy_pairs():
    en, fr = toy_corpus_paths()
    return filter_corpus(read_parallel(en, fr), 50)


def build_toy_setup(variant, seed=7):
    """Vocabularies, examples and an untrained model for the toy corpus."""
    pairs = load_toy_pairs()
    sources = [p.source for p in pairs]
    targets = [p.target for p in pairs]
    lexicon = None
    merge_table = None
    factor_vocab = None
    if variant == "bpe":
        freqs = Counter()
        for p in pairs:
            freqs.update(p.source)
            freqs.update(p.target)
        merge_table = bpe_learn(freqs, 120)
        src_sub = [bpe_apply(s, merge_table) for s in sources]
        trg_sub = [bpe_apply(t, merge_table) for t in targets]
        joint = Vocabulary.build(src_sub + trg_sub, 400)
        src_vocab = trg_vocab = joint
        examples = [Example(joint.encode(s), joint.encode(t))
                    for s, t in zip(src_sub, trg_sub)]
    elif variant == "factored":
        lexicon = Lexicon.load(lexicon_path())
        src_vocab = Vocabulary.build(sources, 200)
        lem_streams, fact_streams = [], []
        for t in targets:
            lemmas, tags = factorize_sentence(t, lexicon)
            lem_streams.append(lemmas)
            fact_streams.append([format_factor_string(tag) for tag in tags])
        trg_vocab = Vocabulary.build(lem_streams, 200)
        factor_vocab = Vocabulary.build(fact_streams, 200)
        examples = [Example(src_vocab.encode(s), trg_vocab.encode(l),
                            factor_vocab.encode(f))
                    for s, l, f in zip(sources, lem_streams, fact_streams)]
    else:
        src_vocab = Vocabulary.build(sources, 200)
        trg_vocab = Vocabulary.build(targets, 200)
        examples = [Example(src_vocab.encode(s), trg_vocab.encode(t))
                    for s, t in zip(sources, targets)]
    config = ModelConfig(
        variant=variant, src_vocab_size=len(src_vocab),
        trg_vocab_size=len(trg_vocab),
        factor_vocab_size=len(factor_vocab) if factor_vocab else 0,
        factor_emb_dim=8, max_len=60, **TOY_DIMS)
    model = NmtModel.build(config, seed=seed)
    translator = Translator(model, src_vocab, trg_vocab, factor_vocab,
                            merge_table=merge_table, lexicon=lexicon)
    return {"pairs": pairs, "examples": examples, "model": model,
            "translator": translator, "lexicon": lexicon,
            "merge_table": merge_table}


def train_toy_model(variant, epochs=500, stop_bleu=99.99, seed=7):
    setup = build_toy_setup(variant, seed=seed)
    pairs = setup["pairs"]
    start = time.time()
    out = train_loop(
        setup["model"], setup["examples"],
        [p.source for p in pairs], [p.target for p in pairs],
        setup["translator"], epochs=epochs, batch_size=8, seed=1,
        patience=10 ** 9, eval_every=5, stop_bleu=stop_bleu)
    setup["train_result"] = out
    setup["train_seconds"] = time.time() - start
    return setup


def save_translator(setup, out_dir, name="model.fnmt"):
    """Write the model container plus its resource files like cmd_train."""
    out_dir = str(out_dir)
    path = f"{out_dir}/{name}"
    translator = setup["translator"]
    config = setup["model"].config
    translator.src_vocab.save(path + ".vocab.src")
    translator.trg_vocab.save(path + ".vocab.trg")
    config.src_vocab_file = name + ".vocab.src"
    config.trg_vocab_file = name + ".vocab.trg"
    if translator.factor_vocab is not None:
        translator.factor_vocab.save(path + ".vocab.factors")
        config.factor_vocab_file = name + ".vocab.factors"
    if translator.merge_table is not None:
        translator.merge_table.save(path + ".merges")
        config.merges_file = name + ".merges"
    if translator.lexicon is not None:
        config.lexicon_file = lexicon_path()
    setup["model"].save(path)
    return path


@pytest.fixture(scope="session")
def trained_word():
    return train_toy_model("word")


@pytest.fixture(scope="session")
def trained_bpe():
    return train_toy_model("bpe")


@pytest.fixture(scope="session")
def trained_factored():
    return train_toy_model("factored")
