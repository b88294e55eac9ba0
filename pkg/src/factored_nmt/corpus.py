"""Corpus reading, length filtering and length-bucketed batching."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .vocab import PAD_ID

# The fixture corpora arrive with punctuation already split off, so
# tokenization is plain whitespace; a small entity map undoes the html
# escaping found in crawled text.
HTML_ENTITIES = {
    "&amp;": "&",
    "&lt;": "<",
    "&gt;": ">",
    "&quot;": '"',
    "&apos;": "'",
}


def tokenize(line):
    return line.split()


def convert_entities(line):
    for entity, char in HTML_ENTITIES.items():
        line = line.replace(entity, char)
    return line


@dataclass
class SentencePair:
    source: list
    target: list


def read_parallel(src_path, trg_path, convert_html=True):
    """Line-aligned UTF-8 corpora -> SentencePairs (no filtering yet)."""
    with open(src_path, encoding="utf-8") as fh:
        src_lines = fh.read().splitlines()
    with open(trg_path, encoding="utf-8") as fh:
        trg_lines = fh.read().splitlines()
    if len(src_lines) != len(trg_lines):
        raise ValueError(
            f"read_parallel: {src_path} has {len(src_lines)} lines but "
            f"{trg_path} has {len(trg_lines)}")
    pairs = []
    for s, t in zip(src_lines, trg_lines):
        if convert_html:
            s, t = convert_entities(s), convert_entities(t)
        pairs.append(SentencePair(tokenize(s), tokenize(t)))
    return pairs


def filter_corpus(pairs, max_len=50):
    """Keep pairs whose sides are non-empty and at most max_len tokens."""
    if max_len < 1:
        raise ValueError("filter_corpus: max_len must be >= 1")
    return [p for p in pairs
            if 0 < len(p.source) <= max_len and 0 < len(p.target) <= max_len]


@dataclass
class Example:
    """Encoded training example; factor ids only for factored models."""
    src_ids: list
    trg_ids: list
    factor_ids: list | None = None


@dataclass
class Batch:
    src: np.ndarray         # (B, S) int ids, PAD-filled
    src_mask: np.ndarray    # (B, S) float, 1 on real tokens incl. EOS
    trg: np.ndarray         # (B, T) word or lemma ids
    trg_mask: np.ndarray    # (B, T)
    factors: np.ndarray | None = None   # (B, T), mask shared with trg

    @property
    def size(self):
        return self.src.shape[0]


def _pad_block(seqs, width, dtype=np.int64):
    block = np.full((len(seqs), width), PAD_ID, dtype=dtype)
    mask = np.zeros((len(seqs), width), dtype=np.float32)
    for i, seq in enumerate(seqs):
        block[i, :len(seq)] = seq
        mask[i, :len(seq)] = 1.0
    return block, mask


def make_batches(examples, batch_size=80, seed=0):
    """Bucket by target length to limit padding; order shuffled by seed.

    Every example lands in exactly one batch.  Factored examples must
    carry factor streams of the same length as the lemma stream.
    """
    if batch_size < 1:
        raise ValueError("make_batches: batch_size must be >= 1")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(examples))
    # Stable sort on target length keeps the shuffle inside same-length runs.
    order = sorted(order, key=lambda i: len(examples[i].trg_ids))
    chunks = [order[i:i + batch_size] for i in range(0, len(order), batch_size)]
    rng.shuffle(chunks)

    batches = []
    for chunk in chunks:
        group = [examples[i] for i in chunk]
        s_width = max(len(ex.src_ids) for ex in group)
        t_width = max(len(ex.trg_ids) for ex in group)
        src, src_mask = _pad_block([ex.src_ids for ex in group], s_width)
        trg, trg_mask = _pad_block([ex.trg_ids for ex in group], t_width)
        factors = None
        if group[0].factor_ids is not None:
            for ex in group:
                if ex.factor_ids is None or len(ex.factor_ids) != len(ex.trg_ids):
                    raise ValueError(
                        "make_batches: factor stream length must equal the "
                        "lemma stream length")
            factors, _ = _pad_block([ex.factor_ids for ex in group], t_width)
        batches.append(Batch(src, src_mask, trg, trg_mask, factors))
    return batches
