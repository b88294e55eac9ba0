"""Corpus BLEU, UNK counting and per-stream scores for factored output."""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass

from .morphology import factorize_sentence, format_factor_string
from .vocab import UNK_TOKEN

MAX_ORDER = 4


@dataclass
class BleuReport:
    bleu: float                 # percentage, 0..100
    precisions: list            # p1..p4
    brevity_penalty: float
    hyp_length: int
    ref_length: int
    smoothed: bool

    def to_json(self):
        return json.dumps({
            "bleu": round(self.bleu, 4),
            "p1": round(self.precisions[0], 6),
            "p2": round(self.precisions[1], 6),
            "p3": round(self.precisions[2], 6),
            "p4": round(self.precisions[3], 6),
            "bp": round(self.brevity_penalty, 6),
            "hyp_length": self.hyp_length,
            "ref_length": self.ref_length,
            "smoothed": self.smoothed,
        }, sort_keys=True)

    def summary(self):
        ps = "/".join(f"{100 * p:.1f}" for p in self.precisions)
        return (f"BLEU = {self.bleu:.2f} {ps} "
                f"(BP = {self.brevity_penalty:.3f}, "
                f"hyp_len = {self.hyp_length}, ref_len = {self.ref_length})")


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_corpus(hypotheses, references, smooth=False):
    """Corpus BLEU: clipped n-gram precisions (n=1..4) x brevity penalty.

    One reference per hypothesis.  ``smooth`` adds one to numerator and
    denominator for orders >= 2 (useful for per-interval dev scoring of
    half-trained models); corpus scoring defaults to the plain metric.
    Orders for which the corpus has no n-grams at all are left out of
    the geometric mean (so identical text always scores 100); they are
    still reported as 0.
    """
    if len(hypotheses) != len(references):
        raise ValueError(
            f"bleu_corpus: {len(hypotheses)} hypotheses vs "
            f"{len(references)} references")
    matched = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_ORDER + 1):
            hyp_counts = _ngrams(hyp, n)
            ref_counts = _ngrams(ref, n)
            totals[n - 1] += max(len(hyp) - n + 1, 0)
            for gram, count in hyp_counts.items():
                matched[n - 1] += min(count, ref_counts.get(gram, 0))
    precisions = []
    effective = []
    for n in range(MAX_ORDER):
        num, den = matched[n], totals[n]
        if smooth and n >= 1 and totals[n] > 0:
            num, den = num + 1, den + 1
        precisions.append(num / den if den > 0 else 0.0)
        if totals[n] > 0:
            effective.append(precisions[-1])
    if hyp_len == 0:
        bp = 0.0
    else:
        bp = math.exp(min(0.0, 1.0 - ref_len / hyp_len))
    if effective and min(effective) > 0:
        geo = math.exp(sum(math.log(p) for p in effective) / len(effective))
        score = 100.0 * bp * geo
    else:
        score = 0.0
    return BleuReport(score, precisions, bp, hyp_len, ref_len, smooth)


def count_unk(tokens):
    """Occurrences of the reserved unknown surface token."""
    return sum(1 for t in tokens if t == UNK_TOKEN)


def factored_stream_scores(hypotheses, references, lexicon, smooth=False):
    """Word, lemma and factor-string BLEU of the same sentence pairs.

    Both sides are decomposed per token through the lexicon, so word
    level output of any variant can be compared stream by stream.
    """
    def decompose(sentences):
        lemma_stream, factor_stream = [], []
        for tokens in sentences:
            lemmas, tags = factorize_sentence(tokens, lexicon)
            lemma_stream.append(lemmas)
            factor_stream.append([format_factor_string(t) for t in tags])
        return lemma_stream, factor_stream

    hyp_lem, hyp_fact = decompose(hypotheses)
    ref_lem, ref_fact = decompose(references)
    return {
        "word": bleu_corpus(hypotheses, references, smooth),
        "lemma": bleu_corpus(hyp_lem, ref_lem, smooth),
        "factor": bleu_corpus(hyp_fact, ref_fact, smooth),
    }
