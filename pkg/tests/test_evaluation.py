"""BLEU against hand-computed oracles, UNK counting, stream scores."""

import json

import numpy as np
import pytest

from factored_nmt.evaluation import (bleu_corpus, count_unk,
                                     factored_stream_scores)
from factored_nmt.fixtures import lexicon_path
from factored_nmt.morphology import Lexicon


@pytest.fixture(scope="module")
def lexicon():
    return Lexicon.load(lexicon_path())


class TestBleu:
    def test_perfect_match_is_100(self):
        hyps = [["a", "b", "c"], ["d"]]
        assert bleu_corpus(hyps, hyps).bleu == 100.0

    def test_brevity_penalty_case(self):
        # hyp 5 tokens vs ref 10, all matched: BP = e^(1-2)
        hyp = [["a", "b", "c", "d", "e"]]
        ref = [["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"]]
        report = bleu_corpus(hyp, ref)
        assert report.brevity_penalty == pytest.approx(0.3679, abs=1e-4)

    def test_clipped_precision_hand_oracle(self):
        # hyp "the cat the cat" / ref "the cat sat":
        # matched/total per order: 2/4, 1/3, 0/2, 0/1 (counts clipped)
        hyp = ["the cat the cat".split()]
        ref = ["the cat sat".split()]
        plain = bleu_corpus(hyp, ref, smooth=False)
        assert plain.precisions[0] == pytest.approx(0.5)
        assert plain.precisions[1] == pytest.approx(1 / 3)
        assert plain.bleu == 0.0  # p3 = 0 without smoothing
        smoothed = bleu_corpus(hyp, ref, smooth=True)
        assert smoothed.precisions == pytest.approx([0.5, 0.5, 1 / 3, 0.5])
        assert smoothed.bleu == pytest.approx(45.1801, abs=0.01)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            bleu_corpus([["a"]], [["a"], ["b"]])

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        hyps = [[f"w{i}" for i in rng.integers(0, 9, 6)] for _ in range(12)]
        refs = [[f"w{i}" for i in rng.integers(0, 9, 6)] for _ in range(12)]
        base = bleu_corpus(hyps, refs, smooth=True).bleu
        perm = rng.permutation(12)
        shuffled = bleu_corpus([hyps[i] for i in perm],
                               [refs[i] for i in perm], smooth=True).bleu
        assert shuffled == pytest.approx(base, rel=1e-12)

    def test_truncation_never_raises_bp(self):
        rng = np.random.default_rng(1)
        for _ in range(15):
            hyps = [[f"w{i}" for i in rng.integers(0, 9, rng.integers(2, 8))]
                    for _ in range(5)]
            refs = [[f"w{i}" for i in rng.integers(0, 9, rng.integers(2, 8))]
                    for _ in range(5)]
            full = bleu_corpus(hyps, refs, smooth=True).brevity_penalty
            cut = bleu_corpus([h[:-1] for h in hyps], refs,
                              smooth=True).brevity_penalty
            assert cut <= full + 1e-12

    def test_report_json_fields(self):
        report = bleu_corpus([["a", "b"]], [["a", "b"]])
        data = json.loads(report.to_json())
        for key in ("bleu", "p1", "p2", "p3", "p4", "bp",
                    "hyp_length", "ref_length"):
            assert key in data


class TestCountUnk:
    def test_counts(self):
        assert count_unk(["UNK", "a", "UNK"]) == 2

    def test_empty(self):
        assert count_unk([]) == 0


class TestStreamScores:
    def test_identical_everything_100(self, lexicon):
        sents = [["le", "chat", "chante", "."]]
        scores = factored_stream_scores(sents, sents, lexicon)
        assert scores["word"].bleu == 100.0
        assert scores["lemma"].bleu == 100.0
        assert scores["factor"].bleu == 100.0

    def test_inflection_error_keeps_lemma_score(self, lexicon):
        # 'sont' vs 'sommes': same lemma être, different factors
        hyp = [["nous", "en", "médecine", "sont", "déconcertés", "."]]
        ref = [["nous", "en", "médecine", "sommes", "déconcertés", "."]]
        scores = factored_stream_scores(hyp, ref, lexicon, smooth=True)
        assert scores["lemma"].bleu > scores["word"].bleu

    def test_factor_stream_independent_of_lemmas(self, lexicon):
        # same tags (nc-#-#-m-s-l), different lemmas: factor BLEU stays 100
        hyp = [["chat", "chien"]]
        ref = [["jardin", "mur"]]
        scores = factored_stream_scores(hyp, ref, lexicon)
        assert scores["factor"].bleu == 100.0
        assert scores["word"].bleu == 0.0

    def test_stream_lengths_match(self, lexicon):
        hyp = [["le", "chat", "chante", "."], ["ça", "devient", "grand", "."]]
        scores = factored_stream_scores(hyp, hyp, lexicon)
        assert scores["word"].hyp_length == scores["lemma"].hyp_length
        assert scores["word"].hyp_length == scores["factor"].hyp_length
