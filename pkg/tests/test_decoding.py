"""Search correctness: greedy/beam equivalence, enumeration oracles,
alignment extraction and UNK replacement."""

import numpy as np
import pytest
from conftest import (enumerate_sequences, force_score, random_model,
                      random_source)

from factored_nmt.decoding import (BeamConfig, TranslationResult,
                                   beam_decode, extract_alignment,
                                   greedy_decode, unk_replace)
from factored_nmt.vocab import EOS_ID, UNK_TOKEN


class TestGreedyBeamEquivalence:
    @pytest.mark.parametrize("variant,mode", [
        ("word", "argmax"), ("factored", "argmax"), ("factored", "product")])
    def test_beam_one_equals_greedy(self, variant, mode):
        rng = np.random.default_rng(100)
        for trial in range(30):
            model, trg_vocab, factor_vocab = random_model(
                variant, seed=200 + trial)
            src = random_source(rng, model.config.src_vocab_size)
            g = greedy_decode(model, src, trg_vocab, factor_vocab)
            b = beam_decode(model, src, trg_vocab, factor_vocab,
                            BeamConfig(beam_size=1, factor_mode=mode))
            assert g.tokens == b.tokens
            assert g.factor_tokens == b.factor_tokens

    def test_max_len_zero_empty_output(self):
        model, trg_vocab, _ = random_model("word", seed=5)
        res = greedy_decode(model, [3, 4, EOS_ID], trg_vocab, max_len=0)
        assert res.tokens == []
        assert res.attention.shape[0] == 0


class TestExhaustiveOracle:
    def test_word_beam_matches_enumeration(self):
        # vocab 5 (incl. reserved), 3 steps: beam 125 can never prune
        for seed in (300, 301, 302):
            model, trg_vocab, _ = random_model(
                "word", seed=seed, src_tokens=3, trg_tokens=2, emb=5, rnn=6)
            v = model.config.trg_vocab_size
            assert v == 5
            src = [3, 4, EOS_ID]
            steps = 3
            res = beam_decode(model, src, trg_vocab, None,
                              BeamConfig(beam_size=v ** steps, max_len=steps))
            best_seq, best_score = None, -np.inf
            for seq in enumerate_sequences(v, steps):
                score = force_score(model, src, seq, steps)
                if score > best_score:
                    best_seq, best_score = seq, score
            assert res.score == pytest.approx(best_score, abs=1e-6)
            assert [trg_vocab.id_to_token(i) for i in best_seq] == res.tokens

    def test_factored_argmax_beam_matches_enumeration(self):
        for seed in (310, 311):
            model, trg_vocab, factor_vocab = random_model(
                "factored", seed=seed, src_tokens=3, trg_tokens=2,
                factor_tokens=2, emb=5, rnn=6)
            v = model.config.trg_vocab_size
            src = [3, EOS_ID]
            steps = 2
            res = beam_decode(
                model, src, trg_vocab, factor_vocab,
                BeamConfig(beam_size=(v * 5) ** steps, max_len=steps,
                           factor_mode="argmax"))
            best_score = -np.inf
            for seq in enumerate_sequences(v, steps):
                score = force_score(model, src, seq, steps,
                                    factor_policy="argmax")
                best_score = max(best_score, score)
            assert res.score == pytest.approx(best_score, abs=1e-6)

    def test_factored_product_beam_matches_enumeration(self):
        import itertools
        for seed in (320,):
            model, trg_vocab, factor_vocab = random_model(
                "factored", seed=seed, src_tokens=3, trg_tokens=1,
                factor_tokens=1, emb=4, rnn=5)
            v = model.config.trg_vocab_size          # 4
            vf = model.config.factor_vocab_size     # 4
            src = [3, EOS_ID]
            steps = 2
            res = beam_decode(
                model, src, trg_vocab, factor_vocab,
                BeamConfig(beam_size=(v * vf) ** steps + v * vf,
                           max_len=steps, factor_mode="product"))
            best_score = -np.inf
            for seq in enumerate_sequences(v, steps):
                factor_space = itertools.product(range(vf), repeat=len(seq))
                for fseq in factor_space:
                    score = force_score(model, src, seq, steps,
                                        factor_seq=list(fseq),
                                        factor_policy="explicit")
                    best_score = max(best_score, score)
            assert res.score == pytest.approx(best_score, abs=1e-6)


class TestStreamLength:
    def test_factored_streams_always_equal(self):
        rng = np.random.default_rng(400)
        for trial in range(40):
            model, trg_vocab, factor_vocab = random_model(
                "factored", seed=500 + trial)
            src = random_source(rng, model.config.src_vocab_size)
            beam = int(rng.integers(1, 6))
            res, nbest = beam_decode(model, src, trg_vocab, factor_vocab,
                                     BeamConfig(beam_size=beam),
                                     return_nbest=True)
            for r in [res] + nbest:
                assert len(r.factor_tokens) == len(r.tokens)
                assert r.attention.shape[0] == len(r.tokens)

    def test_monotone_best_score_in_beam_size(self):
        rng = np.random.default_rng(410)
        for trial in range(10):
            model, trg_vocab, _ = random_model("word", seed=600 + trial)
            src = random_source(rng, model.config.src_vocab_size)
            scores = [beam_decode(model, src, trg_vocab, None,
                                  BeamConfig(beam_size=b)).score
                      for b in (1, 2, 4, 8, 12)]
            assert all(b >= a - 1e-9 for a, b in zip(scores, scores[1:]))


class TestAlignment:
    def test_argmax_row(self):
        res = TranslationResult(
            tokens=["a"], attention=np.array([[0.1, 0.7, 0.2]]),
            origins=["model"], score=0.0, raw_score=0.0)
        assert extract_alignment(res).tolist() == [1]

    def test_uniform_tie_lowest(self):
        res = TranslationResult(
            tokens=["a"], attention=np.full((1, 4), 0.25),
            origins=["model"], score=0.0, raw_score=0.0)
        assert extract_alignment(res).tolist() == [0]

    def test_row_count(self):
        model, trg_vocab, _ = random_model("word", seed=7)
        res = greedy_decode(model, [3, 4, 5, EOS_ID], trg_vocab)
        assert extract_alignment(res).shape[0] == len(res.tokens)

    def test_attention_rows_normalized(self):
        model, trg_vocab, _ = random_model("word", seed=8)
        res = beam_decode(model, [3, 4, 5, 6, EOS_ID], trg_vocab, None,
                          BeamConfig(beam_size=4))
        if res.attention.shape[0]:
            np.testing.assert_allclose(res.attention.sum(axis=1), 1.0,
                                       atol=1e-6)


def result_with_unks(tokens, attention):
    return TranslationResult(
        tokens=tokens, attention=np.asarray(attention, dtype=float),
        origins=["model"] * len(tokens), score=0.0, raw_score=0.0)


class TestUnkReplace:
    def test_dictionary_hit(self):
        res = result_with_unks([UNK_TOKEN], [[0.1, 0.8, 0.1]])
        out = unk_replace(res, ["we", "baffled", "."],
                          {"baffled": "déconcerté"})
        assert out.tokens == ["déconcerté"]
        assert out.origins == ["unk-replaced-dict"]

    def test_copy_fallback(self):
        res = result_with_unks(["ok", UNK_TOKEN], [[0.9, 0.1], [0.2, 0.8]])
        out = unk_replace(res, ["a", "Xanadu"], {})
        assert out.tokens == ["ok", "Xanadu"]
        assert out.origins == ["model", "unk-replaced-copy"]

    def test_no_unk_no_change(self):
        res = result_with_unks(["a", "b"], [[1.0, 0.0], [0.0, 1.0]])
        out = unk_replace(res, ["x", "y"], {"x": "z"})
        assert out.tokens == ["a", "b"]
        assert out.origins == ["model", "model"]

    def test_total_replacement(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            n, s = int(rng.integers(1, 6)), int(rng.integers(2, 5))
            att = rng.random((n, s))
            att /= att.sum(axis=1, keepdims=True)
            tokens = [UNK_TOKEN if rng.random() < 0.5 else "tok"
                      for _ in range(n)]
            src = [f"s{j}" for j in range(s - 1)]  # last column is EOS
            out = unk_replace(result_with_unks(tokens, att), src, {})
            assert UNK_TOKEN not in out.tokens


class TestPipeline:
    def test_bpe_output_has_no_marker(self, trained_bpe):
        translator = trained_bpe["translator"]
        for line in ("the cat sings .", "we are baffled today ."):
            words = translator.translate_line(line, greedy=True).words
            assert not any("@@" in w for w in words)

    def test_factored_never_mismatches(self, trained_factored):
        translator = trained_factored["translator"]
        rng = np.random.default_rng(3)
        src_words = list({w for p in trained_factored["pairs"]
                          for w in p.source})
        for _ in range(25):
            n = int(rng.integers(1, 8))
            toks = [src_words[int(i)] for i in
                    rng.integers(0, len(src_words), n)]
            out = translator.translate_tokens(toks)  # must not raise
            assert len(out.result.tokens) == len(out.result.factor_tokens)

    def test_overfit_round_trips_exactly(self, trained_factored):
        translator = trained_factored["translator"]
        for p in trained_factored["pairs"]:
            out = translator.translate_tokens(p.source, greedy=True)
            assert out.words == p.target

    def test_unk_replace_through_pipeline(self, trained_word):
        translator = trained_word["translator"]
        translator.dictionary = {"zzz-unknown-zzz": "mystère"}
        out = translator.translate_tokens(
            "the zzz-unknown-zzz sings .".split(),
            greedy=True, replace_unks=True)
        assert UNK_TOKEN not in out.words
