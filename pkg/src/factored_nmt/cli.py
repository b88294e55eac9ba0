"""Command line entry point: prepare, bpe, factorize, train,
translate, score and heat-map export.

Exit codes: 0 success, 2 usage or input error, 3 training failure.
Every command is deterministic given --seed and its inputs; primary
artifacts (models, vocabularies, merges, translations, histories) are
written byte-identically on re-runs.  Flags override config-file values
("key = value" lines, '#' comments); FNMT_SEED overrides a config-file
seed but not an explicit --seed flag; FNMT_LOG_LEVEL sets verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter

import numpy as np

from .bpe import MergeTable, bpe_apply, bpe_learn, bpe_undo
from .corpus import Example, filter_corpus, read_parallel
from .decoding import BeamConfig, Translator, load_dictionary
from .evaluation import bleu_corpus, count_unk, factored_stream_scores
from .heatmap import (read_attention_dump, render_ascii, render_pgm,
                      write_attention_dump)
from .model import ModelConfig, NmtModel
from .morphology import (Lexicon, factorize_sentence, format_factor_string,
                         normalize_factor_string, parse_factor_string,
                         recombine)
from .params import CorruptModelError
from .training import TrainingDiverged, train_loop
from .vocab import Vocabulary

log = logging.getLogger("fnmt")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_TRAINING = 3


class CliError(Exception):
    """Input/usage problem reported as exit code 2."""


# Real option defaults live here, not in argparse, so an unset flag is
# distinguishable from an explicit one (flags must beat config values).
DEFAULTS = {
    "prepare": {"max_len": 50, "shortlist": 30000},
    "bpe-learn": {"merges": 29388},
    "bpe-apply": {"undo": False},
    "train": {
        "variant": "word", "emb_dim": 620, "rnn_dim": 1000,
        "factor_emb_dim": 64, "batch_size": 80, "epochs": 100,
        "max_len": 50, "shortlist": 30000, "factor_shortlist": 1000,
        "clip_norm": 1.0, "rho": 0.95, "epsilon": 1e-6, "patience": 10,
        "eval_every": 1,
    },
    "translate": {
        "beam": 12, "greedy": False, "length_norm": 1.0,
        "factor_mode": "argmax", "unk_replace": False, "nbest": 0,
    },
    "score": {"smooth": False},
    "heatmap": {"index": 0, "cell": 8},
}


def read_config_file(path):
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{n}: expected key = value")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from None
    return values


def _convert(raw, template):
    if isinstance(template, bool):
        return raw.lower() in ("true", "1", "yes")
    if isinstance(template, int):
        return int(raw)
    if isinstance(template, float):
        return float(raw)
    return raw


def effective_options(args):
    """Precedence: flag > FNMT_SEED (seed only) > config file > default."""
    values = vars(args).copy()
    defaults = DEFAULTS.get(args.command, {})
    config = read_config_file(args.config) if getattr(args, "config", None) \
        else {}
    env_seed = os.environ.get("FNMT_SEED")
    for key, value in list(values.items()):
        if value is not None or key in ("config", "func"):
            continue
        if key == "seed" and env_seed is not None:
            values[key] = int(env_seed)
        elif key in config:
            values[key] = _convert(config[key], defaults.get(key))
        elif key in defaults:
            values[key] = defaults[key]
    log.info("effective options: %s",
             json.dumps({k: v for k, v in sorted(values.items())
                         if k != "func"}, default=str, sort_keys=True))
    return argparse.Namespace(**values)


def _open_lines(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read().splitlines()
    except OSError as exc:
        raise CliError(str(exc)) from None


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


# -- commands -----------------------------------------------------------------


def cmd_prepare(args):
    pairs = read_parallel(args.src, args.trg)
    if not pairs:
        raise CliError("prepare: empty corpus")
    kept = filter_corpus(pairs, args.max_len)
    if not kept:
        raise CliError("prepare: no pairs survive filtering")
    os.makedirs(args.out_dir, exist_ok=True)
    src_vocab = Vocabulary.build([p.source for p in kept], args.shortlist)
    trg_vocab = Vocabulary.build([p.target for p in kept], args.shortlist)
    _write_lines(os.path.join(args.out_dir, "corpus.src"),
                 [" ".join(p.source) for p in kept])
    _write_lines(os.path.join(args.out_dir, "corpus.trg"),
                 [" ".join(p.target) for p in kept])
    src_vocab.save(os.path.join(args.out_dir, "vocab.src"))
    trg_vocab.save(os.path.join(args.out_dir, "vocab.trg"))
    src_oov = src_vocab.oov_rate([p.source for p in kept])
    trg_oov = trg_vocab.oov_rate([p.target for p in kept])
    print(f"kept {len(kept)} pairs, dropped {len(pairs) - len(kept)}")
    print(f"source vocab {len(src_vocab)} (OOV rate {src_oov:.4f})")
    print(f"target vocab {len(trg_vocab)} (OOV rate {trg_oov:.4f})")
    return EXIT_OK


def cmd_bpe_learn(args):
    freqs = Counter()
    for path in args.input:
        for line in _open_lines(path):
            freqs.update(line.split())
    table = bpe_learn(dict(freqs), args.merges)
    table.save(args.out)
    print(f"learned {len(table)} merges from {len(freqs)} word types")
    return EXIT_OK


def cmd_bpe_apply(args):
    if args.undo:
        op = bpe_undo
    else:
        if not args.merges:
            raise CliError("bpe-apply: --merges is required unless --undo")
        try:
            table = MergeTable.load(args.merges)
        except (OSError, ValueError) as exc:
            raise CliError(f"bpe-apply: {exc}") from None
        op = lambda toks: bpe_apply(toks, table)
    lines = _open_lines(args.input) if args.input \
        else sys.stdin.read().splitlines()
    out_lines = [" ".join(op(line.split())) for line in lines]
    if args.output:
        _write_lines(args.output, out_lines)
    else:
        for line in out_lines:
            print(line)
    return EXIT_OK


def cmd_factorize(args):
    lexicon = _load_lexicon(args.lexicon)
    lemma_lines, factor_lines = [], []
    for line in _open_lines(args.input):
        lemmas, tags = factorize_sentence(line.split(), lexicon)
        lemma_lines.append(" ".join(lemmas))
        factor_lines.append(" ".join(format_factor_string(t) for t in tags))
    _write_lines(args.out_lemmas, lemma_lines)
    _write_lines(args.out_factors, factor_lines)
    print(f"factorized {len(lemma_lines)} sentences")
    return EXIT_OK


def cmd_recombine(args):
    lexicon = _load_lexicon(args.lexicon)
    lemma_lines = _open_lines(args.lemmas)
    factor_lines = _open_lines(args.factors)
    if len(lemma_lines) != len(factor_lines):
        raise CliError(
            f"recombine: {len(lemma_lines)} lemma lines vs "
            f"{len(factor_lines)} factor lines")
    out_lines = []
    for n, (lline, fline) in enumerate(zip(lemma_lines, factor_lines), 1):
        lemmas = lline.split()
        tag_strings = fline.split()
        if len(lemmas) != len(tag_strings):
            raise CliError(f"recombine: stream length mismatch at line {n}")
        tags = [parse_factor_string(normalize_factor_string(s))
                for s in tag_strings]
        out_lines.append(" ".join(recombine(lemmas, tags, lexicon)))
    if args.output:
        _write_lines(args.output, out_lines)
    else:
        for line in out_lines:
            print(line)
    return EXIT_OK


def _load_lexicon(path):
    if not path:
        raise CliError("a --lexicon path is required")
    try:
        return Lexicon.load(path)
    except (OSError, ValueError) as exc:
        raise CliError(f"lexicon: {exc}") from None


def cmd_train(args):
    if args.seed is None:
        raise CliError("train: --seed is required for reproducibility")
    pairs = filter_corpus(read_parallel(args.src, args.trg), args.max_len)
    if not pairs:
        raise CliError("train: no usable training pairs")
    dev_pairs = pairs if args.dev_src is None else \
        filter_corpus(read_parallel(args.dev_src, args.dev_trg), args.max_len)
    if not dev_pairs:
        raise CliError("train: dev set is empty")
    sources = [p.source for p in pairs]
    targets = [p.target for p in pairs]

    merge_table = None
    lexicon = None
    factor_vocab = None
    if args.variant == "bpe":
        if not args.merges:
            raise CliError("train: bpe variant needs --merges")
        merge_table = MergeTable.load(args.merges)
        src_stream = [bpe_apply(s, merge_table) for s in sources]
        trg_stream = [bpe_apply(t, merge_table) for t in targets]
        src_vocab = trg_vocab = Vocabulary.build(
            src_stream + trg_stream, args.shortlist)
        examples = [Example(src_vocab.encode(s), trg_vocab.encode(t))
                    for s, t in zip(src_stream, trg_stream)]
    elif args.variant == "factored":
        lexicon = _load_lexicon(args.lexicon)
        src_vocab = Vocabulary.build(sources, args.shortlist)
        lem_streams, fact_streams = [], []
        for t in targets:
            lemmas, tags = factorize_sentence(t, lexicon)
            lem_streams.append(lemmas)
            fact_streams.append([format_factor_string(tag) for tag in tags])
        trg_vocab = Vocabulary.build(lem_streams, args.shortlist)
        factor_vocab = Vocabulary.build(fact_streams, args.factor_shortlist)
        examples = [Example(src_vocab.encode(s), trg_vocab.encode(l),
                            factor_vocab.encode(f))
                    for s, l, f in zip(sources, lem_streams, fact_streams)]
    else:
        src_vocab = Vocabulary.build(sources, args.shortlist)
        trg_vocab = Vocabulary.build(targets, args.shortlist)
        examples = [Example(src_vocab.encode(s), trg_vocab.encode(t))
                    for s, t in zip(sources, targets)]

    out_dir = os.path.dirname(os.path.abspath(args.model))
    os.makedirs(out_dir, exist_ok=True)
    stem = args.model + "."
    src_vocab.save(stem + "vocab.src")
    trg_vocab.save(stem + "vocab.trg")
    if factor_vocab:
        factor_vocab.save(stem + "vocab.factors")

    config = ModelConfig(
        variant=args.variant,
        src_vocab_size=len(src_vocab),
        trg_vocab_size=len(trg_vocab),
        factor_vocab_size=len(factor_vocab) if factor_vocab else 0,
        emb_dim=args.emb_dim, rnn_dim=args.rnn_dim,
        factor_emb_dim=args.factor_emb_dim, max_len=2 * args.max_len + 5,
        src_vocab_file=os.path.basename(stem + "vocab.src"),
        trg_vocab_file=os.path.basename(stem + "vocab.trg"),
        factor_vocab_file=os.path.basename(stem + "vocab.factors")
        if factor_vocab else None,
        merges_file=args.merges if args.variant == "bpe" else None,
        lexicon_file=args.lexicon if args.variant == "factored" else None)
    model = NmtModel.build(config, seed=args.seed)
    translator = Translator(model, src_vocab, trg_vocab, factor_vocab,
                            merge_table=merge_table, lexicon=lexicon)
    try:
        outcome = train_loop(
            model, examples,
            [p.source for p in dev_pairs], [p.target for p in dev_pairs],
            translator,
            epochs=args.epochs, batch_size=args.batch_size,
            seed=args.seed, clip_norm=args.clip_norm,
            rho=args.rho, epsilon=args.epsilon, patience=args.patience,
            eval_every=args.eval_every, stop_bleu=args.stop_bleu)
    except TrainingDiverged as exc:
        model.save(args.model)     # last good parameters, pre-divergence
        log.error("training diverged: %s", exc)
        return EXIT_TRAINING
    model.save(args.model)
    with open(args.model + ".history.json", "w", encoding="utf-8") as fh:
        json.dump(outcome, fh, sort_keys=True, indent=1)
        fh.write("\n")
    print(f"best dev BLEU {outcome['best_bleu']:.2f} "
          f"at epoch {outcome['best_epoch']}; model -> {args.model}")
    return EXIT_OK


def _load_translator(args):
    try:
        model = NmtModel.load(args.model)
    except (OSError, CorruptModelError) as exc:
        raise CliError(f"model: {exc}") from None
    config = model.config
    base = os.path.dirname(os.path.abspath(args.model))

    def resolve(explicit, reference):
        if explicit:
            return explicit
        if reference:
            candidate = os.path.join(base, reference)
            return candidate if os.path.exists(candidate) else reference
        return None

    src_vocab_path = resolve(args.src_vocab, config.src_vocab_file)
    trg_vocab_path = resolve(args.trg_vocab, config.trg_vocab_file)
    if not src_vocab_path or not trg_vocab_path:
        raise CliError("translate: vocab files not found; pass --src-vocab "
                       "and --trg-vocab")
    src_vocab = Vocabulary.load(src_vocab_path)
    trg_vocab = Vocabulary.load(trg_vocab_path)
    factor_vocab = None
    lexicon = None
    merge_table = None
    if config.variant == "factored":
        factor_path = resolve(args.factor_vocab, config.factor_vocab_file)
        lexicon_file = resolve(args.lexicon, config.lexicon_file)
        if not factor_path or not lexicon_file:
            raise CliError("translate: factored model needs --factor-vocab "
                           "and --lexicon")
        factor_vocab = Vocabulary.load(factor_path)
        lexicon = _load_lexicon(lexicon_file)
    if config.variant == "bpe":
        merges_path = resolve(args.merges, config.merges_file)
        if not merges_path:
            raise CliError("translate: bpe model needs --merges")
        merge_table = MergeTable.load(merges_path)
    if len(src_vocab) != config.src_vocab_size \
            or len(trg_vocab) != config.trg_vocab_size:
        raise CliError("translate: vocab sizes do not match the model config")
    dictionary = load_dictionary(args.dict) if getattr(args, "dict", None) \
        else None
    return Translator(model, src_vocab, trg_vocab, factor_vocab,
                      merge_table=merge_table, lexicon=lexicon,
                      dictionary=dictionary)


def cmd_translate(args):
    if args.unk_replace and not args.dict:
        raise CliError("translate: --unk-replace needs --dict")
    translator = _load_translator(args)
    lines = _open_lines(args.input) if args.input \
        else sys.stdin.read().splitlines()
    beam_config = BeamConfig(beam_size=args.beam, length_norm=args.length_norm,
                             factor_mode=args.factor_mode)
    out_lines = []
    nbest_lines = []
    dump_entries = []
    for idx, line in enumerate(lines):
        out = translator.translate_tokens(
            line.split(), beam_config=beam_config, greedy=args.greedy,
            replace_unks=args.unk_replace, return_nbest=bool(args.nbest))
        out_lines.append(" ".join(out.words))
        if args.nbest:
            for hyp in out.nbest[:args.nbest]:
                nbest_lines.append(
                    f"{idx} ||| {' '.join(hyp.tokens)} ||| "
                    f"{hyp.score:.6f} ||| {hyp.raw_score:.6f}")
        if args.attention:
            # rows are the model's native output symbols, columns the
            # model-side source tokens plus the EOS slot
            dump_entries.append((out.source_tokens + ["<eos>"],
                                 out.result.tokens, out.result.attention))
    if args.output:
        _write_lines(args.output, out_lines)
    else:
        for line in out_lines:
            print(line)
    if args.nbest:
        _write_lines(args.nbest_out or (args.output or "nbest") + ".nbest",
                     nbest_lines)
    if args.attention:
        with open(args.attention, "w", encoding="utf-8") as fh:
            write_attention_dump(fh, dump_entries)
    return EXIT_OK


def cmd_score(args):
    hyps = [line.split() for line in _open_lines(args.hyp)]
    refs = [line.split() for line in _open_lines(args.ref)]
    if len(hyps) != len(refs):
        raise CliError(f"score: {len(hyps)} hypotheses vs {len(refs)} "
                       "references")
    report = bleu_corpus(hyps, refs, smooth=args.smooth)
    unk_total = sum(count_unk(h) for h in hyps)
    print(report.summary())
    print(f"UNK tokens: {unk_total}")
    payload = json.loads(report.to_json())
    payload["unk_count"] = unk_total
    if args.lexicon:
        lexicon = _load_lexicon(args.lexicon)
        streams = factored_stream_scores(hyps, refs, lexicon,
                                         smooth=args.smooth)
        for name in ("word", "lemma", "factor"):
            payload[f"bleu_{name}"] = round(streams[name].bleu, 4)
            print(f"{name} BLEU = {streams[name].bleu:.2f}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")
    return EXIT_OK


def cmd_heatmap(args):
    entries = read_attention_dump(args.attention)
    if not entries:
        raise CliError("heatmap: attention dump is empty")
    if not 0 <= args.index < len(entries):
        raise CliError(f"heatmap: index {args.index} out of range "
                       f"(0..{len(entries) - 1})")
    src_tokens, trg_tokens, matrix = entries[args.index]
    if matrix.size == 0:
        raise CliError("heatmap: selected sentence has an empty matrix")
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(render_pgm(matrix, cell=args.cell))
    print(render_ascii(matrix, src_tokens, trg_tokens), end="")
    print(f"wrote {args.out}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fnmt",
        description="Desk-scale factored NMT lab: word, BPE and "
                    "lemma+factor translation models.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value option file")
        p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("prepare", help="filter corpus and build vocabularies")
    common(p)
    p.add_argument("--src", required=True)
    p.add_argument("--trg", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--max-len", type=int)
    p.add_argument("--shortlist", type=int)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("bpe-learn", help="learn joint BPE merges")
    common(p)
    p.add_argument("--input", nargs="+", required=True)
    p.add_argument("--merges", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bpe_learn)

    p = sub.add_parser("bpe-apply", help="apply (or undo) BPE segmentation")
    common(p)
    p.add_argument("--merges")
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--undo", action="store_true", default=None)
    p.set_defaults(func=cmd_bpe_apply)

    p = sub.add_parser("factorize", help="split words into lemma/factor files")
    common(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out-lemmas", required=True)
    p.add_argument("--out-factors", required=True)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("recombine", help="merge lemma/factor files into words")
    common(p)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--lemmas", required=True)
    p.add_argument("--factors", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_recombine)

    p = sub.add_parser("train", help="train a translation model")
    common(p)
    p.add_argument("--variant", choices=["word", "bpe", "factored"])
    p.add_argument("--src", required=True)
    p.add_argument("--trg", required=True)
    p.add_argument("--dev-src")
    p.add_argument("--dev-trg")
    p.add_argument("--model", required=True)
    p.add_argument("--emb-dim", type=int)
    p.add_argument("--rnn-dim", type=int)
    p.add_argument("--factor-emb-dim", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--max-len", type=int)
    p.add_argument("--shortlist", type=int)
    p.add_argument("--factor-shortlist", type=int)
    p.add_argument("--clip-norm", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--patience", type=int)
    p.add_argument("--eval-every", type=int)
    p.add_argument("--stop-bleu", type=float)
    p.add_argument("--merges", help="merge file (bpe variant)")
    p.add_argument("--lexicon", help="lexicon file (factored variant)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("translate", help="translate text with a model")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--beam", type=int)
    p.add_argument("--greedy", action="store_true", default=None)
    p.add_argument("--length-norm", type=float)
    p.add_argument("--factor-mode", choices=["argmax", "product"])
    p.add_argument("--unk-replace", action="store_true", default=None)
    p.add_argument("--dict", help="unigram dictionary TSV for --unk-replace")
    p.add_argument("--nbest", type=int)
    p.add_argument("--nbest-out")
    p.add_argument("--attention", help="write attention dump here")
    p.add_argument("--src-vocab")
    p.add_argument("--trg-vocab")
    p.add_argument("--factor-vocab")
    p.add_argument("--merges")
    p.add_argument("--lexicon")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("score", help="BLEU, UNK count, stream scores")
    common(p)
    p.add_argument("--hyp", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--smooth", action="store_true", default=None)
    p.add_argument("--lexicon")
    p.add_argument("--json", help="write the report as JSON here")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("heatmap", help="render an attention matrix")
    common(p)
    p.add_argument("--attention", required=True)
    p.add_argument("--index", type=int)
    p.add_argument("--out", required=True)
    p.add_argument("--cell", type=int)
    p.set_defaults(func=cmd_heatmap)
    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("FNMT_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    args = effective_options(args)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
