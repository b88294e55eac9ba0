"""Training step and the BLEU-early-stopped training loop."""

from __future__ import annotations

import logging

import numpy as np

from .corpus import make_batches
from .evaluation import bleu_corpus
from .optim import AdadeltaState, adadelta_step, clip_global_norm

log = logging.getLogger("fnmt.training")


class TrainingDiverged(RuntimeError):
    """Raised when the loss stops being finite."""


def train_step(model, batch, opt_state, clip_norm=1.0,
               lambda_lemma=1.0, lambda_factor=1.0):
    """One teacher-forced update; returns per-stream loss floats."""
    model.params.zero_grad()
    losses = model.forward_loss(batch, lambda_lemma, lambda_factor)
    values = {k: float(v.data) for k, v in losses.items()}
    if not all(np.isfinite(v) for v in values.values()):
        raise TrainingDiverged(f"non-finite loss: {values}")
    losses["total"].backward()
    grads = model.params.grads()
    if clip_norm:
        clip_global_norm(grads, clip_norm)
    adadelta_step(model.params, grads, opt_state)
    return values


def train_loop(model, examples, dev_sources, dev_references, translator,
               *, epochs=100, batch_size=80, seed=1, clip_norm=1.0,
               rho=0.95, epsilon=1e-6, patience=10, eval_every=1,
               stop_bleu=None, smooth_dev_bleu=True,
               lambda_lemma=1.0, lambda_factor=1.0):
    """Epoch loop with greedy dev decoding and best-checkpoint keeping.

    dev_sources/dev_references are token lists; ``translator`` wraps
    this same model and turns source tokens into output words.  Returns
    the evaluation history; the model is left holding the best
    parameters seen.
    """
    if not dev_sources:
        raise ValueError("train_loop: dev set must be non-empty")
    opt_state = AdadeltaState(rho=rho, epsilon=epsilon)
    best_bleu = -1.0
    best_snapshot = model.params.copy_data()
    best_epoch = 0
    history = []
    stalls = 0
    for epoch in range(1, epochs + 1):
        batches = make_batches(examples, batch_size, seed=seed + epoch)
        stream_sums = {}
        for batch in batches:
            values = train_step(model, batch, opt_state, clip_norm,
                                lambda_lemma, lambda_factor)
            for k, v in values.items():
                stream_sums[k] = stream_sums.get(k, 0.0) + v
        mean_losses = {k: v / len(batches) for k, v in stream_sums.items()}
        if epoch % eval_every != 0 and epoch != epochs:
            continue
        hyps = [translator.translate_tokens(src, greedy=True).words
                for src in dev_sources]
        report = bleu_corpus(hyps, dev_references, smooth=smooth_dev_bleu)
        improved = report.bleu > best_bleu
        if improved:
            best_bleu = report.bleu
            best_snapshot = model.params.copy_data()
            best_epoch = epoch
            stalls = 0
        else:
            stalls += 1
        history.append({
            "epoch": epoch,
            "loss": {k: round(v, 6) for k, v in mean_losses.items()},
            "dev_bleu": round(report.bleu, 4),
            "best": improved,
        })
        log.info("epoch %d loss %.4f dev BLEU %.2f%s", epoch,
                 mean_losses["total"], report.bleu, " *" if improved else "")
        if stop_bleu is not None and report.bleu >= stop_bleu:
            break
        if stalls >= max(patience, 1):
            break
    model.params.load_data(best_snapshot)
    return {"history": history, "best_epoch": best_epoch,
            "best_bleu": best_bleu}
