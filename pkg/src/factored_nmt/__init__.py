"""Desk-scale neural machine translation lab.

Word-level, BPE and factored (lemma + morphological tag) encoder-decoder
models over a small numpy autodiff core, with beam search, attention
based unknown-word replacement and lexicon-driven surface recombination.
"""

__version__ = "0.1.0"
