"""Joint-vocabulary byte pair encoding: learn, apply, undo.

Merging is word-internal; a word segments into character symbols and
the learned merges are replayed in order.  Non-final pieces carry the
"@@" continuation marker, so undoing is a plain concatenation at marker
boundaries.  Raw tokens must not end in the marker themselves.
"""

from __future__ import annotations

from collections import Counter

MARKER = "@@"
MERGE_FILE_HEADER = "#fnmt-bpe v1"


class MergeTable:
    """Ordered list of (left, right) merge rules."""

    def __init__(self, merges=()):
        self.merges = list(merges)
        seen = set()
        for pair in self.merges:
            if pair in seen:
                raise ValueError(f"MergeTable: duplicate rule {pair}")
            seen.add(pair)
        self._cache = {}

    def __len__(self):
        return len(self.merges)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(MERGE_FILE_HEADER + "\n")
            for left, right in self.merges:
                fh.write(f"{left} {right}\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        if not lines or not lines[0].startswith("#fnmt-bpe"):
            raise ValueError(f"{path}: missing merge file header")
        merges = []
        for n, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split(" ")
            if len(parts) != 2:
                raise ValueError(f"{path}:{n}: malformed merge rule {line!r}")
            merges.append((parts[0], parts[1]))
        return cls(merges)

    def segment_word(self, word):
        """Split one word into subword pieces (marker not yet applied)."""
        if len(word) < 2:
            return [word]
        cached = self._cache.get(word)
        if cached is not None:
            return cached
        symbols = list(word)
        for left, right in self.merges:
            if len(symbols) < 2:
                break
            merged = []
            i = 0
            while i < len(symbols):
                if (i + 1 < len(symbols)
                        and symbols[i] == left and symbols[i + 1] == right):
                    merged.append(left + right)
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols = merged
        self._cache[word] = symbols
        return symbols


def _pair_counts(vocab):
    counts = Counter()
    for symbols, freq in vocab.items():
        for a, b in zip(symbols, symbols[1:]):
            counts[(a, b)] += freq
    return counts


def _merge_vocab(vocab, pair):
    left, right = pair
    out = {}
    for symbols, freq in vocab.items():
        merged = []
        i = 0
        while i < len(symbols):
            if (i + 1 < len(symbols)
                    and symbols[i] == left and symbols[i + 1] == right):
                merged.append(left + right)
                i += 2
            else:
                merged.append(symbols[i])
                i += 1
        out[tuple(merged)] = out.get(tuple(merged), 0) + freq
    return out


def bpe_learn(word_freqs, num_merges):
    """Greedy most-frequent-pair merging over a joint word frequency map.

    Stops early once no adjacent pair occurs at least twice.  Ties break
    on lexicographic pair order.
    """
    if num_merges < 0:
        raise ValueError("bpe_learn: num_merges must be >= 0")
    vocab = {}
    for word, freq in word_freqs.items():
        key = tuple(word)
        vocab[key] = vocab.get(key, 0) + freq
    merges = []
    for _ in range(num_merges):
        counts = _pair_counts(vocab)
        if not counts:
            break
        best = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        if best[1] < 2:
            break
        merges.append(best[0])
        vocab = _merge_vocab(vocab, best[0])
    return MergeTable(merges)


def bpe_apply(tokens, table):
    """Segment each token; non-final pieces get the continuation marker."""
    out = []
    for token in tokens:
        pieces = table.segment_word(token)
        for piece in pieces[:-1]:
            out.append(piece + MARKER)
        out.append(pieces[-1])
    return out


def bpe_undo(subwords):
    """Concatenate pieces at continuation-marker boundaries."""
    out = []
    buf = ""
    for piece in subwords:
        if piece.endswith(MARKER):
            buf += piece[:-len(MARKER)]
        else:
            out.append(buf + piece)
            buf = ""
    if buf:
        out.append(buf)
    return out
