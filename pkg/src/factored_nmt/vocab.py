"""Token vocabularies with frequency shortlists and reserved ids."""

from __future__ import annotations

from collections import Counter

PAD_ID = 0
EOS_ID = 1
UNK_ID = 2

PAD_TOKEN = "<pad>"
EOS_TOKEN = "<eos>"
UNK_TOKEN = "UNK"

RESERVED = (PAD_TOKEN, EOS_TOKEN, UNK_TOKEN)


class Vocabulary:
    """Bijective token <-> id map over the shortlist, UNK for the rest.

    Ids 0/1/2 are reserved for padding, end-of-sequence and unknown;
    shortlist tokens follow in descending corpus frequency, ties broken
    lexicographically.
    """

    def __init__(self, tokens, shortlist_size=None):
        tokens = list(tokens)
        if shortlist_size is not None and len(tokens) > shortlist_size:
            raise ValueError("Vocabulary: more tokens than shortlist size")
        for t in tokens:
            if t in RESERVED:
                raise ValueError(f"Vocabulary: token {t!r} collides with a "
                                 "reserved symbol")
        self.shortlist_size = shortlist_size if shortlist_size is not None \
            else len(tokens)
        self._id_to_token = list(RESERVED) + tokens
        self._token_to_id = {t: i for i, t in enumerate(self._id_to_token)}
        if len(self._token_to_id) != len(self._id_to_token):
            raise ValueError("Vocabulary: duplicate tokens")

    @classmethod
    def build(cls, token_streams, shortlist_size):
        """Most frequent ``shortlist_size`` tokens from iterated streams."""
        if shortlist_size < 1:
            raise ValueError("Vocabulary.build: shortlist_size must be >= 1")
        counts = Counter()
        for stream in token_streams:
            counts.update(stream)
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        kept = [tok for tok, _ in ranked[:shortlist_size]]
        return cls(kept, shortlist_size)

    def __len__(self):
        return len(self._id_to_token)

    def __contains__(self, token):
        return token in self._token_to_id

    def token_to_id(self, token):
        return self._token_to_id.get(token, UNK_ID)

    def id_to_token(self, idx):
        if not 0 <= idx < len(self._id_to_token):
            raise ValueError(f"Vocabulary: id {idx} out of range "
                             f"(size {len(self._id_to_token)})")
        return self._id_to_token[idx]

    def encode(self, tokens):
        """Token ids plus a trailing EOS; OOV tokens map to UNK."""
        return [self._token_to_id.get(t, UNK_ID) for t in tokens] + [EOS_ID]

    def decode(self, ids):
        """Tokens up to (and excluding) the first EOS."""
        out = []
        for idx in ids:
            if idx == EOS_ID:
                break
            out.append(self.id_to_token(idx))
        return out

    def oov_rate(self, token_streams):
        total = oov = 0
        for stream in token_streams:
            for t in stream:
                total += 1
                if t not in self._token_to_id:
                    oov += 1
        return oov / total if total else 0.0

    # -- file format: one token per line, rank = id order after reserved ---

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            for tok in self._id_to_token[len(RESERVED):]:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh if line.rstrip("\n")]
        return cls(tokens)
