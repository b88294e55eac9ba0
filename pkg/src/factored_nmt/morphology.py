"""Morphological factor tags and the lexicon replacing a full analyzer.

A factor tag packs six slots: part of speech, tense, person, gender,
number and case.  The canonical wire format joins them with hyphens
("v-P-3-#-s-l"); slots that do not apply hold "#", except case which is
always one of l (lowercase), u (first-letter capital) or c (all caps).
Analysis and generation run against a flat-file lexicon; both fall back
to the lemma itself so they are total functions.
"""

from __future__ import annotations

from dataclasses import dataclass

NONE_SLOT = "#"
CASE_CODES = ("l", "u", "c")
PERSON_CODES = ("1", "2", "3", NONE_SLOT)
GENDER_CODES = ("m", "f", NONE_SLOT)
NUMBER_CODES = ("s", "p", NONE_SLOT)

_SLOT_NAMES = ("pos", "tense", "person", "gender", "number", "case")


@dataclass(frozen=True)
class FactorTag:
    pos: str
    tense: str
    person: str
    gender: str
    number: str
    case: str

    def __post_init__(self):
        for slot, value in zip(_SLOT_NAMES, self.astuple()):
            if not value:
                raise ValueError(f"FactorTag: empty {slot} slot")
        if self.person not in PERSON_CODES:
            raise ValueError(f"FactorTag: bad person slot {self.person!r}")
        if self.gender not in GENDER_CODES:
            raise ValueError(f"FactorTag: bad gender slot {self.gender!r}")
        if self.number not in NUMBER_CODES:
            raise ValueError(f"FactorTag: bad number slot {self.number!r}")
        if self.case not in CASE_CODES:
            raise ValueError(f"FactorTag: bad case slot {self.case!r}")

    def astuple(self):
        return (self.pos, self.tense, self.person, self.gender,
                self.number, self.case)

    def with_case(self, case):
        return FactorTag(self.pos, self.tense, self.person, self.gender,
                         self.number, case)


def format_factor_string(tag):
    return "-".join(tag.astuple())


def parse_factor_string(s):
    parts = s.split("-")
    if len(parts) != 6:
        raise ValueError(
            f"factor string {s!r}: expected 6 hyphen-joined slots, "
            f"got {len(parts)}")
    return FactorTag(*parts)


def normalize_factor_string(s):
    """Canonicalize compact tag strings that omit '#' slots.

    Shorthand like "vppart-K-m-p-l" names only the applicable slots;
    the missing ones are inferred from their value alphabets (1/2/3 is
    a person, m/f a gender, s/p a number, a remaining uppercase code the
    tense) and refilled with '#'.
    """
    parts = s.split("-")
    if len(parts) == 6:
        return format_factor_string(parse_factor_string(s))
    if len(parts) < 2:
        raise ValueError(f"factor string {s!r}: expected at least pos and case")
    pos, case = parts[0], parts[-1]
    if case not in CASE_CODES:
        raise ValueError(f"factor string {s!r}: bad case slot {case!r}")
    tense = person = gender = number = NONE_SLOT
    for value in parts[1:-1]:
        if value == NONE_SLOT:
            continue
        if value in ("1", "2", "3"):
            person = value
        elif value in ("m", "f"):
            gender = value
        elif value in ("s", "p"):
            number = value
        elif len(value) == 1 and value.isupper():
            tense = value
        else:
            raise ValueError(
                f"factor string {s!r}: cannot place slot value {value!r}")
    return format_factor_string(
        FactorTag(pos, tense, person, gender, number, case))


def detect_case(word):
    letters = [c for c in word if c.isalpha()]
    if not letters:
        return "l"
    if all(c.isupper() for c in letters) and len(letters) > 1:
        return "c"
    if letters[0].isupper():
        return "u"
    return "l"


def apply_case(word, case):
    if case == "c":
        return word.upper()
    if case == "u":
        return word[:1].upper() + word[1:]
    return word


FALLBACK_POS = "unk"


def fallback_tag(word):
    return FactorTag(FALLBACK_POS, NONE_SLOT, NONE_SLOT, NONE_SLOT,
                     NONE_SLOT, detect_case(word))


class Lexicon:
    """surface -> [(lemma, tag)] analyses and (lemma, tag) -> surface.

    Surfaces are stored lowercase and tags case-normalized to 'l'; case
    is reapplied from the tag at generation time.  When several entries
    share a (lemma, tag) key the first one wins, mirroring how a real
    analyzer resolves spelling variants; the conflict count is kept for
    reporting.
    """

    def __init__(self):
        self._analyses = {}
        self._generation = {}
        self.conflict_count = 0

    def __len__(self):
        return sum(len(v) for v in self._analyses.values())

    @property
    def surfaces(self):
        return list(self._analyses)

    def add_entry(self, surface, lemma, tag):
        key_surface = surface.lower()
        key_tag = tag.with_case("l")
        self._analyses.setdefault(key_surface, []).append((lemma, key_tag))
        gen_key = (lemma, key_tag)
        if gen_key in self._generation:
            if self._generation[gen_key] != key_surface:
                self.conflict_count += 1
        else:
            self._generation[gen_key] = key_surface

    @classmethod
    def load(cls, path):
        """UTF-8 TSV: surface, lemma, factor string; '# ' comment lines."""
        lex = cls()
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("# "):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(
                        f"{path}:{n}: expected 3 tab-separated columns")
                surface, lemma, tag_s = parts
                tag = parse_factor_string(normalize_factor_string(tag_s))
                lex.add_entry(surface, lemma, tag)
        return lex

    def analyze(self, word):
        """(lemma, tag) for a surface form; total via the unk fallback."""
        entries = self._analyses.get(word.lower())
        case = detect_case(word)
        if entries:
            lemma, tag = entries[0]
            return lemma, tag.with_case(case)
        return word.lower(), fallback_tag(word)

    def analyses(self, word):
        return list(self._analyses.get(word.lower(), ()))

    def generate(self, lemma, tag):
        """Surface for (lemma, tag); the lemma itself when not covered."""
        surface = self._generation.get((lemma, tag.with_case("l")))
        if surface is None:
            surface = lemma
        return apply_case(surface, tag.case)

    def generation_keys(self):
        return list(self._generation)


def factorize_sentence(tokens, lexicon):
    lemmas, tags = [], []
    for tok in tokens:
        lemma, tag = lexicon.analyze(tok)
        lemmas.append(lemma)
        tags.append(tag)
    return lemmas, tags


def factorize_corpus(sentences, lexicon):
    """Per sentence: parallel lemma and tag streams, one slot per word."""
    return [factorize_sentence(tokens, lexicon) for tokens in sentences]


def recombine(lemmas, tags, lexicon):
    """Elementwise generation; streams must already be the same length."""
    if len(lemmas) != len(tags):
        raise ValueError(
            f"recombine: {len(lemmas)} lemmas vs {len(tags)} factor tags")
    return [lexicon.generate(lemma, tag) for lemma, tag in zip(lemmas, tags)]


def count_generable(lemma_vocab, lexicon):
    """Distinct surfaces reachable from in-vocabulary lemmas.

    Counts generation-table hits only; each surface string counts once
    regardless of case variants.
    """
    lemmas = set(lemma_vocab)
    return len({surface for (lemma, _tag), surface
                in lexicon._generation.items() if lemma in lemmas})
