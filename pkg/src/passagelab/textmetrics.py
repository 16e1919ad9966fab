"""Deterministic text statistics and readability indices.

Every number this module emits is defined by the tokenization rules below,
so tests can be exact against the rules rather than against dictionaries:

* Word: a maximal run of alphanumeric characters, optionally joined by
  internal apostrophes or hyphens ("don't", "well-known" are one word each).
* Sentence boundary: '.', '!' or '?' followed by whitespace or end of text.
  A small fixed abbreviation list ("Mr.", "e.g.", ...) suppresses the
  boundary.  Trailing text after the last terminator counts as a sentence
  when it contains at least one word.
* Syllables: the number of maximal vowel groups (a e i o u y), minus one
  for a terminal silent 'e', never less than one.  The silent-e pattern
  covers "-e", "-es" and "-ed" endings where the 'e' forms its own vowel
  group, except consonant + "le(s/d)" ("apple", "handled"), "-es" after a
  sibilant ("gases", "boxes", "washes") and "-ed" after t or d ("wanted"),
  which stay pronounced.
* Complex word: three or more syllables after discounting a terminal
  "-ing" suffix (the classic common-suffix discount; "-es"/"-ed" are
  already silent under the syllable rule), excluding capitalized words
  that do not open their sentence (a cheap proper-noun filter) and
  transparent compounds built on the position prefixes under-, over-,
  out-, up-, down-, every- ("underwater"), per the classic compound-word
  exclusion.
* character_count counts alphanumeric characters inside word tokens;
  letter_count counts alphabetic characters only.

Scores are returned unclamped and at full precision; rounding is left to
report rendering.  All functions are pure.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

__all__ = [
    "TextStats",
    "ReadabilityReport",
    "tokenize",
    "count_syllables",
    "flesch_reading_ease",
    "flesch_kincaid_grade",
    "gunning_fog",
    "automated_readability_index",
    "coleman_liau",
    "readability_report",
    "unique_word_count",
]

WORD_RE = re.compile(r"[A-Za-z0-9]+(?:['’-][A-Za-z0-9]+)*")

_VOWELS = frozenset("aeiouy")
_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")

# Dotted tokens that do not end a sentence.
_ABBREVIATIONS = frozenset(
    {
        "mr.", "mrs.", "ms.", "dr.", "prof.", "sr.", "jr.", "st.",
        "e.g.", "i.e.", "etc.", "vs.", "cf.", "fig.", "no.", "approx.",
    }
)
_ABBREV_TAIL_RE = re.compile(r"[A-Za-z][A-Za-z.]*\.$")

_TERMINATORS = frozenset(".!?")

_COMPOUND_PREFIXES = ("under", "over", "out", "up", "down", "every")


def _is_transparent_compound(word: str) -> bool:
    lowered = word.lower()
    for prefix in _COMPOUND_PREFIXES:
        rest = lowered[len(prefix) :]
        if lowered.startswith(prefix) and len(rest) >= 3 and _VOWEL_GROUP_RE.search(rest):
            return True
    return False


@dataclass(frozen=True)
class TextStats:
    """Raw counts for one text, computed in a single tokenize pass."""

    sentence_count: int
    word_count: int
    letter_count: int
    character_count: int
    syllable_count: int
    complex_word_count: int
    unique_word_count: int


@dataclass(frozen=True)
class ReadabilityReport:
    flesch_reading_ease: float
    flesch_kincaid_grade: float
    gunning_fog: float
    automated_readability_index: float
    coleman_liau: float
    stats: TextStats


def split_sentences(text: str) -> list[str]:
    """Split text into sentences under the boundary rule above.

    Sentences that contain no word token (e.g. stray punctuation) are
    dropped, so the result length equals the reported sentence count.
    """
    pieces: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS and (i + 1 == n or text[i + 1].isspace()):
            if ch == "." and _is_abbreviation(text, i):
                i += 1
                continue
            pieces.append(text[start : i + 1])
            i += 1
            while i < n and text[i].isspace():
                i += 1
            start = i
            continue
        i += 1
    if start < n:
        pieces.append(text[start:])
    return [p for p in pieces if WORD_RE.search(p)]


def _is_abbreviation(text: str, period_index: int) -> bool:
    m = _ABBREV_TAIL_RE.search(text, 0, period_index + 1)
    return bool(m) and m.group(0).lower() in _ABBREVIATIONS


def count_syllables(word: str) -> int:
    """Estimate syllables for one word token; always at least 1.

    Raises ValueError for tokens without an alphabetic character (the
    tokenizer never passes one; it credits them a single syllable itself).
    """
    letters = "".join(c for c in word.lower() if c.isalpha())
    if not letters:
        raise ValueError(f"no alphabetic characters in word: {word!r}")
    groups = len(_VOWEL_GROUP_RE.findall(letters))
    if _has_silent_e(letters):
        groups -= 1
    return max(1, groups)


def _has_silent_e(letters: str) -> bool:
    if letters.endswith("e"):
        e_index = len(letters) - 1
    elif letters.endswith(("es", "ed")):
        e_index = len(letters) - 2
    else:
        return False
    if e_index < 1 or letters[e_index - 1] in _VOWELS:
        return False
    # consonant + "le" endings ("apple", "littles", "handled") keep the syllable
    if letters[e_index - 1] == "l" and e_index >= 2 and letters[e_index - 2] not in _VOWELS:
        return False
    if letters.endswith("es") and (
        letters[e_index - 1] in "sxz" or letters[e_index - 2 : e_index] in ("ch", "sh")
    ):
        return False
    if letters.endswith("ed") and letters[e_index - 1] in "td":
        return False
    return True


def tokenize(text: str) -> TextStats:
    """Compute all counts for a text; empty text yields all-zero stats."""
    sentences = split_sentences(text)
    word_count = 0
    letter_count = 0
    character_count = 0
    syllable_count = 0
    complex_count = 0
    seen: set[str] = set()
    for sentence in sentences:
        for index, token in enumerate(WORD_RE.findall(sentence)):
            word_count += 1
            seen.add(token.casefold())
            alpha = 0
            alnum = 0
            for c in token:
                if c.isalpha():
                    alpha += 1
                    alnum += 1
                elif c.isdigit():
                    alnum += 1
            letter_count += alpha
            character_count += alnum
            syllables = count_syllables(token) if alpha else 1
            syllable_count += syllables
            fog_syllables = syllables - (1 if token.lower().endswith("ing") else 0)
            if (
                fog_syllables >= 3
                and not (token[0].isupper() and index > 0)
                and not _is_transparent_compound(token)
            ):
                complex_count += 1
    return TextStats(
        sentence_count=len(sentences),
        word_count=word_count,
        letter_count=letter_count,
        character_count=character_count,
        syllable_count=syllable_count,
        complex_word_count=complex_count,
        unique_word_count=len(seen),
    )


def _require_counts(stats: TextStats) -> None:
    if stats.word_count < 1 or stats.sentence_count < 1:
        raise ValueError(
            "readability indices need at least one word and one sentence, got "
            f"words={stats.word_count} sentences={stats.sentence_count}"
        )


def flesch_reading_ease(stats: TextStats) -> float:
    _require_counts(stats)
    return (
        206.835
        - 1.015 * (stats.word_count / stats.sentence_count)
        - 84.6 * (stats.syllable_count / stats.word_count)
    )


def flesch_kincaid_grade(stats: TextStats) -> float:
    _require_counts(stats)
    return (
        0.39 * (stats.word_count / stats.sentence_count)
        + 11.8 * (stats.syllable_count / stats.word_count)
        - 15.59
    )


def gunning_fog(stats: TextStats) -> float:
    _require_counts(stats)
    return 0.4 * (
        stats.word_count / stats.sentence_count
        + 100.0 * (stats.complex_word_count / stats.word_count)
    )


def automated_readability_index(stats: TextStats) -> float:
    _require_counts(stats)
    return (
        4.71 * (stats.character_count / stats.word_count)
        + 0.5 * (stats.word_count / stats.sentence_count)
        - 21.43
    )


def coleman_liau(stats: TextStats) -> float:
    _require_counts(stats)
    letters_per_100 = 100.0 * stats.letter_count / stats.word_count
    sentences_per_100 = 100.0 * stats.sentence_count / stats.word_count
    return 0.0588 * letters_per_100 - 0.296 * sentences_per_100 - 15.8


def readability_report(text: str) -> ReadabilityReport:
    """All five indices from one tokenize pass; raises on empty text."""
    stats = tokenize(text)
    if stats.word_count == 0:
        raise ValueError("cannot score a text with no words")
    return ReadabilityReport(
        flesch_reading_ease=flesch_reading_ease(stats),
        flesch_kincaid_grade=flesch_kincaid_grade(stats),
        gunning_fog=gunning_fog(stats),
        automated_readability_index=automated_readability_index(stats),
        coleman_liau=coleman_liau(stats),
        stats=stats,
    )


def unique_word_count(text: str) -> int:
    """Distinct case-folded word tokens in the text."""
    return len({t.casefold() for t in WORD_RE.findall(text)})
