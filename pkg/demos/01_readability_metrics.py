#!/usr/bin/env python3
"""Walk through the deterministic readability engine.

Tokenizes two bundled benchmark passages and prints their raw counts and
all five indices, then shows the syllable rule on a few words.
"""

from pathlib import Path

from passagelab import textmetrics as tm

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "data"


def show(name: str) -> None:
    text = (FIXTURES / name).read_text(encoding="utf-8")
    report = tm.readability_report(text)
    stats = report.stats
    print(f"--- {name} ---")
    print(f"  sentences {stats.sentence_count}  words {stats.word_count} "
          f"syllables {stats.syllable_count}  unique {stats.unique_word_count}")
    print(f"  Flesch Reading Ease        {report.flesch_reading_ease:7.2f}")
    print(f"  Flesch-Kincaid Grade       {report.flesch_kincaid_grade:7.2f}")
    print(f"  Gunning Fog                {report.gunning_fog:7.2f}")
    print(f"  Automated Readability Idx  {report.automated_readability_index:7.2f}")
    print(f"  Coleman-Liau               {report.coleman_liau:7.2f}")
    print()


def main() -> None:
    show("roots_grade2.txt")
    show("gills_grade4.txt")

    print("Syllable rule on sample words:")
    for word in ("cat", "migrate", "apple", "whale", "people", "moves", "wanted", "underwater"):
        print(f"  {word:12s} {tm.count_syllables(word)}")

    print("\nSame text, same numbers, every time:")
    text = (FIXTURES / "roots_grade2.txt").read_text(encoding="utf-8")
    assert tm.readability_report(text) == tm.readability_report(text)
    print("  bit-identical reports confirmed")


if __name__ == "__main__":
    main()
