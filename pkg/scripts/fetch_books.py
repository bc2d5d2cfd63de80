"""Download the study corpus from Project Gutenberg.

Usage: python scripts/fetch_books.py [target-dir]

Needs internet access to gutenberg.org. Ebook numbers below are for the
standard plain-text editions; a few titles have no well-known number and
must be located through the Gutenberg search by title/author, then added
here. After downloading, the script checks that the file's Title: header
matches the expected title and warns when it does not.
"""

from __future__ import annotations

import re
import sys
from pathlib import Path

import requests

BOOKS: dict[str, tuple[int | None, str]] = {
    "a-christmas-carol": (46, "A Christmas Carol"),
    "heart-of-darkness": (219, "Heart of Darkness"),
    "metamorphosis": (5200, "Metamorphosis"),
    "the-prophet": (58585, "The Prophet"),
    "a-modest-proposal": (1080, "A Modest Proposal"),
    "a-study-in-scarlet": (244, "A Study in Scarlet"),
    "adventures-of-huckleberry-finn": (76, "Adventures of Huckleberry Finn"),
    "dragons-and-cherry-blossoms": (None, "Dragons and Cherry Blossoms"),
    "laughter": (4352, "Laughter"),
    "little-women": (514, "Little Women"),
    "the-picture-of-dorian-gray": (174, "The Picture of Dorian Gray"),
    "ruth-of-the-usa": (None, "Ruth of the U. S. A."),
    "siddhartha": (2500, "Siddhartha"),
    "the-catspaw": (None, "The Catspaw"),
    "the-hound-of-the-baskervilles": (2852, "The Hound of the Baskervilles"),
    "the-scarlet-letter": (33, "The Scarlet Letter"),
    "the-sons-of-japheth": (None, "The Sons of Japheth"),
    "treasure-island": (120, "Treasure Island"),
}

URL = "https://www.gutenberg.org/cache/epub/{num}/pg{num}.txt"


def fetch(target: Path) -> int:
    target.mkdir(parents=True, exist_ok=True)
    missing = 0
    for slug, (num, title) in BOOKS.items():
        out = target / f"{slug}.txt"
        if out.exists():
            print(f"have    {out}")
            continue
        if num is None:
            print(f"skip    {slug}: no ebook number on file; search gutenberg.org "
                  f"for {title!r} and add it to BOOKS")
            missing += 1
            continue
        resp = requests.get(URL.format(num=num), timeout=120)
        resp.raise_for_status()
        text = resp.text
        m = re.search(r"^Title:\s*(.+)$", text, re.MULTILINE)
        got = m.group(1).strip() if m else "<no Title: header>"
        if title.lower() not in got.lower():
            print(f"WARNING {slug}: ebook {num} has title {got!r}, expected {title!r}")
        out.write_text(text, encoding="utf-8")
        print(f"fetched {out} ({len(text)} chars, title: {got})")
    return missing


if __name__ == "__main__":
    directory = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("tests/fixtures/books")
    sys.exit(1 if fetch(directory) else 0)
