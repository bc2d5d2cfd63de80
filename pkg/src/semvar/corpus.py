"""Document ingestion: boilerplate stripping, rule-based sentence segmentation, corpus stats.

The segmenter is deliberately frozen: a fixed terminator rule plus a fixed
abbreviation list, so that two runs on identical bytes always produce
identical sentence lists.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .errors import FormatError, SemvarError

# Tokens whose trailing period never ends a sentence (compared lowercase,
# without the final period).
ABBREVIATIONS = frozenset({"mr", "mrs", "dr", "st", "vs", "etc", "i.e", "e.g"})

# Closing quotes/brackets that attach to the sentence they follow.
_CLOSERS = "\"'\u201d\u2019)]"
# Characters that may open the next sentence in place of an uppercase letter.
_OPENERS = "\"'\u201c\u2018"

# Terminator, optional trailing closers, then the whitespace gap.
_BOUNDARY = re.compile(r"([.!?][\"'\u201d\u2019)\]]*)(\s+)")

_PARAGRAPH_BREAK = re.compile(r"\n\s*\n")

_START_MARKER = "*** START OF"
_END_MARKER = "*** END OF"

_TITLE_LINE = re.compile(r"^Title:\s*(.+)$", re.MULTILINE)


@dataclass(frozen=True)
class Sentence:
    """One sentence of a document, in original text order."""

    index: int
    text: str
    token_count: int


@dataclass(frozen=True)
class Document:
    """An ingested text: ordered sentences plus provenance."""

    id: str
    title: str
    sentences: tuple[Sentence, ...]
    source_path: str

    def __post_init__(self) -> None:
        if not self.sentences:
            raise SemvarError("no sentences found")
        for i, s in enumerate(self.sentences):
            if s.index != i:
                raise SemvarError(f"sentence indices not contiguous at {i}")

    @property
    def n(self) -> int:
        return len(self.sentences)

    def texts(self) -> list[str]:
        return [s.text for s in self.sentences]


@dataclass(frozen=True)
class DocumentStats:
    sentence_count: int
    token_count: int
    mean_sentence_length: float


def _word_before(text: str, terminator_pos: int) -> str:
    """Maximal non-space run ending just before ``terminator_pos``, stripped of
    leading quote/bracket characters."""
    i = terminator_pos
    while i > 0 and not text[i - 1].isspace():
        i -= 1
    word = text[i:terminator_pos]
    return word.lstrip(_OPENERS + "([")


def _is_boundary(text: str, match: re.Match) -> bool:
    terminator = match.group(1)[0]
    after = match.end()
    if after >= len(text):
        return True
    nxt = text[after]
    if not (nxt.isupper() or nxt in _OPENERS):
        return False
    if terminator == ".":
        word = _word_before(text, match.start())
        if word.lower() in ABBREVIATIONS:
            return False
    return True


def _segment_paragraph(paragraph: str, chunks: list[str]) -> None:
    start = 0
    for m in _BOUNDARY.finditer(paragraph):
        if _is_boundary(paragraph, m):
            chunks.append(paragraph[start : m.end(1)])
            start = m.end()
    chunks.append(paragraph[start:])


def segment_sentences(text: str) -> list[Sentence]:
    """Split ``text`` into sentences with the frozen rule set.

    Sentences end at '.', '!' or '?' (plus any trailing closing quotes or
    brackets) when followed by whitespace and an uppercase letter or an
    opening quote, except after a listed abbreviation. Blank-line paragraph
    breaks also terminate sentences. Empty input yields an empty list.
    """
    chunks: list[str] = []
    for paragraph in _PARAGRAPH_BREAK.split(text):
        _segment_paragraph(paragraph, chunks)

    sentences = []
    for chunk in chunks:
        trimmed = chunk.strip()
        if not trimmed:
            continue
        sentences.append(
            Sentence(index=len(sentences), text=trimmed, token_count=len(trimmed.split()))
        )
    return sentences


def _strip_gutenberg(text: str) -> str:
    lines = text.split("\n")
    start, end = 0, len(lines)
    for i, line in enumerate(lines):
        if _START_MARKER in line.upper():
            start = i + 1
            break
    for i in range(len(lines) - 1, -1, -1):
        if _END_MARKER in lines[i].upper():
            end = i
            break
    if end < start:
        return ""
    return "\n".join(lines[start:end])


def slug_id(stem: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "-", stem.lower()).strip("-")
    return slug or "doc"


def load_document(path: str | Path, strip_boilerplate: bool = True) -> Document:
    """Read a UTF-8 text file and segment it into a Document.

    With ``strip_boilerplate`` set, everything up to a line containing
    ``*** START OF`` and from a line containing ``*** END OF`` onward is
    discarded (case-insensitive); absent markers leave the text untouched.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SemvarError(f"unreadable file: {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise SemvarError(f"unreadable file: {path}: not valid UTF-8") from e

    title_match = _TITLE_LINE.search(raw)
    title = title_match.group(1).strip() if title_match else path.stem

    body = _strip_gutenberg(raw) if strip_boilerplate else raw
    if not body.strip():
        raise SemvarError(f"empty body: {path}")

    sentences = segment_sentences(body)
    if not sentences:
        raise SemvarError(f"no sentences found: {path}")

    return Document(
        id=slug_id(path.stem), title=title, sentences=tuple(sentences), source_path=str(path)
    )


def corpus_stats(doc: Document) -> DocumentStats:
    tokens = sum(s.token_count for s in doc.sentences)
    return DocumentStats(
        sentence_count=doc.n,
        token_count=tokens,
        mean_sentence_length=tokens / doc.n,
    )


# Line-delimited document serialization. One header line, then one line per
# sentence; tab, newline and backslash inside text are escaped.

_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n"}
_UNESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n"}
_UNESCAPE_RE = re.compile(r"\\[\\tn]")


def _escape(s: str) -> str:
    s = s.replace("\\", "\\\\")
    return s.replace("\t", "\\t").replace("\n", "\\n")


def _unescape(s: str) -> str:
    return _UNESCAPE_RE.sub(lambda m: _UNESCAPES[m.group()], s)


def write_document(doc: Document, path: str | Path) -> None:
    lines = [f"#doc {doc.id}\t{_escape(doc.title)}"]
    for s in doc.sentences:
        lines.append(f"{s.index}\t{s.token_count}\t{_escape(s.text)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_document(path: str | Path) -> Document:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("#doc "):
        raise FormatError(f"bad document header: {path}")
    header = lines[0][len("#doc ") :]
    doc_id, _, title = header.partition("\t")
    sentences = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t", 2)
        if len(parts) != 3:
            raise FormatError(f"bad sentence record at line {lineno}: {path}")
        index, token_count, text = int(parts[0]), int(parts[1]), _unescape(parts[2])
        sentences.append(Sentence(index=index, text=text, token_count=token_count))
    return Document(
        id=doc_id, title=_unescape(title), sentences=tuple(sentences), source_path=str(path)
    )
