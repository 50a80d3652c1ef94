"""Reading, validating and shuffling CoNLL-2000-style chunking corpora.

The expected format is one token per line with three whitespace-separated
columns (word, POS tag, IOB2 chunk tag) and blank lines between sentences.
"""

from __future__ import annotations

import gzip
import random
import re
from dataclasses import dataclass
from typing import Iterator, NamedTuple

_CHUNK_TAG = re.compile(r"^(?:O|[BI]-.+)$")


class ParseError(ValueError):
    """Malformed corpus input. ``line`` is the 1-based line number, if known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class Token(NamedTuple):
    word: str
    pos: str
    chunk: str


class CorpusStats(NamedTuple):
    sentences: int
    tokens: int
    labels: int


@dataclass(frozen=True)
class Sentence:
    """An immutable, non-empty sequence of tokens."""

    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if not self.tokens:
            raise ValueError("sentence must contain at least one token")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    @property
    def words(self) -> tuple[str, ...]:
        return tuple(t.word for t in self.tokens)

    @property
    def pos_tags(self) -> tuple[str, ...]:
        return tuple(t.pos for t in self.tokens)

    @property
    def chunks(self) -> tuple[str, ...]:
        return tuple(t.chunk for t in self.tokens)


@dataclass(frozen=True)
class Dataset:
    """Sentences plus the ordered alphabet of chunk tags occurring in them.

    The alphabet preserves first-encounter order, which keeps everything
    downstream (feature ids, transition ids) deterministic for a given file.
    """

    sentences: tuple[Sentence, ...]
    label_alphabet: tuple[str, ...]

    @classmethod
    def from_sentences(cls, sentences) -> "Dataset":
        sentences = tuple(sentences)
        seen: dict[str, None] = {}
        for sent in sentences:
            for tok in sent:
                seen.setdefault(tok.chunk, None)
        return cls(sentences, tuple(seen))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)


def _check_iob2(chunk: str, prev: str | None, lineno: int) -> None:
    if not chunk.startswith("I-"):
        return
    ctype = chunk[2:]
    if prev is None:
        raise ParseError(f"{chunk} starts a sentence", lineno)
    if prev == "O" or prev[2:] != ctype:
        raise ParseError(f"{chunk} follows {prev}", lineno)


def parse_conll(text: str, strict: bool = False) -> Dataset:
    """Parse 3-column CoNLL text into a Dataset.

    Columns are separated by any run of whitespace; sentences by blank
    lines.  ``strict`` additionally rejects IOB2 continuation violations
    (an ``I-X`` tag that does not follow ``B-X`` or ``I-X``).
    """
    sentences: list[Sentence] = []
    current: list[Token] = []

    def flush() -> None:
        if current:
            sentences.append(Sentence(tuple(current)))
            current.clear()

    for lineno, raw in enumerate(text.split("\n"), start=1):
        cols = raw.split()
        if not cols:
            flush()
            continue
        if len(cols) != 3:
            raise ParseError(f"expected 3 columns, got {len(cols)}", lineno)
        word, pos, chunk = cols
        if not _CHUNK_TAG.match(chunk):
            raise ParseError(f"bad chunk tag {chunk!r}", lineno)
        if strict:
            _check_iob2(chunk, current[-1].chunk if current else None, lineno)
        current.append(Token(word, pos, chunk))
    flush()

    if not sentences:
        raise ParseError("no sentences")
    return Dataset.from_sentences(sentences)


def load_conll(path, strict: bool = False) -> Dataset:
    """Read a CoNLL file; gzip-compressed input is accepted for ``.gz`` paths."""
    if str(path).endswith(".gz"):
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            text = fh.read()
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    return parse_conll(text, strict=strict)


def serialize(dataset: Dataset) -> str:
    """Render a Dataset back to CoNLL text; inverse of :func:`parse_conll`."""
    blocks = (
        "\n".join(f"{t.word} {t.pos} {t.chunk}" for t in sent)
        for sent in dataset
    )
    return "\n\n".join(blocks) + "\n"


def shuffle(dataset: Dataset, seed: int) -> Dataset:
    """Deterministically permute the sentences; the label alphabet is kept."""
    order = list(dataset.sentences)
    random.Random(seed).shuffle(order)
    return Dataset(tuple(order), dataset.label_alphabet)


def stats(dataset: Dataset) -> CorpusStats:
    return CorpusStats(
        sentences=len(dataset.sentences),
        tokens=sum(len(s) for s in dataset.sentences),
        labels=len(dataset.label_alphabet),
    )
