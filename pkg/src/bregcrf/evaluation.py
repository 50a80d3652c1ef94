"""Chunk-level precision/recall/F1 with conlleval semantics, plus token accuracy.

Chunks are maximal IOB2 spans compared as exact (type, start, end) triples,
micro-averaged over the whole corpus.  Malformed ``I-X`` tags (after ``O``,
after a different type, or at sentence start) are repaired to chunk starts
during extraction, matching the reference evaluator; the input tags are
never rewritten.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class Chunk:
    type: str
    start: int
    end: int  # inclusive


@dataclass(frozen=True)
class ChunkMetrics:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "ChunkMetrics":
        precision = tp / (tp + fp) if tp + fp > 0 else 0.0
        recall = tp / (tp + fn) if tp + fn > 0 else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        return cls(tp, fp, fn, precision, recall, f1)


def extract_chunks(tags) -> list[Chunk]:
    """Maximal chunk spans of an IOB2 tag sequence, sorted by start."""
    tags = list(tags)
    chunks: list[Chunk] = []
    open_type: str | None = None
    open_start = 0
    for t, tag in enumerate(tags):
        if tag == "O":
            if open_type is not None:
                chunks.append(Chunk(open_type, open_start, t - 1))
                open_type = None
            continue
        prefix, ctype = tag[0], tag[2:]
        starts = prefix == "B" or open_type != ctype  # repair: stray I-X starts a chunk
        if starts:
            if open_type is not None:
                chunks.append(Chunk(open_type, open_start, t - 1))
            open_type = ctype
            open_start = t
    if open_type is not None:
        chunks.append(Chunk(open_type, open_start, len(tags) - 1))
    return chunks


def score(pred, gold) -> ChunkMetrics:
    """Micro-averaged chunk metrics over parallel lists of tag sequences."""
    pred = list(pred)
    gold = list(gold)
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predicted vs {len(gold)} gold sequences")
    tp = fp = fn = 0
    for p_tags, g_tags in zip(pred, gold):
        p_tags = list(p_tags)
        g_tags = list(g_tags)
        if len(p_tags) != len(g_tags):
            raise ValueError("predicted and gold sequence lengths differ")
        p_chunks = set(extract_chunks(p_tags))
        g_chunks = set(extract_chunks(g_tags))
        tp += len(p_chunks & g_chunks)
        fp += len(p_chunks - g_chunks)
        fn += len(g_chunks - p_chunks)
    return ChunkMetrics.from_counts(tp, fp, fn)


def token_accuracy(pred, gold) -> float:
    """Fraction of positions whose tags agree."""
    pred = list(pred)
    gold = list(gold)
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predicted vs {len(gold)} gold sequences")
    correct = total = 0
    for p_tags, g_tags in zip(pred, gold):
        p_tags = list(p_tags)
        g_tags = list(g_tags)
        if len(p_tags) != len(g_tags):
            raise ValueError("predicted and gold sequence lengths differ")
        total += len(g_tags)
        correct += sum(p == g for p, g in zip(p_tags, g_tags))
    return correct / total if total else 0.0
