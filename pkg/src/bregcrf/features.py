"""Feature templates, the frozen feature dictionary, and sparse count vectors.

A feature is either a transition indicator over a label pair, or a state
indicator over an (attribute string, label) pair.  Attribute strings are
produced by window templates over the word and POS columns, e.g.
``w[0]=He`` or ``p[-1]|p[0]=DT|NN``.  State features are registered only
for (attribute, label) pairs observed in the training data; transition
features exist for every label pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .corpus import Dataset, Sentence

Template = tuple[tuple[str, int], ...]

_SMALL: tuple[Template, ...] = (
    (("w", -2),),
    (("w", -1),),
    (("w", 0),),
    (("w", 1),),
    (("w", 2),),
    (("p", -2),),
    (("p", -1),),
    (("p", 0),),
    (("p", 1),),
    (("p", 2),),
    (("w", -1), ("w", 0)),
    (("w", 0), ("w", 1)),
    (("p", -2), ("p", -1)),
    (("p", -1), ("p", 0)),
    (("p", 0), ("p", 1)),
    (("p", 1), ("p", 2)),
)

_LARGE: tuple[Template, ...] = _SMALL + (
    (("p", -2), ("p", -1), ("p", 0)),
    (("p", -1), ("p", 0), ("p", 1)),
    (("p", 0), ("p", 1), ("p", 2)),
    (("w", 0), ("p", 0)),
    (("w", 0), ("p", -1)),
    (("w", 0), ("p", 1)),
    (("w", -1), ("p", 0)),
    (("w", -1), ("w", 1)),
)

BOS = "__BOS__"
EOS = "__EOS__"


@dataclass(frozen=True)
class TemplateSet:
    name: str
    templates: tuple[Template, ...]

    @classmethod
    def small(cls) -> "TemplateSet":
        return cls("small", _SMALL)

    @classmethod
    def large(cls) -> "TemplateSet":
        return cls("large", _LARGE)

    @classmethod
    def by_name(cls, name: str) -> "TemplateSet":
        if name == "small":
            return cls.small()
        if name == "large":
            return cls.large()
        raise ValueError(f"unknown template set {name!r}")


def _attr_name(template: Template) -> str:
    parts = []
    for col, off in template:
        parts.append(f"{col}[{off}]" if off == 0 else f"{col}[{off:+d}]")
    return "|".join(parts)


def extract_attributes(sentence: Sentence, t: int, template_set: TemplateSet) -> list[str]:
    """Attribute strings for position ``t``; out-of-window offsets yield
    ``__BOS__``/``__EOS__`` placeholder values."""
    words = sentence.words
    tags = sentence.pos_tags
    n = len(words)
    out = []
    for template in template_set.templates:
        vals = []
        for col, off in template:
            i = t + off
            if i < 0:
                vals.append(BOS)
            elif i >= n:
                vals.append(EOS)
            else:
                vals.append(words[i] if col == "w" else tags[i])
        out.append(_attr_name(template) + "=" + "|".join(vals))
    return out


class SparseVector:
    """Sparse real vector stored as parallel (strictly increasing ids, values)
    arrays with no explicit zeros."""

    __slots__ = ("ids", "values")

    def __init__(self, ids, values):
        ids = np.asarray(ids, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if ids.ndim != 1 or values.ndim != 1 or len(ids) != len(values):
            raise ValueError("ids and values must be parallel 1-d arrays")
        if len(ids) > 1 and not np.all(np.diff(ids) > 0):
            raise ValueError("ids must be strictly increasing")
        if np.any(values == 0.0):
            raise ValueError("explicit zeros are not allowed")
        self.ids = ids
        self.values = values

    @classmethod
    def from_pairs(cls, ids, values) -> "SparseVector":
        """Build from unsorted, possibly duplicated pairs; duplicate ids are
        summed and exact zeros dropped."""
        ids = np.asarray(ids, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if len(ids) == 0:
            return cls(np.empty(0, dtype=np.int64), np.empty(0))
        uniq, inverse = np.unique(ids, return_inverse=True)
        summed = np.bincount(inverse, weights=values, minlength=len(uniq))
        keep = summed != 0.0
        return cls(uniq[keep], summed[keep])

    def dot(self, weights: np.ndarray) -> float:
        return float(weights[self.ids] @ self.values)

    def to_dict(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.ids, self.values)}

    def __len__(self) -> int:
        return len(self.ids)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and np.array_equal(self.ids, other.ids)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self) -> str:
        return f"SparseVector({self.to_dict()!r})"


@dataclass(frozen=True)
class EncodedSentence:
    """Per-sentence cache of every state feature that can fire.

    ``positions[k]``, ``state_labels[k]`` and ``state_ids[k]`` describe one
    (position, label, feature id) triple; a feature id may appear at several
    positions.  Built once per sentence and reused across epochs.
    """

    length: int
    positions: np.ndarray
    state_labels: np.ndarray
    state_ids: np.ndarray


class FeatureIndex:
    """Frozen bijection between features and ids in ``[0, d)``.

    Transition features occupy ids ``[0, L*L)`` with id ``prev*L + cur``;
    state features follow in first-encounter order over the training data.
    """

    def __init__(self, labels, templates: TemplateSet, state, num_features: int):
        self.labels: tuple[str, ...] = tuple(labels)
        self.label_ids = {lab: i for i, lab in enumerate(self.labels)}
        self.templates = templates
        self._state = state  # attr -> (sorted label-id array, feature-id array)
        self.num_features = num_features
        n = len(self.labels)
        self.transition_ids = np.arange(n * n, dtype=np.int64).reshape(n, n)

    @property
    def num_labels(self) -> int:
        return len(self.labels)

    def transition_id(self, prev: int, cur: int) -> int:
        return prev * len(self.labels) + cur

    def state_entries(self, attr: str):
        """(label ids, feature ids) registered for an attribute, or None."""
        return self._state.get(attr)

    def state_feature_id(self, attr: str, label: str) -> int | None:
        entry = self._state.get(attr)
        if entry is None:
            return None
        labs, fids = entry
        k = int(np.searchsorted(labs, self.label_ids[label]))
        if k < len(labs) and labs[k] == self.label_ids[label]:
            return int(fids[k])
        return None

    def feature_names(self) -> Iterator[tuple[int, str]]:
        """All (id, readable name) pairs, transitions first."""
        n = len(self.labels)
        for prev in range(n):
            for cur in range(n):
                yield prev * n + cur, f"t|{self.labels[prev]}|{self.labels[cur]}"
        for attr, (labs, fids) in self._state.items():
            for lab, fid in zip(labs, fids):
                yield int(fid), f"s|{self.labels[lab]}|{attr}"


def build_dictionary(dataset: Dataset, template_set: TemplateSet) -> FeatureIndex:
    """Scan a dataset and assign ids: all label-pair transitions first, then
    every (attribute, gold label) pair in first-encounter order."""
    if not dataset.sentences:
        raise ValueError("cannot build a dictionary from an empty dataset")
    labels = dataset.label_alphabet
    label_ids = {lab: i for i, lab in enumerate(labels)}
    next_id = len(labels) ** 2
    building: dict[str, dict[int, int]] = {}
    template_set_t = template_set
    for sentence in dataset:
        for t, token in enumerate(sentence.tokens):
            y = label_ids[token.chunk]
            for attr in extract_attributes(sentence, t, template_set_t):
                slot = building.setdefault(attr, {})
                if y not in slot:
                    slot[y] = next_id
                    next_id += 1
    state = {}
    for attr, slot in building.items():
        labs = np.array(sorted(slot), dtype=np.int32)
        fids = np.array([slot[int(y)] for y in labs], dtype=np.int64)
        state[attr] = (labs, fids)
    return FeatureIndex(labels, template_set, state, next_id)


def encode_sentence(sentence: Sentence, index: FeatureIndex) -> EncodedSentence:
    """Resolve a sentence's attributes against the dictionary once."""
    pos_parts: list[np.ndarray] = []
    lab_parts: list[np.ndarray] = []
    fid_parts: list[np.ndarray] = []
    for t in range(len(sentence)):
        for attr in extract_attributes(sentence, t, index.templates):
            entry = index.state_entries(attr)
            if entry is None:
                continue
            labs, fids = entry
            pos_parts.append(np.full(len(labs), t, dtype=np.int32))
            lab_parts.append(labs)
            fid_parts.append(fids)
    if pos_parts:
        positions = np.concatenate(pos_parts)
        state_labels = np.concatenate(lab_parts)
        state_ids = np.concatenate(fid_parts)
    else:
        positions = np.empty(0, dtype=np.int32)
        state_labels = np.empty(0, dtype=np.int32)
        state_ids = np.empty(0, dtype=np.int64)
    return EncodedSentence(len(sentence), positions, state_labels, state_ids)


def global_feature_vector(sentence: Sentence, labels, index: FeatureIndex) -> SparseVector:
    """Count vector of all features firing for a labeling of a sentence.

    Attribute strings absent from the dictionary, and (attribute, label)
    pairs never registered, are silently dropped.
    """
    n = len(sentence)
    labels = list(labels)
    if len(labels) != n:
        raise ValueError(f"expected {n} labels, got {len(labels)}")
    for lab in labels:
        if lab not in index.label_ids:
            raise ValueError(f"unknown label {lab!r}")
    ids: list[int] = []
    for t in range(n):
        for attr in extract_attributes(sentence, t, index.templates):
            fid = index.state_feature_id(attr, labels[t])
            if fid is not None:
                ids.append(fid)
    yids = [index.label_ids[lab] for lab in labels]
    for t in range(1, n):
        ids.append(index.transition_id(yids[t - 1], yids[t]))
    return SparseVector.from_pairs(np.asarray(ids, dtype=np.int64), np.ones(len(ids)))
