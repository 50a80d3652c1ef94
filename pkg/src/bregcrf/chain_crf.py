"""Linear-chain CRF inference.

Potentials, log-space forward-backward, marginals, expected feature counts,
log-likelihood, Viterbi decoding, and the per-sentence stochastic gradient
(model expectation minus observed counts).  All recursions run in log space
with max-shifted log-sum-exp so long sentences cannot overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import (
    EncodedSentence,
    FeatureIndex,
    SparseVector,
    encode_sentence,
    global_feature_vector,
)
from .corpus import Sentence


def _logsumexp(a: np.ndarray, axis: int) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    out = m + np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


@dataclass
class ChainModel:
    """CRF parameters stored as (scale, scaled weights): effective weights
    are ``scale * weights``.  The split lets L2 shrinkage run in O(1)."""

    index: FeatureIndex
    weights: np.ndarray
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @classmethod
    def zeros(cls, index: FeatureIndex) -> "ChainModel":
        return cls(index, np.zeros(index.num_features), 1.0)

    @property
    def num_features(self) -> int:
        return self.index.num_features

    def effective(self) -> np.ndarray:
        """Materialized effective weight vector (scale folded in)."""
        return self.scale * self.weights

    def unscale(self) -> None:
        """Fold the scale into the weights in place and reset it to 1."""
        self.weights *= self.scale
        self.scale = 1.0


@dataclass
class Lattice:
    """Log-potentials of one sentence: unary is T x L, transition is L x L
    (position independent)."""

    unary: np.ndarray
    transition: np.ndarray


@dataclass
class Posteriors:
    log_alpha: np.ndarray
    log_beta: np.ndarray
    log_z: float
    unary_marginals: np.ndarray
    pairwise_marginals: np.ndarray = field(repr=False)


def _as_encoded(model: ChainModel, sentence) -> EncodedSentence:
    if isinstance(sentence, EncodedSentence):
        return sentence
    return encode_sentence(sentence, model.index)


def build_lattice(model: ChainModel, sentence) -> Lattice:
    """Sum effective weights of firing features into log-potentials.

    ``sentence`` may be a Sentence or a pre-built EncodedSentence.
    """
    enc = _as_encoded(model, sentence)
    n_labels = model.index.num_labels
    unary = np.zeros((enc.length, n_labels))
    if len(enc.state_ids):
        contrib = model.weights[enc.state_ids] * model.scale
        flat = enc.positions.astype(np.int64) * n_labels + enc.state_labels
        unary = np.bincount(flat, weights=contrib, minlength=enc.length * n_labels)
        unary = unary.reshape(enc.length, n_labels)
    transition = model.weights[model.index.transition_ids] * model.scale
    return Lattice(unary, transition)


def _log_partition(lattice: Lattice) -> float:
    log_alpha = lattice.unary[0]
    for t in range(1, lattice.unary.shape[0]):
        log_alpha = lattice.unary[t] + _logsumexp(
            log_alpha[:, None] + lattice.transition, axis=0
        )
    return float(_logsumexp(log_alpha, axis=0))


def forward_backward(lattice: Lattice) -> Posteriors:
    """Alpha/beta recursions plus unary and pairwise posterior marginals.

    ``pairwise_marginals[t]`` is the joint over labels at positions
    (t, t+1), so it has T-1 slices.
    """
    unary, trans = lattice.unary, lattice.transition
    n, n_labels = unary.shape

    log_alpha = np.empty((n, n_labels))
    log_alpha[0] = unary[0]
    for t in range(1, n):
        log_alpha[t] = unary[t] + _logsumexp(log_alpha[t - 1][:, None] + trans, axis=0)

    log_beta = np.empty((n, n_labels))
    log_beta[n - 1] = 0.0
    for t in range(n - 2, -1, -1):
        log_beta[t] = _logsumexp(trans + (unary[t + 1] + log_beta[t + 1])[None, :], axis=1)

    log_z = float(_logsumexp(log_alpha[n - 1], axis=0))
    unary_marginals = np.exp(log_alpha + log_beta - log_z)

    pairwise = np.empty((n - 1, n_labels, n_labels))
    for t in range(n - 1):
        pairwise[t] = np.exp(
            log_alpha[t][:, None] + trans + (unary[t + 1] + log_beta[t + 1])[None, :] - log_z
        )
    return Posteriors(log_alpha, log_beta, log_z, unary_marginals, pairwise)


def expected_features(model: ChainModel, sentence, post: Posteriors) -> SparseVector:
    """Model expectation of the feature count vector for this sentence."""
    enc = _as_encoded(model, sentence)
    ids = enc.state_ids
    vals = post.unary_marginals[enc.positions, enc.state_labels]
    if enc.length > 1:
        ids = np.concatenate([ids, model.index.transition_ids.ravel()])
        vals = np.concatenate([vals, post.pairwise_marginals.sum(axis=0).ravel()])
    return SparseVector.from_pairs(ids, vals)


def log_likelihood(model: ChainModel, sentence: Sentence, labels) -> float:
    """log p(labels | sentence) under the model."""
    gold = global_feature_vector(sentence, labels, model.index)
    lattice = build_lattice(model, sentence)
    return model.scale * gold.dot(model.weights) - _log_partition(lattice)


def gradient_encoded(model: ChainModel, enc: EncodedSentence, gold: SparseVector) -> SparseVector:
    """Stochastic gradient from a cached encoding and observed count vector."""
    post = forward_backward(build_lattice(model, enc))
    expected = expected_features(model, enc, post)
    ids = np.concatenate([expected.ids, gold.ids])
    vals = np.concatenate([expected.values, -gold.values])
    return SparseVector.from_pairs(ids, vals)


def stochastic_gradient(model: ChainModel, sentence: Sentence, labels) -> SparseVector:
    """Gradient of this sentence's negative log-likelihood: expected feature
    counts minus observed counts, sparse over the union of supports."""
    enc = encode_sentence(sentence, model.index)
    gold = global_feature_vector(sentence, labels, model.index)
    return gradient_encoded(model, enc, gold)


def _viterbi_lattice(lattice: Lattice) -> list[int]:
    unary, trans = lattice.unary, lattice.transition
    n, n_labels = unary.shape
    delta = unary[0].copy()
    back = np.zeros((n, n_labels), dtype=np.int32)
    cols = np.arange(n_labels)
    for t in range(1, n):
        cand = delta[:, None] + trans
        best_prev = np.argmax(cand, axis=0)  # first max: lowest label id wins ties
        back[t] = best_prev
        delta = unary[t] + cand[best_prev, cols]
    path = [int(np.argmax(delta))]
    for t in range(n - 1, 0, -1):
        path.append(int(back[t, path[-1]]))
    path.reverse()
    return path


def viterbi(model: ChainModel, sentence) -> list[str]:
    """Most probable label sequence; ties resolved toward lower label ids."""
    path = _viterbi_lattice(build_lattice(model, sentence))
    return [model.index.labels[i] for i in path]
