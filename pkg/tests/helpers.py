"""Shared test utilities: tiny corpora, random instances, and brute-force
oracles that enumerate all label sequences instead of using the dynamic
programs under test."""

from __future__ import annotations

import itertools
import math
import random

import numpy as np

from bregcrf.corpus import Dataset, Sentence, Token
from bregcrf.features import FeatureIndex, TemplateSet, build_dictionary, global_feature_vector

WORDS = ("alpha", "beta", "gamma", "delta")
POS = ("P", "Q")
LABELS3 = ("O", "B-X", "I-X")


def make_sentence(words, pos, chunks) -> Sentence:
    return Sentence(tuple(Token(w, p, c) for w, p, c in zip(words, pos, chunks)))


def make_dataset(rows) -> Dataset:
    """rows: list of list of (word, pos, chunk) triples."""
    return Dataset.from_sentences(
        Sentence(tuple(Token(*t) for t in row)) for row in rows
    )


def random_instance(rng: random.Random, max_len=4, num_labels=3, extra_sentences=2):
    """A small random corpus plus one target sentence with random labels.

    Returns (dataset, index, sentence, labels).  The dataset includes the
    target sentence so its (attribute, label) pairs are registered.
    """
    labels = LABELS3[:num_labels]

    def rand_sentence():
        n = rng.randint(1, max_len)
        return make_sentence(
            [rng.choice(WORDS) for _ in range(n)],
            [rng.choice(POS) for _ in range(n)],
            [rng.choice(labels) for _ in range(n)],
        )

    target = rand_sentence()
    rows = [target] + [rand_sentence() for _ in range(extra_sentences)]
    dataset = Dataset.from_sentences(rows)
    index = build_dictionary(dataset, TemplateSet.small())
    return dataset, index, target, target.chunks


def random_weights(rng: random.Random, d: int, low=-2.0, high=2.0) -> np.ndarray:
    return np.array([rng.uniform(low, high) for _ in range(d)])


def brute_force(index: FeatureIndex, sentence: Sentence, theta: np.ndarray):
    """Enumerate all label sequences; returns a dict with log_z, unary and
    pairwise marginals, expected feature counts, the argmax sequence and the
    max score.  Independent of the forward-backward and Viterbi code paths.
    """
    labels = index.labels
    n_labels = len(labels)
    n = len(sentence)

    seqs = []
    scores = []
    phis = []
    for ids in itertools.product(range(n_labels), repeat=n):
        tags = [labels[i] for i in ids]
        phi = global_feature_vector(sentence, tags, index)
        seqs.append(ids)
        phis.append(phi)
        scores.append(phi.dot(theta))
    scores = np.array(scores)
    m = scores.max()
    log_z = m + math.log(np.exp(scores - m).sum())
    probs = np.exp(scores - log_z)

    unary = np.zeros((n, n_labels))
    pairwise = np.zeros((max(n - 1, 0), n_labels, n_labels))
    expected = np.zeros(index.num_features)
    for ids, p, phi in zip(seqs, probs, phis):
        for t, y in enumerate(ids):
            unary[t, y] += p
        for t in range(n - 1):
            pairwise[t, ids[t], ids[t + 1]] += p
        expected[phi.ids] += p * phi.values

    best = int(np.argmax(scores))  # first max: lexicographically smallest argmax
    return {
        "log_z": log_z,
        "unary": unary,
        "pairwise": pairwise,
        "expected": expected,
        "argmax": [labels[i] for i in seqs[best]],
        "max_score": float(scores[best]),
    }


def finite_difference_gradient(model_factory, sentence, tags, ids, h=1e-5):
    """Central finite differences of the sentence NLL along coordinates ``ids``.

    ``model_factory(theta)`` must build a model around a dense weight vector.
    """
    from bregcrf.chain_crf import log_likelihood

    grads = []
    for i in ids:
        model = model_factory()
        model.weights[i] += h
        up = -log_likelihood(model, sentence, tags)
        model = model_factory()
        model.weights[i] -= h
        down = -log_likelihood(model, sentence, tags)
        grads.append((up - down) / (2 * h))
    return np.array(grads)


def chain_markov_corpus(seed: int, n_sentences=20, min_len=5, max_len=10):
    """Synthetic corpus drawn from a fixed first-order chain over two labels.

    Words carry a strong label signal: p(y_t | y_{t-1}, w_t) follows a
    logistic chain with emission weight 3 toward the word's preferred label
    and transition weight 1 toward staying in the previous label.
    """
    rng = random.Random(seed)
    labels = ("B-X", "O")
    vocab = ("ant", "bee", "cow", "dog", "elk", "fox")
    prefer = {w: labels[i % 2] for i, w in enumerate(vocab)}
    emission, cohesion = 3.0, 1.0

    rows = []
    for _ in range(n_sentences):
        n = rng.randint(min_len, max_len)
        words = [rng.choice(vocab) for _ in range(n)]
        chunks = []
        prev = None
        for w in words:
            scores = []
            for lab in labels:
                s = emission * (lab == prefer[w])
                if prev is not None:
                    s += cohesion * (lab == prev)
                scores.append(math.exp(s))
            z = sum(scores)
            r = rng.random() * z
            lab = labels[0] if r < scores[0] else labels[1]
            chunks.append(lab)
            prev = lab
        pos = ["P" if prefer[w] == labels[0] else "Q" for w in words]
        rows.append(list(zip(words, pos, chunks)))
    return make_dataset(rows)


def average_gradient_inf_norm(model, dataset) -> float:
    """Infinity norm of the corpus-averaged stochastic gradient."""
    from bregcrf.chain_crf import stochastic_gradient

    acc = np.zeros(model.index.num_features)
    for sentence in dataset:
        g = stochastic_gradient(model, sentence, sentence.chunks)
        acc[g.ids] += g.values
    acc /= len(dataset.sentences)
    return float(np.abs(acc).max()) if len(acc) else 0.0
