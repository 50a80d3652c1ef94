"""Stochastic training loop with transformed gradients and lazy L2 scaling.

Each step computes the per-sentence gradient g = E_model - observed, maps it
through the configured per-coordinate transform s = transform(g), and applies
the L2-regularized step

    theta <- (1 - C*lam_t) * theta - lam_t * s

in its sparse form: the weights are stored as (scale z, scaled weights), the
scaled weights absorb -lam_t / ((1 - C*lam_t) * z) * s on the gradient
support only, and z absorbs the multiplicative shrink.  The step size decays
as lam_t = 1 / (base * (1 + base*C*t)) with the base rate calibrated on a
training subset before the main run.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .chain_crf import (
    ChainModel,
    _log_partition,
    _viterbi_lattice,
    build_lattice,
    gradient_encoded,
)
from .corpus import Dataset, Sentence, shuffle
from .evaluation import ChunkMetrics, score
from .features import (
    EncodedSentence,
    FeatureIndex,
    SparseVector,
    encode_sentence,
    global_feature_vector,
)
from .transforms import Transform, TransformSpec, make_transform


class StepSizeError(RuntimeError):
    """The regularized shrink factor 1 - C*lam became non-positive."""


class CalibrationError(RuntimeError):
    """Every candidate base rate diverged on the calibration subset."""


@dataclass
class TrainConfig:
    update: TransformSpec
    C: float = 1.0
    epochs: int = 50
    seed: int = 1
    calibration_size: int = 1000
    calibration_grid: tuple[float, ...] = (0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)
    patience: int = 3
    min_delta: float = 1e-4
    reshuffle_each_epoch: bool = False
    calibrate_regularized: bool = True

    def __post_init__(self) -> None:
        if self.C < 0:
            raise ValueError("C must be nonnegative")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.calibration_size < 1:
            raise ValueError("calibration_size must be at least 1")
        if not self.calibration_grid or any(c <= 0 for c in self.calibration_grid):
            raise ValueError("calibration_grid must contain positive rates")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")
        if self.min_delta < 0:
            raise ValueError("min_delta must be nonnegative")


@dataclass
class TrainState:
    """Mutable per-run state; the weight scale z lives on the model."""

    model: ChainModel
    base_rate: float
    t: int = 0

    @property
    def z(self) -> float:
        return self.model.scale


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    split: str
    precision: float
    recall: float
    f1: float
    mean_nll: float
    wall_seconds: float


@dataclass
class MetricsLog:
    records: list[EpochRecord] = field(default_factory=list)

    CSV_HEADER = "epoch,split,precision,recall,f1,mean_nll,wall_seconds"

    def add(self, record: EpochRecord) -> None:
        self.records.append(record)

    def rows(self, split: str | None = None) -> list[EpochRecord]:
        if split is None:
            return list(self.records)
        return [r for r in self.records if r.split == split]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.CSV_HEADER + "\n")
            for r in self.records:
                fh.write(
                    f"{r.epoch},{r.split},{r.precision:.10g},{r.recall:.10g},"
                    f"{r.f1:.10g},{r.mean_nll:.10g},{r.wall_seconds:.3f}\n"
                )


def learning_rate(base_rate: float, C: float, t: int) -> float:
    """Decaying step size 1 / (base * (1 + base*C*t)); constant when C = 0."""
    return 1.0 / (base_rate * (1.0 + base_rate * C * t))


def sparse_scaled_step(
    weights: np.ndarray, z: float, lam: float, C: float, ids: np.ndarray, values: np.ndarray
) -> float:
    """Apply theta <- (1 - C*lam)*theta - lam*s on the scaled representation.

    Touches only ``ids``; returns the new scale.  With C = 0 the shrink
    factor is exactly 1 and the scale is returned unchanged.
    """
    decay = 1.0 - C * lam
    if decay <= 0.0:
        raise StepSizeError(f"step too large: 1 - C*lambda = {decay:g} <= 0")
    if len(ids):
        weights[ids] -= (lam / (decay * z)) * values
    return decay * z


def update_step(
    state: TrainState, sentence, labels, transform: Transform, C: float
) -> TrainState:
    """One stochastic step on a sentence; mutates and returns ``state``.

    ``sentence`` may be a Sentence (with ``labels`` its gold tags) or a
    pre-built EncodedSentence paired with a precomputed observed count
    vector passed via ``labels``.
    """
    model = state.model
    if isinstance(sentence, EncodedSentence):
        enc, gold = sentence, labels
    else:
        enc = encode_sentence(sentence, model.index)
        gold = global_feature_vector(sentence, labels, model.index)
    return _update_encoded(state, enc, gold, transform, C)


def _update_encoded(
    state: TrainState,
    enc: EncodedSentence,
    gold: SparseVector,
    transform: Transform,
    C: float,
) -> TrainState:
    lam = learning_rate(state.base_rate, C, state.t)
    grad = gradient_encoded(state.model, enc, gold)
    transformed = transform.apply(grad.values)
    state.model.scale = sparse_scaled_step(
        state.model.weights, state.model.scale, lam, C, grad.ids, transformed
    )
    state.t += 1
    return state


def _prepare(sentences: Iterable[Sentence], index: FeatureIndex):
    encs = []
    golds = []
    for sent in sentences:
        encs.append(encode_sentence(sent, index))
        golds.append(global_feature_vector(sent, sent.chunks, index))
    return encs, golds


def _mean_nll(model: ChainModel, encs, golds) -> float:
    total = 0.0
    for enc, gold in zip(encs, golds):
        log_z = _log_partition(build_lattice(model, enc))
        total += log_z - model.scale * gold.dot(model.weights)
    return total / len(encs)


def calibrate(dataset: Dataset, index: FeatureIndex, config: TrainConfig) -> float:
    """Pick the base rate from the grid by one pass over a training subset.

    Each candidate trains a fresh zero model over the first
    ``calibration_size`` sentences of the seed-shuffled data and is scored
    by mean NLL on that subset (plus C/2*||theta||^2 unless disabled).
    Candidates that diverge or overshoot the step bound are discarded.
    """
    subset = shuffle(dataset, config.seed).sentences[: config.calibration_size]
    encs, golds = _prepare(subset, index)
    transform = make_transform(config.update)

    losses: list[float] = []
    for candidate in config.calibration_grid:
        state = TrainState(model=ChainModel.zeros(index), base_rate=candidate)
        try:
            for enc, gold in zip(encs, golds):
                _update_encoded(state, enc, gold, transform, config.C)
            loss = _mean_nll(state.model, encs, golds)
            if config.calibrate_regularized:
                model = state.model
                loss += 0.5 * config.C * model.scale**2 * float(model.weights @ model.weights)
        except (StepSizeError, ValueError, FloatingPointError):
            loss = math.inf
        losses.append(loss if math.isfinite(loss) else math.inf)

    best = min(range(len(losses)), key=lambda i: losses[i])
    if not math.isfinite(losses[best]):
        raise CalibrationError("calibration failed: all candidate rates diverged")
    return config.calibration_grid[best]


def evaluate_model(model: ChainModel, sentences, encs=None, golds=None):
    """Chunk metrics and mean NLL of a model over a list of sentences."""
    if encs is None or golds is None:
        encs, golds = _prepare(sentences, model.index)
    preds = []
    total_nll = 0.0
    labels = model.index.labels
    for enc, gold in zip(encs, golds):
        lattice = build_lattice(model, enc)
        total_nll += _log_partition(lattice) - model.scale * gold.dot(model.weights)
        preds.append([labels[i] for i in _viterbi_lattice(lattice)])
    metrics = score(preds, [s.chunks for s in sentences])
    return metrics, total_nll / len(encs)


def train(
    dataset: Dataset,
    index: FeatureIndex,
    config: TrainConfig,
    test: Dataset | None = None,
    clock: Callable[[], float] = time.perf_counter,
    log_fn: Callable[[str], None] | None = None,
) -> tuple[ChainModel, MetricsLog]:
    """Full training run: calibrate, iterate epochs, log metrics, early-stop.

    Returns the unscaled model (scale folded into the weights) and the
    per-epoch metrics log.  ``clock`` exists so tests can inject a
    deterministic timer.
    """
    if not dataset.sentences:
        raise ValueError("cannot train on an empty dataset")
    base_rate = calibrate(dataset, index, config)
    if log_fn:
        log_fn(f"calibrated base rate: {base_rate:g}")

    sentences = list(dataset.sentences)
    encs, golds = _prepare(sentences, index)
    test_sentences = list(test.sentences) if test is not None else None
    test_encs = test_golds = None
    if test_sentences is not None:
        test_encs, test_golds = _prepare(test_sentences, index)

    state = TrainState(model=ChainModel.zeros(index), base_rate=base_rate)
    transform = make_transform(config.update)
    rng = random.Random(config.seed)
    order = list(range(len(sentences)))
    rng.shuffle(order)

    log = MetricsLog()
    start = clock()
    best_f1 = -math.inf
    stall = 0
    for epoch in range(1, config.epochs + 1):
        for i in order:
            _update_encoded(state, encs[i], golds[i], transform, config.C)

        metrics, mean_nll = evaluate_model(state.model, sentences, encs, golds)
        wall = clock() - start
        log.add(EpochRecord(epoch, "train", metrics.precision, metrics.recall,
                            metrics.f1, mean_nll, wall))
        if test_sentences is not None:
            t_metrics, t_nll = evaluate_model(state.model, test_sentences, test_encs, test_golds)
            log.add(EpochRecord(epoch, "test", t_metrics.precision, t_metrics.recall,
                                t_metrics.f1, t_nll, wall))
        if log_fn:
            log_fn(f"epoch {epoch}: train_f1={metrics.f1:.6f} mean_nll={mean_nll:.6f}")

        improvement = metrics.f1 - best_f1
        best_f1 = max(best_f1, metrics.f1)
        if improvement < config.min_delta:
            stall += 1
            if stall >= config.patience:
                if log_fn:
                    log_fn(f"early stop after epoch {epoch}")
                break
        else:
            stall = 0
        if config.reshuffle_each_epoch and epoch < config.epochs:
            rng.shuffle(order)

    state.model.unscale()
    return state.model, log
