"""Sequential training loop: one forward and one backward pass per instance,
with optional multi-epoch passes and prequential evaluation checkpoints."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .backward import backward
from .datasets import DatasetSplit
from .exceptions import UpdateFailedError
from .forward import forward, forward_standardized, predict_batch
from .metrics import EvalResult, evaluate_predictions
from .network import NetworkState

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """Options for one training run.

    ``observation_noise`` widens the output anchor (0 reproduces exact
    conditioning); ``eval_every``/``eval_at`` trigger held-out evaluation
    after that many processed instances (uniform interval or explicit list).
    """

    epochs: int = 1
    shuffle_each_epoch: bool = True
    sigma0_sq: float = 1.0
    observation_noise: float = 0.0
    eval_every: int | None = None
    eval_at: list[int] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.eval_every is not None and self.eval_every < 1:
            raise ValueError("eval_every must be >= 1")


@dataclass
class Checkpoint:
    instances_seen: int
    epoch: int
    metrics: EvalResult
    wall_seconds: float

    def to_dict(self) -> dict:
        d = {"instances_seen": self.instances_seen, "epoch": self.epoch,
             "wall_seconds": self.wall_seconds}
        d.update(self.metrics.to_dict())
        return d


@dataclass
class TrainReport:
    checkpoints: list[Checkpoint] = field(default_factory=list)
    instances_processed: int = 0
    skipped: int = 0
    train_seconds: float = 0.0
    mean_update_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "instances_processed": self.instances_processed,
            "skipped": self.skipped,
            "train_seconds": self.train_seconds,
            "mean_update_ms": self.mean_update_ms,
            "checkpoints": [c.to_dict() for c in self.checkpoints],
        }


def update_one(net: NetworkState, x, y, observation_noise: float = 0.0
               ) -> NetworkState:
    """Condition the network on a single raw-scale (x, y) pair.

    Runs one forward pass (standardizing via the network's standardizer, if
    any), then the smoothing pass with the target mapped into model space.
    Raises UpdateFailedError on numeric failure; the input state is unchanged
    either way.
    """
    _, cache = forward(net, x)
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if net.standardizer is not None:
        y = net.standardizer.transform_targets(y)
    return backward(net, cache, y, observation_noise)


def _update_standardized(net: NetworkState, x_std, y_std, observation_noise):
    cache = forward_standardized(net, x_std)
    return backward(net, cache, y_std, observation_noise)


def evaluate_on_split(net: NetworkState, split: DatasetSplit) -> EvalResult:
    """Held-out metrics in original target units."""
    raw_x = split.standardizer.inverse_features(split.test_x)
    means, variances, _, _ = predict_batch(net, raw_x)
    targets = split.raw_test_targets()
    classification = net.layers[-1].activation.bounded_output
    return evaluate_predictions(means, variances, targets,
                                classification=classification)


def train(net: NetworkState, split: DatasetSplit, cfg: TrainConfig,
          progress=None) -> tuple[NetworkState, TrainReport]:
    """Sequentially process the training split.

    The split's standardizer is attached to the network (when the network has
    none) so later raw-scale predictions de-standardize correctly; training
    itself consumes the split's already-standardized matrices. Instances
    whose update fails numerically are skipped and counted. ``progress``, if
    given, receives one JSON line per checkpoint.
    """
    if net.standardizer is None:
        net = net.with_standardizer(split.standardizer)
    report = TrainReport()
    n = split.train_x.shape[0]
    eval_marks = set(_eval_marks(cfg, n))
    rng = np.random.default_rng(cfg.seed)
    if n == 0:
        return net, report
    t_start = time.perf_counter()
    update_time = 0.0
    seen = 0
    for epoch in range(cfg.epochs):
        order = rng.permutation(n) if cfg.shuffle_each_epoch else np.arange(n)
        for i in order:
            t0 = time.perf_counter()
            try:
                net = _update_standardized(net, split.train_x[i], split.train_y[i],
                                           cfg.observation_noise)
            except UpdateFailedError as exc:
                report.skipped += 1
                log.warning("skipping instance %d (epoch %d): %s",
                            int(i), epoch, exc)
            update_time += time.perf_counter() - t0
            seen += 1
            if seen in eval_marks or (cfg.eval_every and seen % cfg.eval_every == 0):
                _checkpoint(net, split, report, seen, epoch, t_start, progress)
    report.instances_processed = seen
    report.train_seconds = time.perf_counter() - t_start
    if seen:
        report.mean_update_ms = 1000.0 * update_time / seen
    if not report.checkpoints:
        _checkpoint(net, split, report, seen, cfg.epochs - 1, t_start, progress)
    return net, report


def _eval_marks(cfg: TrainConfig, n_train: int) -> list[int]:
    if not cfg.eval_at:
        return []
    total = n_train * cfg.epochs
    return [m for m in cfg.eval_at if 0 < m <= total]


def _checkpoint(net, split, report, seen, epoch, t_start, progress):
    metrics = evaluate_on_split(net, split)
    cp = Checkpoint(instances_seen=seen, epoch=epoch, metrics=metrics,
                    wall_seconds=time.perf_counter() - t_start)
    report.checkpoints.append(cp)
    if progress is not None:
        progress(json.dumps(cp.to_dict()))
