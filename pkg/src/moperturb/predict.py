"""Built-in motion predictors with analytic input gradients.

Every predictor implements the same two-method contract: a deterministic
``forward`` map from a history sequence to a predicted future, and ``vjp``,
the vector-Jacobian product pulling a gradient with respect to the prediction
back onto the history frames. Attacks only ever need gradients of scalar
losses, so predictors never materialize full Jacobians.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core import MotionSequence, SplitSequence

__all__ = [
    "Predictor",
    "ZeroVelocityPredictor",
    "LinearExtrapolationPredictor",
    "MlpParams",
    "MlpPredictor",
    "TrainResult",
    "train_mlp",
    "central_difference_gradient",
    "finite_diff_gradient",
    "predictor_to_dict",
    "predictor_from_dict",
    "save_predictor",
    "load_predictor",
]


class Predictor:
    """Forward map plus vector-Jacobian product, with fixed shapes."""

    kind = "base"

    def __init__(self, t_h: int, t_f: int, j: int):
        if t_h < 1 or t_f < 1 or j < 1:
            raise ValueError(f"invalid predictor shape (t_h={t_h}, t_f={t_f}, j={j})")
        self.t_h = int(t_h)
        self.t_f = int(t_f)
        self.j = int(j)

    def forward(self, x: MotionSequence) -> MotionSequence:
        raise NotImplementedError

    def vjp(self, x: MotionSequence, upstream: np.ndarray) -> np.ndarray:
        """Gradient of <upstream, forward(x)> with respect to x's frames."""
        raise NotImplementedError

    def _check_history(self, x: MotionSequence) -> None:
        if x.n_frames != self.t_h or x.n_joints != self.j:
            raise ValueError(
                f"history shape ({x.n_frames}, {x.n_joints}) does not match "
                f"predictor (t_h={self.t_h}, j={self.j})"
            )

    def _check_upstream(self, upstream: np.ndarray) -> np.ndarray:
        g = np.asarray(upstream, dtype=np.float64)
        if g.shape != (self.t_f, self.j, 3):
            raise ValueError(
                f"upstream gradient shape {g.shape}, expected {(self.t_f, self.j, 3)}"
            )
        return g


class ZeroVelocityPredictor(Predictor):
    """Repeats the last observed pose for the whole horizon."""

    kind = "zero_velocity"

    def forward(self, x: MotionSequence) -> MotionSequence:
        self._check_history(x)
        frames = np.repeat(x.frames[-1:], self.t_f, axis=0)
        return MotionSequence(frames, x.fps, x.joint_names)

    def vjp(self, x: MotionSequence, upstream: np.ndarray) -> np.ndarray:
        self._check_history(x)
        g = self._check_upstream(upstream)
        grad = np.zeros((self.t_h, self.j, 3))
        grad[-1] = g.sum(axis=0)
        return grad


class LinearExtrapolationPredictor(Predictor):
    """Continues the last observed velocity: frame i = last + i * (last - prev)."""

    kind = "linear"

    def __init__(self, t_h: int, t_f: int, j: int):
        super().__init__(t_h, t_f, j)
        if self.t_h < 2:
            raise ValueError("linear extrapolation needs at least 2 history frames")

    def forward(self, x: MotionSequence) -> MotionSequence:
        self._check_history(x)
        last, prev = x.frames[-1], x.frames[-2]
        steps = np.arange(1, self.t_f + 1, dtype=np.float64)[:, None, None]
        return MotionSequence(last + steps * (last - prev), x.fps, x.joint_names)

    def vjp(self, x: MotionSequence, upstream: np.ndarray) -> np.ndarray:
        self._check_history(x)
        g = self._check_upstream(upstream)
        steps = np.arange(1, self.t_f + 1, dtype=np.float64)[:, None, None]
        grad = np.zeros((self.t_h, self.j, 3))
        grad[-1] = ((1.0 + steps) * g).sum(axis=0)
        grad[-2] = (-steps * g).sum(axis=0)
        return grad


@dataclass(frozen=True)
class MlpParams:
    """Weights of a one-hidden-layer tanh network acting on flattened frames."""

    w1: np.ndarray  # (hidden, t_h * j * 3)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (t_f * j * 3, hidden)
    b2: np.ndarray  # (t_f * j * 3,)

    def __post_init__(self) -> None:
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)
        hidden = self.w1.shape[0]
        if hidden < 1:
            raise ValueError("hidden width must be at least 1")
        if self.b1.shape != (hidden,) or self.w2.shape[1] != hidden:
            raise ValueError("inconsistent hidden dimensions")
        if self.b2.shape != (self.w2.shape[0],):
            raise ValueError("inconsistent output dimensions")

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]


class MlpPredictor(Predictor):
    """Trainable one-hidden-layer network: reshape(W2 tanh(W1 flatten(X) + b1) + b2)."""

    kind = "mlp"

    def __init__(self, t_h: int, t_f: int, j: int, params: MlpParams):
        super().__init__(t_h, t_f, j)
        d_in = t_h * j * 3
        d_out = t_f * j * 3
        if params.w1.shape != (params.hidden, d_in):
            raise ValueError(f"w1 shape {params.w1.shape}, expected ({params.hidden}, {d_in})")
        if params.w2.shape != (d_out, params.hidden):
            raise ValueError(f"w2 shape {params.w2.shape}, expected ({d_out}, {params.hidden})")
        self.params = params

    @property
    def hidden(self) -> int:
        return self.params.hidden

    def forward(self, x: MotionSequence) -> MotionSequence:
        self._check_history(x)
        p = self.params
        h = np.tanh(p.w1 @ x.frames.ravel() + p.b1)
        out = p.w2 @ h + p.b2
        return MotionSequence(out.reshape(self.t_f, self.j, 3), x.fps, x.joint_names)

    def vjp(self, x: MotionSequence, upstream: np.ndarray) -> np.ndarray:
        self._check_history(x)
        g = self._check_upstream(upstream).ravel()
        p = self.params
        h = np.tanh(p.w1 @ x.frames.ravel() + p.b1)
        gz = (p.w2.T @ g) * (1.0 - h * h)
        return (p.w1.T @ gz).reshape(self.t_h, self.j, 3)


class TrainResult(NamedTuple):
    predictor: MlpPredictor
    epoch_losses: list[float]  # full-dataset MSE before training, then per epoch


def _flatten_dataset(dataset: Sequence[SplitSequence]) -> tuple[np.ndarray, np.ndarray, int, int, int]:
    if not dataset:
        raise ValueError("empty training dataset")
    t_h = dataset[0].history.n_frames
    t_f = dataset[0].future.n_frames
    j = dataset[0].n_joints
    for i, s in enumerate(dataset):
        if s.history.n_frames != t_h or s.future.n_frames != t_f or s.n_joints != j:
            raise ValueError(f"sequence {i} has inconsistent shape")
    xs = np.stack([s.history.frames.ravel() for s in dataset])
    ys = np.stack([s.future.frames.ravel() for s in dataset])
    return xs, ys, t_h, t_f, j


def train_mlp(
    dataset: Sequence[SplitSequence],
    hidden: int = 32,
    lr: float = 0.05,
    epochs: int = 200,
    batch: int = 8,
    seed: int = 0,
) -> TrainResult:
    """Fit the MLP predictor with seeded minibatch SGD on mean squared error.

    Weights start uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)]; identical
    seed and data reproduce the parameters bitwise.
    """
    if hidden < 1:
        raise ValueError("hidden width must be at least 1")
    if lr <= 0 or epochs < 1 or batch < 1:
        raise ValueError("lr must be > 0, epochs and batch at least 1")
    xs, ys, t_h, t_f, j = _flatten_dataset(dataset)
    n, d_in = xs.shape
    d_out = ys.shape[1]
    rng = np.random.default_rng(seed)
    lim1 = 1.0 / np.sqrt(d_in)
    lim2 = 1.0 / np.sqrt(hidden)
    w1 = rng.uniform(-lim1, lim1, (hidden, d_in))
    b1 = rng.uniform(-lim1, lim1, hidden)
    w2 = rng.uniform(-lim2, lim2, (d_out, hidden))
    b2 = rng.uniform(-lim2, lim2, d_out)

    def full_mse() -> float:
        out = np.tanh(xs @ w1.T + b1) @ w2.T + b2
        return float(np.mean((out - ys) ** 2))

    losses = [full_mse()]
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start : start + batch]
            xb, yb = xs[idx], ys[idx]
            hb = np.tanh(xb @ w1.T + b1)
            out = hb @ w2.T + b2
            dout = 2.0 * (out - yb) / (out.size)
            dw2 = dout.T @ hb
            db2 = dout.sum(axis=0)
            dh = dout @ w2
            dz = dh * (1.0 - hb * hb)
            dw1 = dz.T @ xb
            db1 = dz.sum(axis=0)
            w1 -= lr * dw1
            b1 -= lr * db1
            w2 -= lr * dw2
            b2 -= lr * db2
        losses.append(full_mse())
    params = MlpParams(w1, b1, w2, b2)
    return TrainResult(MlpPredictor(t_h, t_f, j, params), losses)


def central_difference_gradient(
    f: Callable[[np.ndarray], float], x0: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """Central-difference gradient of a scalar function, coordinate by coordinate."""
    if h <= 0:
        raise ValueError("step h must be positive")
    x0 = np.asarray(x0, dtype=np.float64)
    grad = np.zeros_like(x0)
    for idx in np.ndindex(x0.shape):
        xp = x0.copy()
        xp[idx] = x0[idx] + h
        fp = f(xp)
        xp[idx] = x0[idx] - h
        fm = f(xp)
        grad[idx] = (fp - fm) / (2.0 * h)
    return grad


def finite_diff_gradient(
    predictor: Predictor,
    loss_fn: Callable[[MotionSequence, MotionSequence], float],
    x: MotionSequence,
    y: MotionSequence,
    h: float = 1e-5,
) -> np.ndarray:
    """Finite-difference oracle for the gradient of loss_fn(forward(x), y) in x."""

    def f(arr: np.ndarray) -> float:
        return float(loss_fn(predictor.forward(x.with_frames(arr)), y))

    return central_difference_gradient(f, x.frames, h)


def predictor_to_dict(predictor: Predictor) -> dict:
    """JSON-ready description of a predictor; MLP weights are row-major lists."""
    d = {
        "kind": predictor.kind,
        "t_h": predictor.t_h,
        "t_f": predictor.t_f,
        "j": predictor.j,
    }
    if isinstance(predictor, MlpPredictor):
        p = predictor.params
        d["hidden"] = p.hidden
        d["w1"] = p.w1.tolist()
        d["b1"] = p.b1.tolist()
        d["w2"] = p.w2.tolist()
        d["b2"] = p.b2.tolist()
    return d


def predictor_from_dict(d: dict) -> Predictor:
    kind = d.get("kind")
    try:
        t_h, t_f, j = int(d["t_h"]), int(d["t_f"]), int(d["j"])
    except KeyError as exc:
        raise ValueError(f"predictor description missing field {exc}") from None
    if kind == "zero_velocity":
        return ZeroVelocityPredictor(t_h, t_f, j)
    if kind == "linear":
        return LinearExtrapolationPredictor(t_h, t_f, j)
    if kind == "mlp":
        try:
            params = MlpParams(
                np.asarray(d["w1"]), np.asarray(d["b1"]),
                np.asarray(d["w2"]), np.asarray(d["b2"]),
            )
        except KeyError as exc:
            raise ValueError(f"mlp predictor missing field {exc}") from None
        return MlpPredictor(t_h, t_f, j, params)
    raise ValueError(f"unknown predictor kind {kind!r}")


def save_predictor(path: "str | Path", predictor: Predictor) -> None:
    Path(path).write_text(json.dumps(predictor_to_dict(predictor)))


def load_predictor(path: "str | Path") -> Predictor:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"predictor file not found: {path}")
    return predictor_from_dict(json.loads(path.read_text()))
