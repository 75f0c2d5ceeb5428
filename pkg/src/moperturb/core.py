"""Skeleton sequence data model, temporal derivatives, and evaluation metrics.

A motion clip is an array of shape (T, J, 3): T frames of J joints in
Cartesian coordinates. Everything is stored as float64 and treated as
immutable, so gradient checks and bitwise reproducibility stay sharp and all
operations are safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MotionSequence",
    "Connectivity",
    "SplitSequence",
    "as_frames",
    "temporal_derivative",
    "bone_lengths",
    "mpjpe",
    "mpjpe_curve",
    "mpjpe_at_intervals",
    "interval_to_frame",
    "asr",
    "growth_rate",
]


@dataclass(frozen=True)
class MotionSequence:
    """Joint coordinates over time plus frame-rate metadata.

    Attributes:
        frames: (T, J, 3) joint positions, read-only float64.
        fps: frames per second of the recording, > 0.
        joint_names: optional labels for the J joints.
    """

    frames: np.ndarray
    fps: float = 25.0
    joint_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        frames = np.array(self.frames, dtype=np.float64)
        if frames.ndim != 3 or frames.shape[2] != 3:
            raise ValueError(f"frames must have shape (T, J, 3), got {frames.shape}")
        if frames.shape[0] < 1 or frames.shape[1] < 1:
            raise ValueError("need at least one frame and one joint")
        if not np.isfinite(frames).all():
            raise ValueError("frames contain non-finite coordinates")
        if not self.fps > 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        frames.flags.writeable = False
        object.__setattr__(self, "frames", frames)
        if self.joint_names is not None:
            names = tuple(str(n) for n in self.joint_names)
            if len(names) != frames.shape[1]:
                raise ValueError(
                    f"{len(names)} joint names for {frames.shape[1]} joints"
                )
            object.__setattr__(self, "joint_names", names)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_joints(self) -> int:
        return self.frames.shape[1]

    def with_frames(self, frames: np.ndarray) -> "MotionSequence":
        """New sequence with the same metadata but different coordinates."""
        return MotionSequence(frames, self.fps, self.joint_names)


@dataclass(frozen=True)
class Connectivity:
    """Bone list: ordered (parent, child) joint-index pairs forming a skeleton."""

    bones: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        pairs = tuple((int(a), int(b)) for a, b in self.bones)
        seen: set[frozenset[int]] = set()
        for a, b in pairs:
            if a < 0 or b < 0:
                raise ValueError(f"negative joint index in bone ({a}, {b})")
            if a == b:
                raise ValueError(f"bone ({a}, {b}) connects a joint to itself")
            key = frozenset((a, b))
            if key in seen:
                raise ValueError(f"duplicate bone ({a}, {b})")
            seen.add(key)
        object.__setattr__(self, "bones", pairs)

    @property
    def n_bones(self) -> int:
        return len(self.bones)

    def validate_for(self, n_joints: int) -> None:
        for a, b in self.bones:
            if a >= n_joints or b >= n_joints:
                raise ValueError(
                    f"bone ({a}, {b}) out of range for {n_joints} joints"
                )

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Parent and child joint indices as integer arrays of length n_bones."""
        if not self.bones:
            empty = np.zeros(0, dtype=np.intp)
            return empty, empty.copy()
        arr = np.asarray(self.bones, dtype=np.intp)
        return arr[:, 0], arr[:, 1]


@dataclass(frozen=True)
class SplitSequence:
    """A history/future pair cut from one recording."""

    history: MotionSequence
    future: MotionSequence

    def __post_init__(self) -> None:
        if self.history.n_joints != self.future.n_joints:
            raise ValueError(
                f"history has {self.history.n_joints} joints, "
                f"future has {self.future.n_joints}"
            )
        if self.history.fps != self.future.fps:
            raise ValueError("history and future must share fps")

    @property
    def n_joints(self) -> int:
        return self.history.n_joints

    @property
    def fps(self) -> float:
        return self.history.fps


def as_frames(seq: "MotionSequence | np.ndarray") -> np.ndarray:
    """Coerce a sequence-like object to a (T, J, 3) float64 array."""
    if isinstance(seq, MotionSequence):
        return seq.frames
    frames = np.asarray(seq, dtype=np.float64)
    if frames.ndim != 3 or frames.shape[2] != 3:
        raise ValueError(f"expected shape (T, J, 3), got {frames.shape}")
    return frames


def temporal_derivative(seq: "MotionSequence | np.ndarray", n: int) -> np.ndarray:
    """n-th forward difference along time: d_t = x_{t+1} - x_t, iterated.

    Order 0 returns the coordinates unchanged; order n yields (T-n, J, 3).
    """
    frames = as_frames(seq)
    n = int(n)
    if n < 0:
        raise ValueError(f"derivative order must be non-negative, got {n}")
    if n > frames.shape[0] - 1:
        raise ValueError(
            f"derivative order {n} too high for {frames.shape[0]} frames"
        )
    if n == 0:
        return frames.copy()
    return np.diff(frames, n=n, axis=0)


def bone_lengths(seq: "MotionSequence | np.ndarray", conn: Connectivity) -> np.ndarray:
    """Per-frame Euclidean length of every bone, shape (T, n_bones)."""
    frames = as_frames(seq)
    conn.validate_for(frames.shape[1])
    a, b = conn.index_arrays()
    return np.linalg.norm(frames[:, a, :] - frames[:, b, :], axis=2)


def _check_same_shape(p: np.ndarray, y: np.ndarray) -> None:
    if p.shape != y.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {y.shape}")


def mpjpe(
    predicted: "MotionSequence | np.ndarray",
    truth: "MotionSequence | np.ndarray",
    t: int,
) -> float:
    """Mean per-joint position error at frame t.

    Average over joints of the Euclidean distance between the predicted and
    true joint positions in that frame.
    """
    p = as_frames(predicted)
    y = as_frames(truth)
    _check_same_shape(p, y)
    t = int(t)
    if not 0 <= t < p.shape[0]:
        raise ValueError(f"frame index {t} outside horizon of {p.shape[0]}")
    return float(np.linalg.norm(p[t] - y[t], axis=1).mean())


def mpjpe_curve(
    predicted: "MotionSequence | np.ndarray", truth: "MotionSequence | np.ndarray"
) -> np.ndarray:
    """MPJPE at every frame of the horizon, shape (T,)."""
    p = as_frames(predicted)
    y = as_frames(truth)
    _check_same_shape(p, y)
    return np.linalg.norm(p - y, axis=2).mean(axis=1)


def interval_to_frame(interval_ms: float, fps: float) -> int:
    """0-based frame index of a time interval: round(ms * fps / 1000) - 1.

    Rounding is half-up, so at 25 fps the 160 ms interval maps to index 3,
    the fourth predicted frame.
    """
    if fps <= 0:
        raise ValueError(f"fps must be positive, got {fps}")
    return int(math.floor(interval_ms * fps / 1000.0 + 0.5)) - 1


def mpjpe_at_intervals(
    predicted: "MotionSequence | np.ndarray",
    truth: "MotionSequence | np.ndarray",
    intervals_ms: "list[float] | tuple[float, ...]",
    fps: float | None = None,
) -> list[tuple[float, float]]:
    """MPJPE at the frames corresponding to the given time intervals.

    Returns (interval_ms, error) pairs in input order. An interval whose
    frame index falls outside [0, T) is a range error.
    """
    if fps is None:
        if not isinstance(predicted, MotionSequence):
            raise ValueError("fps required when predictions are raw arrays")
        fps = predicted.fps
    p = as_frames(predicted)
    out = []
    for ms in intervals_ms:
        idx = interval_to_frame(ms, fps)
        if not 0 <= idx < p.shape[0]:
            raise ValueError(
                f"interval {ms} ms maps to frame {idx}, outside horizon {p.shape[0]}"
            )
        out.append((ms, mpjpe(predicted, truth, idx)))
    return out


def asr(clean_correct: "list[bool]", adv_correct: "list[bool]") -> float:
    """Attack success rate: fraction of correctly classified clean samples
    that are misclassified after the attack."""
    if len(clean_correct) != len(adv_correct):
        raise ValueError("clean and adversarial outcome lists differ in length")
    n_right = sum(bool(c) for c in clean_correct)
    if n_right == 0:
        raise ValueError("no correctly classified clean samples; rate undefined")
    n_adv = sum(bool(c) and not bool(a) for c, a in zip(clean_correct, adv_correct))
    return n_adv / n_right


def growth_rate(clean_err: float, adv_err: float) -> float:
    """Signed percentage increase of an error over its clean value."""
    if not clean_err > 0:
        raise ValueError(f"clean error must be positive, got {clean_err}")
    return (adv_err - clean_err) / clean_err * 100.0
