"""Synthetic rigid-skeleton motion for desk-scale experiments, plus file I/O.

Sequences are generated by moving a fixed base pose rigidly through space
(sinusoidal sway, straight drift, or a per-sequence mix of the two), so with
zero noise every bone keeps its length in every frame. Datasets round-trip
losslessly through a versioned JSON format, one file per sequence plus a
manifest listing files and labels.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Connectivity, MotionSequence, SplitSequence

__all__ = [
    "DatasetFormatError",
    "SynthConfig",
    "Dataset",
    "generate",
    "write_dataset",
    "read_dataset",
    "write_sequence_file",
    "read_sequence_file",
    "DEFAULT_JOINT_NAMES",
    "default_base_pose",
    "default_connectivity",
]

FORMAT_VERSION = 1

DEFAULT_JOINT_NAMES = ("pelvis", "chest", "head", "left_hand", "right_hand")


def default_base_pose() -> np.ndarray:
    """Rest pose of the 5-joint toy skeleton: a torso chain with two arms."""
    return np.array(
        [
            [0.0, 0.0, 0.0],  # pelvis
            [0.0, 0.0, 1.0],  # chest
            [0.0, 0.0, 2.0],  # head
            [-1.0, 0.2, 1.0],  # left_hand
            [1.0, 0.2, 1.0],  # right_hand
        ]
    )


def default_connectivity() -> Connectivity:
    return Connectivity(((0, 1), (1, 2), (1, 3), (1, 4)))


class DatasetFormatError(ValueError):
    """A sequence or manifest file does not follow the dataset format."""


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic motion generator."""

    n_sequences: int = 50
    t_h: int = 10
    t_f: int = 25
    fps: float = 25.0
    family: str = "oscillation"  # oscillation | drift | mixture
    amplitude: float = 1.0
    freq_range: tuple[float, float] = (0.5, 2.0)
    noise_std: float = 0.0
    seed: int = 0
    base_pose: np.ndarray = field(default_factory=default_base_pose)
    connectivity: Connectivity = field(default_factory=default_connectivity)
    joint_names: tuple[str, ...] | None = DEFAULT_JOINT_NAMES

    def __post_init__(self) -> None:
        if self.n_sequences < 1:
            raise ValueError("n_sequences must be at least 1")
        if self.t_h < 3 or self.t_f < 1:
            raise ValueError("need t_h >= 3 and t_f >= 1")
        if not self.fps > 0:
            raise ValueError("fps must be positive")
        if self.family not in ("oscillation", "drift", "mixture"):
            raise ValueError(f"unknown motion family {self.family!r}")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")
        lo, hi = self.freq_range
        if not (0 < lo <= hi):
            raise ValueError(f"bad frequency range {self.freq_range}")
        if self.noise_std < 0:
            raise ValueError("noise_std must be non-negative")
        pose = np.array(self.base_pose, dtype=np.float64)
        if pose.ndim != 2 or pose.shape[1] != 3 or pose.shape[0] < 1:
            raise ValueError(f"base pose must be (J, 3), got {pose.shape}")
        pose.flags.writeable = False
        object.__setattr__(self, "base_pose", pose)
        self.connectivity.validate_for(pose.shape[0])
        if self.joint_names is not None and len(self.joint_names) != pose.shape[0]:
            raise ValueError("joint_names length does not match base pose")


@dataclass
class Dataset:
    """Generated or loaded sequences with their motion-family labels."""

    sequences: list[SplitSequence]
    labels: list[str]
    connectivity: Connectivity
    joint_names: tuple[str, ...] | None = None

    def __len__(self) -> int:
        return len(self.sequences)


def _yaw_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _rigid_offsets(
    family: str, config: SynthConfig, times: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Whole-body translation per frame, shape (T, 3)."""
    lo, hi = config.freq_range
    if family == "oscillation":
        freq = rng.uniform(lo, hi, 3)
        phase = rng.uniform(0.0, 2.0 * np.pi, 3)
        return config.amplitude * np.sin(2.0 * np.pi * freq * times[:, None] + phase)
    # Drift: constant velocity with every axis speed bounded away from zero so
    # no bounding-box axis collapses.
    speed = config.amplitude * rng.uniform(0.3, 1.0, 3)
    direction = np.where(rng.uniform(-1.0, 1.0, 3) < 0.0, -1.0, 1.0)
    return times[:, None] * (speed * direction)


def generate(config: SynthConfig) -> Dataset:
    """Deterministically generate labelled history/future pairs.

    Each sequence applies a random yaw to the base pose, then translates it
    rigidly along the family's trajectory; with zero noise bone lengths are
    constant across frames. The mixture family flips a per-sequence coin
    between oscillation and drift, recorded in the label.
    """
    rng = np.random.default_rng(config.seed)
    total = config.t_h + config.t_f
    times = np.arange(total, dtype=np.float64) / config.fps
    sequences: list[SplitSequence] = []
    labels: list[str] = []
    for _ in range(config.n_sequences):
        family = config.family
        if family == "mixture":
            family = ("oscillation", "drift")[int(rng.integers(2))]
        pose = config.base_pose @ _yaw_matrix(rng.uniform(0.0, 2.0 * np.pi)).T
        frames = pose[None, :, :] + _rigid_offsets(family, config, times, rng)[:, None, :]
        if config.noise_std > 0:
            frames = frames + config.noise_std * rng.standard_normal(frames.shape)
        history = MotionSequence(frames[: config.t_h], config.fps, config.joint_names)
        future = MotionSequence(frames[config.t_h :], config.fps, config.joint_names)
        sequences.append(SplitSequence(history, future))
        labels.append(family)
    return Dataset(sequences, labels, config.connectivity, config.joint_names)


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sequence_dict(split: SplitSequence, conn: Connectivity, label: str | None) -> dict:
    d = {
        "version": FORMAT_VERSION,
        "fps": split.fps,
        "joints": split.n_joints,
        "connectivity": [list(b) for b in conn.bones],
        "history": split.history.frames.tolist(),
        "future": split.future.frames.tolist(),
    }
    if label is not None:
        d["label"] = label
    return d


def write_sequence_file(
    path: "str | Path", split: SplitSequence, conn: Connectivity, label: str | None = None
) -> None:
    _atomic_write_text(Path(path), json.dumps(_sequence_dict(split, conn, label)))


def _parse_frames(raw: object, joints: int, fps: float, what: str, path: Path) -> MotionSequence:
    if not isinstance(raw, list) or not raw:
        raise DatasetFormatError(f"{path}: field {what!r} must be a non-empty list of frames")
    for t, frame in enumerate(raw):
        if not isinstance(frame, list) or len(frame) != joints:
            got = len(frame) if isinstance(frame, list) else type(frame).__name__
            raise DatasetFormatError(
                f"{path}: {what} frame {t} has {got} joints, expected {joints}"
            )
        for k, coord in enumerate(frame):
            if not isinstance(coord, list) or len(coord) != 3:
                raise DatasetFormatError(
                    f"{path}: {what} frame {t} joint {k} is not an [x, y, z] triple"
                )
    try:
        return MotionSequence(np.asarray(raw, dtype=np.float64), fps)
    except ValueError as exc:
        raise DatasetFormatError(f"{path}: {what}: {exc}") from None


def read_sequence_file(path: "str | Path") -> tuple[SplitSequence, str | None, Connectivity]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"sequence file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise DatasetFormatError(f"{path}: top-level value must be an object")
    for key in ("version", "fps", "joints", "connectivity", "history", "future"):
        if key not in raw:
            raise DatasetFormatError(f"{path}: missing field {key!r}")
    if raw["version"] != FORMAT_VERSION:
        raise DatasetFormatError(f"{path}: unsupported format version {raw['version']!r}")
    try:
        fps = float(raw["fps"])
        joints = int(raw["joints"])
        conn = Connectivity(tuple((int(a), int(b)) for a, b in raw["connectivity"]))
        conn.validate_for(joints)
    except (TypeError, ValueError) as exc:
        raise DatasetFormatError(f"{path}: {exc}") from None
    history = _parse_frames(raw["history"], joints, fps, "history", path)
    future = _parse_frames(raw["future"], joints, fps, "future", path)
    label = raw.get("label")
    if label is not None and not isinstance(label, str):
        raise DatasetFormatError(f"{path}: label must be a string")
    return SplitSequence(history, future), label, conn


def write_dataset(path: "str | Path", dataset: Dataset) -> list[Path]:
    """Write one JSON file per sequence plus a manifest; returns written paths."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    entries = []
    for i, (split, label) in enumerate(zip(dataset.sequences, dataset.labels)):
        name = f"seq_{i:05d}.json"
        write_sequence_file(root / name, split, dataset.connectivity, label)
        written.append(root / name)
        entries.append({"file": name, "label": label})
    manifest = {
        "version": FORMAT_VERSION,
        "count": len(entries),
        "joint_names": list(dataset.joint_names) if dataset.joint_names else None,
        "files": entries,
    }
    manifest_path = root / "manifest.json"
    _atomic_write_text(manifest_path, json.dumps(manifest, indent=1))
    written.append(manifest_path)
    return written


def read_dataset(path: "str | Path") -> Dataset:
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(f"no dataset manifest at {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(
            f"{manifest_path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    files = manifest.get("files")
    if not isinstance(files, list) or not files:
        raise DatasetFormatError(f"{manifest_path}: missing or empty 'files' list")
    joint_names = manifest.get("joint_names")
    sequences: list[SplitSequence] = []
    labels: list[str] = []
    conn: Connectivity | None = None
    for entry in files:
        if not isinstance(entry, dict) or "file" not in entry:
            raise DatasetFormatError(f"{manifest_path}: malformed files entry {entry!r}")
        split, label, file_conn = read_sequence_file(root / entry["file"])
        if conn is None:
            conn = file_conn
        elif conn.bones != file_conn.bones:
            raise DatasetFormatError(
                f"{root / entry['file']}: connectivity differs from the rest of the dataset"
            )
        sequences.append(split)
        labels.append(label if label is not None else entry.get("label", ""))
    assert conn is not None
    return Dataset(
        sequences, labels, conn, tuple(joint_names) if joint_names else None
    )
