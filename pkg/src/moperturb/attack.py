"""Physics-constrained sign-gradient attack on motion predictors.

The attack maximizes the predictor's mean joint-position error while two
physical penalties keep the perturbed history natural: a temporal term that
pins the joint velocities and higher differences to the clean ones, and a
bone-length term that pins the skeleton's edge lengths. Each step moves every
coordinate by a fixed amount in the gradient's sign direction, then projects
back into an L-infinity box whose radius is epsilon times a data-derived
length unit (the smallest axis span of the input's bounding box), so one
epsilon setting works across data of any scale.
"""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .core import Connectivity, MotionSequence, SplitSequence, as_frames
from .predict import Predictor

__all__ = [
    "CONSTRAINT_MODES",
    "AttackConfig",
    "AttackResult",
    "DegenerateScaleError",
    "NumericFailureError",
    "HistoryPartition",
    "adaptive_scale",
    "prediction_loss",
    "temporal_loss",
    "bone_length_loss",
    "total_loss",
    "clip_perturbation",
    "pgd_attack",
    "attack_batch",
    "partition_history",
    "frame_mask_for",
    "attack_config_to_dict",
    "attack_config_from_dict",
    "attack_result_to_dict",
    "attack_result_from_dict",
]

CONSTRAINT_MODES = ("none", "temporal_only", "bone_only", "both")

# Distances below this count as degenerate: their unit direction is taken as 0
# instead of dividing by (near-)zero.
_SINGULARITY_EPS = 1e-12


class DegenerateScaleError(ValueError):
    """The bounding box of the input collapses on some axis, so no data-derived
    length unit exists; pass an explicit absolute bound instead."""


class NumericFailureError(ArithmeticError):
    """Loss or gradient became non-finite during the ascent."""

    def __init__(self, iteration: int, value: float):
        super().__init__(f"non-finite loss at iteration {iteration}: {value}")
        self.iteration = iteration
        self.value = value


@dataclass(frozen=True)
class AttackConfig:
    """Attack hyperparameters.

    epsilon bounds the perturbation per coordinate in units of the scale;
    the per-step size is step_factor * epsilon in the same units. lam trades
    attack strength against the physical penalties, n_order is the highest
    temporal difference the temporal penalty considers, and frame_mask (when
    set) restricts the attack to those history frames.
    """

    epsilon: float = 0.01
    step_factor: float = 0.1
    iterations: int = 50
    lam: float = 0.5
    n_order: int = 2
    constraint_mode: str = "both"
    frame_mask: frozenset[int] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.step_factor > 0:
            raise ValueError(f"step_factor must be positive, got {self.step_factor}")
        if self.iterations < 1:
            raise ValueError(f"iterations must be at least 1, got {self.iterations}")
        if self.lam < 0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        if self.n_order < 1:
            raise ValueError(f"n_order must be at least 1, got {self.n_order}")
        if self.constraint_mode not in CONSTRAINT_MODES:
            raise ValueError(
                f"constraint_mode {self.constraint_mode!r} not one of {CONSTRAINT_MODES}"
            )
        if self.frame_mask is not None:
            mask = frozenset(int(i) for i in self.frame_mask)
            if any(i < 0 for i in mask):
                raise ValueError("frame_mask contains negative indices")
            object.__setattr__(self, "frame_mask", mask)

    def check_history_length(self, t_h: int) -> None:
        if self.frame_mask is not None and any(i >= t_h for i in self.frame_mask):
            raise ValueError(f"frame_mask index out of range for t_h={t_h}")
        if t_h < self.n_order + 1:
            raise ValueError(
                f"history of {t_h} frames too short for derivative order {self.n_order}"
            )


@dataclass(frozen=True)
class AttackResult:
    """Outcome of one attack run.

    perturbation is adversarial minus clean history; loss_trace holds the
    per-iteration values of the combined objective and its three components,
    and final_loss the same quantities evaluated at the returned iterate.
    """

    adversarial: MotionSequence
    perturbation: np.ndarray
    scale: float
    loss_trace: dict[str, list[float]]
    final_loss: dict[str, float]
    config: AttackConfig

    def __post_init__(self) -> None:
        pert = np.array(self.perturbation, dtype=np.float64)
        pert.flags.writeable = False
        object.__setattr__(self, "perturbation", pert)
        bound = self.config.epsilon * self.scale
        if np.abs(pert).max() > bound + 1e-9:
            raise ValueError(
                f"perturbation exceeds the box: {np.abs(pert).max()} > {bound}"
            )


def adaptive_scale(batch: Sequence[MotionSequence]) -> float:
    """Data-derived length unit for a batch of sequences.

    Per axis, take each sequence's coordinate span over all frames and joints
    and keep the smallest across the batch; the unit is the smallest of the
    three axis spans. A zero span means the unit is undefined.
    """
    if not batch:
        raise ValueError("empty batch")
    spans = []
    for seq in batch:
        frames = as_frames(seq).reshape(-1, 3)
        spans.append(frames.max(axis=0) - frames.min(axis=0))
    scale = float(np.min(spans))
    if scale <= 0.0:
        raise DegenerateScaleError(
            "input has zero span on some axis; supply an absolute bound"
        )
    return scale


def prediction_loss(
    predicted: "MotionSequence | np.ndarray", truth: "MotionSequence | np.ndarray"
) -> tuple[float, np.ndarray]:
    """Mean joint distance between prediction and truth, with its gradient.

    The gradient with respect to the prediction is the unit offset direction
    per joint, scaled by 1/(T*J); it is defined as zero where prediction and
    truth coincide.
    """
    p = as_frames(predicted)
    y = as_frames(truth)
    if p.shape != y.shape:
        raise ValueError(f"shape mismatch: {p.shape} vs {y.shape}")
    diff = p - y
    dist = np.linalg.norm(diff, axis=2)
    t, j = dist.shape
    value = float(dist.sum() / (t * j))
    safe = np.where(dist > _SINGULARITY_EPS, dist, 1.0)
    grad = np.where(
        (dist > _SINGULARITY_EPS)[..., None], diff / (t * j * safe[..., None]), 0.0
    )
    return value, grad


def _diff_adjoint(g: np.ndarray, out_len: int) -> np.ndarray:
    """Transpose of the forward-difference operator along axis 0."""
    out = np.zeros((out_len,) + g.shape[1:])
    out[:-1] -= g
    out[1:] += g
    return out


def temporal_loss(
    x: "MotionSequence | np.ndarray",
    xp: "MotionSequence | np.ndarray",
    n_order: int = 2,
) -> tuple[float, np.ndarray]:
    """Deviation of the perturbed motion's temporal differences from the clean ones.

    Averages, over difference orders 1..n_order, the Euclidean norm of the
    whole difference tensor between clean and perturbed order-n derivatives.
    Returns the value and its gradient with respect to the perturbed frames.
    """
    xf = as_frames(x)
    xpf = as_frames(xp)
    if xf.shape != xpf.shape:
        raise ValueError(f"shape mismatch: {xf.shape} vs {xpf.shape}")
    n_order = int(n_order)
    if n_order < 1:
        raise ValueError("n_order must be at least 1")
    if xf.shape[0] < n_order + 1:
        raise ValueError(
            f"{xf.shape[0]} frames too short for derivative order {n_order}"
        )
    z = xf - xpf
    value = 0.0
    grad = np.zeros_like(xpf)
    d = z
    for n in range(1, n_order + 1):
        d = np.diff(d, axis=0)
        norm = float(np.sqrt((d * d).sum()))
        value += norm
        if norm > _SINGULARITY_EPS:
            g = d / norm
            for length in range(d.shape[0] + 1, xf.shape[0] + 1):
                g = _diff_adjoint(g, length)
            grad -= g
    return value / n_order, grad / n_order


def bone_length_loss(
    x: "MotionSequence | np.ndarray",
    xp: "MotionSequence | np.ndarray",
    conn: Connectivity,
    signed: bool = False,
) -> tuple[float, np.ndarray]:
    """Deformation of the skeleton's bone lengths under the perturbation.

    By default sums |clean length - perturbed length| over every bone and
    frame, so stretching and shrinking both count. signed=True instead sums
    the raw differences, which lets opposite deformations cancel.
    Returns the value and its gradient with respect to the perturbed frames;
    bones with coincident endpoints contribute zero gradient.
    """
    xf = as_frames(x)
    xpf = as_frames(xp)
    if xf.shape != xpf.shape:
        raise ValueError(f"shape mismatch: {xf.shape} vs {xpf.shape}")
    conn.validate_for(xf.shape[1])
    a, b = conn.index_arrays()
    grad = np.zeros_like(xpf)
    if len(a) == 0:
        return 0.0, grad
    bl_clean = np.linalg.norm(xf[:, a, :] - xf[:, b, :], axis=2)
    diff_p = xpf[:, a, :] - xpf[:, b, :]
    bl_pert = np.linalg.norm(diff_p, axis=2)
    delta = bl_clean - bl_pert
    if signed:
        value = float(delta.sum())
        coeff = np.ones_like(delta)
    else:
        value = float(np.abs(delta).sum())
        coeff = np.sign(delta)
    safe = np.where(bl_pert > _SINGULARITY_EPS, bl_pert, 1.0)
    unit = np.where((bl_pert > _SINGULARITY_EPS)[..., None], diff_p / safe[..., None], 0.0)
    contrib = -coeff[..., None] * unit
    rows = np.arange(xf.shape[0])[:, None]
    np.add.at(grad, (rows, a[None, :]), contrib)
    np.add.at(grad, (rows, b[None, :]), -contrib)
    return value, grad


def total_loss(
    predictor: Predictor,
    x: MotionSequence,
    xp: MotionSequence,
    y: MotionSequence,
    conn: Connectivity,
    config: AttackConfig,
) -> tuple[float, np.ndarray, dict[str, float]]:
    """Attack objective at xp and its gradient with respect to xp's frames.

    The objective is the prediction loss minus lam times whichever physical
    penalties the constraint mode activates. The returned parts dict always
    carries all three component values for diagnostics, active or not.
    """
    p = predictor.forward(xp)
    l_pred, g_pred = prediction_loss(p, y)
    grad = predictor.vjp(xp, g_pred)
    l_temp, g_temp = temporal_loss(x, xp, config.n_order)
    l_bone, g_bone = bone_length_loss(x, xp, conn)
    value = l_pred
    if config.constraint_mode in ("temporal_only", "both"):
        value -= config.lam * l_temp
        grad = grad - config.lam * g_temp
    if config.constraint_mode in ("bone_only", "both"):
        value -= config.lam * l_bone
        grad = grad - config.lam * g_bone
    parts = {"prediction": l_pred, "temporal": l_temp, "bone": l_bone}
    return value, grad, parts


def clip_perturbation(
    xp: "MotionSequence | np.ndarray",
    x: "MotionSequence | np.ndarray",
    bound: float,
) -> MotionSequence:
    """Project xp into the per-coordinate box of radius bound around x."""
    if not bound > 0:
        raise ValueError(f"bound must be positive, got {bound}")
    xf = as_frames(x)
    xpf = as_frames(xp)
    if xf.shape != xpf.shape:
        raise ValueError(f"shape mismatch: {xpf.shape} vs {xf.shape}")
    clipped = xf + np.clip(xpf - xf, -bound, bound)
    if isinstance(x, MotionSequence):
        return x.with_frames(clipped)
    return MotionSequence(clipped)


def _resolve_scale(
    x: MotionSequence,
    config: AttackConfig,
    scale_override: float | None,
    absolute_bound: float | None,
) -> float:
    if absolute_bound is not None:
        if not absolute_bound > 0:
            raise ValueError(f"absolute bound must be positive, got {absolute_bound}")
        # Fixed-bound mode: the box radius is the bound itself and the step is
        # step_factor times it, so report the implied unit bound/epsilon.
        return float(absolute_bound) / config.epsilon
    if scale_override is not None:
        if not scale_override > 0:
            raise ValueError(f"scale must be positive, got {scale_override}")
        return float(scale_override)
    return adaptive_scale([x])


def pgd_attack(
    predictor: Predictor,
    split: SplitSequence,
    conn: Connectivity,
    config: AttackConfig,
    scale_override: float | None = None,
    absolute_bound: float | None = None,
) -> AttackResult:
    """Iterative sign-gradient ascent on the attack objective.

    The perturbation starts uniform in [-epsilon*scale, +epsilon*scale] per
    coordinate from the seeded generator (zero outside the frame mask). Each
    round runs the predictor, takes one signed gradient step of size
    step_factor * epsilon * scale, re-zeros masked-out frames, and clips back
    into the box. Returns the final iterate with the full loss trace.
    """
    x, y = split.history, split.future
    predictor._check_history(x)
    if predictor.t_f != y.n_frames:
        raise ValueError(
            f"future length {y.n_frames} does not match predictor t_f={predictor.t_f}"
        )
    conn.validate_for(x.n_joints)
    config.check_history_length(x.n_frames)
    scale = _resolve_scale(x, config, scale_override, absolute_bound)
    bound = config.epsilon * scale
    step = config.step_factor * bound

    if config.frame_mask is None:
        mask = np.ones(x.n_frames, dtype=bool)
    else:
        mask = np.zeros(x.n_frames, dtype=bool)
        mask[sorted(config.frame_mask)] = True
    mask3 = mask[:, None, None]

    rng = np.random.default_rng(config.seed)
    init = bound * rng.uniform(-1.0, 1.0, x.frames.shape)
    adv = np.where(mask3, x.frames + init, x.frames)

    trace: dict[str, list[float]] = {
        "total": [], "prediction": [], "temporal": [], "bone": []
    }
    for it in range(config.iterations):
        xp = x.with_frames(adv)
        value, grad, parts = total_loss(predictor, x, xp, y, conn, config)
        if not (np.isfinite(value) and np.isfinite(grad).all()):
            raise NumericFailureError(it, value)
        trace["total"].append(value)
        trace["prediction"].append(parts["prediction"])
        trace["temporal"].append(parts["temporal"])
        trace["bone"].append(parts["bone"])
        stepped = adv + step * np.sign(grad)
        adv = np.where(mask3, x.frames + np.clip(stepped - x.frames, -bound, bound), x.frames)

    xp = x.with_frames(adv)
    value, _, parts = total_loss(predictor, x, xp, y, conn, config)
    final = {
        "total": value,
        "prediction": parts["prediction"],
        "temporal": parts["temporal"],
        "bone": parts["bone"],
    }
    return AttackResult(
        adversarial=xp,
        perturbation=adv - x.frames,
        scale=scale,
        loss_trace=trace,
        final_loss=final,
        config=config,
    )


def attack_batch(
    predictor: Predictor,
    splits: Sequence[SplitSequence],
    conn: Connectivity,
    config: AttackConfig,
    batch_scale: bool = False,
    absolute_bound: float | None = None,
    max_workers: int | None = None,
) -> list[AttackResult]:
    """Attack every sequence independently with per-sequence derived seeds.

    Sequence i uses seed config.seed XOR i, so parallel and sequential runs
    produce identical results. batch_scale=True computes one shared length
    unit from the whole batch instead of per sequence.
    """
    if not splits:
        raise ValueError("empty batch")
    scale_override = None
    if batch_scale and absolute_bound is None:
        scale_override = adaptive_scale([s.history for s in splits])

    def one(i: int) -> AttackResult:
        cfg = dataclasses.replace(config, seed=config.seed ^ i)
        return pgd_attack(
            predictor, splits[i], conn, cfg,
            scale_override=scale_override, absolute_bound=absolute_bound,
        )

    indices = range(len(splits))
    if max_workers is not None and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(one, indices))
    return [one(i) for i in indices]


class HistoryPartition(NamedTuple):
    """Disjoint frame-index ranges covering a history of t_h frames."""

    front: range
    middle: range
    rear: range
    last: range


def partition_history(t_h: int) -> HistoryPartition:
    """Split history frames into front, middle, rear, and last parts.

    The last part is one frame for histories up to 25 frames, two beyond
    that; the remaining frames split into three contiguous near-equal parts
    with any remainder assigned to the earlier parts.
    """
    t_h = int(t_h)
    if t_h < 4:
        raise ValueError(f"need at least 4 frames to partition, got {t_h}")
    n_last = 1 if t_h <= 25 else 2
    rest = t_h - n_last
    base, rem = divmod(rest, 3)
    sizes = [base + (1 if i < rem else 0) for i in range(3)]
    a = sizes[0]
    b = a + sizes[1]
    return HistoryPartition(
        front=range(0, a),
        middle=range(a, b),
        rear=range(b, rest),
        last=range(rest, t_h),
    )


def frame_mask_for(part: str, t_h: int) -> frozenset[int] | None:
    """Frame mask for a named history part; "all" (or "whole") means no mask."""
    if part in ("all", "whole"):
        return None
    partition = partition_history(t_h)
    try:
        return frozenset(getattr(partition, part))
    except AttributeError:
        raise ValueError(f"unknown history part {part!r}") from None


def attack_config_to_dict(config: AttackConfig) -> dict:
    return {
        "epsilon": config.epsilon,
        "step_factor": config.step_factor,
        "iterations": config.iterations,
        "lambda": config.lam,
        "n_order": config.n_order,
        "constraint_mode": config.constraint_mode,
        "frame_mask": sorted(config.frame_mask) if config.frame_mask is not None else None,
        "seed": config.seed,
    }


def attack_config_from_dict(d: dict) -> AttackConfig:
    known = {
        "epsilon", "step_factor", "iterations", "lambda", "lam",
        "n_order", "constraint_mode", "frame_mask", "seed",
    }
    unknown = set(d) - known
    if unknown:
        raise ValueError(f"unknown attack config fields: {sorted(unknown)}")
    kwargs = dict(d)
    if "lambda" in kwargs:
        kwargs["lam"] = kwargs.pop("lambda")
    if kwargs.get("frame_mask") is not None:
        kwargs["frame_mask"] = frozenset(int(i) for i in kwargs["frame_mask"])
    return AttackConfig(**kwargs)


def attack_result_to_dict(result: AttackResult) -> dict:
    return {
        "version": 1,
        "fps": result.adversarial.fps,
        "scale": result.scale,
        "config": attack_config_to_dict(result.config),
        "adversarial": result.adversarial.frames.tolist(),
        "perturbation": result.perturbation.tolist(),
        "loss_trace": {k: list(v) for k, v in result.loss_trace.items()},
        "final_loss": dict(result.final_loss),
    }


def attack_result_from_dict(d: dict) -> AttackResult:
    try:
        return AttackResult(
            adversarial=MotionSequence(np.asarray(d["adversarial"]), float(d["fps"])),
            perturbation=np.asarray(d["perturbation"], dtype=np.float64),
            scale=float(d["scale"]),
            loss_trace={k: [float(x) for x in v] for k, v in d["loss_trace"].items()},
            final_loss={k: float(v) for k, v in d["final_loss"].items()},
            config=attack_config_from_dict(d["config"]),
        )
    except KeyError as exc:
        raise ValueError(f"attack result missing field {exc}") from None
