"""Constraint ablation: what do the physical terms buy?

Runs the attack with no constraints, each constraint alone, and both
together, then reports prediction errors next to the average physical
changes (bone length, velocity, acceleration) the perturbation causes.
Lower changes mean a stealthier attack.
"""

import numpy as np

import moperturb as mp
from moperturb.core import interval_to_frame
from moperturb.report import physical_change_metrics, physical_change_table, render_markdown

MM = 1000.0
INTERVALS = [80.0, 320.0, 1000.0]

train = mp.generate(mp.SynthConfig(n_sequences=120, t_h=10, t_f=25, seed=100, family="drift"))
test = mp.generate(mp.SynthConfig(n_sequences=30, t_h=10, t_f=25, seed=200, family="drift"))
print("training the victim ...")
predictor = mp.train_mlp(train.sequences, hidden=128, lr=0.1, epochs=1200, batch=16, seed=0).predictor

idx = [interval_to_frame(ms, 25.0) for ms in INTERVALS]
histories = [s.history for s in test.sequences]


def errors_at_intervals(curves):
    mean_curve = np.mean(curves, axis=0)
    return {iv: MM * mean_curve[i] for iv, i in zip(INTERVALS, idx)}


clean = errors_at_intervals(
    [mp.mpjpe_curve(predictor.forward(s.history), s.future) for s in test.sequences]
)

per_mode = {}
for mode in ("none", "temporal_only", "bone_only", "both"):
    print(f"attacking with constraint mode {mode} ...")
    config = mp.AttackConfig(epsilon=0.01, constraint_mode=mode, seed=0)
    results = mp.attack_batch(predictor, test.sequences, test.connectivity, config)
    adversarials = [r.adversarial for r in results]
    errors = errors_at_intervals([
        mp.mpjpe_curve(predictor.forward(adv), s.future)
        for adv, s in zip(adversarials, test.sequences)
    ])
    dbl, dv, da = physical_change_metrics(histories, adversarials, test.connectivity)
    per_mode[mode] = (errors, (MM * dbl, MM * dv, MM * da))

print("\nerrors (mm) and average physical changes (mm); bold marks the worst "
      "error and the smallest change per column:\n")
print(render_markdown(physical_change_table(per_mode, clean)))
print("each constraint sharply cuts its own physical change relative to the\n"
      "unconstrained attack; the combined mode trades the two against each\n"
      "other while giving up some attack strength")
