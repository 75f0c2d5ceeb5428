"""Bound sweep: prediction error growth across the epsilon grid.

Attacks a held-out set at each bound in the standard grid and renders the
robustness table with growth annotations on the extreme rows. Errors are
converted from the generator's unit to millimetres (x1000) for display.
"""

import numpy as np

import moperturb as mp
from moperturb.core import interval_to_frame
from moperturb.report import render_markdown, robustness_table

MM = 1000.0
INTERVALS = [80.0, 160.0, 320.0, 400.0, 560.0, 1000.0]

train = mp.generate(mp.SynthConfig(n_sequences=120, t_h=10, t_f=25, seed=100, family="drift"))
test = mp.generate(mp.SynthConfig(n_sequences=30, t_h=10, t_f=25, seed=200, family="drift"))
print("training the victim ...")
predictor = mp.train_mlp(train.sequences, hidden=128, lr=0.1, epochs=1200, batch=16, seed=0).predictor

idx = [interval_to_frame(ms, 25.0) for ms in INTERVALS]


def errors_at_intervals(curves):
    mean_curve = np.mean(curves, axis=0)
    return {iv: MM * mean_curve[i] for iv, i in zip(INTERVALS, idx)}


clean = errors_at_intervals(
    [mp.mpjpe_curve(predictor.forward(s.history), s.future) for s in test.sequences]
)

per_eps = {}
for eps in (0.01, 0.02, 0.03, 0.04, 0.05):
    print(f"attacking at epsilon={eps} ...")
    results = mp.attack_batch(
        predictor, test.sequences, test.connectivity,
        mp.AttackConfig(epsilon=eps, constraint_mode="both", seed=0),
    )
    per_eps[eps] = errors_at_intervals([
        mp.mpjpe_curve(predictor.forward(r.adversarial), s.future)
        for r, s in zip(results, test.sequences)
    ])

print("\naverage prediction error (mm) before and after perturbation:\n")
print(render_markdown(robustness_table(clean, per_eps)))
