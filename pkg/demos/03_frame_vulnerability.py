"""Frame vulnerability: which part of the history is worth attacking?

Masks the attack to the front, middle, rear, or last part of the input and
compares the damage to attacking the whole history. Frames closer to the
observation end should matter most.
"""

import numpy as np

import moperturb as mp
from moperturb.attack import frame_mask_for, partition_history
from moperturb.core import interval_to_frame
from moperturb.report import frame_vulnerability_table, render_markdown

MM = 1000.0
INTERVALS = [80.0, 160.0, 320.0, 400.0, 560.0, 1000.0]

train = mp.generate(mp.SynthConfig(n_sequences=120, t_h=10, t_f=25, seed=100, family="drift"))
test = mp.generate(mp.SynthConfig(n_sequences=30, t_h=10, t_f=25, seed=200, family="drift"))
print("training the victim ...")
predictor = mp.train_mlp(train.sequences, hidden=128, lr=0.1, epochs=1200, batch=16, seed=0).predictor

part = partition_history(10)
print(f"history partition for 10 frames: front={list(part.front)} "
      f"middle={list(part.middle)} rear={list(part.rear)} last={list(part.last)}")

idx = [interval_to_frame(ms, 25.0) for ms in INTERVALS]


def errors_at_intervals(curves):
    mean_curve = np.mean(curves, axis=0)
    return {iv: MM * mean_curve[i] for iv, i in zip(INTERVALS, idx)}


clean = errors_at_intervals(
    [mp.mpjpe_curve(predictor.forward(s.history), s.future) for s in test.sequences]
)

per_part = {}
for name in ("whole", "front", "middle", "rear", "last"):
    print(f"attacking the {name} part ...")
    config = mp.AttackConfig(
        epsilon=0.05, constraint_mode="both", seed=0,
        frame_mask=frame_mask_for(name, 10),
    )
    results = mp.attack_batch(predictor, test.sequences, test.connectivity, config)
    per_part[name] = errors_at_intervals([
        mp.mpjpe_curve(predictor.forward(r.adversarial), s.future)
        for r, s in zip(results, test.sequences)
    ])

print("\naverage prediction error (mm) by attacked part, worst per column in bold:\n")
print(render_markdown(frame_vulnerability_table(per_part, clean)))
