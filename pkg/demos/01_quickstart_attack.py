"""Quickstart: generate motion, train the toy predictor, attack one sequence.

Walks the full loop once: synthesize rigid drifting skeletons, fit the MLP
predictor, then run the physics-constrained attack on a held-out sequence and
compare prediction errors before and after.
"""

import numpy as np

import moperturb as mp

train = mp.generate(mp.SynthConfig(n_sequences=100, t_h=10, t_f=25, seed=100, family="drift"))
test = mp.generate(mp.SynthConfig(n_sequences=10, t_h=10, t_f=25, seed=200, family="drift"))

print("training the MLP predictor on 100 drifting sequences ...")
result = mp.train_mlp(train.sequences, hidden=96, lr=0.1, epochs=800, batch=16, seed=0)
predictor = result.predictor
print(f"  dataset MSE: {result.epoch_losses[0]:.4f} -> {result.epoch_losses[-1]:.6f}")

split = test.sequences[0]
config = mp.AttackConfig(epsilon=0.05, constraint_mode="both", seed=1)
res = mp.pgd_attack(predictor, split, test.connectivity, config)

print(f"\nattack with epsilon={config.epsilon}, lambda={config.lam}, "
      f"{config.iterations} iterations")
print(f"  scale unit S_c          : {res.scale:.4f}")
print(f"  per-coordinate bound    : {config.epsilon * res.scale:.5f}")
print(f"  max |perturbation|      : {np.abs(res.perturbation).max():.5f}")

clean_curve = mp.mpjpe_curve(predictor.forward(split.history), split.future)
adv_curve = mp.mpjpe_curve(predictor.forward(res.adversarial), split.future)
print(f"\n  clean MPJPE (mean over horizon): {clean_curve.mean():.4f}")
print(f"  adv   MPJPE (mean over horizon): {adv_curve.mean():.4f}")
print(f"  growth: {mp.growth_rate(clean_curve.mean(), adv_curve.mean()):.1f}%")

trace = res.loss_trace
print("\nloss trace (every 10th iteration):")
print("  iter   total    prediction  temporal   bone")
for it in range(0, config.iterations, 10):
    print(f"  {it:4d}  {trace['total'][it]:8.4f}  {trace['prediction'][it]:9.4f}"
          f"  {trace['temporal'][it]:8.4f}  {trace['bone'][it]:7.4f}")
print(f"  final {res.final_loss['total']:8.4f}  {res.final_loss['prediction']:9.4f}"
      f"  {res.final_loss['temporal']:8.4f}  {res.final_loss['bone']:7.4f}")
