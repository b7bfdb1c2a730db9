"""Recover a sigmoid perceptual scale from noisy triplet answers.

Simulates an observer whose percept of stimulus S is a sigmoid of S plus
Gaussian noise, asks every monotone-valid triplet question once, fits MLDS
and 1-D t-STE, and prints the recovered scales next to the ground truth.
"""

import numpy as np

from triadscale import (
    EngineConfig,
    NoisyObserver,
    ScalingFunctionSpec,
    enumerate_universe,
    eval_scaling,
    fit_mlds,
    fit_tste,
    mse_1d,
    normalize_scale_1d,
    stimulus_grid,
)

N = 10
SIGMA = 0.1

spec = ScalingFunctionSpec(kind="sigmoid")
stimuli = stimulus_grid(N)
psi_true = eval_scaling(spec, stimuli).ravel()
observer = NoisyObserver(spec, sigma=SIGMA, seed=0)

valid = observer.simulate_answers(enumerate_universe(N, "mlds_valid").triplets, stimuli)
general = observer.simulate_answers(enumerate_universe(N, "general").triplets, stimuli)

scale = fit_mlds(valid, EngineConfig(restarts=10, seed=0))
emb = fit_tste(general, EngineConfig(dim=1, restarts=10, seed=0))

psi_mlds = scale.psi
psi_tste = normalize_scale_1d(emb.points.ravel(), psi_true)

print(f"{'S':>6} {'truth':>8} {'mlds':>8} {'tste':>8}")
for s, a, b, c in zip(stimuli, psi_true, psi_mlds, psi_tste):
    print(f"{s:6.3f} {a:8.3f} {b:8.3f} {c:8.3f}")
print()
print(f"MLDS  MSE: {mse_1d(normalize_scale_1d(psi_mlds, psi_true), psi_true):.5f}"
      f"  (sigma_hat = {scale.sigma_hat:.3f})")
print(f"t-STE MSE: {mse_1d(psi_tste, psi_true):.5f}")
