"""Rebuild the classic color circle from similarity judgments.

Ingests the bundled 14-color similarity matrix (wavelengths 434-674 nm),
embeds it in two dimensions with non-metric MDS, and shows that the
perceptual space is circular: the spectral extremes (violet and red) sit
closer to each other than either sits to mid-spectrum green.
"""

import numpy as np

from triadscale import EngineConfig, eval_scaling, ingest_similarity, stimulus_grid
from triadscale.ekman import bundled_similarity_path

spec = ingest_similarity(str(bundled_similarity_path()), EngineConfig(dim=2, restarts=10, seed=0))
wavelengths = sorted(spec.table)
points = eval_scaling(spec, stimulus_grid(len(wavelengths)))

print(f"{'wavelength':>10} {'x':>7} {'y':>7}")
for wl, (x, y) in zip(wavelengths, points):
    print(f"{wl:10.0f} {x:7.3f} {y:7.3f}")

violet, green, red = points[0], points[len(points) // 2], points[-1]
d = lambda a, b: float(np.linalg.norm(a - b))
print()
print(f"violet-red   distance: {d(violet, red):.3f}")
print(f"violet-green distance: {d(violet, green):.3f}")
print(f"red-green    distance: {d(red, green):.3f}")
print("-> the hue circle closes: the spectral endpoints are perceptual neighbors")
