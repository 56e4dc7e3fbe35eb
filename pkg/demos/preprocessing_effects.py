"""
Conditioning the image before region growing
============================================

Noise makes geodesic paths expensive inside otherwise homogeneous objects,
which shrinks the objectness. Edge-preserving smoothing flattens the inside
of objects while keeping their borders sharp; histogram equalization
spreads intensities when contrast is compressed.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from seedprior import (
    DiffusionParams,
    ObjectnessConfig,
    SynthSpec,
    anisotropic_diffusion,
    generate_objectness,
    histogram_equalize,
    normalize_intensity,
    synth_generate,
)

out_dir = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(out_dir, exist_ok=True)

image, labels, seeds = synth_generate(
    SynthSpec(
        shape=(96, 96),
        n_objects=5,
        n_classes=2,
        radius_range=(8, 13),
        fg_means=(0.55,),
        bg_mean=0.4,
        noise_sigma=0.09,  # deliberately noisy, low contrast
        rng_seed=4,
    )
)
g = normalize_intensity(image)

smooth = anisotropic_diffusion(g, DiffusionParams(kappa=0.15, step=0.15, iterations=20))
equalized = histogram_equalize(g)

cfg = ObjectnessConfig(w=40.0)
fg = lambda m: 1.0 - m.P[0]
raw_obj = fg(generate_objectness(g, seeds, cfg))
smooth_obj = fg(generate_objectness(smooth, seeds, cfg))

fig, axes = plt.subplots(2, 3, figsize=(13, 8))
axes[0, 0].imshow(g.data[0], cmap="gray")
axes[0, 0].set_title("noisy input")
axes[0, 1].imshow(smooth.data[0], cmap="gray")
axes[0, 1].set_title("after edge-preserving smoothing")
axes[0, 2].imshow(equalized.data[0], cmap="gray")
axes[0, 2].set_title("after histogram equalization")
axes[1, 0].imshow(raw_obj, vmin=0, vmax=1)
axes[1, 0].set_title("foreground probability, raw")
axes[1, 1].imshow(smooth_obj, vmin=0, vmax=1)
axes[1, 1].set_title("foreground probability, smoothed")
axes[1, 2].imshow(labels, cmap="tab10")
axes[1, 2].set_title("ground truth")
for ax in axes.ravel():
    ax.set_axis_off()
fig.tight_layout()
path = os.path.join(out_dir, "preprocessing_effects.png")
fig.savefig(path, dpi=110)
print("wrote", path)

# smoothing conserves per-channel mass and never exceeds the input range
print("mean before/after smoothing:", g.data.mean(), smooth.data.mean())
print("range after smoothing:", smooth.data.min(), smooth.data.max())
