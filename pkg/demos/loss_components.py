"""
The three weak-supervision loss components
==========================================

A mock network prediction is scored against (1) the annotated points plus
generated background samples, (2) the soft objectness target, and (3) the
image-level class presence. Blending the prediction toward the target
drives every component down; their weighted sum is the training objective.
"""

import numpy as np

from seedprior import (
    ImagePresence,
    LossWeights,
    ObjectnessConfig,
    ObjectnessTarget,
    PointLabels,
    SynthSpec,
    generate_objectness,
    image_level_loss,
    normalize_intensity,
    objectness_loss,
    point_loss,
    synth_generate,
    total_loss,
)

image, labels, seeds = synth_generate(
    SynthSpec(shape=(64, 64), n_objects=4, n_classes=2, radius_range=(6, 10), rng_seed=3)
)
g = normalize_intensity(image)
m = generate_objectness(g, seeds, ObjectnessConfig(w=40.0))

# labeled set = annotated points (weight 1.0) + generated background (0.1)
pts = PointLabels.from_seeds(seeds, g.shape, m.background_mask)
tgt = ObjectnessTarget.from_map(m, background_beta=2.0)
pres = ImagePresence(present=frozenset({1}), absent=frozenset())

rng = np.random.default_rng(0)
C = m.num_classes


def random_prediction():
    raw = rng.random((C, *g.shape)) + 1e-3
    return raw / raw.sum(axis=0)


S_random = random_prediction()
print(f"{'prediction':>24}  {'point':>9}  {'objectness':>10}  {'image':>9}  {'total':>9}")
for name, blend in [("random", 0.0), ("25% target", 0.25), ("75% target", 0.75), ("target", 1.0)]:
    S = (1 - blend) * S_random + blend * m.P
    S = np.clip(S, 1e-9, 1.0)
    S = S / S.sum(axis=0)
    row = (
        point_loss(S, pts),
        objectness_loss(S, tgt),
        image_level_loss(S, pres),
        total_loss(S, pts, tgt, pres, LossWeights(1.0, 1.0, 1.0)),
    )
    print(f"{name:>24}  {row[0]:9.4f}  {row[1]:10.4f}  {row[2]:9.4f}  {row[3]:9.4f}")

# the point term decomposes over the labeled subsets
fg_only = PointLabels.from_seeds(seeds, g.shape, background_mask=None)
print("\npoint loss split: foreground", round(point_loss(S_random, fg_only), 4))
