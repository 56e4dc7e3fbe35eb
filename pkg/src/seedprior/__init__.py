"""seedprior: soft multi-class objectness maps from point annotations.

Seeded region growing over an intensity-geodesic distance turns sparse
point annotations of microscopy images/volumes into per-pixel soft class
probabilities and generated background labels, plus reference loss
kernels for weakly supervised segmentation training and a desk-scale
synthetic evaluation harness.
"""

__version__ = "0.1.0"

from .errors import FormatError, ValidationError
from .grid import Grid, neighbor_offsets, neighbors, normalize_intensity
from .preprocess import (
    DiffusionParams,
    anisotropic_diffusion,
    channel_normalize,
    histogram_equalize,
)
from .objectness import (
    GrowthResult,
    ObjectnessConfig,
    ObjectnessMap,
    Seed,
    SeedSet,
    assemble_class_maps,
    dijkstra_reference,
    distance_to_objectness,
    extract_boundaries,
    generate_objectness,
    grow_regions,
    warmup,
)
from .losses import (
    ImagePresence,
    LossWeights,
    ObjectnessTarget,
    PointLabels,
    image_level_loss,
    objectness_loss,
    point_loss,
    total_loss,
)
from .evalsynth import SynthSpec, iou, sweep_w, synth_generate, threshold_predict
from .tensorio import (
    read_image,
    read_labels,
    read_objectness,
    read_seeds,
    read_tensor,
    write_labels,
    write_objectness,
    write_seeds,
    write_tensor,
)

__all__ = [
    "__version__",
    "FormatError",
    "ValidationError",
    "Grid",
    "neighbor_offsets",
    "neighbors",
    "normalize_intensity",
    "DiffusionParams",
    "anisotropic_diffusion",
    "channel_normalize",
    "histogram_equalize",
    "GrowthResult",
    "ObjectnessConfig",
    "ObjectnessMap",
    "Seed",
    "SeedSet",
    "assemble_class_maps",
    "dijkstra_reference",
    "distance_to_objectness",
    "extract_boundaries",
    "generate_objectness",
    "grow_regions",
    "warmup",
    "ImagePresence",
    "LossWeights",
    "ObjectnessTarget",
    "PointLabels",
    "image_level_loss",
    "objectness_loss",
    "point_loss",
    "total_loss",
    "SynthSpec",
    "iou",
    "sweep_w",
    "synth_generate",
    "threshold_predict",
    "read_image",
    "read_labels",
    "read_objectness",
    "read_seeds",
    "read_tensor",
    "write_labels",
    "write_objectness",
    "write_seeds",
    "write_tensor",
]
