"""Forward-only reference kernels for the weak-supervision objective.

Three components over a per-pixel class-probability field S of shape
(C, *spatial):

* point loss      -- weighted negative log-likelihood at labeled pixels
                     (annotated foreground points plus generated background
                     samples, the latter conventionally downweighted to 0.1)
* objectness loss -- per-pixel cross-entropy of S against the soft
                     objectness distribution P, class-weighted by beta,
                     averaged over all pixels
* image loss      -- presence/absence terms read at each class's most
                     confident pixel

These are validation references; gradients are left to whatever training
framework consumes the exported maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .objectness import ObjectnessMap, SeedSet

LOG_EPS = 1e-12


def _check_prediction(S: np.ndarray) -> np.ndarray:
    S = np.asarray(S, dtype=np.float64)
    if S.ndim < 2:
        raise ValidationError("prediction field must be (C, *spatial)")
    if not np.isfinite(S).all():
        raise ValidationError("prediction field contains non-finite values")
    if S.min() < -1e-9 or S.max() > 1 + 1e-9:
        raise ValidationError("prediction probabilities must lie in [0, 1]")
    sums = S.sum(axis=0)
    if np.abs(sums - 1.0).max() > 1e-6:
        raise ValidationError("per-pixel probabilities must sum to 1 (tol 1e-6)")
    return S


@dataclass(frozen=True)
class PointLabels:
    """Sparse labeled pixels: flat indices, class targets, per-entry weights."""

    indices: np.ndarray
    classes: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, np.int64)
        cls = np.asarray(self.classes, np.int64)
        alpha = np.asarray(self.alphas, np.float64)
        if not (idx.shape == cls.shape == alpha.shape) or idx.ndim != 1:
            raise ValidationError("indices/classes/alphas must be equal-length 1D")
        if idx.size and len(np.unique(idx)) != idx.size:
            raise ValidationError("labeled pixel indices must be unique")
        if (alpha <= 0).any():
            raise ValidationError("label weights must be positive")
        if (cls < 0).any():
            raise ValidationError("label classes must be >= 0")
        for a in (idx, cls, alpha):
            a.flags.writeable = False
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "classes", cls)
        object.__setattr__(self, "alphas", alpha)

    def __len__(self) -> int:
        return self.indices.size

    @classmethod
    def from_seeds(
        cls,
        s: SeedSet,
        shape: tuple[int, ...],
        background_mask: np.ndarray | None = None,
        alpha_foreground: float = 1.0,
        alpha_background: float = 0.1,
    ) -> "PointLabels":
        """Annotated foreground points plus generated background samples.

        Background entries come from ``background_mask`` (e.g. the boundary
        pixels promoted by the objectness step) and get the downweighted
        alpha.
        """
        idx = [int(np.ravel_multi_index(seed.location, shape)) for seed in s]
        classes = [seed.class_id for seed in s]
        alphas = [alpha_foreground] * len(idx)
        if background_mask is not None:
            if background_mask.shape != tuple(shape):
                raise ValidationError("background mask shape mismatch")
            for i in np.flatnonzero(background_mask.ravel()):
                idx.append(int(i))
                classes.append(0)
                alphas.append(alpha_background)
        return cls(np.array(idx), np.array(classes), np.array(alphas))


@dataclass(frozen=True)
class ObjectnessTarget:
    """Soft target distribution P with per-class weights beta."""

    P: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        P = np.asarray(self.P, np.float64)
        beta = np.asarray(self.beta, np.float64).ravel()
        if P.ndim < 2:
            raise ValidationError("objectness target must be (C, *spatial)")
        if beta.size != P.shape[0]:
            raise ValidationError(
                f"beta needs one weight per class: {beta.size} != {P.shape[0]}"
            )
        if (beta <= 0).any():
            raise ValidationError("beta weights must be positive")
        if np.abs(P.sum(axis=0) - 1.0).max() > 1e-6:
            raise ValidationError("target rows must sum to 1 (tol 1e-6)")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_map(cls, m: ObjectnessMap, background_beta: float = 1.0) -> "ObjectnessTarget":
        """Unit beta for all classes, with an optional background override
        (raising it discourages over-segmentation)."""
        beta = np.ones(m.num_classes)
        beta[0] = background_beta
        return cls(m.P, beta)


@dataclass(frozen=True)
class ImagePresence:
    """Class ids present in the image (L) and absent from it (L')."""

    present: frozenset[int]
    absent: frozenset[int]

    def __post_init__(self):
        present = frozenset(int(c) for c in self.present)
        absent = frozenset(int(c) for c in self.absent)
        if present & absent:
            raise ValidationError(
                f"present/absent sets overlap: {sorted(present & absent)}"
            )
        if any(c < 1 for c in present | absent):
            raise ValidationError("presence supervision excludes background (class 0)")
        object.__setattr__(self, "present", present)
        object.__setattr__(self, "absent", absent)


@dataclass(frozen=True)
class LossWeights:
    point: float = 1.0
    objectness: float = 1.0
    image: float = 1.0

    def __post_init__(self):
        if min(self.point, self.objectness, self.image) < 0:
            raise ValidationError("loss weights must be >= 0")


def point_loss(S: np.ndarray, pts: PointLabels, reduce: str = "sum") -> float:
    """Weighted NLL over the labeled pixel set (a sum by default).

    ``reduce="mean"`` divides by the number of entries, a convenience for
    training schedules; the reference definition is the sum.
    """
    S = _check_prediction(S)
    if len(pts) == 0:
        raise ValidationError("point loss needs a non-empty label set")
    if reduce not in ("sum", "mean"):
        raise ValidationError(f"unknown reduction {reduce!r}")
    flat = S.reshape(S.shape[0], -1)
    n = flat.shape[1]
    if pts.indices.max() >= n:
        raise ValidationError("label index out of range for the prediction field")
    if pts.classes.max() >= S.shape[0]:
        raise ValidationError("label class out of range for the prediction field")
    p = flat[pts.classes, pts.indices]
    total = -(pts.alphas * np.log(np.maximum(p, LOG_EPS))).sum()
    if reduce == "mean":
        total /= len(pts)
    return float(total)


def objectness_loss(S: np.ndarray, tgt: ObjectnessTarget) -> float:
    """Mean over pixels of the beta-weighted cross-entropy of S against P."""
    S = _check_prediction(S)
    if S.shape != tgt.P.shape:
        raise ValidationError(
            f"prediction shape {S.shape} != target shape {tgt.P.shape}"
        )
    n = int(np.prod(S.shape[1:]))
    logs = np.log(np.maximum(S, LOG_EPS))
    weighted = tgt.beta.reshape(-1, *([1] * (S.ndim - 1))) * tgt.P * logs
    return float(-weighted.sum() / n)


def image_level_loss(S: np.ndarray, pres: ImagePresence) -> float:
    """Presence terms at each class's most confident pixel.

    t_c is the flat argmax of S over pixels for class c (ties resolve to
    the lowest index); present classes contribute -log S, absent classes
    -log(1 - S), each term set normalized by its size.
    """
    S = _check_prediction(S)
    if not pres.present and not pres.absent:
        raise ValidationError("at least one of present/absent must be non-empty")
    C = S.shape[0]
    if any(c >= C for c in pres.present | pres.absent):
        raise ValidationError("presence class out of range")
    flat = S.reshape(C, -1)
    total = 0.0
    if pres.present:
        acc = 0.0
        for c in sorted(pres.present):
            v = flat[c, int(np.argmax(flat[c]))]
            acc -= np.log(max(v, LOG_EPS))
        total += acc / len(pres.present)
    if pres.absent:
        acc = 0.0
        for c in sorted(pres.absent):
            v = flat[c, int(np.argmax(flat[c]))]
            acc -= np.log(max(1.0 - v, LOG_EPS))
        total += acc / len(pres.absent)
    return float(total)


def total_loss(
    S: np.ndarray,
    pts: PointLabels,
    tgt: ObjectnessTarget,
    pres: ImagePresence,
    weights: LossWeights = LossWeights(),
) -> float:
    return (
        weights.point * point_loss(S, pts)
        + weights.objectness * objectness_loss(S, tgt)
        + weights.image * image_level_loss(S, pres)
    )
