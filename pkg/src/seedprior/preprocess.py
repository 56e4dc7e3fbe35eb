"""Intensity conditioning applied before objectness generation.

All operations expect intensities already normalized to [0, 1]
(see :func:`seedprior.grid.normalize_intensity`) and return new Grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import Grid


@dataclass(frozen=True)
class DiffusionParams:
    """Explicit edge-preserving diffusion settings.

    ``kappa`` is the edge threshold on normalized intensities; ``step`` the
    explicit time step, bounded at apply time by 1/(number of face
    neighbors) for stability. Defaults are conservative smoothing for
    [0, 1] microscopy intensities.
    """

    kappa: float = 0.05
    step: float = 0.15
    iterations: int = 10

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValidationError(f"kappa must be positive, got {self.kappa}")
        if not 0 < self.step <= 0.5:
            raise ValidationError(f"step must be in (0, 0.5], got {self.step}")
        if self.iterations < 0 or int(self.iterations) != self.iterations:
            raise ValidationError(
                f"iterations must be a non-negative integer, got {self.iterations}"
            )


def anisotropic_diffusion(g: Grid, params: DiffusionParams = DiffusionParams()) -> Grid:
    """Edge-preserving smoothing: explicit scheme with exponential conductance.

    Per iteration each value moves by ``step * sum_q g(|dq|) * dq`` over its
    face neighbors q, with ``dq = v_q - v`` and conductance
    ``g(s) = exp(-(s/kappa)**2)``. Channels diffuse independently; there is
    no flux across the image border, so the per-channel mean is conserved.
    Updates are simultaneous (Jacobi) within an iteration.
    """
    max_neighbors = 2 * g.rank
    if params.step > 1.0 / max_neighbors + 1e-12:
        raise ValidationError(
            f"step {params.step} violates stability bound 1/{max_neighbors} "
            f"for a rank-{g.rank} grid"
        )
    v = np.array(g.data)
    inv_k2 = 1.0 / (params.kappa * params.kappa)
    for _ in range(int(params.iterations)):
        update = np.zeros_like(v)
        for axis in range(1, v.ndim):
            d = np.diff(v, axis=axis)
            flux = np.exp(-(d * d) * inv_k2) * d
            lo = [slice(None)] * v.ndim
            hi = [slice(None)] * v.ndim
            lo[axis] = slice(0, -1)
            hi[axis] = slice(1, None)
            # antisymmetric flux: the low-index side of each in-bounds pair
            # gains what the high-index side loses
            update[tuple(lo)] += flux
            update[tuple(hi)] -= flux
        v += params.step * update
    return Grid(v)


def histogram_equalize(g: Grid) -> Grid:
    """Global 256-bin histogram equalization, per channel.

    Each value maps to the empirical CDF of its bin, so the mapping is
    monotone non-decreasing and the output stays in [0, 1].
    """
    out = np.empty_like(g.data)
    n = g.n_pixels
    for c in range(g.channels):
        v = g.data[c]
        bins = np.clip((v * 256.0).astype(np.int64), 0, 255)
        hist = np.bincount(bins.ravel(), minlength=256)
        cdf = np.cumsum(hist) / float(n)
        out[c] = cdf[bins]
    return Grid(out)


def channel_normalize(g: Grid, target_mean, target_std) -> Grid:
    """Shift/scale each channel to target statistics, then clamp to [0, 1].

    A zero-variance channel is mean-shifted only. Stand-in for stain
    normalization when a full stain-separation method is unavailable.
    """
    tm = np.asarray(target_mean, dtype=np.float64).ravel()
    ts = np.asarray(target_std, dtype=np.float64).ravel()
    if tm.size != g.channels or ts.size != g.channels:
        raise ValidationError(
            f"target statistics must have one entry per channel "
            f"({g.channels}), got means={tm.size} stds={ts.size}"
        )
    if (ts <= 0).any():
        raise ValidationError("target stds must be positive")
    out = np.empty_like(g.data)
    for c in range(g.channels):
        v = g.data[c]
        mu = v.mean()
        sd = v.std()
        # a constant channel's std is rounding noise, not signal; rescaling
        # by it would amplify that noise to the full target std
        if sd < 1e-12:
            out[c] = v - mu + tm[c]
        else:
            out[c] = (v - mu) / sd * ts[c] + tm[c]
    return Grid(np.clip(out, 0.0, 1.0))
