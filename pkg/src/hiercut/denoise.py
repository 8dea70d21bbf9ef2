"""Grayscale denoising / inpainting as a grid MRF.

Labels are the intensities {0, stride, 2*stride, ...} up to 255; the unary
cost of assigning intensity v to a pixel with observation o is (v - o)^2,
or 0 for every label on masked (missing) pixels; neighbouring pixels pay
kappa * min(|v_i - v_j|, trunc).
"""

import numpy as np

from .distances import MatrixDistance
from .moves import ab_swap, alpha_expansion
from .mrf import MrfInstance, energy, grid_edges
from .solver import SolveConfig, solve


def label_values(stride=1):
    stride = int(stride)
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return np.arange(0, 256, stride, dtype=np.int64)


def build_instance(image, mask=None, kappa=30.0, trunc=50.0, stride=1):
    """Returns (instance, values) where values[k] is label k's intensity."""
    img = np.asarray(image)
    if img.ndim != 2:
        raise ValueError("image must be 2-d")
    if img.size == 0:
        raise ValueError("image is empty")
    if float(kappa) < 0:
        raise ValueError("kappa must be >= 0")
    if float(trunc) <= 0:
        raise ValueError("trunc must be > 0")
    missing = None
    if mask is not None:
        mask = np.asarray(mask)
        if mask.shape != img.shape:
            raise ValueError(f"mask shape {mask.shape} does not match image "
                             f"shape {img.shape}")
        missing = mask != 0

    values = label_values(stride)
    obs = img.reshape(-1).astype(np.float64)
    unary = (values[None, :].astype(np.float64) - obs[:, None]) ** 2
    if missing is not None:
        unary[missing.reshape(-1)] = 0.0

    rows, cols = img.shape
    edges = grid_edges(rows, cols)
    weights = np.full(len(edges), float(kappa))
    v = values.astype(np.float64)
    dist = MatrixDistance(np.minimum(np.abs(v[:, None] - v[None, :]), float(trunc)))
    return MrfInstance(unary, edges, weights, dist), values


def denoise(image, mask=None, kappa=30.0, trunc=50.0, stride=1,
            algorithm="ours", config=None):
    """Returns (denoised uint8 image, energy of the chosen labeling)."""
    instance, values = build_instance(image, mask, kappa, trunc, stride)
    cfg = config if config is not None else SolveConfig()
    if algorithm == "ours":
        rep = solve(instance, cfg)
        lab = rep.labeling
    elif algorithm == "alpha-exp":
        lab, _ = alpha_expansion(instance, np.zeros(instance.n_vars, np.int64))
    elif algorithm == "ab-swap":
        lab, _ = ab_swap(instance, np.zeros(instance.n_vars, np.int64))
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    out = values[lab].astype(np.uint8).reshape(np.asarray(image).shape)
    return out, float(energy(instance, lab))
