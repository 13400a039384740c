"""Synthetic point clouds.

Every generator returns ``(points, color)`` where ``color`` is a per-point
scalar (a manifold coordinate) or an integer label for ``blobs``.
"""

from __future__ import annotations

import numpy as np

from ._errors import InvalidParameterError

__all__ = ["GENERATORS", "generate_dataset", "hemisphere", "torus", "swiss_hole", "blobs"]

SWISS_T = (1.5 * np.pi, 4.5 * np.pi)
SWISS_HEIGHT = (0.0, 21.0)
SWISS_HOLE_T = (2.7 * np.pi, 3.3 * np.pi)
SWISS_HOLE_HEIGHT = (8.0, 13.0)


def hemisphere(n, seed=0):
    """Unit upper hemisphere, denser at the pole.

    The polar angle is uniform on ``[0, pi/2]``, so the area density grows
    like ``1 / sin(theta)`` towards the top.  Colour is the polar angle.
    """
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, np.pi / 2, n)
    phi = rng.uniform(0.0, 2 * np.pi, n)
    st = np.sin(theta)
    x = np.column_stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])
    return x, theta


def torus(n, seed=0, R=2.0, r=0.7):
    """Torus with uniformly sampled angles; colour is the tube angle."""
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, 2 * np.pi, n)
    v = rng.uniform(0.0, 2 * np.pi, n)
    ring = R + r * np.cos(v)
    x = np.column_stack([ring * np.cos(u), ring * np.sin(u), r * np.sin(v)])
    return x, u


def swiss_hole(n, seed=0):
    """Swiss roll with a rectangular hole cut from the parameter domain.

    Parameters ``(t, h)`` are drawn uniformly and rejected inside the hole
    until ``n`` points remain; colour is ``t``.
    """
    rng = np.random.default_rng(seed)
    t_parts, h_parts = [], []
    have = 0
    while have < n:
        t = rng.uniform(*SWISS_T, 2 * n)
        h = rng.uniform(*SWISS_HEIGHT, 2 * n)
        hole = (t > SWISS_HOLE_T[0]) & (t < SWISS_HOLE_T[1]) & (h > SWISS_HOLE_HEIGHT[0]) & (h < SWISS_HOLE_HEIGHT[1])
        t_parts.append(t[~hole])
        h_parts.append(h[~hole])
        have += int((~hole).sum())
    t = np.concatenate(t_parts)[:n]
    h = np.concatenate(h_parts)[:n]
    x = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
    return x, t


def blobs(n, seed=0, centers=None, c=3, dim=2, spread=1.0, separation=2.0):
    """Isotropic Gaussian clusters; colour is the integer cluster label.

    Without explicit ``centers`` the first ``c`` centres are placed on a
    scalene triangle (or random positions for ``c > 3``) scaled by
    ``separation``, so pairwise centre distances are all distinct.
    """
    rng = np.random.default_rng(seed)
    if centers is None:
        if c <= 3:
            base = np.array([[0.0, 0.0], [3.0, 0.0], [1.0, 2.0]])[:c]
        else:
            base = rng.uniform(-2.0, 2.0, (c, 2))
        centers = np.zeros((c, dim))
        centers[:, : min(2, dim)] = base[:, : min(2, dim)]
        centers *= separation
    centers = np.asarray(centers, dtype=np.float64)
    c = centers.shape[0]
    labels = np.arange(n) % c
    x = centers[labels] + spread * rng.standard_normal((n, centers.shape[1]))
    return x, labels


GENERATORS = {
    "hemisphere": hemisphere,
    "torus": torus,
    "swisshole": swiss_hole,
    "swiss_hole": swiss_hole,
    "blobs": blobs,
}


def generate_dataset(name, n, seed=0, **params):
    """Generate a named synthetic dataset (``hemisphere``, ``torus``, ``swisshole``, ``blobs``)."""
    try:
        gen = GENERATORS[str(name).lower()]
    except KeyError:
        raise InvalidParameterError(f"unknown dataset {name!r}") from None
    if n < 10:
        raise InvalidParameterError("datasets need n >= 10")
    return gen(n, seed=seed, **params)
