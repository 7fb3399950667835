"""Parametrized measuring geometry: surfaces, loops and boxes.

Surfaces map the unit parameter square to physical space and expose analytic
tangents; loops map the unit interval. Both are consumed by the midpoint
quadratures in `forms`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _unit(v):
    v = np.asarray(v, float)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero-length axis vector")
    return v / n


def _orthonormal_pair(normal, dim):
    """Two unit vectors spanning the plane orthogonal to `normal`."""
    normal = _unit(normal)
    trial = np.zeros(dim)
    trial[int(np.argmin(np.abs(normal)))] = 1.0
    e1 = trial - np.dot(trial, normal) * normal
    e1 = _unit(e1)
    if dim == 3:
        e2 = np.cross(normal, e1)
    else:
        raise ValueError("normal-based construction requires dim 3")
    return e1, e2


@dataclass(frozen=True)
class Disk:
    """Planar disk, radial parametrization r = u * radius, angle 2*pi*w.

    axes: two orthonormal vectors spanning the disk plane. For the default
    z-normal disk in 3D these are x-hat and y-hat.
    """

    center: tuple
    radius: float
    axes: tuple = None

    def __post_init__(self):
        center = np.asarray(self.center, float)
        if self.radius <= 0:
            raise ValueError("degenerate surface: radius must be positive")
        if self.axes is None:
            if center.shape[0] < 3:
                raise ValueError("default disk axes need dim >= 3")
            e1 = np.zeros(center.shape[0]); e1[0] = 1.0
            e2 = np.zeros(center.shape[0]); e2[1] = 1.0
        else:
            e1, e2 = (_unit(v) for v in self.axes)
            if abs(np.dot(e1, e2)) > 1e-12:
                raise ValueError("disk axes must be orthogonal")
        object.__setattr__(self, "center", tuple(center))
        object.__setattr__(self, "axes", (tuple(e1), tuple(e2)))

    def panel_counts(self, resolution):
        return resolution, resolution

    def points_and_tangents(self, u, w):
        c = np.asarray(self.center)
        e1 = np.asarray(self.axes[0])
        e2 = np.asarray(self.axes[1])
        r = u * self.radius
        ang = 2 * np.pi * w
        cos, sin = np.cos(ang), np.sin(ang)
        radial = np.outer(cos, e1) + np.outer(sin, e2)
        points = c + r[:, None] * radial
        tu = self.radius * radial
        tw = 2 * np.pi * r[:, None] * (np.outer(-sin, e1) + np.outer(cos, e2))
        return points, tu, tw


@dataclass(frozen=True)
class PlanarPatch:
    """Flat parallelogram patch origin + u*span1 + w*span2."""

    origin: tuple
    span1: tuple
    span2: tuple

    def __post_init__(self):
        s1 = np.asarray(self.span1, float)
        s2 = np.asarray(self.span2, float)
        area2 = np.linalg.norm(np.outer(s1, s2) - np.outer(s2, s1))
        if area2 <= 1e-12 * max(np.linalg.norm(s1) * np.linalg.norm(s2), 1e-300):
            raise ValueError("degenerate surface: spans are parallel")
        object.__setattr__(self, "origin", tuple(np.asarray(self.origin, float)))
        object.__setattr__(self, "span1", tuple(s1))
        object.__setattr__(self, "span2", tuple(s2))

    def panel_counts(self, resolution):
        return resolution, resolution

    def points_and_tangents(self, u, w):
        o = np.asarray(self.origin)
        s1 = np.asarray(self.span1)
        s2 = np.asarray(self.span2)
        points = o + np.outer(u, s1) + np.outer(w, s2)
        tu = np.broadcast_to(s1, points.shape).copy()
        tw = np.broadcast_to(s2, points.shape).copy()
        return points, tu, tw


@dataclass(frozen=True)
class ParametricSurface:
    """Generic surface from callables point(u, w) -> (m, dim) and tangents."""

    point_fn: callable
    tangent_u_fn: callable
    tangent_w_fn: callable

    def panel_counts(self, resolution):
        return resolution, resolution

    def points_and_tangents(self, u, w):
        return (np.asarray(self.point_fn(u, w), float),
                np.asarray(self.tangent_u_fn(u, w), float),
                np.asarray(self.tangent_w_fn(u, w), float))


@dataclass(frozen=True)
class Circle:
    """Closed circular loop of given radius in the plane of `axes`."""

    center: tuple
    radius: float
    axes: tuple = None

    def __post_init__(self):
        center = np.asarray(self.center, float)
        if self.radius <= 0:
            raise ValueError("degenerate loop: radius must be positive")
        if self.axes is None:
            e1 = np.zeros(center.shape[0]); e1[0] = 1.0
            e2 = np.zeros(center.shape[0]); e2[1] = 1.0
        else:
            e1, e2 = (_unit(v) for v in self.axes)
        object.__setattr__(self, "center", tuple(center))
        object.__setattr__(self, "axes", (tuple(e1), tuple(e2)))

    def is_closed(self):
        return True

    def points_and_velocity(self, t):
        c = np.asarray(self.center)
        e1 = np.asarray(self.axes[0])
        e2 = np.asarray(self.axes[1])
        ang = 2 * np.pi * t
        cos, sin = np.cos(ang), np.sin(ang)
        points = c + self.radius * (np.outer(cos, e1) + np.outer(sin, e2))
        vel = 2 * np.pi * self.radius * (np.outer(-sin, e1) + np.outer(cos, e2))
        return points, vel


@dataclass(frozen=True)
class ParametricLoop:
    """Closed curve from callables x(t) and x'(t) on t in [0, 1]."""

    point_fn: callable
    velocity_fn: callable
    closure_tol: float = 1e-9

    def is_closed(self):
        p0 = np.asarray(self.point_fn(np.array([0.0])), float)
        p1 = np.asarray(self.point_fn(np.array([1.0])), float)
        scale = max(1.0, float(np.max(np.abs(p0))))
        return bool(np.linalg.norm(p1 - p0) <= self.closure_tol * scale)

    def points_and_velocity(self, t):
        return (np.asarray(self.point_fn(t), float),
                np.asarray(self.velocity_fn(t), float))


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi] used for volume integrals."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = np.asarray(self.lo, float)
        hi = np.asarray(self.hi, float)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("box must satisfy hi > lo on every axis")
        object.__setattr__(self, "lo", tuple(lo))
        object.__setattr__(self, "hi", tuple(hi))

    def inside(self, grid, slack=1e-12):
        for i, (lo, hi) in enumerate(grid.extents):
            if self.lo[i] < lo - slack or self.hi[i] > hi + slack:
                return False
        return True


def box_integral(a, box: Box) -> float:
    """Integral of a scalar top-degree form over a box, cell-overlap weighted.

    Partial boundary cells contribute in proportion to the per-axis overlap
    of the box with the cell, which is exact for fields constant across the
    cut direction and second-order accurate otherwise.
    """
    grid = a.grid
    if a.degree != grid.dim or a.value_type != "scalar":
        raise ValueError("box_integral needs a scalar top-degree form")
    if len(box.lo) != grid.dim:
        raise ValueError("box dimension mismatch")
    if not box.inside(grid):
        raise ValueError("volume exits grid extents")
    weights = []
    for i in range(grid.dim):
        lo, _ = grid.extents[i]
        h = grid.spacing[i]
        c0 = lo + np.arange(grid.resolution[i]) * h
        ov = np.clip(np.minimum(box.hi[i], c0 + h) - np.maximum(box.lo[i], c0),
                     0.0, None)
        weights.append(ov)
    acc = a.coeffs[0]
    for i, wt in enumerate(weights):
        shape = [1] * grid.dim
        shape[i] = -1
        acc = acc * wt.reshape(shape)
    return float(np.sum(acc))
