"""Action terms, field-equation residuals, conservation-law diagnostics.

Everything here evaluates closed-form configurations; nothing is solved as a
PDE. The two Euler-Lagrange residuals need top degree four for consistent
form degrees, so static 3D configurations are embedded as w-independent
fields on a thin 4D grid first (see `embed_static_4d`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .forms import (
    ANTISYM,
    SCALAR,
    VECTOR,
    FormField,
    GridSpec,
    antisym_pairs,
    basis_indices,
    covariant_exterior_derivative,
    exterior_derivative,
    grid_integral,
    hodge_star,
    require_coframe,
    require_connection,
    wedge,
    _coeff_shape,
)
from .defects import curvature, torsion
from .geometry import Box, box_integral


@dataclass(frozen=True)
class Couplings:
    """Action moduli. alpha, beta, gamma must be strictly positive."""

    alpha: float
    beta: float
    gamma: float
    kappa_u1: float = 0.0
    lambda_u1: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not (v > 0 and np.isfinite(v)):
                raise ValueError(f"{name} must be strictly positive")
        object.__setattr__(self, "kappa_u1", float(self.kappa_u1))
        object.__setattr__(self, "lambda_u1", float(self.lambda_u1))

    @property
    def Gamma(self) -> float:
        """Curvature-force coupling gamma / alpha."""
        return self.gamma / self.alpha

    @property
    def kappa_el(self) -> float:
        """Spin-balance coupling gamma / (2 beta)."""
        return self.gamma / (2.0 * self.beta)


@dataclass(frozen=True)
class Residual:
    """A residual field together with its interior norms."""

    field: Optional[FormField]
    l2: float
    linf: float
    interior_only: bool = True
    note: str = ""

    def as_record(self, term: str) -> dict:
        return {"term": term, "l2Norm": self.l2, "maxNorm": self.linf,
                "interiorOnly": self.interior_only, "note": self.note}


def interior_mask(grid: GridSpec, boundary_margin: float = 0.0,
                  exclude_tubes=(), margin_axes=None) -> np.ndarray:
    """Cell mask excluding a physical boundary margin and z-aligned core tubes.

    exclude_tubes: iterables of (x, y, radius) in transverse coordinates.
    margin_axes limits the boundary margin to the listed axes; embedded thin
    axes carry exactly w-independent fields, so their one-sided stencils are
    exact and need no margin.
    """
    mask = np.ones(grid.resolution, bool)
    axes = range(grid.dim) if margin_axes is None else margin_axes
    margins = (list(boundary_margin) if np.ndim(boundary_margin) > 0
               else [boundary_margin] * grid.dim)
    for i in axes:
        c = grid.axis_centers(i)
        lo, hi = grid.extents[i]
        keep = (c >= lo + margins[i]) & (c <= hi - margins[i])
        shape = [1] * grid.dim
        shape[i] = -1
        mask &= keep.reshape(shape)
    if exclude_tubes:
        X = grid.axis_centers(0)[:, None]
        Y = grid.axis_centers(1)[None, :]
        keep2d = np.ones((grid.resolution[0], grid.resolution[1]), bool)
        for (cx, cy, rad) in exclude_tubes:
            keep2d &= (X - cx) ** 2 + (Y - cy) ** 2 > rad * rad
        shape = [1] * grid.dim
        shape[0] = grid.resolution[0]
        shape[1] = grid.resolution[1]
        mask &= keep2d.reshape(shape)
    return mask


def field_norms(f: FormField, boundary_margin: float = 0.0,
                exclude_tubes=(), margin_axes=None) -> tuple:
    """(rms, max) of the pointwise component-Euclidean norm over masked cells."""
    mask = interior_mask(f.grid, boundary_margin, exclude_tubes, margin_axes)
    flat = f.coeffs.reshape((-1,) + f.grid.resolution)
    sq = np.zeros(f.grid.resolution)
    for m in range(flat.shape[0]):
        sq += flat[m] * flat[m]
    sel = sq[mask]
    if sel.size == 0:
        raise ValueError("norm mask excludes every cell")
    return float(np.sqrt(np.mean(sel))), float(np.sqrt(np.max(sel)))


def make_residual(f: FormField, boundary_margin: float = 0.0,
                  exclude_tubes=(), note: str = "", margin_axes=None) -> Residual:
    l2, linf = field_norms(f, boundary_margin, exclude_tubes, margin_axes)
    return Residual(field=f, l2=l2, linf=linf,
                    interior_only=bool(np.any(np.asarray(boundary_margin) > 0)
                                       or exclude_tubes),
                    note=note)


# ---------------------------------------------------------------------------
# 4D embedding of static configurations
# ---------------------------------------------------------------------------

def embed_static_4d(e: FormField, omega: FormField, w_cells: int = 4):
    """Extend a static 3D (coframe, connection) pair to a thin 4D grid.

    Fields become w-independent, e^4 = dw and all new connection blocks
    vanish, so 4D diagnostics see the same geometry with consistent degrees.
    """
    require_coframe(e)
    require_connection(omega)
    g3 = e.grid
    if g3.dim != 3:
        raise ValueError("embedding expects 3D input fields")
    hw = min(g3.spacing)
    g4 = GridSpec(tuple(g3.extents) + ((0.0, w_cells * hw),),
                  tuple(g3.resolution) + (w_cells,))

    def lift(arr3):
        return np.broadcast_to(arr3[..., None], arr3.shape + (w_cells,)).copy()

    e4 = np.zeros(_coeff_shape(g4, 1, VECTOR))
    for a in range(3):
        for c in range(3):
            e4[a, c] = lift(e.coeffs[a, c])
    e4[3, 3] = 1.0
    om4 = np.zeros(_coeff_shape(g4, 1, ANTISYM))
    pairs3 = antisym_pairs(3)
    pairs4 = antisym_pairs(4)
    for p3, (a, b) in enumerate(pairs3):
        p4 = pairs4.index((a, b))
        for c in range(3):
            om4[p4, c] = lift(omega.coeffs[p3, c])
    return (FormField(g4, 1, VECTOR, e4), FormField(g4, 1, ANTISYM, om4))


# ---------------------------------------------------------------------------
# action
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionBreakdown:
    torsion_term: FormField
    curvature_term: FormField
    mixed_term: FormField
    torsion_integral: float
    curvature_integral: float
    mixed_integral: float
    mixed_identically_zero: bool

    @property
    def total(self) -> float:
        return self.torsion_integral + self.curvature_integral + self.mixed_integral


def action_density(e: FormField, omega: FormField, c: Couplings) -> ActionBreakdown:
    """Top-degree densities of the three action terms and their integrals.

    In three dimensions the mixed coframe-curvature term is a 4-form and
    vanishes identically; it is reported as an exactly zero density there.
    """
    require_coframe(e)
    require_connection(omega)
    grid = e.grid
    t = torsion(e, omega)
    r = curvature(omega)
    term_t = c.alpha * wedge(t, hodge_star(t), pairing="vector")
    term_r = c.beta * wedge(r, hodge_star(r), pairing="matrix")
    if grid.dim >= 4:
        re = wedge(r, e, pairing="vector")
        term_m = c.gamma * wedge(e, re, pairing="vector")
        mixed_zero = False
    else:
        term_m = FormField.zeros(grid, grid.dim, SCALAR)
        mixed_zero = True
    return ActionBreakdown(
        torsion_term=term_t,
        curvature_term=term_r,
        mixed_term=term_m,
        torsion_integral=grid_integral(term_t),
        curvature_integral=grid_integral(term_r),
        mixed_integral=grid_integral(term_m),
        mixed_identically_zero=mixed_zero,
    )


# ---------------------------------------------------------------------------
# Euler-Lagrange residuals (degree-consistent in 4D)
# ---------------------------------------------------------------------------

def el_coframe_residual(e: FormField, omega: FormField, c: Couplings,
                        boundary_margin: float = 0.0,
                        exclude_tubes=(), margin_axes=None) -> Residual:
    """Residual of the force balance D(*T_a) + Gamma R_ab ^ e^b."""
    require_coframe(e)
    if e.grid.dim != 4:
        raise ValueError("coframe balance residual needs a 4D configuration; "
                         "embed static 3D fields first")
    t = torsion(e, omega)
    r = curvature(omega)
    res = covariant_exterior_derivative(hodge_star(t), omega) \
        + c.Gamma * wedge(r, e, pairing="vector")
    return make_residual(res, boundary_margin, exclude_tubes,
                         note="D(*T) + Gamma R^e", margin_axes=margin_axes)


def el_connection_residual(e: FormField, omega: FormField, c: Couplings,
                           boundary_margin: float = 0.0,
                           exclude_tubes=(), margin_axes=None) -> Residual:
    """Residual of the spin balance D(*R_ab) + kappa (e^a ^ *T_b - e^b ^ *T_a)."""
    require_coframe(e)
    if e.grid.dim != 4:
        raise ValueError("spin balance residual needs a 4D configuration; "
                         "embed static 3D fields first")
    grid = e.grid
    t = torsion(e, omega)
    r = curvature(omega)
    dstar = covariant_exterior_derivative(hodge_star(r), omega)
    st = hodge_star(t)
    n = grid.dim
    k = 1 + st.degree
    ncomp = len(basis_indices(n, k))
    anti = np.zeros((n * (n - 1) // 2, ncomp) + grid.resolution)
    from .forms import _scalar_wedge
    for p, (fa, fb) in enumerate(antisym_pairs(n)):
        anti[p] = _scalar_wedge(grid, 1, st.degree, e.coeffs[fa], st.coeffs[fb]) \
            - _scalar_wedge(grid, 1, st.degree, e.coeffs[fb], st.coeffs[fa])
    res = dstar + c.kappa_el * FormField(grid, k, ANTISYM, anti)
    return make_residual(res, boundary_margin, exclude_tubes,
                         note="D(*R) + kappa (e^*T - e^*T)",
                         margin_axes=margin_axes)


def bianchi_residuals(e: FormField, omega: FormField,
                      boundary_margin: float = 0.0,
                      exclude_tubes=(), margin_axes=None) -> tuple:
    """(D R, D T - R ^ e) residuals; both vanish identically in the continuum."""
    require_coframe(e)
    require_connection(omega)
    t = torsion(e, omega)
    r = curvature(omega)
    dr = covariant_exterior_derivative(r, omega)
    dt = covariant_exterior_derivative(t, omega)
    second = dt - wedge(r, e, pairing="vector")
    return (make_residual(dr, boundary_margin, exclude_tubes, note="D R",
                          margin_axes=margin_axes),
            make_residual(second, boundary_margin, exclude_tubes,
                          note="D T - R^e", margin_axes=margin_axes))


# ---------------------------------------------------------------------------
# U(1) source forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class U1Sources:
    j1: FormField
    j2: Optional[FormField]
    dj1: Optional[Residual]
    dj2: Optional[Residual]
    j2_identically_zero: bool


def u1_sources(e: FormField, omega: FormField, c: Couplings,
               boundary_margin: float = 0.0, exclude_tubes=(),
               margin_axes=None) -> U1Sources:
    """Geometric U(1) sources J1 = kappa T^a ^ e_a and J2 = lambda e^R^e.

    J1 is a 3-form; J2 is a 4-form that vanishes identically in three
    dimensions and is reported as such. Closedness residuals dJ are computed
    where the degree allows (J1 in 4D, never for top-degree forms).
    """
    require_coframe(e)
    require_connection(omega)
    grid = e.grid
    t = torsion(e, omega)
    j1 = c.kappa_u1 * wedge(t, e, pairing="vector")
    if j1.degree < grid.dim:
        dj1 = make_residual(exterior_derivative(j1), boundary_margin,
                            exclude_tubes, note="d J1",
                            margin_axes=margin_axes)
    else:
        dj1 = Residual(field=None, l2=0.0, linf=0.0, interior_only=False,
                       note="J1 has top degree; d J1 vanishes identically")
    if grid.dim >= 4:
        r = curvature(omega)
        j2 = c.lambda_u1 * wedge(e, wedge(r, e, pairing="vector"),
                                 pairing="vector")
        dj2 = Residual(field=None, l2=0.0, linf=0.0, interior_only=False,
                       note="J2 has top degree; d J2 vanishes identically")
        return U1Sources(j1, j2, dj1, dj2, j2_identically_zero=False)
    return U1Sources(j1, None, dj1, None, j2_identically_zero=True)


def u1_flux_balance(j1: FormField, volume: Box) -> float:
    """Net U(1) charge sourced inside a box: the volume integral of J1."""
    if j1.degree != j1.grid.dim or j1.value_type != SCALAR:
        raise ValueError("flux balance needs the top-degree source form")
    return box_integral(j1, volume)
