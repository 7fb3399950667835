"""Exterior calculus on regular grids.

k-form fields live on cell-centered regular grids in dimension 2, 3 or 4.
Coefficients may be plain scalars, frame-vector valued (one set per frame
index a = 1..n) or antisymmetric-frame-matrix valued (stored lower triangle,
reflected on read, so c[a][b] == -c[b][a] holds exactly).

All fields are immutable after construction; every operation returns a new
field and is safe to evaluate concurrently.

Conventions:
  * basis components in lexicographic multi-index order
    (dx^dy before dx^dz before dy^dz, ...), frame index outermost
  * orientation is right-handed with positive volume form dx^dy^dz(^dw)
  * exterior derivative: centered second-order differences in the interior,
    first-order one-sided on boundary faces
  * Hodge star: Euclidean flat metric
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

SCALAR = "scalar"
VECTOR = "vector"
ANTISYM = "antisym"

AXIS_NAMES = ("x", "y", "z", "w")


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Cell-centered regular grid: per-axis [min, max] extents and cell counts."""

    extents: tuple
    resolution: tuple

    def __post_init__(self):
        extents = tuple((float(lo), float(hi)) for lo, hi in self.extents)
        resolution = tuple(int(n) for n in self.resolution)
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "resolution", resolution)
        if len(extents) != len(resolution):
            raise ValueError("extents and resolution must have equal length")
        if self.dim not in (2, 3, 4):
            raise ValueError(f"dimension must be 2, 3 or 4, got {self.dim}")
        for (lo, hi), n in zip(extents, resolution):
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ValueError(f"extent [{lo}, {hi}] must have positive length")
            if n < 4:
                raise ValueError(f"resolution {n} < 4")

    @property
    def dim(self) -> int:
        return len(self.extents)

    @property
    def spacing(self) -> tuple:
        return tuple((hi - lo) / n for (lo, hi), n in zip(self.extents, self.resolution))

    def axis_centers(self, i: int) -> np.ndarray:
        lo, hi = self.extents[i]
        h = (hi - lo) / self.resolution[i]
        return lo + (np.arange(self.resolution[i]) + 0.5) * h

    def meshgrid(self) -> tuple:
        axes = [self.axis_centers(i) for i in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def cell_volume(self) -> float:
        v = 1.0
        for h in self.spacing:
            v *= h
        return v

    def contains(self, points: np.ndarray, slack: float = 0.0) -> np.ndarray:
        """Boolean mask of points lying inside the extents (with optional slack)."""
        points = np.asarray(points, float)
        ok = np.ones(points.shape[:-1], bool)
        for i, (lo, hi) in enumerate(self.extents):
            ok &= (points[..., i] >= lo - slack) & (points[..., i] <= hi + slack)
        return ok

    def refined(self, factor: int) -> "GridSpec":
        return GridSpec(self.extents, tuple(n * factor for n in self.resolution))


# ---------------------------------------------------------------------------
# multi-index tables
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def basis_indices(dim: int, degree: int) -> tuple:
    """Sorted multi-indices of the k-form basis, lexicographic order."""
    return tuple(itertools.combinations(range(dim), degree))

@lru_cache(maxsize=None)
def antisym_pairs(n: int) -> tuple:
    """Lower-triangle frame index pairs (a, b) with a > b, row-lex order."""
    return tuple((a, b) for a in range(n) for b in range(a))


def _merge_sign(I: tuple, J: tuple):
    """Sign of sorting the concatenation of two disjoint sorted multi-indices."""
    inv = sum(1 for i in I for j in J if i > j)
    return tuple(sorted(I + J)), (-1) ** inv

@lru_cache(maxsize=None)
def _wedge_plan(dim: int, ka: int, kb: int) -> tuple:
    """Accumulation plan for the scalar wedge of a k_a and a k_b form.

    Contributions are ordered by a key intrinsic to the component pair (not
    to operand position), and mirrored pairs of equal-degree operands are
    fused into a single floating-point expression. That makes graded
    commutativity wedge(a, b) == (-1)^(ka kb) wedge(b, a) hold bit-exactly.
    """
    aidx = basis_indices(dim, ka)
    bidx = basis_indices(dim, kb)
    out = {K: i for i, K in enumerate(basis_indices(dim, ka + kb))}
    if ka == kb:
        rows = []
        for ia, I in enumerate(aidx):
            for ib, J in enumerate(bidx):
                if ib < ia or (set(I) & set(J)):
                    continue
                K, s1 = _merge_sign(I, J)
                s2 = s1 * (-1) ** (ka * kb)
                rows.append((ia, ib, out[K], s1, s2))
        rows.sort(key=lambda t: (t[2], t[0], t[1]))
        return ("sym", tuple(rows))
    rows = []
    for ia, I in enumerate(aidx):
        for ib, J in enumerate(bidx):
            if set(I) & set(J):
                continue
            K, sign = _merge_sign(I, J)
            low = ia if ka < kb else ib
            rows.append((ia, ib, out[K], sign, low))
    rows.sort(key=lambda t: (t[2], t[4]))
    return ("gen", tuple((ia, ib, io, s) for ia, ib, io, s, _ in rows))

@lru_cache(maxsize=None)
def _hodge_table(dim: int, degree: int) -> tuple:
    """(iout, sign) for each input component: *dx^I = sign dx^(complement I)."""
    out = {K: i for i, K in enumerate(basis_indices(dim, dim - degree))}
    table = []
    for I in basis_indices(dim, degree):
        J = tuple(i for i in range(dim) if i not in I)
        _, sign = _merge_sign(I, J)
        table.append((out[J], sign))
    return tuple(table)


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

class FormField:
    """A k-form field over a GridSpec.

    coefficients layout (C-order float64, frame index outermost):
      scalar  -> (ncomp, *resolution)
      vector  -> (n, ncomp, *resolution)
      antisym -> (n(n-1)/2, ncomp, *resolution), lower-triangle pairs
    with ncomp = C(dim, k).
    """

    __slots__ = ("grid", "degree", "value_type", "coeffs", "_spline_cache")

    def __init__(self, grid: GridSpec, degree: int, value_type: str, coeffs: np.ndarray):
        if not 0 <= degree <= grid.dim:
            raise ValueError(f"degree {degree} out of range for dim {grid.dim}")
        if value_type not in (SCALAR, VECTOR, ANTISYM):
            raise ValueError(f"unknown value type {value_type!r}")
        shape = _coeff_shape(grid, degree, value_type)
        coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
        if coeffs.shape != shape:
            raise ValueError(f"coefficient shape {coeffs.shape} != expected {shape}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("non-finite coefficients")
        coeffs.setflags(write=False)
        self.grid = grid
        self.degree = degree
        self.value_type = value_type
        self.coeffs = coeffs
        self._spline_cache = {}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, grid: GridSpec, degree: int, value_type: str = SCALAR) -> "FormField":
        return cls(grid, degree, value_type, np.zeros(_coeff_shape(grid, degree, value_type)))

    # -- component access ---------------------------------------------------

    @property
    def n_frame(self) -> int:
        return self.grid.dim

    @property
    def components(self) -> tuple:
        return basis_indices(self.grid.dim, self.degree)

    def component(self, multi_index, frame=None) -> np.ndarray:
        """Coefficient array of one basis component (and frame slot)."""
        ci = self.components.index(tuple(multi_index))
        if self.value_type == SCALAR:
            if frame is not None:
                raise ValueError("scalar field has no frame index")
            return self.coeffs[ci]
        if self.value_type == VECTOR:
            return self.coeffs[int(frame), ci]
        a, b = frame
        arr, sign = self._antisym_slot(a, b)
        return sign * arr[ci] if sign else np.zeros(self.grid.resolution)

    def frame_block(self, a: int, b: int = None) -> np.ndarray:
        """All basis components of one frame slot, sign-reflected for antisym."""
        if self.value_type == VECTOR:
            return self.coeffs[a]
        if self.value_type == ANTISYM:
            arr, sign = self._antisym_slot(a, b)
            if sign == 0:
                return np.zeros(self.coeffs.shape[1:])
            return arr if sign == 1 else -arr
        raise ValueError("frame_block needs a framed field")

    def _antisym_slot(self, a: int, b: int):
        if a == b:
            return None, 0
        pairs = antisym_pairs(self.n_frame)
        if a > b:
            return self.coeffs[pairs.index((a, b))], 1
        return self.coeffs[pairs.index((b, a))], -1

    # -- arithmetic (pure, grid/degree/type must match) ----------------------

    def _like(self, coeffs) -> "FormField":
        return FormField(self.grid, self.degree, self.value_type, coeffs)

    def __add__(self, other: "FormField") -> "FormField":
        self._check_same(other)
        return self._like(self.coeffs + other.coeffs)

    def __sub__(self, other: "FormField") -> "FormField":
        self._check_same(other)
        return self._like(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "FormField":
        return self._like(self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "FormField":
        return self._like(-self.coeffs)

    def _check_same(self, other):
        if not isinstance(other, FormField):
            raise TypeError("expected FormField")
        if other.grid != self.grid or other.degree != self.degree \
                or other.value_type != self.value_type:
            raise ValueError("field mismatch (grid/degree/value type)")

    # -- point sampling ------------------------------------------------------

    def sample(self, points: np.ndarray, order: int = 5) -> np.ndarray:
        """Spline-interpolated coefficients at physical points.

        Returns an array of shape coeffs.shape[:-dim] + points.shape[:-1].
        Order 5 needs at least 6 cells per axis; it falls back to 3 below that.
        """
        points = np.asarray(points, float)
        if points.shape[-1] != self.grid.dim:
            raise ValueError("point dimension mismatch")
        if order > 3 and min(self.grid.resolution) < order + 1:
            order = 3
        idx = np.empty((self.grid.dim,) + points.shape[:-1])
        for i, h in enumerate(self.grid.spacing):
            idx[i] = (points[..., i] - self.grid.extents[i][0]) / h - 0.5
        flat = self.coeffs.reshape((-1,) + self.grid.resolution)
        key = order
        if key not in self._spline_cache:
            if order > 1:
                filt = np.stack([
                    ndimage.spline_filter(flat[m], order=order, mode="mirror")
                    for m in range(flat.shape[0])
                ])
            else:
                filt = flat
            self._spline_cache[key] = filt
        filt = self._spline_cache[key]
        out = np.stack([
            ndimage.map_coordinates(filt[m], idx, order=order, mode="mirror",
                                    prefilter=False)
            for m in range(flat.shape[0])
        ])
        return out.reshape(self.coeffs.shape[: self.coeffs.ndim - self.grid.dim]
                           + points.shape[:-1])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0


def _coeff_shape(grid: GridSpec, degree: int, value_type: str) -> tuple:
    ncomp = len(basis_indices(grid.dim, degree))
    if value_type == SCALAR:
        lead = (ncomp,)
    elif value_type == VECTOR:
        lead = (grid.dim, ncomp)
    else:
        lead = (grid.dim * (grid.dim - 1) // 2, ncomp)
    return lead + grid.resolution


def identity_coframe(grid: GridSpec) -> FormField:
    """The trivial coframe e^a = dx^a."""
    coeffs = np.zeros(_coeff_shape(grid, 1, VECTOR))
    for a in range(grid.dim):
        coeffs[a, a] = 1.0
    return FormField(grid, 1, VECTOR, coeffs)


def zero_connection(grid: GridSpec) -> FormField:
    """Vanishing so(n)-valued connection 1-form."""
    return FormField.zeros(grid, 1, ANTISYM)


def require_connection(omega: FormField) -> FormField:
    if omega.degree != 1 or omega.value_type != ANTISYM:
        raise ValueError("connection must be an antisymmetric-matrix-valued 1-form")
    return omega


def require_coframe(e: FormField) -> FormField:
    if e.degree != 1 or e.value_type != VECTOR:
        raise ValueError("coframe must be a frame-vector-valued 1-form")
    return e


# ---------------------------------------------------------------------------
# algebraic operations
# ---------------------------------------------------------------------------

def _scalar_wedge(grid, ka, kb, A, B):
    """Wedge of plain component stacks A: (Ca, *res), B: (Cb, *res)."""
    out = np.zeros((len(basis_indices(grid.dim, ka + kb)),) + grid.resolution)
    kind, rows = _wedge_plan(grid.dim, ka, kb)
    if kind == "sym":
        for ia, ib, io, s1, s2 in rows:
            if ia == ib:
                out[io] += s1 * (A[ia] * B[ib])
            else:
                out[io] += s1 * (A[ia] * B[ib]) + s2 * (A[ib] * B[ia])
    else:
        for ia, ib, io, sign in rows:
            if sign == 1:
                out[io] += A[ia] * B[ib]
            else:
                out[io] -= A[ia] * B[ib]
    return out


def wedge(a: FormField, b: FormField, pairing: str = "none") -> FormField:
    """Pointwise wedge product with caller-chosen frame-index pairing.

    pairing:
      "none"   at most one operand framed; plain graded product
      "vector" (matrix, vector) -> vector : sum_b M_ab ^ v_b
               (vector, matrix) -> vector : sum_a v_a ^ M_ab
               (vector, vector) -> scalar : sum_a v_a ^ w_a
      "matrix" (matrix, matrix) -> scalar : sum_ab M_ab ^ N_ba
    """
    if a.grid != b.grid:
        raise ValueError("grid mismatch")
    grid = a.grid
    k = a.degree + b.degree
    if k > grid.dim:
        raise ValueError(f"wedge degree {k} exceeds dimension {grid.dim}")
    n = grid.dim
    ncomp = len(basis_indices(n, k))

    def sw(A, B):
        return _scalar_wedge(grid, a.degree, b.degree, A, B)

    if pairing == "none":
        if a.value_type == SCALAR and b.value_type == SCALAR:
            return FormField(grid, k, SCALAR, sw(a.coeffs, b.coeffs))
        if a.value_type == SCALAR and b.value_type != SCALAR:
            out = np.stack([sw(a.coeffs, b.coeffs[m]) for m in range(b.coeffs.shape[0])])
            return FormField(grid, k, b.value_type, out)
        if b.value_type == SCALAR and a.value_type != SCALAR:
            out = np.stack([sw(a.coeffs[m], b.coeffs) for m in range(a.coeffs.shape[0])])
            return FormField(grid, k, a.value_type, out)
        raise ValueError("pairing 'none' needs at most one framed operand")

    if pairing == "vector":
        if a.value_type == ANTISYM and b.value_type == VECTOR:
            out = np.zeros((n, ncomp) + grid.resolution)
            for fa in range(n):
                for fb in range(n):
                    if fa == fb:
                        continue
                    out[fa] += sw(a.frame_block(fa, fb), b.coeffs[fb])
            return FormField(grid, k, VECTOR, out)
        if a.value_type == VECTOR and b.value_type == ANTISYM:
            out = np.zeros((n, ncomp) + grid.resolution)
            for fb in range(n):
                for fa in range(n):
                    if fa == fb:
                        continue
                    out[fb] += sw(a.coeffs[fa], b.frame_block(fa, fb))
            return FormField(grid, k, VECTOR, out)
        if a.value_type == VECTOR and b.value_type == VECTOR:
            out = np.zeros((ncomp,) + grid.resolution)
            for fa in range(n):
                out += sw(a.coeffs[fa], b.coeffs[fa])
            return FormField(grid, k, SCALAR, out)
        raise ValueError("pairing 'vector' needs (matrix,vector), (vector,matrix) "
                         "or (vector,vector) operands")

    if pairing == "matrix":
        if a.value_type == ANTISYM and b.value_type == ANTISYM:
            out = np.zeros((ncomp,) + grid.resolution)
            for fa in range(n):
                for fb in range(n):
                    if fa == fb:
                        continue
                    out += sw(a.frame_block(fa, fb), b.frame_block(fb, fa))
            return FormField(grid, k, SCALAR, out)
        raise ValueError("pairing 'matrix' needs two matrix-valued operands")

    raise ValueError(f"unknown pairing {pairing!r}")


def antisym_matmul(a: FormField, b: FormField) -> FormField:
    """(a ^ b)_ab = sum_c a_ac ^ b_cb for antisym operands, lower triangle direct.

    The result is stored as antisymmetric; that is exact for a ^ a and for
    commutator combinations, which are the only uses in this library.
    """
    if a.value_type != ANTISYM or b.value_type != ANTISYM:
        raise ValueError("antisym_matmul needs matrix-valued operands")
    if a.grid != b.grid:
        raise ValueError("grid mismatch")
    grid = a.grid
    k = a.degree + b.degree
    if k > grid.dim:
        raise ValueError("degree overflow")
    n = grid.dim
    ncomp = len(basis_indices(n, k))
    out = np.zeros((n * (n - 1) // 2, ncomp) + grid.resolution)
    for p, (fa, fb) in enumerate(antisym_pairs(n)):
        for fc in range(n):
            if fc == fa or fc == fb:
                continue
            out[p] += _scalar_wedge(grid, a.degree, b.degree,
                                    a.frame_block(fa, fc), b.frame_block(fc, fb))
    return FormField(grid, k, ANTISYM, out)


def exterior_derivative(a: FormField) -> FormField:
    """Finite-difference exterior derivative d.

    Exact for per-axis polynomial coefficients of degree <= 2 in the interior.
    Raising degree above the grid dimension is misuse and raises.
    """
    grid = a.grid
    if a.degree == grid.dim:
        raise ValueError("d of a top-degree form leaves the form algebra; "
                         "there is no degree dim+1")
    k = a.degree
    in_idx = {I: i for i, I in enumerate(basis_indices(grid.dim, k))}
    out_components = basis_indices(grid.dim, k + 1)
    flat = a.coeffs.reshape((-1, len(in_idx)) + grid.resolution)
    nlead = flat.shape[0]
    out = np.zeros((nlead, len(out_components)) + grid.resolution)
    h = grid.spacing
    for io, K in enumerate(out_components):
        for pos, j in enumerate(K):
            rest = K[:pos] + K[pos + 1:]
            sign = (-1) ** pos
            src = flat[:, in_idx[rest]]
            grad = np.gradient(src, h[j], axis=1 + j, edge_order=1)
            if sign == 1:
                out[:, io] += grad
            else:
                out[:, io] -= grad
    shape = _coeff_shape(grid, k + 1, a.value_type)
    return FormField(grid, k + 1, a.value_type, out.reshape(shape))


def hodge_star(a: FormField) -> FormField:
    """Euclidean Hodge dual; orientation dx^dy^dz(^dw) positive."""
    grid = a.grid
    table = _hodge_table(grid.dim, a.degree)
    flat = a.coeffs.reshape((-1, len(table)) + grid.resolution)
    out = np.zeros_like(flat)
    for ii, (io, sign) in enumerate(table):
        out[:, io] = sign * flat[:, ii]
    shape = _coeff_shape(grid, grid.dim - a.degree, a.value_type)
    return FormField(grid, grid.dim - a.degree, a.value_type, out.reshape(shape))


def interior_product(v: np.ndarray, a: FormField) -> FormField:
    """Contraction with a vector field v (constant (dim,) or (dim, *res) array)."""
    grid = a.grid
    if a.degree == 0:
        raise ValueError("interior product of a 0-form is undefined")
    v = np.asarray(v, float)
    if v.shape != (grid.dim,) and v.shape != (grid.dim,) + grid.resolution:
        raise ValueError("vector field shape mismatch")
    comps = [np.broadcast_to(v[j], grid.resolution) for j in range(grid.dim)]
    in_idx = {I: i for i, I in enumerate(basis_indices(grid.dim, a.degree))}
    out_components = basis_indices(grid.dim, a.degree - 1)
    flat = a.coeffs.reshape((-1, len(in_idx)) + grid.resolution)
    out = np.zeros((flat.shape[0], len(out_components)) + grid.resolution)
    for io, K in enumerate(out_components):
        for j in range(grid.dim):
            if j in K:
                continue
            I, _ = _merge_sign(K, (j,))
            pos = I.index(j)
            term = comps[j] * flat[:, in_idx[I]]
            if pos % 2 == 0:
                out[:, io] += term
            else:
                out[:, io] -= term
    shape = _coeff_shape(grid, a.degree - 1, a.value_type)
    return FormField(grid, a.degree - 1, a.value_type, out.reshape(shape))


def covariant_exterior_derivative(a: FormField, omega: FormField) -> FormField:
    """D a = d a + omega-action, for frame-vector or antisym-matrix fields.

    vector:  (Da)_a = da_a + sum_b omega_ab ^ a_b
    matrix:  (Da)_ab = da_ab + sum_c (omega_ac ^ a_cb - a_ac ^ omega_cb)
    """
    require_connection(omega)
    if a.grid != omega.grid:
        raise ValueError("grid mismatch")
    if a.value_type == SCALAR:
        raise ValueError("covariant derivative needs a framed field "
                         "(no frame index to act on)")
    d = exterior_derivative(a)
    if a.value_type == VECTOR:
        return d + wedge(omega, a, pairing="vector")
    grid = a.grid
    n = grid.dim
    k = a.degree + 1
    ncomp = len(basis_indices(n, k))
    out = np.zeros((n * (n - 1) // 2, ncomp) + grid.resolution)
    for p, (fa, fb) in enumerate(antisym_pairs(n)):
        for fc in range(n):
            acc = None
            if fc != fa:
                acc = _scalar_wedge(grid, 1, a.degree,
                                    omega.frame_block(fa, fc), a.frame_block(fc, fb))
                out[p] += acc
            if fc != fb:
                out[p] -= _scalar_wedge(grid, a.degree, 1,
                                        a.frame_block(fa, fc), omega.frame_block(fc, fb))
    comm = FormField(grid, k, ANTISYM, out)
    return d + comm


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def integrate_surface(a: FormField, surface, resolution: int = 256,
                      order: int = 5):
    """Midpoint-rule integral of a 2-form over a parametrized surface.

    The surface provides sample points and analytic tangents on the unit
    parameter square (see geometry module). Scalar fields return a float,
    frame-vector fields an (n,) array and matrix fields an (n, n)
    antisymmetric array.
    """
    if a.degree != 2:
        raise ValueError("surface integration needs a 2-form")
    nu, nw = surface.panel_counts(resolution)
    u = (np.arange(nu) + 0.5) / nu
    w = (np.arange(nw) + 0.5) / nw
    U, W = np.meshgrid(u, w, indexing="ij")
    points, tu, tw = surface.points_and_tangents(U.ravel(), W.ravel())
    if not np.all(a.grid.contains(points, slack=1e-12)):
        raise ValueError("surface exits grid extents")
    tu = np.asarray(tu)
    tw = np.asarray(tw)
    vals = a.sample(points, order=order)
    comps = a.components
    jac = np.zeros((len(comps), points.shape[0]))
    for ic, (i, j) in enumerate(comps):
        jac[ic] = tu[:, i] * tw[:, j] - tu[:, j] * tw[:, i]
    dens = np.einsum("...cp,cp->...p", vals.reshape((-1, len(comps), points.shape[0])),
                     jac)
    total = dens.sum(axis=-1) / (nu * nw)
    if a.value_type == SCALAR:
        return float(total[0])
    if a.value_type == VECTOR:
        return total.reshape(a.grid.dim)
    n = a.grid.dim
    mat = np.zeros((n, n))
    for p, (fa, fb) in enumerate(antisym_pairs(n)):
        mat[fa, fb] = total[p]
        mat[fb, fa] = -total[p]
    return mat


def integrate_loop(a: FormField, loop, resolution: int = 512, order: int = 5):
    """Midpoint-rule integral of a 1-form over one period of a closed curve."""
    if a.degree != 1:
        raise ValueError("loop integration needs a 1-form")
    if not loop.is_closed():
        raise ValueError("curve is not closed")
    t = (np.arange(resolution) + 0.5) / resolution
    points, vel = loop.points_and_velocity(t)
    if not np.all(a.grid.contains(points, slack=1e-12)):
        raise ValueError("loop exits grid extents")
    vals = a.sample(points, order=order)
    dens = np.einsum("...cp,pc->...p",
                     vals.reshape((-1, a.grid.dim, points.shape[0])), vel)
    total = dens.sum(axis=-1) / resolution
    if a.value_type == SCALAR:
        return float(total[0])
    if a.value_type == VECTOR:
        return total.reshape(a.grid.dim)
    n = a.grid.dim
    mat = np.zeros((n, n))
    for p, (fa, fb) in enumerate(antisym_pairs(n)):
        mat[fa, fb] = total[p]
        mat[fb, fa] = -total[p]
    return mat


def grid_integral(a: FormField) -> float:
    """Integral of a top-degree scalar form over the whole grid."""
    if a.degree != a.grid.dim or a.value_type != SCALAR:
        raise ValueError("grid_integral needs a scalar top-degree form")
    return float(np.sum(a.coeffs[0]) * a.grid.cell_volume())
