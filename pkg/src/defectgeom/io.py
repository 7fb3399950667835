"""Structured-grid field serialization.

Binary format, one file per field:
  magic "DGFF0001", little-endian uint64 header length, UTF-8 JSON header
  (dim, degree, valueType, extents, resolution, component and frame order),
  then the coefficient arrays as C-order little-endian float64, frame index
  outermost, basis components in lexicographic multi-index order.

A plain-text CSV export (one row per grid point: coordinates then
components) supports external plotting.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .forms import (
    ANTISYM,
    SCALAR,
    VECTOR,
    AXIS_NAMES,
    FormField,
    GridSpec,
    antisym_pairs,
    basis_indices,
)

MAGIC = b"DGFF0001"


def component_label(multi_index) -> str:
    if len(multi_index) == 0:
        return "val"
    return "".join("d" + AXIS_NAMES[i] for i in multi_index)


def frame_labels(field: FormField) -> list:
    if field.value_type == SCALAR:
        return [""]
    if field.value_type == VECTOR:
        return [f"a{a + 1}" for a in range(field.n_frame)]
    return [f"a{a + 1}{b + 1}" for a, b in antisym_pairs(field.n_frame)]


def write_field(path, field: FormField) -> None:
    header = {
        "dim": field.grid.dim,
        "degree": field.degree,
        "valueType": field.value_type,
        "extents": [list(e) for e in field.grid.extents],
        "resolution": list(field.grid.resolution),
        "componentOrder": [list(c) for c in basis_indices(field.grid.dim,
                                                          field.degree)],
        "frameOrder": ([list(p) for p in antisym_pairs(field.grid.dim)]
                       if field.value_type == ANTISYM
                       else list(range(field.grid.dim))
                       if field.value_type == VECTOR else None),
        "layout": "C-order float64 little-endian, frame index outermost",
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(field.coeffs, dtype="<f8").tobytes())


def read_field(path) -> FormField:
    with open(path, "rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a field file (bad magic)")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode())
        grid = GridSpec(tuple(tuple(e) for e in header["extents"]),
                        tuple(header["resolution"]))
        raw = fh.read()
    from .forms import _coeff_shape
    shape = _coeff_shape(grid, header["degree"], header["valueType"])
    expected = int(np.prod(shape))
    coeffs = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if coeffs.size != expected:
        raise ValueError(f"{path}: payload has {coeffs.size} floats, "
                         f"expected {expected}")
    return FormField(grid, header["degree"], header["valueType"],
                     coeffs.reshape(shape))


def write_csv(path, field: FormField) -> None:
    """One row per grid point: coordinates, then one column per component."""
    grid = field.grid
    axes = [grid.axis_centers(i) for i in range(grid.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    comps = basis_indices(grid.dim, field.degree)
    flabels = frame_labels(field)
    columns = [AXIS_NAMES[i] for i in range(grid.dim)]
    arrays = [m.ravel() for m in mesh]
    flat = field.coeffs.reshape((-1,) + grid.resolution)
    m = 0
    for fl in flabels:
        for comp in comps:
            name = component_label(comp)
            columns.append(f"{fl}_{name}" if fl else name)
            arrays.append(flat[m].ravel())
            m += 1
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(columns) + "\n")
        block = np.column_stack(arrays)
        for row in block:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
