"""Embedding matrices: validation, row gather (prune), row scatter (restore).

Gather and scatter are bit-exact row copies, never recomputation, so a
model restored after fine-tuning is structurally identical to the
original: rows outside the remap domain keep their original bits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch
from .vocab import RemapTable, _read_only

STORAGE_DTYPE = np.float32  # v1 stores 32-bit reals; the file format carries a dtype code


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """A ``rows x dim`` matrix of 32-bit reals, one row per token id.

    Data is normalized to C-contiguous float32 and exposed as a read-only
    view; the constructor does not copy writable caller arrays, so treat
    source buffers as frozen after handoff.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError("embedding data must be 2-D (rows, dim)")
        if arr.shape[1] < 1:
            raise ValueError("dim must be >= 1")
        object.__setattr__(self, "data", _read_only(np.ascontiguousarray(arr, dtype=STORAGE_DTYPE)))

    @property
    def rows(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    @property
    def nbytes(self) -> int:
        return int(self.data.nbytes)

    def __eq__(self, other: object):
        if not isinstance(other, EmbeddingMatrix):
            return NotImplemented
        # Bitwise comparison: NaN payloads and signed zeros must round-trip.
        return self.data.shape == other.data.shape and self.data.tobytes() == other.data.tobytes()


@dataclass(frozen=True)
class ValidationSummary:
    """Shape, non-finite entry count, and value range of a matrix.

    ``min_value``/``max_value`` cover finite entries only and are ``None``
    when the matrix has no finite entries.
    """

    rows: int
    dim: int
    nonfinite_count: int
    min_value: float | None
    max_value: float | None

    @property
    def all_finite(self) -> bool:
        return self.nonfinite_count == 0


def validate_matrix(matrix: EmbeddingMatrix) -> ValidationSummary:
    """Report shape, count of NaN/Inf entries, and the finite value range."""
    data = matrix.data
    finite = np.isfinite(data)
    n_finite = int(finite.sum())
    nonfinite = int(data.size - n_finite)
    if n_finite == 0:
        lo = hi = None
    elif nonfinite == 0:
        lo, hi = float(data.min()), float(data.max())
    else:
        vals = data[finite]
        lo, hi = float(vals.min()), float(vals.max())
    return ValidationSummary(matrix.rows, matrix.dim, nonfinite, lo, hi)


def prune_embeddings(matrix: EmbeddingMatrix, remap: RemapTable) -> EmbeddingMatrix:
    """Gather the kept rows into a compact matrix.

    Output row ``forward[i]`` is a bit-identical copy of input row ``i``;
    the input is left untouched. An empty remap yields a valid ``0 x dim``
    matrix.
    """
    if matrix.rows != remap.original_vocab_size:
        raise ShapeMismatch(
            f"matrix has {matrix.rows} rows but remap covers vocab_size {remap.original_vocab_size}"
        )
    return EmbeddingMatrix(matrix.data[remap.inverse])


def restore_embeddings(
    original: EmbeddingMatrix, learned: EmbeddingMatrix, remap: RemapTable
) -> EmbeddingMatrix:
    """Scatter learned rows back to their original positions.

    Row ``inverse[j]`` of the result equals learned row ``j``; every row
    outside the remap domain equals the original bit-for-bit, keeping the
    model usable for vocabulary the pruned run never saw.
    """
    if original.rows != remap.original_vocab_size:
        raise ShapeMismatch(
            f"original matrix has {original.rows} rows but remap covers "
            f"vocab_size {remap.original_vocab_size}"
        )
    if learned.rows != remap.reduced_size:
        raise ShapeMismatch(
            f"learned matrix has {learned.rows} rows but remap maps {remap.reduced_size} ids"
        )
    if original.dim != learned.dim:
        raise ShapeMismatch(f"dim mismatch: original {original.dim}, learned {learned.dim}")
    out = original.data.copy()
    out[remap.inverse] = learned.data
    return EmbeddingMatrix(out)
