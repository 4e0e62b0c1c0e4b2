"""Flat, ordered parameter storage with named layout descriptors."""

from dataclasses import dataclass

import numpy as np

from .errors import LengthError, NumericError, ShapeError


@dataclass(frozen=True)
class LayoutEntry:
    """One named slice of the flat parameter array."""

    name: str
    shape: tuple
    offset: int

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) if self.shape else 1


def validate_layout(layout) -> int:
    """Check that entries are contiguous and non-overlapping; return total size."""
    expected_offset = 0
    for entry in layout:
        if entry.offset != expected_offset:
            raise LengthError(
                f"layout entry {entry.name!r} at offset {entry.offset}, expected {expected_offset}",
                expected=expected_offset,
                found=entry.offset,
            )
        expected_offset += entry.size
    return expected_offset


@dataclass
class ParameterVector:
    """All model parameters as one flat float64 array plus its layout.

    The flat array is the canonical representation everywhere: optimizers,
    probes, and checkpoints all operate on it directly.
    """

    data: np.ndarray
    layout: tuple

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64).reshape(-1)
        self.layout = tuple(self.layout)
        total = validate_layout(self.layout)
        if total != self.data.shape[0]:
            raise LengthError(
                f"parameter data length {self.data.shape[0]} != layout total {total}",
                expected=total,
                found=self.data.shape[0],
            )
        if not np.all(np.isfinite(self.data)):
            raise NumericError("parameter vector")

    def __len__(self) -> int:
        return self.data.shape[0]

    def unflatten(self) -> dict:
        """Return {name: array} views reshaped per the layout."""
        out = {}
        for entry in self.layout:
            chunk = self.data[entry.offset:entry.offset + entry.size]
            out[entry.name] = chunk.reshape(entry.shape)
        return out

    def replace(self, data: np.ndarray) -> "ParameterVector":
        """Same layout, new values."""
        return ParameterVector(np.array(data, dtype=np.float64), self.layout)

    def copy(self) -> "ParameterVector":
        return ParameterVector(self.data.copy(), self.layout)


def flatten(named: dict, layout) -> np.ndarray:
    """Inverse of `ParameterVector.unflatten`: pack named arrays back flat."""
    total = validate_layout(layout)
    flat = np.empty(total, dtype=np.float64)
    for entry in layout:
        arr = np.asarray(named[entry.name], dtype=np.float64)
        if arr.shape != tuple(entry.shape):
            raise ShapeError(entry.name, tuple(entry.shape), arr.shape)
        flat[entry.offset:entry.offset + entry.size] = arr.reshape(-1)
    return flat
