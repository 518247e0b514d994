"""HWC activation/weight tensor container."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_DTYPES = {8: np.int8, 16: np.int16}


@dataclass
class QTensor:
    """A height x width x channels buffer of q7 or q15 elements.

    Data is contiguous in HWC order: channel stride 1, width stride C,
    height stride W*C.  ``frac_bits`` locates the binary point shared by
    every element.
    """

    height: int
    width: int
    channels: int
    elem_width: int = 8
    frac_bits: int = 0
    data: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if min(self.height, self.width, self.channels) < 1:
            raise ValueError("tensor dimensions must be positive")
        if self.elem_width not in _DTYPES:
            raise ValueError("elem_width must be 8 or 16")
        n = self.height * self.width * self.channels
        if self.data is None:
            self.data = np.zeros(n, dtype=_DTYPES[self.elem_width])
        else:
            self.data = np.asarray(self.data, dtype=_DTYPES[self.elem_width])
            if self.data.ndim != 1 or self.data.size != n:
                raise ValueError(
                    f"data length {self.data.size} != H*W*C = {n}")

    @classmethod
    def from_hwc(cls, arr, elem_width: int = 8, frac_bits: int = 0) -> "QTensor":
        a = np.asarray(arr, dtype=_DTYPES[elem_width])
        if a.ndim != 3:
            raise ValueError("expected a 3-d (H, W, C) array")
        return cls(a.shape[0], a.shape[1], a.shape[2], elem_width,
                   frac_bits, a.reshape(-1).copy())

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.height, self.width, self.channels)

    @property
    def size(self) -> int:
        return self.height * self.width * self.channels

    @property
    def nbytes(self) -> int:
        return self.size * (self.elem_width // 8)

    def as_hwc(self) -> np.ndarray:
        """A (H, W, C) view of the underlying buffer."""
        return self.data.reshape(self.height, self.width, self.channels)
