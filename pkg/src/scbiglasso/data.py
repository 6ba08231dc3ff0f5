from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DataFormatError

DataKind = Literal["gaussian", "counts"]


@dataclass(frozen=True)
class DataStack:
    """m replicate p x n data matrices: features along rows, samples along columns."""

    replicates: np.ndarray  # shape (m, p, n)
    kind: DataKind = "gaussian"

    def __post_init__(self):
        if self.replicates.ndim != 3:
            raise DataFormatError(
                f"replicates must have shape (m, p, n), got {self.replicates.shape}"
            )
        if self.kind not in ("gaussian", "counts"):
            raise DataFormatError(f"unknown data kind {self.kind!r}")

    @classmethod
    def from_matrices(cls, matrices, kind: DataKind = "gaussian") -> "DataStack":
        mats = [np.asarray(y) for y in matrices]
        if not mats:
            raise DataFormatError("a data stack needs at least one replicate")
        shapes = {y.shape for y in mats}
        if len(shapes) != 1:
            raise DataFormatError(f"replicates have mismatched shapes: {sorted(shapes)}")
        if mats[0].ndim != 2:
            raise DataFormatError(f"each replicate must be a matrix, got shape {mats[0].shape}")
        return cls(np.stack(mats), kind)

    @property
    def m(self) -> int:
        return self.replicates.shape[0]

    @property
    def p(self) -> int:
        return self.replicates.shape[1]

    @property
    def n(self) -> int:
        return self.replicates.shape[2]

    def __iter__(self):
        return iter(self.replicates)
