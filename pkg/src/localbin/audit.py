"""Bookkeeping for auxiliary buffers allocated by the engines."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AuxAudit:
    """Records every auxiliary array an engine allocates.

    Input and output images are not auxiliary and are never recorded.
    """

    records: list = field(default_factory=list)

    def zeros(self, name: str, shape, dtype) -> np.ndarray:
        array = np.zeros(shape, dtype=dtype)
        self.records.append((name, array.shape, array.dtype))
        return array

    @property
    def slots(self) -> int:
        return sum(int(np.prod(shape)) for _, shape, _ in self.records)

    @property
    def nbytes(self) -> int:
        return sum(int(np.prod(shape)) * dtype.itemsize for _, shape, dtype in self.records)

    def by_name(self) -> dict:
        return {name: (shape, dtype) for name, shape, dtype in self.records}
