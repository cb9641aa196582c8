"""Window geometry shared by every engine."""
from __future__ import annotations

from dataclasses import dataclass

from numba import njit


@dataclass(frozen=True)
class WindowSpec:
    """An ``h`` x ``w`` window.

    For pixel (i, j) the window covers rows ``(i - o, i + u]`` and columns
    ``(j - l, j + r]``. Even sides are asymmetric by the floor formulas and
    are never re-centered.
    """

    h: int
    w: int

    def __post_init__(self):
        for name in ("h", "w"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ValueError(f"window {name} must be a positive integer, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def l(self) -> int:  # noqa: E743
        return (self.w + 1) // 2

    @property
    def r(self) -> int:
        return self.w // 2

    @property
    def o(self) -> int:
        return (self.h + 1) // 2

    @property
    def u(self) -> int:
        return self.h // 2

    @property
    def area(self) -> int:
        return self.h * self.w

    def transposed(self) -> "WindowSpec":
        return WindowSpec(self.w, self.h)

    @classmethod
    def parse(cls, text: str) -> "WindowSpec":
        """Parse ``"HxW"`` or a single side ``"N"`` (square)."""
        parts = text.lower().split("x")
        if len(parts) == 1:
            return cls(int(parts[0]), int(parts[0]))
        if len(parts) == 2:
            return cls(int(parts[0]), int(parts[1]))
        raise ValueError(f"cannot parse window {text!r}")

    def __str__(self):
        return f"{self.h}x{self.w}"


@njit(cache=True)
def clamped_count(i, j, h, w, H, W):
    l = (w + 1) // 2
    r = w // 2
    o = (h + 1) // 2
    u = h // 2
    return (min(j + r, W - 1) - max(j - l, -1)) * (min(i + u, H - 1) - max(i - o, -1))


def effective_count(spec: WindowSpec, i: int, j: int, H: int, W: int) -> int:
    """Number of in-bounds pixels of the window at (i, j) in an H x W image."""
    if not (0 <= i < H and 0 <= j < W):
        raise IndexError(f"pixel ({i}, {j}) outside {H}x{W} image")
    return int(clamped_count(i, j, spec.h, spec.w, H, W))
