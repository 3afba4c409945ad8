"""Sliding-window extremum over (time, value) pairs with a monotone deque."""

from __future__ import annotations

import operator
from collections import deque


class WindowExtremum:
    """Max (or min) of the values pushed at times in ``(t - n, t]``.

    Pushes must come with nondecreasing times. Amortized O(1) per push.
    """

    def __init__(self, n: int, kind: str = "max"):
        if kind not in ("max", "min"):
            raise ValueError(f"kind must be 'max' or 'min', got {kind!r}")
        self.n = n
        self.kind = kind
        self._dominates = operator.ge if kind == "max" else operator.le
        self.items: deque = deque()

    def push(self, t: int, value: float) -> None:
        while self.items and self._dominates(value, self.items[-1][1]):
            self.items.pop()
        self.items.append((t, value))

    def expire(self, now: int) -> None:
        """Drop entries no longer inside the window ending at ``now``."""
        while self.items and self.items[0][0] <= now - self.n:
            self.items.popleft()

    def shift(self, offset: float) -> None:
        """Add ``offset`` to every stored value; order is preserved."""
        self.items = deque((t, v + offset) for t, v in self.items)

    @property
    def value(self):
        return self.items[0][1] if self.items else None

    def __len__(self):
        return len(self.items)
