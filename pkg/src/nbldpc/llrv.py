"""Truncated log-likelihood-ratio vectors.

Messages live in the min domain: a penalty of 0 marks the most reliable
symbol and larger penalties mean less likely symbols.  Keeping the ``n_m``
highest probabilities is the same as keeping the ``n_m`` smallest penalties.
Ties are always broken by ascending GF index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np


@dataclass(frozen=True, eq=False)
class Llrv:
    penalties: np.ndarray
    indices: np.ndarray

    def __post_init__(self) -> None:
        pen = np.asarray(self.penalties, dtype=np.float64)
        idx = np.asarray(self.indices, dtype=np.int64)
        if pen.shape != idx.shape or pen.ndim != 1:
            raise ValueError("penalties and indices must be 1-d arrays of equal length")
        object.__setattr__(self, "penalties", pen)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, int]]) -> "Llrv":
        pairs = list(pairs)
        return cls(np.array([p for p, _ in pairs], dtype=np.float64),
                   np.array([i for _, i in pairs], dtype=np.int64))

    @classmethod
    def from_scores(cls, scores: dict[int, float] | Iterable[tuple[int, float]], n_keep: int | None = None) -> "Llrv":
        """Sort ``{index: score}`` by the tie rule, keep ``n_keep``, and zero-anchor."""
        items = scores.items() if isinstance(scores, dict) else scores
        items = [(int(i), float(s)) for i, s in items]
        if not items:
            return cls(np.zeros(0), np.zeros(0, dtype=np.int64))
        best = min(s for _, s in items)
        ordered = sorted((s - best, i) for i, s in items)
        if n_keep is not None:
            ordered = ordered[:n_keep]
        return cls.from_pairs(ordered)

    def pairs(self) -> list[tuple[float, int]]:
        return [(float(p), int(i)) for p, i in zip(self.penalties, self.indices)]

    def as_dict(self) -> dict[int, float]:
        return {int(i): float(p) for p, i in zip(self.penalties, self.indices)}

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Llrv):
            return NotImplemented
        return (np.array_equal(self.penalties, other.penalties)
                and np.array_equal(self.indices, other.indices))

    def __repr__(self) -> str:
        return f"Llrv({self.pairs()})"

    def is_valid(self) -> bool:
        """Sorted by (penalty, index), distinct indices, first penalty 0."""
        if len(self) == 0:
            return True
        pen, idx = self.penalties, self.indices
        if pen[0] != 0 or len(set(idx.tolist())) != len(idx):
            return False
        order_ok = (pen[1:] > pen[:-1]) | ((pen[1:] == pen[:-1]) & (idx[1:] > idx[:-1]))
        return bool(np.all(order_ok))


IDENTITY = Llrv.from_pairs([(0.0, 0)])


def sort_rows(penalties: np.ndarray, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise sort of ``(N, k)`` arrays by penalty then index."""
    order = np.lexsort((indices, penalties), axis=-1)
    return (np.take_along_axis(penalties, order, axis=-1),
            np.take_along_axis(indices, order, axis=-1))
