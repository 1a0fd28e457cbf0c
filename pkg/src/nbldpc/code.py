"""Nonbinary parity-check matrices: storage, alist I/O, and constructions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .gf import FieldSpec, gf_mul

MAX_COLUMN_RETRIES = 100


class CodeError(ValueError):
    """Malformed or inconsistent parity-check matrix data."""


@dataclass(frozen=True, eq=False)
class ParityCheckMatrix:
    """Sparse H over GF(q).

    ``rows[i]`` holds the ``(column, coefficient)`` pairs of check ``i`` with
    strictly increasing columns.
    """

    q: int
    m: int
    n: int
    rows: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self) -> None:
        if len(self.rows) != self.m:
            raise CodeError(f"expected {self.m} rows, got {len(self.rows)}")
        for i, row in enumerate(self.rows):
            prev = -1
            for col, coef in row:
                if not 0 <= col < self.n:
                    raise CodeError(f"row {i}: column {col} out of range [0, {self.n})")
                if col <= prev:
                    raise CodeError(f"row {i}: column {col} duplicated or out of order")
                if not 0 < coef < self.q:
                    raise CodeError(f"row {i}, column {col}: coefficient {coef} not in [1, {self.q})")
                prev = col

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParityCheckMatrix):
            return NotImplemented
        return (self.q, self.m, self.n, self.rows) == (other.q, other.m, other.n, other.rows)

    def __hash__(self) -> int:
        return hash((self.q, self.m, self.n, self.rows))

    @classmethod
    def from_entries(cls, q: int, m: int, n: int, entries: Iterable[tuple[int, int, int]]) -> "ParityCheckMatrix":
        """Build from ``(row, col, coef)`` triples in any order."""
        rows: list[dict[int, int]] = [{} for _ in range(m)]
        for r, c, coef in entries:
            if not 0 <= r < m:
                raise CodeError(f"row {r} out of range [0, {m})")
            if c in rows[r]:
                raise CodeError(f"duplicate position ({r}, {c})")
            rows[r][c] = coef
        return cls(q, m, n, tuple(tuple(sorted(r.items())) for r in rows))

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[int]], q: int) -> "ParityCheckMatrix":
        arr = np.asarray(dense, dtype=np.int64)
        m, n = arr.shape
        return cls.from_entries(q, m, n, ((int(r), int(c), int(arr[r, c])) for r, c in zip(*np.nonzero(arr))))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.m, self.n), dtype=np.int64)
        for i, row in enumerate(self.rows):
            for col, coef in row:
                out[i, col] = coef
        return out

    @cached_property
    def columns(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        """Per-column ``(row, coefficient)`` pairs with increasing rows."""
        cols: list[list[tuple[int, int]]] = [[] for _ in range(self.n)]
        for i, row in enumerate(self.rows):
            for col, coef in row:
                cols[col].append((i, coef))
        return tuple(tuple(c) for c in cols)

    @cached_property
    def edges(self) -> "EdgeArrays":
        return EdgeArrays.from_matrix(self)

    def column_degrees(self) -> list[int]:
        return [len(c) for c in self.columns]

    def row_degrees(self) -> list[int]:
        return [len(r) for r in self.rows]

    def is_regular(self) -> bool:
        return len(set(self.column_degrees())) <= 1 and len(set(self.row_degrees())) <= 1


@dataclass(frozen=True)
class EdgeArrays:
    """Flat edge layout used by the decoder.

    Edges are numbered row-major: the edges of check ``i`` are
    ``row_ptr[i]:row_ptr[i + 1]``.  ``col_edges[col_ptr[j]:col_ptr[j + 1]]``
    lists the edge ids touching variable ``j`` in increasing row order.
    """

    row_ptr: np.ndarray
    edge_col: np.ndarray
    edge_coef: np.ndarray
    col_ptr: np.ndarray
    col_edges: np.ndarray

    @classmethod
    def from_matrix(cls, h: ParityCheckMatrix) -> "EdgeArrays":
        row_ptr = np.zeros(h.m + 1, dtype=np.int64)
        cols, coefs = [], []
        for i, row in enumerate(h.rows):
            row_ptr[i + 1] = row_ptr[i] + len(row)
            for col, coef in row:
                cols.append(col)
                coefs.append(coef)
        edge_col = np.array(cols, dtype=np.int64)
        edge_coef = np.array(coefs, dtype=np.int64)
        # stable sort keeps row order within each column
        col_edges = np.argsort(edge_col, kind="stable").astype(np.int64)
        col_ptr = np.zeros(h.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(edge_col, minlength=h.n), out=col_ptr[1:])
        return cls(row_ptr, edge_col, edge_coef, col_ptr, col_edges)


@dataclass(frozen=True)
class QcBaseMatrix:
    """Base matrix of circulant blocks; ``entries[i][j]`` is ``(shift, coef)`` or None."""

    rows_b: int
    cols_b: int
    circulant_size: int
    q: int
    entries: tuple[tuple[tuple[int, int] | None, ...], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows_b or any(len(r) != self.cols_b for r in self.entries):
            raise CodeError(f"base entries must be {self.rows_b} x {self.cols_b}")
        for i, row in enumerate(self.entries):
            for j, cell in enumerate(row):
                if cell is None:
                    continue
                shift, coef = cell
                if not 0 <= shift < self.circulant_size:
                    raise CodeError(f"base cell ({i}, {j}): shift {shift} not in [0, {self.circulant_size})")
                if not 0 < coef < self.q:
                    raise CodeError(f"base cell ({i}, {j}): coefficient {coef} not in [1, {self.q})")


def degrees(h: ParityCheckMatrix) -> tuple[list[int], list[int]]:
    """Return (column degrees, row degrees)."""
    return h.column_degrees(), h.row_degrees()


def rate(h: ParityCheckMatrix) -> Fraction:
    """Design rate (n - m) / n, assuming H has full rank."""
    if h.n == 0:
        raise CodeError("rate undefined for an empty code")
    return Fraction(max(h.n - h.m, 0), h.n)


def syndrome(h: ParityCheckMatrix, x: Sequence[int], f: FieldSpec) -> list[int]:
    if len(x) != h.n:
        raise CodeError(f"vector length {len(x)} does not match n={h.n}")
    out = []
    for row in h.rows:
        s = 0
        for col, coef in row:
            s ^= gf_mul(coef, int(x[col]), f)
        out.append(s)
    return out


def is_codeword(h: ParityCheckMatrix, x: Sequence[int], f: FieldSpec) -> bool:
    return not any(syndrome(h, x, f))


# --------------------------------------------------------------------------
# alist I/O
# --------------------------------------------------------------------------


def _tokens(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split()]
    except ValueError as exc:
        raise CodeError(f"non-integer token in alist: {exc}") from None


def load_alist_nb(text: str) -> ParityCheckMatrix:
    """Parse the nonbinary alist format.

    Layout: ``n m q`` / ``max_dv max_dc`` / column degrees / row degrees /
    per column ``d_v`` pairs ``row coef`` / per row ``d_c`` pairs ``col coef``.
    Indices are 1-based.  Both sections are required and must describe the
    same matrix.
    """
    tok = _tokens(text)
    pos = 0

    def take(k: int, what: str) -> list[int]:
        nonlocal pos
        if pos + k > len(tok):
            raise CodeError(f"alist truncated while reading {what}")
        chunk = tok[pos:pos + k]
        pos += k
        return chunk

    n, m, q = take(3, "header")
    if n <= 0 or m <= 0 or q < 2:
        raise CodeError(f"bad header n={n} m={m} q={q}")
    max_dv, max_dc = take(2, "max degrees")
    col_deg = take(n, "column degrees")
    row_deg = take(m, "row degrees")
    if max(col_deg) != max_dv or max(row_deg) != max_dc:
        raise CodeError("max degree line does not match degree lists")
    if sum(col_deg) != sum(row_deg):
        raise CodeError("column and row degree totals differ")

    by_col = set()
    for j, d in enumerate(col_deg):
        pairs = take(2 * d, f"column {j + 1}")
        for r, coef in zip(pairs[::2], pairs[1::2]):
            if not 1 <= r <= m:
                raise CodeError(f"column {j + 1}: row {r} out of range")
            if not 0 < coef < q:
                raise CodeError(f"column {j + 1}: coefficient {coef} not in [1, {q})")
            key = (r - 1, j, coef)
            if key in by_col:
                raise CodeError(f"column {j + 1}: duplicate row {r}")
            by_col.add(key)

    entries = []
    for i, d in enumerate(row_deg):
        pairs = take(2 * d, f"row {i + 1}")
        for c, coef in zip(pairs[::2], pairs[1::2]):
            if not 1 <= c <= n:
                raise CodeError(f"row {i + 1}: column {c} out of range")
            if not 0 < coef < q:
                raise CodeError(f"row {i + 1}: coefficient {coef} not in [1, {q})")
            entries.append((i, c - 1, coef))
    if pos != len(tok):
        raise CodeError(f"{len(tok) - pos} trailing tokens after alist body")

    h = ParityCheckMatrix.from_entries(q, m, n, entries)
    if set(entries) != by_col:
        raise CodeError("column section and row section describe different matrices")
    if h.column_degrees() != col_deg or h.row_degrees() != row_deg:
        raise CodeError("declared degrees do not match the body")
    return h


def dump_alist_nb(h: ParityCheckMatrix) -> str:
    col_deg, row_deg = degrees(h)
    lines = [
        f"{h.n} {h.m} {h.q}",
        f"{max(col_deg, default=0)} {max(row_deg, default=0)}",
        " ".join(map(str, col_deg)),
        " ".join(map(str, row_deg)),
    ]
    for col in h.columns:
        lines.append(" ".join(f"{r + 1} {coef}" for r, coef in col))
    for row in h.rows:
        lines.append(" ".join(f"{c + 1} {coef}" for c, coef in row))
    return "\n".join(lines) + "\n"


def load_qc_base(text: str) -> QcBaseMatrix:
    """Parse ``rows_b cols_b circulant_size q`` followed by one ``shift coef`` per cell (``-1 0`` = absent)."""
    tok = _tokens(text)
    if len(tok) < 4:
        raise CodeError("QC base header truncated")
    rows_b, cols_b, z, q = tok[:4]
    body = tok[4:]
    if len(body) != 2 * rows_b * cols_b:
        raise CodeError(f"QC base expects {rows_b * cols_b} cells, got {len(body) / 2:g}")
    cells = []
    for k in range(rows_b * cols_b):
        shift, coef = body[2 * k], body[2 * k + 1]
        cells.append(None if shift < 0 else (shift, coef))
    entries = tuple(tuple(cells[i * cols_b:(i + 1) * cols_b]) for i in range(rows_b))
    return QcBaseMatrix(rows_b, cols_b, z, q, entries)


def dump_qc_base(base: QcBaseMatrix) -> str:
    lines = [f"{base.rows_b} {base.cols_b} {base.circulant_size} {base.q}"]
    for row in base.entries:
        lines.append("  ".join("-1 0" if c is None else f"{c[0]} {c[1]}" for c in row))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# constructions
# --------------------------------------------------------------------------


def expand_qc(base: QcBaseMatrix, f: FieldSpec | None = None) -> ParityCheckMatrix:
    """Expand right-circulant blocks: cell (shift s, coef c) puts c at (r, (r + s) mod z)."""
    if f is not None and f.q != base.q:
        raise CodeError(f"base matrix is over GF({base.q}), field is GF({f.q})")
    z = base.circulant_size
    entries = []
    for bi, row in enumerate(base.entries):
        for bj, cell in enumerate(row):
            if cell is None:
                continue
            shift, coef = cell
            for r in range(z):
                entries.append((bi * z + r, bj * z + (r + shift) % z, coef))
    return ParityCheckMatrix.from_entries(base.q, base.rows_b * z, base.cols_b * z, entries)


def build_regular_2dc(n: int, d_c: int, f: FieldSpec, seed: int) -> ParityCheckMatrix:
    """Random regular (2, d_c) code by progressive edge placement.

    Each column picks two distinct rows with remaining capacity whose pair is
    not already used by another column, so no two checks share two variables.
    Coefficients are uniform over the nonzero field elements.
    """
    if n <= 0 or d_c < 2 or (2 * n) % d_c:
        raise CodeError(f"2*n={2 * n} must be divisible by d_c={d_c}")
    m = 2 * n // d_c
    if m > n:
        raise CodeError(f"m={m} exceeds n={n}")
    if m < 2:
        raise CodeError("need at least two checks for column degree 2")

    rng = np.random.default_rng(seed)
    capacity = np.full(m, d_c, dtype=np.int64)
    used_pairs: set[tuple[int, int]] = set()
    entries = []
    for col in range(n):
        for _ in range(MAX_COLUMN_RETRIES):
            open_rows = np.flatnonzero(capacity > 0)
            top = open_rows[capacity[open_rows] == capacity[open_rows].max()]
            r1 = int(rng.choice(top))
            partners = [
                int(r) for r in open_rows
                if r != r1 and (min(r, r1), max(r, r1)) not in used_pairs
            ]
            if not partners:
                continue
            caps = capacity[partners]
            best = [r for r, c in zip(partners, caps) if c == caps.max()]
            r2 = int(rng.choice(best))
            pair = (min(r1, r2), max(r1, r2))
            break
        else:
            raise CodeError(
                f"column {col}: no row pair free of double edges after {MAX_COLUMN_RETRIES} retries"
            )
        used_pairs.add(pair)
        capacity[list(pair)] -= 1
        for r in pair:
            entries.append((r, col, int(rng.integers(1, f.q))))
    return ParityCheckMatrix.from_entries(f.q, m, n, entries)


def recolor(h: ParityCheckMatrix, f: FieldSpec, seed: int) -> ParityCheckMatrix:
    """Same nonzero positions, fresh uniform nonzero coefficients over ``f``."""
    rng = np.random.default_rng(seed)
    entries = [
        (i, col, int(rng.integers(1, f.q)))
        for i, row in enumerate(h.rows)
        for col, _ in row
    ]
    return ParityCheckMatrix.from_entries(f.q, h.m, h.n, entries)
