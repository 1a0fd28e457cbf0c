"""Arithmetic over GF(2^p) backed by log/antilog tables.

Elements are plain integers in ``[0, q)``; bit ``i`` of an element is the
coefficient of ``x^i`` in the polynomial basis (natural binary expansion).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Primitive polynomials, bit i = coefficient of x^i (x^p term included).
DEFAULT_POLYS = {
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10001001,  # x^7 + x^3 + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
}

MIN_EXPONENT = 2
MAX_EXPONENT = 8


class FieldError(ValueError):
    """Invalid field parameters or an undefined field operation."""


@dataclass(frozen=True, eq=False)
class FieldSpec:
    """GF(q) context with q = 2^p.

    ``log_table[a]`` is the discrete log of nonzero ``a`` (entry 0 unused) and
    ``antilog_table[k]`` is ``alpha^k`` for ``k < q - 1``.  ``mul_table`` and
    ``div_table`` are dense ``q x q`` lookups derived from the log tables; the
    decoder kernels index them directly.
    """

    p: int
    poly: int
    log_table: np.ndarray = field(repr=False)
    antilog_table: np.ndarray = field(repr=False)
    mul_table: np.ndarray = field(repr=False)
    div_table: np.ndarray = field(repr=False)

    @property
    def q(self) -> int:
        return 1 << self.p

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FieldSpec):
            return NotImplemented
        return self.p == other.p and self.poly == other.poly

    def __hash__(self) -> int:
        return hash((self.p, self.poly))

    def add(self, a: int, b: int) -> int:
        return gf_add(a, b)

    def mul(self, a: int, b: int) -> int:
        return gf_mul(a, b, self)

    def div(self, a: int, b: int) -> int:
        return gf_div(a, b, self)


def build_field(p: int, poly: int | None = None) -> FieldSpec:
    """Build the log/antilog tables for GF(2^p).

    Raises :class:`FieldError` if ``p`` is outside ``[2, 8]`` or if ``poly`` is
    not a primitive polynomial of degree ``p`` (the powers of ``x`` repeat
    before ``2^p - 1`` steps).
    """
    if not MIN_EXPONENT <= p <= MAX_EXPONENT:
        raise FieldError(f"exponent p={p} outside supported range [{MIN_EXPONENT}, {MAX_EXPONENT}]")
    if poly is None:
        poly = DEFAULT_POLYS[p]
    if poly >> p != 1:
        raise FieldError(f"polynomial {poly:#b} is not of degree {p}")

    q = 1 << p
    order = q - 1
    log_table = np.full(q, -1, dtype=np.int64)
    antilog_table = np.zeros(order, dtype=np.int64)
    value = 1
    for k in range(order):
        if log_table[value] != -1:
            raise FieldError(
                f"polynomial {poly:#b} is not primitive: x^{k} repeats x^{log_table[value]}"
            )
        log_table[value] = k
        antilog_table[k] = value
        value <<= 1
        if value & q:
            value ^= poly
    if value != 1:
        raise FieldError(f"polynomial {poly:#b} is not primitive: x^{order} != 1")
    log_table[0] = 0

    nz = np.arange(1, q)
    logs = log_table[nz]
    mul_table = np.zeros((q, q), dtype=np.int64)
    mul_table[1:, 1:] = antilog_table[(logs[:, None] + logs[None, :]) % order]
    div_table = np.zeros((q, q), dtype=np.int64)
    div_table[1:, 1:] = antilog_table[(logs[:, None] - logs[None, :]) % order]
    for table in (log_table, antilog_table, mul_table, div_table):
        table.setflags(write=False)
    return FieldSpec(p, poly, log_table, antilog_table, mul_table, div_table)


def field_for_order(q: int, poly: int | None = None) -> FieldSpec:
    """Convenience wrapper taking the field order instead of the exponent."""
    p = q.bit_length() - 1
    if q < 1 or 1 << p != q:
        raise FieldError(f"field order q={q} is not a power of two")
    return build_field(p, poly)


def gf_add(a: int, b: int) -> int:
    return a ^ b


def gf_mul(a: int, b: int, f: FieldSpec) -> int:
    if a == 0 or b == 0:
        return 0
    return int(f.antilog_table[(f.log_table[a] + f.log_table[b]) % (f.q - 1)])


def gf_div(a: int, b: int, f: FieldSpec) -> int:
    if b == 0:
        raise ZeroDivisionError("division by zero in GF(q)")
    if a == 0:
        return 0
    return int(f.antilog_table[(f.log_table[a] - f.log_table[b]) % (f.q - 1)])
