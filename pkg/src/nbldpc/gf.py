"""Exact arithmetic in extension fields GF(2^m) via log/antilog tables.

Elements are stored in polynomial representation: bit i of the integer is
the coefficient of x^i.  The exponent (log) representation is internal.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Conventional minimal-weight primitive polynomials, as bit masks.
DEFAULT_PRIMITIVE_POLYS = {
    1: 0b11,        # x + 1
    2: 0b111,       # x^2 + x + 1
    3: 0b1011,      # x^3 + x + 1
    4: 0b10011,     # x^4 + x + 1
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
}


class GFError(Exception):
    """Invalid field construction or operand usage."""


@dataclass(frozen=True)
class FieldSpec:
    """GF(2^m) defined by a primitive polynomial.

    Immutable after construction; all operations are pure and safe for
    unrestricted concurrent use.
    """

    m: int
    primitive_poly: int
    q: int = field(init=False)
    log_table: np.ndarray = field(init=False, repr=False, compare=False)
    antilog_table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not 1 <= self.m <= 8:
            raise GFError(f"extension degree m={self.m} unsupported (need 1..8)")
        q = 1 << self.m
        if self.primitive_poly >> self.m != 1:
            raise GFError(
                f"primitive polynomial 0x{self.primitive_poly:x} does not have degree {self.m}"
            )
        antilog = np.zeros(q - 1, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            antilog[i] = x
            log[x] = i
            x <<= 1
            if x & q:
                x ^= self.primitive_poly
        # The generated cycle must enumerate every nonzero element exactly
        # once, otherwise the polynomial is not primitive.
        if x != 1 or len(set(antilog.tolist())) != q - 1:
            raise GFError(
                f"polynomial 0x{self.primitive_poly:x} is not primitive for m={self.m}"
            )
        object.__setattr__(self, "q", q)
        log.flags.writeable = False
        antilog.flags.writeable = False
        object.__setattr__(self, "log_table", log)
        object.__setattr__(self, "antilog_table", antilog)

    @classmethod
    def for_m(cls, m: int) -> "FieldSpec":
        return cls(m, DEFAULT_PRIMITIVE_POLYS[m])

    # --- scalar operations -------------------------------------------------

    def _check(self, *vals: int):
        for v in vals:
            if not 0 <= v < self.q:
                raise GFError(f"value {v} outside GF({self.q})")

    def add(self, a: int, b: int) -> int:
        self._check(a, b)
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        if a == 0 or b == 0:
            return 0
        return int(self.antilog_table[(self.log_table[a] + self.log_table[b]) % (self.q - 1)])

    def inv(self, a: int) -> int:
        self._check(a)
        if a == 0:
            raise GFError("0 has no multiplicative inverse")
        return int(self.antilog_table[(-self.log_table[a]) % (self.q - 1)])

    def pow_alpha(self, j: int) -> int:
        """alpha^j in polynomial representation."""
        return int(self.antilog_table[j % (self.q - 1)])

    # --- vectorized operations --------------------------------------------

    def mul_vec(self, a, b) -> np.ndarray:
        """Elementwise GF product of integer arrays (broadcasting)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
        nz = (a != 0) & (b != 0)
        if np.any(nz):
            la = self.log_table[np.broadcast_to(a, out.shape)[nz]]
            lb = self.log_table[np.broadcast_to(b, out.shape)[nz]]
            out[nz] = self.antilog_table[(la + lb) % (self.q - 1)]
        return out

    def mul_table_row(self, a: int) -> np.ndarray:
        """The permutation x -> a*x as an index array of length q (a != 0)."""
        if a == 0:
            raise GFError("multiplication by 0 is not a permutation")
        return self.mul_vec(a, np.arange(self.q))

    def elements(self) -> range:
        return range(self.q)


@dataclass(frozen=True)
class FieldElement:
    """A single element of a FieldSpec, in polynomial representation."""

    value: int
    spec: FieldSpec

    def __post_init__(self):
        if not 0 <= self.value < self.spec.q:
            raise GFError(f"value {self.value} outside GF({self.spec.q})")

    def _same_field(self, other: "FieldElement"):
        if self.spec is not other.spec and self.spec != other.spec:
            raise GFError("operands belong to different fields")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._same_field(other)
        return FieldElement(self.value ^ other.value, self.spec)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._same_field(other)
        return FieldElement(self.spec.mul(self.value, other.value), self.spec)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.spec.inv(self.value), self.spec)


def gf_add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def gf_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def gf_inv(a: FieldElement) -> FieldElement:
    return a.inverse()
