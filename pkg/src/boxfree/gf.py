"""Exact arithmetic in small finite fields GF(p^k), plus vectors and affine lines.

Field elements are plain ints in ``[0, q)``: the base-p digits of an element
are the coefficients of its polynomial representative, constant term first.
All operations go through exhaustive lookup tables built once per field, so
every result is exact and equality is ordinary ``==``.  Fields here are
deliberately desk-scale (q <= 256); nothing in this package needs more.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

Vector = tuple[int, ...]

MAX_FIELD_SIZE = 256


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


# ---------------------------------------------------------------------------
# polynomials over GF(p), coefficient lists with constant term first


def _poly_mod(num: list[int], den: Sequence[int], p: int) -> list[int]:
    """Remainder of num / den over GF(p); den must be monic."""
    rem = list(num)
    dd = len(den) - 1
    while len(rem) > dd:
        lead = rem[-1]
        if lead:
            shift = len(rem) - 1 - dd
            for i, c in enumerate(den[:-1]):
                rem[shift + i] = (rem[shift + i] - lead * c) % p
        rem.pop()
    return rem


def _poly_mul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return out


def _is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Brute-force irreducibility over GF(p): no monic divisor of degree <= k/2."""
    k = len(poly) - 1
    for deg in range(1, k // 2 + 1):
        for low in itertools.product(range(p), repeat=deg):
            divisor = list(low) + [1]
            if not any(_poly_mod(list(poly), divisor, p)):
                return False
    return True


def _default_modulus(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree k over GF(p).

    Candidates x^k + c_{k-1} x^{k-1} + ... + c_0 are scanned in increasing
    order of the integer sum(c_i * p^i), which makes the choice deterministic
    across runs.
    """
    for m in range(p**k):
        low = [(m // p**i) % p for i in range(k)]
        candidate = tuple(low) + (1,)
        if _is_irreducible(candidate, p):
            return candidate
    raise AssertionError("an irreducible polynomial of every degree exists")


# ---------------------------------------------------------------------------
# fields


class Field:
    """GF(p^k) given by characteristic, extension degree and reduction polynomial.

    Supports ``add``, ``sub``, ``mul``, ``neg``, ``inv`` on int-encoded
    elements.  The raw ``add_table`` / ``mul_table`` (tuples of tuples) are
    exposed for hot loops.  Instances are immutable and safe to share between
    threads or processes.
    """

    __slots__ = ("p", "k", "q", "modulus", "add_table", "mul_table",
                 "neg_table", "inv_table")

    def __init__(self, p: int, k: int, modulus: tuple[int, ...]):
        self.p = p
        self.k = k
        self.q = p**k
        self.modulus = modulus
        self._build_tables()

    def _build_tables(self) -> None:
        p, k, q = self.p, self.k, self.q
        digits = [tuple((x // p**i) % p for i in range(k)) for x in range(q)]

        def encode(coeffs: Sequence[int]) -> int:
            return sum(c * p**i for i, c in enumerate(coeffs))

        add = []
        mul = []
        for a in range(q):
            da = digits[a]
            add.append(tuple(encode([(x + y) % p for x, y in zip(da, digits[b])])
                             for b in range(q)))
            row = []
            for b in range(q):
                prod = _poly_mul(da, digits[b], p)
                row.append(encode(_poly_mod(prod, self.modulus, p)))
            mul.append(tuple(row))
        self.add_table = tuple(add)
        self.mul_table = tuple(mul)
        self.neg_table = tuple(encode([(-x) % p for x in digits[a]]) for a in range(q))
        inv = [0] * q
        for a in range(1, q):
            inv[a] = self.mul_table[a].index(1)
        self.inv_table = tuple(inv)

    # -- arithmetic ---------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        return self.add_table[a][b]

    def sub(self, a: int, b: int) -> int:
        return self.add_table[a][self.neg_table[b]]

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[a][b]

    def neg(self, a: int) -> int:
        return self.neg_table[a]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inversion of zero in " + repr(self))
        return self.inv_table[a]

    # -- element views ------------------------------------------------------

    def elements(self) -> range:
        return range(self.q)

    def nonzero_elements(self) -> range:
        return range(1, self.q)

    def element_to_coeffs(self, a: int) -> tuple[int, ...]:
        """Base-p digits of a: coefficients of its polynomial, constant first."""
        return tuple((a // self.p**i) % self.p for i in range(self.k))

    def coeffs_to_element(self, coeffs: Sequence[int]) -> int:
        if len(coeffs) != self.k:
            raise ValueError(f"expected {self.k} coefficients, got {len(coeffs)}")
        return sum((c % self.p) * self.p**i for i, c in enumerate(coeffs))

    # -- identity -----------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, Field)
                and (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus))

    def __hash__(self) -> int:
        return hash((self.p, self.k, self.modulus))

    def __repr__(self) -> str:
        if self.k == 1:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.k})"


def make_field(p: int, k: int = 1, modulus: Optional[Sequence[int]] = None) -> Field:
    """Construct GF(p^k).

    When no reduction polynomial is given, the lexicographically smallest
    monic irreducible of degree k is found by exhaustive search, so the same
    (p, k) always yields the same field.
    """
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"characteristic must be prime, got {p!r}")
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"extension degree must be a positive integer, got {k!r}")
    if p**k > MAX_FIELD_SIZE:
        raise ValueError(
            f"q = {p}^{k} exceeds the exhaustive-table limit of {MAX_FIELD_SIZE}")
    if modulus is None:
        mod = _default_modulus(p, k)
    else:
        mod = tuple(int(c) for c in modulus)
        if len(mod) != k + 1 or mod[-1] != 1:
            raise ValueError(f"modulus must be monic of degree {k}, got {modulus!r}")
        if any(c < 0 or c >= p for c in mod):
            raise ValueError("modulus coefficients must lie in [0, p)")
        if not _is_irreducible(mod, p):
            raise ValueError(f"modulus {modulus!r} is reducible over GF({p})")
    return Field(p, k, mod)


# ---------------------------------------------------------------------------
# vectors over a field


def zero_vector(s: int) -> Vector:
    return (0,) * s


def is_zero_vector(v: Vector) -> bool:
    return not any(v)


def vec_add(field: Field, u: Vector, v: Vector) -> Vector:
    add = field.add_table
    return tuple(add[a][b] for a, b in zip(u, v))


def vec_sub(field: Field, u: Vector, v: Vector) -> Vector:
    add, neg = field.add_table, field.neg_table
    return tuple(add[a][neg[b]] for a, b in zip(u, v))


def vec_scale(field: Field, c: int, v: Vector) -> Vector:
    row = field.mul_table[c]
    return tuple(row[a] for a in v)


def matrix_rank(field: Field, rows: Sequence[Vector]) -> int:
    """Rank of a small matrix over the field, by Gaussian elimination."""
    work = [list(r) for r in rows]
    if not work:
        return 0
    width = len(work[0])
    if any(len(r) != width for r in work):
        raise ValueError("rows must share a common length")
    rank = 0
    col = 0
    while rank < len(work) and col < width:
        pivot = next((i for i in range(rank, len(work)) if work[i][col]), None)
        if pivot is None:
            col += 1
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        lead_inv = field.inv(work[rank][col])
        work[rank] = [field.mul(lead_inv, x) for x in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][col]:
                factor = work[i][col]
                work[i] = [field.sub(x, field.mul(factor, y))
                           for x, y in zip(work[i], work[rank])]
        rank += 1
        col += 1
    return rank


def linearly_independent(field: Field, v: Vector, w: Vector) -> bool:
    """True iff no (lambda, mu) != (0, 0) has lambda*v + mu*w = 0 (exact rank)."""
    if len(v) != len(w):
        raise ValueError(f"dimension mismatch: {len(v)} vs {len(w)}")
    return matrix_rank(field, (v, w)) == 2


# ---------------------------------------------------------------------------
# affine lines


@dataclass(frozen=True)
class AffineLine:
    """A canonical affine line {base + t*direction : t in F_q}.

    Canonical form: the direction is scaled so its first nonzero coordinate
    is 1, and the base is the lexicographically smallest point on the line.
    Any two distinct points of a line therefore produce the identical object.
    """

    base: Vector
    direction: Vector
    points: tuple[Vector, ...]


def affine_line_through(field: Field, p0: Vector, p1: Vector) -> AffineLine:
    if p0 == p1:
        raise ValueError("a line needs two distinct points")
    if len(p0) != len(p1):
        raise ValueError(f"dimension mismatch: {len(p0)} vs {len(p1)}")
    direction = vec_sub(field, p1, p0)
    lead = next(c for c in direction if c)
    direction = vec_scale(field, field.inv(lead), direction)
    points = sorted(vec_add(field, p0, vec_scale(field, t, direction))
                    for t in field.elements())
    return AffineLine(base=points[0], direction=direction, points=tuple(points))
