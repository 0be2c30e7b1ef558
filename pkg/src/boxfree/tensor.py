"""Dense multilinear forms on products of small F_q vector spaces.

A form T on V_1 x ... x V_d is stored as the flat row-major array of its
values on basis tuples, i.e. ``coeffs[flat(i_1..i_d)] = T(e_{i_1}, .., e_{i_d})``.
Evaluation contracts one slot at a time, which also gives cheap partial
application (fix the first argument, get a form of one lower arity).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .gf import Field, Vector, make_field, matrix_rank


@dataclass(frozen=True)
class MultilinearForm:
    """A multilinear function F_q^{m_1} x ... x F_q^{m_d} -> F_q.

    ``dims`` lists the per-slot dimensions (m_1, ..., m_d); ``coeffs`` holds
    the prod(dims) values on basis tuples in row-major multi-index order.
    Arity 1 (a linear functional) is allowed so that partial application and
    slot recursion stay closed under the type.
    """

    field: Field
    dims: tuple[int, ...]
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.dims) < 1 or any(m < 1 for m in self.dims):
            raise ValueError(f"dims must be positive, got {self.dims}")
        if len(self.coeffs) != math.prod(self.dims):
            raise ValueError(
                f"expected {math.prod(self.dims)} coefficients for dims "
                f"{self.dims}, got {len(self.coeffs)}")
        if any(c < 0 or c >= self.field.q for c in self.coeffs):
            raise ValueError("coefficients must be field elements in [0, q)")

    @property
    def arity(self) -> int:
        return len(self.dims)


def sample_uniform(field: Field, dims: Sequence[int],
                   rng: np.random.Generator) -> MultilinearForm:
    """Draw a uniformly random multilinear form: every coefficient i.i.d. uniform.

    The caller owns the generator, so reproducing a draw is a matter of
    reseeding; this module never touches global randomness.
    """
    dims = tuple(int(m) for m in dims)
    if len(dims) < 2:
        raise ValueError("a multilinear form needs arity >= 2")
    size = math.prod(dims)
    raw = rng.integers(0, field.q, size=size)
    return MultilinearForm(field, dims, tuple(int(c) for c in raw))


def _contract_first(field: Field, coeffs: Sequence[int], dims: Sequence[int],
                    vec: Vector) -> list[int]:
    """Contract the leading slot against vec: out[rest] = sum_i coeffs[i,rest]*vec[i]."""
    add, mul = field.add_table, field.mul_table
    stride = math.prod(dims[1:]) if len(dims) > 1 else 1
    out = [0] * stride
    offset = 0
    for vi in vec:
        if vi:
            row = mul[vi]
            for j in range(stride):
                c = coeffs[offset + j]
                if c:
                    out[j] = add[out[j]][row[c]]
        offset += stride
    return out


def evaluate(form: MultilinearForm, args: Sequence[Vector]) -> int:
    """T(v_1, ..., v_d), the full multi-index sum of coeff * v_1[i_1] * ... * v_d[i_d]."""
    if len(args) != form.arity:
        raise ValueError(f"form has arity {form.arity}, got {len(args)} arguments")
    for slot, (m, v) in enumerate(zip(form.dims, args)):
        if len(v) != m:
            raise ValueError(f"slot {slot} expects dimension {m}, got {len(v)}")
    coeffs: Sequence[int] = form.coeffs
    dims = form.dims
    for v in args:
        coeffs = _contract_first(form.field, coeffs, dims, v)
        dims = dims[1:]
    return coeffs[0]


def partial_apply(form: MultilinearForm, vec: Vector) -> MultilinearForm:
    """Fix the first slot at vec, producing a form of arity one lower."""
    if form.arity < 2:
        raise ValueError("cannot partially apply a linear functional")
    if len(vec) != form.dims[0]:
        raise ValueError(f"first slot expects dimension {form.dims[0]}, got {len(vec)}")
    coeffs = _contract_first(form.field, form.coeffs, form.dims, vec)
    return MultilinearForm(form.field, form.dims[1:], tuple(coeffs))


@dataclass(frozen=True)
class SubspaceBasis:
    """An ordered, linearly independent family spanning a subspace of F_q^m."""

    vectors: tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.vectors)


def restrict(form: MultilinearForm, bases: Sequence[SubspaceBasis]) -> MultilinearForm:
    """Restriction of the form to chosen subspaces, in the given bases.

    The coefficient at multi-index (i_1, ..., i_d) of the restricted form is
    the value of the original form on the corresponding basis vectors, so the
    restriction is computed by prod(dims) direct evaluations.
    """
    if len(bases) != form.arity:
        raise ValueError(f"form has arity {form.arity}, got {len(bases)} bases")
    for slot, (m, basis) in enumerate(zip(form.dims, bases)):
        if any(len(v) != m for v in basis.vectors):
            raise ValueError(f"slot {slot} basis vectors must have dimension {m}")
        if matrix_rank(form.field, basis.vectors) != basis.dim:
            raise ValueError(f"slot {slot} basis vectors are linearly dependent")
    new_dims = tuple(b.dim for b in bases)
    coeffs = tuple(evaluate(form, combo)
                   for combo in itertools.product(*(b.vectors for b in bases)))
    return MultilinearForm(form.field, new_dims, coeffs)


def corner_interpolant(field: Field,
                       pairs: Sequence[tuple[Vector, Vector]]) -> MultilinearForm:
    """The unique form on the spans of d independent pairs taking value 1 at
    every one of the 2^d corner tuples.

    In the coordinates of the pairs themselves the corners are exactly the
    basis tuples, so the coefficient array is all ones.  Its defining
    property extends to the full product of affine hulls: writing
    u = a*v0 + (1-a)*v1 in each slot, multilinearity expands the value into
    a product of coefficient sums, each equal to 1.
    """
    if not pairs:
        raise ValueError("at least one pair is required")
    for slot, (v0, v1) in enumerate(pairs):
        if matrix_rank(field, (v0, v1)) != 2:
            raise ValueError(f"slot {slot} pair is collinear")
    d = len(pairs)
    return MultilinearForm(field, (2,) * d, (1,) * (2**d))


def pair_coordinates(field: Field, pair: tuple[Vector, Vector],
                     u: Vector) -> Optional[tuple[int, int]]:
    """Coordinates (a, b) with u = a*v0 + b*v1, or None if u is outside the span."""
    v0, v1 = pair
    add, mul, sub = field.add, field.mul, field.sub
    rows = [[v0[i], v1[i], u[i]] for i in range(len(u))]
    rank = 0
    for col in range(2):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = field.inv(rows[rank][col])
        rows[rank] = [mul(inv, x) for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [sub(x, mul(f, y)) for x, y in zip(rows[i], rows[rank])]
        rank += 1
    if any(row[2] for row in rows[rank:]):
        return None
    coords = [0, 0]
    r = 0
    for col in range(2):
        if r < rank and rows[r][col] == 1 and all(rows[j][col] == 0 for j in range(len(rows)) if j != r):
            coords[col] = rows[r][2]
            r += 1
    # verify (guards against a pivot pattern the scan above misread)
    rebuilt = tuple(add(mul(coords[0], a), mul(coords[1], b)) for a, b in zip(v0, v1))
    if rebuilt != u:
        return None
    return coords[0], coords[1]


# ---------------------------------------------------------------------------
# wire format: header (p, k, modulus, arity, dims) plus flat value list


def form_to_wire(form: MultilinearForm) -> dict:
    return {
        "p": form.field.p,
        "k": form.field.k,
        "modulus": list(form.field.modulus),
        "arity": form.arity,
        "dims": list(form.dims),
        "coeffs": list(form.coeffs),
    }


def form_from_wire(obj: dict) -> MultilinearForm:
    field = make_field(int(obj["p"]), int(obj["k"]),
                       tuple(int(c) for c in obj["modulus"]))
    dims = tuple(int(m) for m in obj["dims"])
    if int(obj.get("arity", len(dims))) != len(dims):
        raise ValueError("arity does not match dims in serialized form")
    return MultilinearForm(field, dims, tuple(int(c) for c in obj["coeffs"]))
