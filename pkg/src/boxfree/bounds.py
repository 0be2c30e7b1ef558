"""Closed-form lower-bound exponents for the extremal number of the
d-dimensional box (complete d-partite d-uniform hypergraph, two vertices per
part), and the comparison table across methods.

Each method is summarized by a number alpha: it proves a lower bound of the
form n^(d - 1/alpha), so larger alpha is stronger.  All arithmetic is exact
(big-integer rationals); decimals appear only when rendering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional


def deletion_alpha(d: int) -> Fraction:
    """Baseline from random hypergraphs plus deletion: alpha = (2^d - 1) / d."""
    if d < 2:
        raise ValueError(f"uniformity d must be >= 2, got {d}")
    return Fraction(2**d - 1, d)


def grs_alpha(d: int) -> Optional[tuple[int, Fraction]]:
    """Hyperplane-amplified deletion: needs the smallest s with
    (sd - 1) / (2^d - 1) an integer, which exists iff gcd(d, 2^d - 1) = 1.

    Returns (s, alpha) with alpha = s (2^d - 1) / (sd - 1), or None when no
    such s exists.  The minimal s is the representative of d^-1 modulo
    2^d - 1 in [1, 2^d - 1].
    """
    if d < 2:
        raise ValueError(f"uniformity d must be >= 2, got {d}")
    m = 2**d - 1
    if math.gcd(d, m) != 1:
        return None
    s = pow(d, -1, m)
    return s, Fraction(s * m, s * d - 1)


def check_params(d: int, r: int, s: int) -> bool:
    """Whether (d, r, s) satisfies d(s - 1) < (2^d - 1) r."""
    if d < 2 or r < 1 or s < 1:
        raise ValueError(f"need d >= 2 and r, s >= 1, got d={d}, r={r}, s={s}")
    return d * (s - 1) < (2**d - 1) * r


def _best_s(d: int, r: int) -> int:
    """Largest s with d(s - 1) < (2^d - 1) r."""
    return ((2**d - 1) * r - 1) // d + 1


def new_alpha(d: int, r_max: int = 1) -> tuple[int, int, Fraction]:
    """Multilinear-map bound: maximize alpha = s/r over r <= r_max subject to
    d(s - 1) < (2^d - 1) r, ties to the smaller r.

    For r_max = 1 this is r = 1, s = ceil((2^d - 1) / d), valid for every
    d >= 2 because d never divides 2^d - 1.
    """
    if d < 2:
        raise ValueError(f"uniformity d must be >= 2, got {d}")
    if r_max < 1:
        raise ValueError(f"r_max must be >= 1, got {r_max}")
    best: Optional[tuple[int, int, Fraction]] = None
    for r in range(1, r_max + 1):
        s = _best_s(d, r)
        alpha = Fraction(s, r)
        if best is None or alpha > best[2]:
            best = (r, s, alpha)
    assert best is not None
    return best


def larger_r_improves(d: int, r_max: int) -> bool:
    """Whether any r in (1, r_max] beats r = 1 (reported, never assumed)."""
    return new_alpha(d, r_max)[2] > new_alpha(d, 1)[2]


@dataclass(frozen=True)
class BoundsRow:
    """Exponent parameters for one uniformity d; grs fields are None when the
    method does not apply (gcd(d, 2^d - 1) > 1)."""

    d: int
    deletion: Fraction
    grs_s: Optional[int]
    grs: Optional[Fraction]
    new_r: int
    new_s: int
    new: Fraction


def comparison_table(d_min: int, d_max: int, r_max: int = 1) -> tuple[BoundsRow, ...]:
    if not 2 <= d_min <= d_max:
        raise ValueError(f"need 2 <= d_min <= d_max, got {d_min}..{d_max}")
    rows = []
    for d in range(d_min, d_max + 1):
        grs = grs_alpha(d)
        r, s, alpha = new_alpha(d, r_max)
        rows.append(BoundsRow(
            d=d,
            deletion=deletion_alpha(d),
            grs_s=grs[0] if grs else None,
            grs=grs[1] if grs else None,
            new_r=r,
            new_s=s,
            new=alpha,
        ))
    return tuple(rows)


def format_alpha(x: Fraction) -> str:
    """Render to two decimals, truncating toward zero (the table convention)."""
    if x < 0:
        raise ValueError("alphas are positive")
    hundredths = (x.numerator * 100) // x.denominator
    return f"{hundredths // 100}.{hundredths % 100:02d}"
