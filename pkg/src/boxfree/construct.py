"""Random-multilinear-map construction of box-free d-partite hypergraphs.

The pipeline, for parameters (d, r, s) over GF(q) with V = F_q^s:

  1. draw r independent uniform d-linear forms on V^d;
  2. the edge set E is every tuple of nonzero vectors on which all r forms
     evaluate to 1;
  3. the box family F is every 2d-tuple of per-slot distinct pairs whose
     2^d corner tuples are all edges;
  4. F decomposes exactly into products over tuples of affine lines (L);
  5. the bad set B is the union of the full line products, and E' = E \\ B
     contains no box, which an independent detector confirms.

Everything is exact; Monte Carlo enters only through which forms are drawn.
Exhaustive "exact mode" averages over the entire space of forms instead and
must reproduce the closed-form expectations with zero error.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .bounds import check_params
from .gf import Field, Vector, affine_line_through, AffineLine, linearly_independent
from .tensor import MultilinearForm, _contract_first, evaluate, sample_uniform

Edge = tuple[Vector, ...]
BoxWitness = tuple[tuple[Vector, Vector], ...]


class BudgetError(RuntimeError):
    """Enumeration would exceed the configured budget; refuse rather than hang."""


class ConsistencyError(RuntimeError):
    """An exact identity the construction guarantees failed: implementation bug."""


class VerificationError(RuntimeError):
    """A verification step (box-freeness or a recorded value) did not hold."""


@dataclass(frozen=True)
class Budget:
    """Enumeration limits: tuple count (q^s)^d and tensor-space size q^(r*s^d)."""

    tuples: int = 10**7
    tensor_space: int = 2**20


DEFAULT_BUDGET = Budget()


class AmbientSpace:
    """V = F_q^s enumerated once, with cached pair-independence and lines."""

    def __init__(self, field: Field, s: int):
        self.field = field
        self.s = s
        self.vectors: tuple[Vector, ...] = tuple(
            itertools.product(range(field.q), repeat=s))
        self.nonzero_vectors: tuple[Vector, ...] = tuple(
            v for v in self.vectors if any(v))
        self._indep: dict[tuple[Vector, Vector], bool] = {}
        self._lines: dict[tuple[Vector, Vector], AffineLine] = {}

    def independent(self, u: Vector, v: Vector) -> bool:
        key = (u, v)
        cached = self._indep.get(key)
        if cached is None:
            cached = linearly_independent(self.field, u, v)
            self._indep[key] = cached
            self._indep[(v, u)] = cached
        return cached

    def line_through(self, u: Vector, v: Vector) -> AffineLine:
        key = (u, v) if u <= v else (v, u)
        line = self._lines.get(key)
        if line is None:
            line = affine_line_through(self.field, u, v)
            self._lines[key] = line
        return line

    def line_key(self, u: Vector, v: Vector) -> tuple[Vector, Vector]:
        line = self.line_through(u, v)
        return (line.base, line.direction)


@dataclass(frozen=True)
class Params:
    """Construction parameters (d, r, s) over a concrete field of size q.

    Derived quantities: the vertex count n = d*q^s, the target edge exponent
    d - r/s, the reference edge count q^(ds-r), and whether (d, r, s) lies in
    the regime d(s-1) < (2^d - 1)r where deletion is asymptotically free.
    """

    field: Field
    d: int
    r: int
    s: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"uniformity d must be >= 2, got {self.d}")
        if self.r < 1 or self.s < 1:
            raise ValueError(f"r and s must be >= 1, got r={self.r}, s={self.s}")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def n(self) -> int:
        return self.d * self.q**self.s

    @property
    def target_exponent(self) -> Fraction:
        return Fraction(self.d) - Fraction(self.r, self.s)

    @property
    def leading_constant(self) -> float:
        return float(self.d) ** (self.r / self.s - self.d)

    @property
    def in_theorem_regime(self) -> bool:
        return check_params(self.d, self.r, self.s)

    @property
    def expected_edges(self) -> Fraction:
        return Fraction((self.q**self.s - 1) ** self.d, self.q**self.r)

    @property
    def expected_boxes(self) -> Fraction:
        qs = self.q**self.s
        return Fraction((qs - 1) ** self.d * (qs - self.q) ** self.d,
                        self.q ** (2**self.d * self.r))

    @property
    def reference_kept(self) -> Fraction:
        return Fraction(self.q ** (self.d * self.s), self.q**self.r)

    @cached_property
    def space(self) -> AmbientSpace:
        return AmbientSpace(self.field, self.s)

    def form_dims(self) -> tuple[int, ...]:
        return (self.s,) * self.d


def trial_rng(seed: int, index: int) -> np.random.Generator:
    """Independent, reproducible per-trial stream keyed by (seed, trial index)."""
    return np.random.default_rng([int(seed), int(index)])


def sample_forms(params: Params, rng: np.random.Generator) -> tuple[MultilinearForm, ...]:
    return tuple(sample_uniform(params.field, params.form_dims(), rng)
                 for _ in range(params.r))


def _check_forms(params: Params, forms: Sequence[MultilinearForm]) -> None:
    if len(forms) != params.r:
        raise ValueError(f"expected {params.r} forms, got {len(forms)}")
    dims = params.form_dims()
    for i, form in enumerate(forms):
        if form.field != params.field:
            raise ValueError(f"form {i} lives over {form.field!r}, not {params.field!r}")
        if form.dims != dims:
            raise ValueError(f"form {i} has dims {form.dims}, expected {dims}")


# ---------------------------------------------------------------------------
# edge set


def build_edge_set(params: Params, forms: Sequence[MultilinearForm],
                   budget: Budget = DEFAULT_BUDGET) -> frozenset[Edge]:
    """All tuples of nonzero vectors on which every form evaluates to 1.

    Enumerates slot by slot, contracting each form against the chosen vector
    so the innermost loop only evaluates linear functionals.
    """
    _check_forms(params, forms)
    if (params.q**params.s) ** params.d > budget.tuples:
        raise BudgetError(
            f"(q^s)^d = {(params.q**params.s) ** params.d} exceeds the "
            f"tuple budget {budget.tuples}")
    field = params.field
    nonzero = params.space.nonzero_vectors
    add, mul = field.add_table, field.mul_table
    d = params.d
    edges: list[Edge] = []

    def descend(slot: int, prefix: Edge, states: list[Sequence[int]]) -> None:
        if slot == d - 1:
            for v in nonzero:
                for f in states:
                    acc = 0
                    for c, x in zip(f, v):
                        if c and x:
                            acc = add[acc][mul[c][x]]
                    if acc != 1:
                        break
                else:
                    edges.append(prefix + (v,))
            return
        dims_tail = (params.s,) * (d - slot)
        for v in nonzero:
            nxt = [_contract_first(field, st, dims_tail, v) for st in states]
            descend(slot + 1, prefix + (v,), nxt)

    descend(0, (), [form.coeffs for form in forms])
    return frozenset(edges)


# ---------------------------------------------------------------------------
# box family


def _ordered_boxes(space: AmbientSpace, edges: Iterable[tuple], depth: int) -> list:
    """All ordered per-slot pairs of linearly independent values whose full
    corner product lies inside ``edges``; drives on edge-set intersections.

    Collinear pairs are skipped outright: two edges differing by a scalar in
    one slot would need 1 = lambda * 1, so they never share a suffix anyway.
    """
    links: dict[Vector, set] = {}
    for e in edges:
        links.setdefault(e[0], set()).add(e[1:])
    keys = sorted(links)
    independent = space.independent
    out = []
    for a in keys:
        la = links[a]
        for b in keys:
            if a == b or not independent(a, b):
                continue
            if depth == 1:
                out.append(((a, b),))
                continue
            common = la & links[b]
            if not common:
                continue
            pair = (a, b)
            for tail in _ordered_boxes(space, common, depth - 1):
                out.append((pair,) + tail)
    return out


def find_boxes(params: Params, forms: Sequence[MultilinearForm],
               edges: Optional[frozenset[Edge]] = None,
               budget: Budget = DEFAULT_BUDGET) -> frozenset[BoxWitness]:
    """The family F: ordered tuples (pairs per slot, distinct within each slot)
    whose 2^d corner tuples all evaluate to 1 under every form.

    Every corner of a member is an edge, so F is recovered from the edge set
    by repeated link intersection; see find_boxes_bruteforce for the direct
    corner-evaluation oracle used to cross-check this on small instances.
    """
    if edges is None:
        edges = build_edge_set(params, forms, budget)
    else:
        _check_forms(params, forms)
    return frozenset(_ordered_boxes(params.space, edges, params.d))


def find_boxes_bruteforce(params: Params, forms: Sequence[MultilinearForm],
                          budget: Budget = DEFAULT_BUDGET) -> frozenset[BoxWitness]:
    """Independent oracle for find_boxes: enumerate every ordered tuple of
    linearly independent pairs and test all 2^d corners by direct evaluation.
    """
    _check_forms(params, forms)
    space = params.space
    pairs = [(u, v)
             for u in space.nonzero_vectors
             for v in space.nonzero_vectors
             if u != v and space.independent(u, v)]
    if len(pairs) ** params.d > budget.tuples:
        raise BudgetError(
            f"{len(pairs)}^{params.d} pair tuples exceed the budget {budget.tuples}")
    corners = list(itertools.product(range(2), repeat=params.d))
    out = []
    for combo in itertools.product(pairs, repeat=params.d):
        good = True
        for eps in corners:
            args = tuple(combo[j][eps[j]] for j in range(params.d))
            if any(evaluate(f, args) != 1 for f in forms):
                good = False
                break
        if good:
            out.append(combo)
    return frozenset(out)


# ---------------------------------------------------------------------------
# line decomposition


@dataclass(frozen=True)
class LineTuple:
    """A tuple of canonical affine lines; its distinct-point product has
    exactly q^d (q-1)^d members."""

    lines: tuple[AffineLine, ...]

    @property
    def product_size(self) -> int:
        return math.prod(len(l.points) * (len(l.points) - 1) for l in self.lines)


def lines_of_boxes(space: AmbientSpace,
                   boxes: Iterable[BoxWitness]) -> frozenset[LineTuple]:
    """The set L of line tuples whose distinct-point products meet the box
    family.  On every instance |L| * q^d * (q-1)^d = |F| exactly."""
    found: dict[tuple, LineTuple] = {}
    for witness in boxes:
        key = tuple(space.line_key(v0, v1) for v0, v1 in witness)
        if key not in found:
            found[key] = LineTuple(tuple(space.line_through(v0, v1)
                                         for v0, v1 in witness))
    return frozenset(found.values())


def box_counts_by_line(space: AmbientSpace,
                       boxes: Iterable[BoxWitness]) -> Counter:
    """How many members of F fall in each line tuple's point product.

    The decomposition is exact: every count must equal q^d (q-1)^d, which is
    what makes the sets disjoint and fully contained in F.
    """
    counts: Counter = Counter()
    for witness in boxes:
        counts[tuple(space.line_key(v0, v1) for v0, v1 in witness)] += 1
    return counts


# ---------------------------------------------------------------------------
# bad set and deletion


def bad_edges(edges: frozenset[Edge],
              line_tuples: Iterable[LineTuple]) -> frozenset[Edge]:
    """B: the union of the full line products l_1 x ... x l_d over L.

    Every point of such a product evaluates to 1 under every form (the
    affine-hull property), so each one must already be an edge; a product
    point outside E signals an implementation bug.
    """
    bad: set[Edge] = set()
    for lt in line_tuples:
        for combo in itertools.product(*(l.points for l in lt.lines)):
            if combo not in edges:
                raise ConsistencyError(
                    f"line-product point {combo} is not an edge")
            bad.add(combo)
    return frozenset(bad)


def bad_edges_direct(params: Params, forms: Sequence[MultilinearForm],
                     edges: frozenset[Edge],
                     budget: Budget = DEFAULT_BUDGET) -> frozenset[Edge]:
    """Independent oracle for bad_edges: an edge is bad iff it extends to a
    member of F, found by brute-force search over partner tuples.

    Per slot, a partner value must first make the single-swap corner equal 1
    for every form; surviving combinations are then tested on the remaining
    corners.  This is the definition, just with early exits.
    """
    _check_forms(params, forms)
    space = params.space
    if len(edges) * len(space.vectors) ** params.d > budget.tuples:
        raise BudgetError("direct bad-edge search exceeds the tuple budget")
    d = params.d
    mixed_corners = [eps for eps in itertools.product(range(2), repeat=d)
                     if sum(eps) >= 2]
    bad = []
    for edge in edges:
        candidates: list[list[Vector]] = []
        for j in range(d):
            cj = []
            for v in space.vectors:
                if v == edge[j]:
                    continue
                args = edge[:j] + (v,) + edge[j + 1:]
                if all(evaluate(f, args) == 1 for f in forms):
                    cj.append(v)
            if not cj:
                break
            candidates.append(cj)
        if len(candidates) < d:
            continue
        for partner in itertools.product(*candidates):
            extends = True
            for eps in mixed_corners:
                args = tuple(partner[j] if eps[j] else edge[j] for j in range(d))
                if any(evaluate(f, args) != 1 for f in forms):
                    extends = False
                    break
            if extends:
                bad.append(edge)
                break
    return frozenset(bad)


def search_box(edges: Iterable[Edge]) -> Optional[BoxWitness]:
    """Brute-force box detector, independent of the construction.

    Works purely on edge-set membership: pick two distinct slot values, keep
    the suffixes they share, recurse.  Returns the first witness found (all
    2^d corners present) or None.  No field structure is consulted, so it
    also works on arbitrary planted edge sets.
    """
    edge_list = list(edges)
    if not edge_list:
        return None

    def recurse(suffixes: set, depth: int) -> Optional[BoxWitness]:
        links: dict = {}
        for e in suffixes:
            links.setdefault(e[0], set()).add(e[1:])
        keys = sorted(links)
        for i, a in enumerate(keys):
            la = links[a]
            for b in keys[i + 1:]:
                if depth == 1:
                    return ((a, b),)
                common = la & links[b]
                if not common:
                    continue
                tail = recurse(common, depth - 1)
                if tail is not None:
                    return ((a, b),) + tail
        return None

    return recurse(set(edge_list), len(edge_list[0]))


def delete_and_verify(edges: frozenset[Edge],
                      bad: frozenset[Edge]) -> tuple[frozenset[Edge], Optional[BoxWitness]]:
    """Remove the bad set and re-search for boxes in what remains.

    Returns (E', witness).  A non-None witness means the construction failed;
    callers treat that as a verification error.
    """
    if not bad <= edges:
        raise ValueError("the bad set must be a subset of the edge set")
    kept = edges - bad
    return kept, search_box(kept)


# ---------------------------------------------------------------------------
# one full instance


@dataclass(frozen=True)
class Instance:
    """A fully built and checked instance of the construction."""

    params: Params
    forms: tuple[MultilinearForm, ...]
    edges: frozenset[Edge]
    boxes: frozenset[BoxWitness]
    line_tuples: frozenset[LineTuple]
    bad: frozenset[Edge]
    kept: frozenset[Edge]
    witness: Optional[BoxWitness]

    @property
    def box_free(self) -> bool:
        return self.witness is None


def build_instance(params: Params, forms: Sequence[MultilinearForm],
                   budget: Budget = DEFAULT_BUDGET) -> Instance:
    """Run the full pipeline and enforce its exact identities.

    Raises ConsistencyError if the line decomposition of F is not exact
    (every line tuple's product contributing exactly q^d (q-1)^d members) or
    if the bad-set bounds |B| <= q^d |L| and |B| (q-1)^d <= |F| fail.
    """
    q, d = params.q, params.d
    space = params.space
    edges = build_edge_set(params, forms, budget)
    boxes = find_boxes(params, forms, edges=edges, budget=budget)

    full_product = q**d * (q - 1) ** d
    counts = box_counts_by_line(space, boxes)
    for key, count in counts.items():
        if count != full_product:
            raise ConsistencyError(
                f"line tuple {key} covers {count} boxes, expected {full_product}")
    line_tuples = lines_of_boxes(space, boxes)
    if len(boxes) != len(line_tuples) * full_product:
        raise ConsistencyError(
            f"|F| = {len(boxes)} != |L| * q^d (q-1)^d = "
            f"{len(line_tuples) * full_product}")

    bad = bad_edges(edges, line_tuples)
    if len(bad) > q**d * len(line_tuples):
        raise ConsistencyError("|B| exceeds q^d |L|")
    if len(bad) * (q - 1) ** d > len(boxes):
        raise ConsistencyError("|B| (q-1)^d exceeds |F|")

    kept, witness = delete_and_verify(edges, bad)
    return Instance(params=params, forms=tuple(forms), edges=edges, boxes=boxes,
                    line_tuples=line_tuples, bad=bad, kept=kept, witness=witness)


# ---------------------------------------------------------------------------
# trials


@dataclass(frozen=True)
class TrialRecord:
    index: int
    edges: int
    boxes: int
    line_tuples: int
    bad: int
    kept: int
    box_free: bool
    good: bool


def _mean(values: Sequence[int]) -> Fraction:
    return Fraction(sum(values), len(values))


def _stderr(values: Sequence[int]) -> Optional[float]:
    n = len(values)
    if n < 2:
        return None
    mean = sum(values) / n
    var = sum((x - mean) ** 2 for x in values) / (n - 1)
    return math.sqrt(var / n)


@dataclass(frozen=True)
class TrialStats:
    """Per-trial sizes plus exact means and reference values.

    Means are kept as exact rationals: in exact mode they must equal the
    closed forms (q^s-1)^d q^-r and (q^s-1)^d (q^s-q)^d q^(-2^d r) with zero
    error, and in sampled mode they are compared via standard errors.
    """

    params: Params
    mode: str
    seed: int
    delta: float
    records: tuple[TrialRecord, ...]

    @property
    def trials(self) -> int:
        return len(self.records)

    def _values(self, name: str) -> list[int]:
        return [getattr(rec, name) for rec in self.records]

    def mean(self, name: str) -> Fraction:
        return _mean(self._values(name))

    def stderr(self, name: str) -> Optional[float]:
        return _stderr(self._values(name))

    def zscore(self, name: str, expected: Fraction) -> Optional[float]:
        se = self.stderr(name)
        if se is None or se == 0.0:
            return None
        return (float(self.mean(name)) - float(expected)) / se

    @property
    def all_box_free(self) -> bool:
        return all(rec.box_free for rec in self.records)

    @property
    def good_fraction(self) -> Fraction:
        return Fraction(sum(rec.good for rec in self.records), self.trials)

    def summary(self) -> dict:
        p = self.params
        return {
            "trials": self.trials,
            "mode": self.mode,
            "mean_edges": str(self.mean("edges")),
            "mean_boxes": str(self.mean("boxes")),
            "mean_line_tuples": str(self.mean("line_tuples")),
            "mean_bad": str(self.mean("bad")),
            "mean_kept": str(self.mean("kept")),
            "se_edges": self.stderr("edges"),
            "se_boxes": self.stderr("boxes"),
            "expected_edges": str(p.expected_edges),
            "expected_boxes": str(p.expected_boxes),
            "z_edges": self.zscore("edges", p.expected_edges),
            "z_boxes": self.zscore("boxes", p.expected_boxes),
            "reference_kept": str(p.reference_kept),
            "all_box_free": self.all_box_free,
            "good_fraction": str(self.good_fraction),
            "delta": self.delta,
        }


def exact_mode_forms(params: Params, index: int) -> tuple[MultilinearForm, ...]:
    """Decode enumeration index -> the index-th r-tuple of forms, covering the
    entire tensor space exactly once as the index runs over q^(r*s^d)."""
    q = params.q
    size = params.s**params.d
    per = q**size
    dims = params.form_dims()
    forms = []
    for j in range(params.r):
        block = (index // per**j) % per
        coeffs = tuple((block // q**t) % q for t in range(size))
        forms.append(MultilinearForm(params.field, dims, coeffs))
    return tuple(forms)


def run_trials(params: Params, trials: Optional[int] = None, seed: int = 0,
               mode: str = "sample", budget: Budget = DEFAULT_BUDGET,
               delta: float = 0.5) -> TrialStats:
    """Run the pipeline over many instances and aggregate sizes.

    mode="exact" enumerates every point of the tensor space (all r-tuples of
    forms); mode="sample" draws `trials` independent seeded instances, each
    from its own (seed, index) stream, so runs are reproducible and trials
    could be distributed without coordination.
    """
    if mode not in ("exact", "sample"):
        raise ValueError(f"mode must be 'exact' or 'sample', got {mode!r}")
    threshold = (1.0 - delta) * float(params.reference_kept)

    def record(index: int, inst: Instance) -> TrialRecord:
        return TrialRecord(
            index=index,
            edges=len(inst.edges),
            boxes=len(inst.boxes),
            line_tuples=len(inst.line_tuples),
            bad=len(inst.bad),
            kept=len(inst.kept),
            box_free=inst.box_free,
            good=len(inst.kept) >= threshold,
        )

    records = []
    if mode == "exact":
        total = params.q ** (params.r * params.s**params.d)
        if total > budget.tensor_space:
            raise BudgetError(
                f"tensor space of size {total} exceeds the budget "
                f"{budget.tensor_space}")
        for index in range(total):
            inst = build_instance(params, exact_mode_forms(params, index), budget)
            records.append(record(index, inst))
    else:
        if trials is None or trials < 1:
            raise ValueError("sampled mode needs trials >= 1")
        if seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        for index in range(trials):
            forms = sample_forms(params, trial_rng(seed, index))
            inst = build_instance(params, forms, budget)
            records.append(record(index, inst))
    return TrialStats(params=params, mode=mode, seed=seed, delta=delta,
                      records=tuple(records))
