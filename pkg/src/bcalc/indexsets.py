"""Exact algebra of index sets for boundary asymptotic expansions.

An index set prescribes which terms ``x^z log^p x`` may occur in the
expansion of a function at a boundary hypersurface with defining function
``x``.  Sets are always stored in completed form: membership of ``(z, p)``
implies membership of ``(z + 1, p)`` and of ``(z, q)`` for every ``q <= p``.
Only a finite, canonical generator set is kept (no generator is implied by
another), so equality of index sets is equality of generator sets, and every
"left segment" ``Re z <= N`` is a finite, enumerable list.

Exponents are exact complex rationals; all arithmetic here is exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from .rationals import ComplexRational, as_fraction

# The exponent z in x^z log^p x.
Exponent = ComplexRational


def _as_exponent(value) -> Exponent:
    return ComplexRational.of(value)


def integer_gap(a: Exponent, b: Exponent):
    """Return the integer k with a = b + k, or None if there is no such k."""
    if a.im != b.im:
        return None
    diff = a.re - b.re
    if diff.denominator != 1:
        return None
    return int(diff)


@dataclass(frozen=True)
class IndexEntry:
    """A single pair (z, p): the term x^z log^p x."""

    z: Exponent
    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 0:
            raise ValueError(f"log power must be a non-negative integer, got {self.p!r}")

    def implies(self, other: "IndexEntry") -> bool:
        """True if ``other`` lies in the completion of this entry alone."""
        if other.p > self.p:
            return False
        gap = integer_gap(other.z, self.z)
        return gap is not None and gap >= 0

    def sort_key(self):
        return (self.z.re, self.z.im, self.p)

    def to_jsonable(self) -> dict:
        return {"re": str(self.z.re), "im": str(self.z.im), "p": self.p}

    @classmethod
    def of(cls, value) -> "IndexEntry":
        if isinstance(value, IndexEntry):
            return value
        z, p = value
        return cls(_as_exponent(z), int(p))


def _reduce(entries) -> frozenset:
    """Drop every entry implied by a different entry (canonical generators)."""
    pool = set(entries)
    kept = set()
    for e in pool:
        if not any(other != e and other.implies(e) for other in pool):
            kept.add(e)
    return frozenset(kept)


@dataclass(frozen=True)
class IndexSet:
    """A completed, finitely generated index set.

    ``generators`` is the canonical reduced generator set; the members of the
    index set are all ``(z0 + k, q)`` with ``(z0, p0)`` a generator,
    ``k`` a non-negative integer and ``q <= p0``.
    """

    generators: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_entries(cls, entries) -> "IndexSet":
        """Complete a raw finite entry list to the smallest index set containing it."""
        return cls(_reduce(IndexEntry.of(e) for e in entries))

    # -- membership and measurement -------------------------------------

    @property
    def is_empty(self) -> bool:
        return not self.generators

    def contains(self, z, p: int = 0) -> bool:
        probe = IndexEntry(_as_exponent(z), p)
        return any(g.implies(probe) for g in self.generators)

    def max_log_power(self, z):
        """Largest p with (z, p) in the set, or None if z is absent."""
        zz = _as_exponent(z)
        best = None
        for g in self.generators:
            gap = integer_gap(zz, g.z)
            if gap is not None and gap >= 0:
                best = g.p if best is None else max(best, g.p)
        return best

    def inf_re(self):
        """min Re z over the set; +inf for the empty set.

        The +inf sentinel makes integrability conditions of the form
        ``inf E > 0`` vacuously true for empty index sets.
        """
        if not self.generators:
            return math.inf
        return min(g.z.re for g in self.generators)

    # -- algebra ----------------------------------------------------------

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(_reduce(self.generators | other.generators))

    __or__ = union

    def extended_union(self, other: "IndexSet") -> "IndexSet":
        """Union plus the log-raising cross terms at shared exponents.

        The result contains, besides all members of both sets, every
        ``(z, p' + p'' + 1)`` with ``(z, p')`` in one set and ``(z, p'')``
        in the other.  On generators it suffices to pair generators whose
        exponents differ by an integer; the shared exponent is the larger
        one.
        """
        cross = set()
        for gi in self.generators:
            for gj in other.generators:
                gap = integer_gap(gi.z, gj.z)
                if gap is None:
                    continue
                z_shared = gi.z if gap >= 0 else gj.z
                cross.add(IndexEntry(z_shared, gi.p + gj.p + 1))
        return IndexSet(_reduce(self.generators | other.generators | cross))

    def sum_with(self, other: "IndexSet") -> "IndexSet":
        """Pointwise sum {(z + w, k + l)}; empty if either factor is empty."""
        gens = (
            IndexEntry(gi.z + gj.z, gi.p + gj.p)
            for gi, gj in itertools.product(self.generators, other.generators)
        )
        return IndexSet(_reduce(gens))

    __add__ = sum_with

    def shift(self, delta) -> "IndexSet":
        """Translate every exponent by a fixed rational offset."""
        d = _as_exponent(delta)
        return IndexSet(frozenset(IndexEntry(g.z + d, g.p) for g in self.generators))

    def scale_down(self, e: int) -> "IndexSet":
        """The set {(z/e, p)} for integer e >= 1, completed.

        Division by e turns the integer-shift closure into a 1/e-shift
        closure, so each generator expands into e chains.
        """
        if e < 1:
            raise ValueError("scale factor must be a positive integer")
        gens = [
            IndexEntry((g.z + k) / e, g.p)
            for g in self.generators
            for k in range(e)
        ]
        return IndexSet(_reduce(gens))

    def negate(self):
        """Negated generators as a raw, sorted entry list.

        The negation of a completed index set is not completed, so no
        IndexSet is returned; this is only used for boundary-spectrum
        comparisons.
        """
        return tuple(
            sorted((IndexEntry(-g.z, g.p) for g in self.generators), key=IndexEntry.sort_key)
        )

    def truncate(self, bound):
        """All members with Re z <= bound, sorted by (Re z, Im z, p)."""
        limit = as_fraction(bound)
        members = set()
        for g in self.generators:
            k = 0
            while g.z.re + k <= limit:
                for p in range(g.p + 1):
                    members.add(IndexEntry(g.z + k, p))
                k += 1
        return tuple(sorted(members, key=IndexEntry.sort_key))

    # -- serialization ----------------------------------------------------

    def sorted_generators(self):
        return tuple(sorted(self.generators, key=IndexEntry.sort_key))

    def to_jsonable(self) -> dict:
        return {"generators": [g.to_jsonable() for g in self.sorted_generators()]}

    @classmethod
    def from_jsonable(cls, data: dict) -> "IndexSet":
        return cls.from_entries(
            (Exponent(as_fraction(g["re"]), as_fraction(g.get("im", 0))), g["p"])
            for g in data["generators"]
        )

    def __str__(self) -> str:
        if self.is_empty:
            return "{}"
        parts = ", ".join(f"({g.z},{g.p})" for g in self.sorted_generators())
        return "{" + parts + "}+N0"


def complete(entries) -> IndexSet:
    """Smallest index set containing the given raw entries."""
    return IndexSet.from_entries(entries)


EMPTY = IndexSet()
#: The index set of functions smooth up to the boundary: {(n, 0) : n in N0}.
SMOOTH = IndexSet.from_entries([(0, 0)])


@dataclass(frozen=True)
class IndexFamily:
    """Assignment of one index set to each boundary hypersurface name."""

    sets: tuple  # tuple of (bhs name, IndexSet), sorted by name

    @classmethod
    def of(cls, mapping, lattice=None) -> "IndexFamily":
        items = {str(k): v if isinstance(v, IndexSet) else IndexSet.from_entries(v)
                 for k, v in dict(mapping).items()}
        if lattice is not None:
            expected = set(lattice.bhs_names)
            if set(items) != expected:
                raise ValueError(
                    f"family names {sorted(items)} do not match lattice bhs {sorted(expected)}"
                )
        return cls(tuple(sorted(items.items())))

    @property
    def names(self):
        return tuple(name for name, _ in self.sets)

    def __getitem__(self, name: str) -> IndexSet:
        for n, s in self.sets:
            if n == name:
                return s
        raise KeyError(name)

    def as_dict(self) -> dict:
        return dict(self.sets)

    def shift(self, delta) -> "IndexFamily":
        return IndexFamily(tuple((n, s.shift(delta)) for n, s in self.sets))

    def sum_with(self, other: "IndexFamily") -> "IndexFamily":
        if self.names != other.names:
            raise ValueError("families live on different boundary hypersurface sets")
        return IndexFamily(tuple((n, s + other[n]) for n, s in self.sets))

    def to_jsonable(self) -> dict:
        return {"assignment": {n: s.to_jsonable() for n, s in self.sets}}

    @classmethod
    def from_jsonable(cls, data: dict) -> "IndexFamily":
        return cls.of({n: IndexSet.from_jsonable(s) for n, s in data["assignment"].items()})
