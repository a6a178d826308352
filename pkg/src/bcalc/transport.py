"""Index-family transport along b-maps.

Pull-back: exponents transform linearly through the exponent matrix, log
powers add, and a free non-negative integer offset accounts for the smooth
coefficient factors.

Push-forward (of b-densities, i.e. against dx/x factors): for a map to the
half-line, every face contributes the extended union of its hypersurfaces'
index sets scaled by the vanishing orders; the result is the plain union of
the face contributions.  Hypersurfaces that do not map into the boundary
must carry index sets with inf Re z > 0 (integrability); violations are
reported, not raised, so divergent regimes can still be inspected.

A general target is handled column by column through the half-line case;
this requires the map to be a b-fibration and that refusal is an error.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import BMapError, NotBFibration
from .geometry import BMapDescriptor, check_b_fibration
from .indexsets import EMPTY, SMOOTH, IndexFamily, IndexSet


def pull_back_family(f: BMapDescriptor, family: IndexFamily) -> IndexFamily:
    """Index family of a pull-back along ``f``.

    For a source hypersurface G the set is
    ``{(q + sum_H e(G,H) z_H, sum_H p_H)}`` with q a non-negative integer and
    (z_H, p_H) ranging over the target family wherever e(G,H) > 0.  Combining
    generators (rather than all members) and completing is exact, because
    both the q offset and the generator closure only add non-negative
    integers.
    """
    if set(family.names) != set(f.target.bhs_names):
        raise BMapError("family is not indexed by the target's boundary hypersurfaces")
    out = {}
    for g in f.source.bhs_names:
        positive = [(h, f.e(g, h)) for h in f.target.bhs_names if f.e(g, h) > 0]
        if not positive:
            out[g] = SMOOTH
            continue
        factor_sets = [family[h] for h, _ in positive]
        if any(s.is_empty for s in factor_sets):
            out[g] = EMPTY
            continue
        gens = []
        for combo in itertools.product(*(s.sorted_generators() for s in factor_sets)):
            z = None
            p = 0
            for (h, e), gen in zip(positive, combo):
                term = gen.z * e
                z = term if z is None else z + term
                p += gen.p
            gens.append((z, p))
        out[g] = IndexSet.from_entries(gens)
    return IndexFamily.of(out, f.source)


@dataclass(frozen=True)
class TransportReport:
    """Result of a push-forward plus its integrability audit.

    ``face_contributions`` maps each target hypersurface name to the table
    face -> contributed index set.
    """

    result: object  # IndexSet (half-line target) or IndexFamily
    integrability_ok: bool
    violating_bhs: tuple
    face_contributions: dict

    def to_jsonable(self) -> dict:
        tables = {
            h: {",".join(sorted(face)): s.to_jsonable() for face, s in table.items()}
            for h, table in self.face_contributions.items()
        }
        return {
            "result": self.result.to_jsonable(),
            "integrability_ok": self.integrability_ok,
            "violating_bhs": list(self.violating_bhs),
            "face_contributions": tables,
        }


def _column_pushforward(lattice, column: dict, family: IndexFamily):
    """Half-line push-forward for one exponent column; no integrability check."""
    contributions = {}
    total = EMPTY
    for face in lattice.proper_faces():
        acc = EMPTY
        for g in sorted(face):
            e = column[g]
            if e > 0:
                acc = acc.extended_union(family[g].scale_down(e))
        contributions[face] = acc
        total = total.union(acc)
    return total, contributions


def push_forward_halfline(f: BMapDescriptor, family: IndexFamily) -> TransportReport:
    """Push-forward index set for a b-map onto the half-line.

    ``f`` must target a single-hypersurface lattice and fiber over the open
    half-line (asserted flag).  Hypersurfaces with vanishing order zero are
    flagged when their index set has inf Re z <= 0.
    """
    if len(f.target.bhs_names) != 1:
        raise BMapError("push_forward_halfline needs a half-line target lattice")
    if set(family.names) != set(f.source.bhs_names):
        raise BMapError("family is not indexed by the source's boundary hypersurfaces")
    h = f.target.bhs_names[0]
    column = f.column(h)
    total, contributions = _column_pushforward(f.source, column, family)
    violating = tuple(
        g for g in f.source.bhs_names if column[g] == 0 and family[g].inf_re() <= 0
    )
    return TransportReport(
        result=total,
        integrability_ok=not violating,
        violating_bhs=violating,
        face_contributions={h: contributions},
    )


def push_forward_family(f: BMapDescriptor, family: IndexFamily) -> TransportReport:
    """Push-forward index family along a b-fibration, column by column."""
    report = check_b_fibration(f)
    if not report.verdict:
        raise NotBFibration(
            "push-forward needs a b-fibration; "
            f"codim_ok={report.codim_ok}, violating={list(report.violating_faces)}, "
            f"fibration_on_faces={f.fibration_on_faces}"
        )
    if set(family.names) != set(f.source.bhs_names):
        raise BMapError("family is not indexed by the source's boundary hypersurfaces")
    violating = tuple(
        g
        for g in f.source.bhs_names
        if all(f.e(g, h) == 0 for h in f.target.bhs_names) and family[g].inf_re() <= 0
    )
    out = {}
    tables = {}
    for h in f.target.bhs_names:
        total, contributions = _column_pushforward(f.source, f.column(h), family)
        out[h] = total
        tables[h] = contributions
    return TransportReport(
        result=IndexFamily.of(out, f.target),
        integrability_ok=not violating,
        violating_bhs=violating,
        face_contributions=tables,
    )


def b_density_shift(obj, direction: str):
    """Translate index sets between plain-density and b-density bookkeeping.

    Writing u dx dy = (xy u) dx/x dy/y shifts every index set up by one per
    hypersurface; ``to_b`` applies +1, ``from_b`` applies -1.  Works on an
    IndexSet or a whole IndexFamily.
    """
    if direction == "to_b":
        delta = 1
    elif direction == "from_b":
        delta = -1
    else:
        raise ValueError("direction must be 'to_b' or 'from_b'")
    return obj.shift(delta)
