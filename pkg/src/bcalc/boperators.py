"""b-differential operators on the half-line and their calculus bookkeeping.

An operator sum_j a_j(x) (x d/dx)^j is stored with truncated power series
coefficients over exact complex rationals.  Freezing the coefficients at
x = 0 gives the indicial polynomial; its roots with multiplicities form the
boundary spectrum, whose entries (z, l), l < multiplicity, govern which
x^z log^l x terms can appear in solutions.

A weight parameter splits the spectrum into left/right boundary index sets
and selects one model inverse, realized here by residue (Mellin) inversion:
the kernel acts as (Qv)(x) = int k(x'/x) v(x') dx'/x'.  The orientation
convention (which half plane feeds which side, sign of the log argument) is
pinned by the first-order model: p(z) = z + c with weight above -Re c must
produce k(s) = s^c on the s < 1 side, and is enforced numerically by
``apply_check``.

Descriptor-level composition/action implement the index bookkeeping of the
full calculus, including the Neumann parametrix iteration.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import (
    CompositionUndefined,
    InadmissibleWeight,
    NotBElliptic,
)
from .indexsets import EMPTY, IndexEntry, IndexSet
from .numeric import (
    QuadratureSpec,
    apply_bop_numeric,
    geometric_grid,
    integrate,
    plateau_cutoff,
)
from .rationals import ComplexRational, as_fraction

_CR0 = ComplexRational()
_CR1 = ComplexRational.of(1)


# ---------------------------------------------------------------------------
# exact polynomial helpers (coefficients ascending, ComplexRational)
# ---------------------------------------------------------------------------


def _ptrim(p):
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return tuple(p)


def _pdeg(p):
    return len(p) - 1


def _padd(p, q):
    n = max(len(p), len(q))
    return _ptrim(
        (p[i] if i < len(p) else _CR0) + (q[i] if i < len(q) else _CR0) for i in range(n)
    )


def _pneg(p):
    return tuple(-c for c in p)


def _pmul(p, q):
    if not p or not q:
        return ()
    out = [_CR0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return _ptrim(out)


def _pscale(p, c):
    return _ptrim(x * c for x in p)


def _pderiv(p):
    return _ptrim(p[i] * i for i in range(1, len(p)))


def _pdivmod(p, q):
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(p)
    quot = [_CR0] * max(0, len(p) - len(q) + 1)
    dq = len(q) - 1
    lead = q[-1]
    for i in range(len(rem) - 1, dq - 1, -1):
        if not rem[i]:
            continue
        c = rem[i] / lead
        quot[i - dq] = c
        for j in range(len(q)):
            rem[i - dq + j] = rem[i - dq + j] - c * q[j]
    return _ptrim(quot), _ptrim(rem)


def _pmonic(p):
    return _pscale(p, _CR1 / p[-1]) if p else ()


def _pgcd(p, q):
    a, b = _ptrim(p), _ptrim(q)
    while b:
        _, r = _pdivmod(a, b)
        a, b = b, r
    return _pmonic(a)


def _peval(p, z: ComplexRational) -> ComplexRational:
    acc = _CR0
    for c in reversed(p):
        acc = acc * z + c
    return acc


def yun_squarefree(p):
    """Exact square-free decomposition: list of (monic factor, multiplicity).

    Multiplicities are recovered exactly, so later numeric root finding only
    ever sees simple roots of each factor (double roots would otherwise be
    smeared by ~1e-8 in floating point, far beyond the cluster tolerance).
    """
    p = _pmonic(_ptrim(p))
    if _pdeg(p) < 1:
        return []
    d = _pgcd(p, _pderiv(p))
    b, _ = _pdivmod(p, d)
    c, _ = _pdivmod(_pderiv(p), d)
    delta = _padd(c, _pneg(_pderiv(b)))
    out = []
    i = 1
    while _pdeg(b) > 0:
        a_i = _pgcd(b, delta)
        if _pdeg(a_i) > 0:
            out.append((a_i, i))
        b, _ = _pdivmod(b, a_i)
        c, _ = _pdivmod(delta, a_i)
        delta = _padd(c, _pneg(_pderiv(b)))
        i += 1
    return out


_CLUSTER_TOL = 1e-9
_VERIFY_DENOMS = (1, 100, 10**6, 10**9)


@dataclass(frozen=True)
class Root:
    value: ComplexRational
    multiplicity: int
    exact: bool


def _squarefree_roots(factor):
    """Roots of a square-free exact polynomial; rationalize-and-verify.

    Degree-one factors are solved exactly.  Otherwise companion-matrix
    eigenvalues are computed and each is replaced by a small-denominator
    rational exactly verified against the polynomial; unverifiable roots stay
    numeric (marked inexact).
    """
    deg = _pdeg(factor)
    if deg == 1:
        return [(-factor[0] / factor[1], True)]
    if all(c.is_real for c in factor):
        # real companion matrix: exact double roots stay real instead of
        # splitting into a conjugate pair at ~sqrt(machine eps)
        numeric = np.roots([float(c.re) for c in reversed(factor)])
    else:
        numeric = np.roots([c.as_complex() for c in reversed(factor)])
    out = []
    for r in numeric:
        exact = None
        for md in _VERIFY_DENOMS:
            cand = ComplexRational(
                Fraction(float(r.real)).limit_denominator(md),
                Fraction(float(r.imag)).limit_denominator(md),
            )
            if not _peval(factor, cand):
                exact = cand
                break
        if exact is not None:
            out.append((exact, True))
        else:
            out.append((complex(r), False))
    return out


def _cluster_numeric(roots, tol=_CLUSTER_TOL):
    """Greedy clustering of unverified numeric roots within ``tol``."""
    roots = sorted(roots, key=lambda rm: (rm[0].real, rm[0].imag))
    clusters = []
    for z, mult in roots:
        if clusters and abs(z - clusters[-1][0][-1]) <= tol:
            clusters[-1][0].append(z)
            clusters[-1][1].append(mult)
        else:
            clusters.append(([z], [mult]))
    out = []
    for zs, mults in clusters:
        total = sum(mults)
        center = sum(z * m for z, m in zip(zs, mults)) / total
        out.append(Root(ComplexRational.from_complex(center), total, False))
    return out


def polynomial_roots(poly) -> tuple:
    """Roots with multiplicities of an exact polynomial.

    Exact square-free decomposition first; rational (Gaussian-rational)
    roots are verified exactly, remaining numeric roots are clustered at
    tolerance 1e-9 and rationalized for storage.
    """
    poly = _ptrim(poly)
    if _pdeg(poly) < 1:
        return ()
    exact_roots = []
    numeric_roots = []
    for factor, mult in yun_squarefree(poly):
        for value, is_exact in _squarefree_roots(factor):
            if is_exact:
                exact_roots.append(Root(value, mult, True))
            else:
                numeric_roots.append((value, mult))
    roots = exact_roots + _cluster_numeric(numeric_roots)
    return tuple(sorted(roots, key=lambda r: r.value.key()))


# ---------------------------------------------------------------------------
# operators, indicial data, boundary spectrum
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BDiffOp:
    """sum_j a_j(x) (x d/dx)^j with truncated power-series coefficients."""

    coeffs: tuple  # coeffs[j] = series of a_j, ascending, ComplexRational
    trunc: int  # recorded truncation degree of the series

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("an operator needs at least one coefficient")
        if not any(self.coeffs[-1]):
            raise ValueError("leading coefficient series is identically zero")

    @classmethod
    def from_lists(cls, coeff_lists, trunc: Optional[int] = None) -> "BDiffOp":
        series = tuple(
            tuple(ComplexRational.of(c) for c in lst) or (_CR0,) for lst in coeff_lists
        )
        if trunc is None:
            trunc = max(len(s) - 1 for s in series)
        return cls(series, trunc)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def constant_term(self, j: int) -> ComplexRational:
        s = self.coeffs[j]
        return s[0] if s else _CR0

    @property
    def has_constant_coefficients(self) -> bool:
        return all(all(not c for c in s[1:]) for s in self.coeffs)

    def eval_coeff(self, j: int, x):
        """a_j evaluated on an array (complex-valued Horner)."""
        x = np.asarray(x, dtype=float)
        acc = np.zeros(x.shape, dtype=complex)
        for c in reversed(self.coeffs[j]):
            acc = acc * x + c.as_complex()
        return acc

    def to_jsonable(self) -> dict:
        def enc(c: ComplexRational):
            if c.is_real:
                return str(c.re)
            return {"re": str(c.re), "im": str(c.im)}

        return {"coeffs": [[enc(c) for c in s] for s in self.coeffs], "trunc": self.trunc}

    @classmethod
    def from_jsonable(cls, data: dict) -> "BDiffOp":
        def dec(c):
            if isinstance(c, dict):
                return ComplexRational(as_fraction(c["re"]), as_fraction(c.get("im", 0)))
            return ComplexRational.of(c)

        series = [[dec(c) for c in s] for s in data["coeffs"]]
        return cls.from_lists(series, data.get("trunc"))


@dataclass(frozen=True)
class IndicialData:
    """Indicial polynomial sum a_j(0) z^j, its roots, and the boundary spectrum.

    The spectrum is the raw entry list {(z, l) : 0 <= l < multiplicity of z};
    it is not completed (it is not an index set).
    """

    polynomial: tuple
    roots: tuple  # of Root
    spec_b: tuple  # of IndexEntry


def indicial(op: BDiffOp) -> IndicialData:
    """Freeze coefficients at x = 0 and factor the resulting polynomial."""
    if not op.constant_term(op.order):
        raise NotBElliptic("leading coefficient vanishes at x = 0")
    poly = tuple(op.constant_term(j) for j in range(op.order + 1))
    roots = polynomial_roots(poly)
    assert sum(r.multiplicity for r in roots) == op.order
    entries = [
        IndexEntry(r.value, l) for r in roots for l in range(r.multiplicity)
    ]
    return IndicialData(poly, roots, tuple(sorted(entries, key=IndexEntry.sort_key)))


@dataclass(frozen=True)
class WeightParameter:
    """Real weight selecting a model inverse; must avoid all root real parts."""

    gamma: Fraction

    @classmethod
    def of(cls, value) -> "WeightParameter":
        if isinstance(value, WeightParameter):
            return value
        return cls(as_fraction(value))


_WEIGHT_GAP = 1e-9


def _check_admissible(ind: IndicialData, weight: WeightParameter):
    for r in ind.roots:
        if abs(float(r.value.re - weight.gamma)) <= _WEIGHT_GAP:
            raise InadmissibleWeight(
                f"weight {weight.gamma} is within {_WEIGHT_GAP} of root Re z = {r.value.re}"
            )


def split_spec(ind: IndicialData, gamma) -> tuple:
    """Split the boundary spectrum by a weight into (E_lb, E_rb).

    Roots with Re z above the weight feed the left-boundary set as they
    stand; roots below feed the right-boundary set negated.  Both sets are
    completed.  The orientation reproduces the first-order model: a single
    root at -c with weight above -Re c gives E_lb empty, E_rb = {(c, 0)}.
    """
    weight = WeightParameter.of(gamma)
    _check_admissible(ind, weight)
    lb, rb = [], []
    for r in ind.roots:
        entries = [(r.value, l) for l in range(r.multiplicity)]
        if r.value.re > weight.gamma:
            lb.extend(entries)
        else:
            rb.extend([(-z, l) for z, l in entries])
    return IndexSet.from_entries(lb), IndexSet.from_entries(rb)


# ---------------------------------------------------------------------------
# model inverse by residue inversion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelTerm:
    """One term of a model kernel, in the ratio variable s = x'/x.

    side "rb": coeff * s^z * log^p(1/s) on 0 < s < 1;
    side "lb": coeff * (1/s)^z * log^p(s) on s > 1 (mirrored in 1/s).
    """

    z: ComplexRational
    p: int
    side: str
    coeff: ComplexRational

    def evaluate(self, s: float) -> complex:
        if self.side == "rb":
            if not 0.0 < s < 1.0:
                return 0.0
            base = math.log(1.0 / s)
        else:
            if s <= 1.0:
                return 0.0
            base = math.log(s)
        zc = self.z.as_complex()
        power = s ** zc if self.side == "rb" else s ** (-zc)
        return self.coeff.as_complex() * power * base ** self.p


@dataclass(frozen=True)
class ModelKernel:
    """Finite-term kernel acting by (Qv)(x) = int k(x'/x) v(x') dx'/x'."""

    terms: tuple

    def evaluate(self, s: float) -> float:
        return sum(t.evaluate(s) for t in self.terms).real if self.terms else 0.0

    def index_sets(self) -> tuple:
        """(E_lb, E_rb) read off the term exponents."""
        lb = [(t.z, t.p) for t in self.terms if t.side == "lb"]
        rb = [(t.z, t.p) for t in self.terms if t.side == "rb"]
        return IndexSet.from_entries(lb), IndexSet.from_entries(rb)

    def to_jsonable(self) -> dict:
        return {
            "terms": [
                {
                    "z": {"re": str(t.z.re), "im": str(t.z.im)},
                    "p": t.p,
                    "side": t.side,
                    "coeff": {"re": str(t.coeff.re), "im": str(t.coeff.im)},
                }
                for t in self.terms
            ]
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "ModelKernel":
        terms = tuple(
            KernelTerm(
                ComplexRational(as_fraction(t["z"]["re"]), as_fraction(t["z"]["im"])),
                int(t["p"]),
                t["side"],
                ComplexRational(as_fraction(t["coeff"]["re"]), as_fraction(t["coeff"]["im"])),
            )
            for t in data["terms"]
        )
        return cls(terms)


def _series_inverse(b, n):
    """First n coefficients of 1 / sum b_i w^i (b[0] != 0), exact."""
    inv0 = _CR1 / b[0]
    out = [inv0]
    for k in range(1, n):
        s = _CR0
        for i in range(1, k + 1):
            bi = b[i] if i < len(b) else _CR0
            s = s + bi * out[k - i]
        out.append(-s * inv0)
    return out


def _taylor_at(poly, z0, nterms):
    """Coefficients of poly(z0 + w) up to w^(nterms-1), by synthetic division."""
    out = []
    cur = _ptrim(poly)
    for _ in range(nterms):
        if not cur:
            out.append(_CR0)
            continue
        # divide cur by (z - z0): quotient by Horner, remainder = cur(z0)
        quot = [_CR0] * max(0, len(cur) - 1)
        acc = _CR0
        for i in range(len(cur) - 1, 0, -1):
            acc = cur[i] + acc * z0
            quot[i - 1] = acc
        out.append(cur[0] + acc * z0)
        cur = _ptrim(quot)
    return out


def _partial_fraction_block(poly, root: Root, all_roots, lc):
    """Coefficients A_j, j = 1..k, of 1/poly = sum_j A_j / (z - z0)^j + ...

    Computed from the series inverse of the deflated polynomial at the root.
    Exact whenever every root is exact; with inexact roots the same algebra
    runs in complex floats and the results are rationalized for storage.
    """
    k = root.multiplicity
    if all(r.exact for r in all_roots):
        deflated = (lc,)
        for other in all_roots:
            if other is root:
                continue
            lin = (-other.value, _CR1)
            for _ in range(other.multiplicity):
                deflated = _pmul(deflated, lin)
        b = _taylor_at(deflated, root.value, k)
        c = _series_inverse(b, k)
        return [c[k - j] for j in range(1, k + 1)]

    # same steps in complex floats: deflated polynomial, shift to the root,
    # invert the series, rationalize
    z0 = root.value.as_complex()
    deflated = [lc.as_complex()]
    for other in all_roots:
        if other is root:
            continue
        zr = other.value.as_complex()
        for _ in range(other.multiplicity):
            out = [0j] * (len(deflated) + 1)
            for i, a in enumerate(deflated):
                out[i] += -zr * a
                out[i + 1] += a
            deflated = out
    b = []
    cur = list(deflated)
    for _ in range(k):
        if not cur:
            b.append(0j)
            continue
        quot = [0j] * max(0, len(cur) - 1)
        acc = 0j
        for i in range(len(cur) - 1, 0, -1):
            acc = cur[i] + acc * z0
            quot[i - 1] = acc
        b.append(cur[0] + acc * z0)
        cur = quot
    c = [1.0 / b[0]]
    for m in range(1, k):
        s = sum(b[i] * c[m - i] for i in range(1, m + 1) if i < len(b))
        c.append(-s / b[0])
    return [ComplexRational.from_complex(c[k - j]) for j in range(1, k + 1)]


def model_inverse(ind: IndicialData, gamma) -> ModelKernel:
    """Kernel of the weighted inverse of the indicial operator.

    Partial fractions of 1/polynomial feed residue terms: a root z0 below
    the weight contributes s^(-z0) log-power terms on the s < 1 side, a root
    above the weight contributes mirrored terms on s > 1 (with the sign from
    closing the contour the other way).  Reproduces k(s) = s^c H(1-s) for
    the first-order model.
    """
    weight = WeightParameter.of(gamma)
    _check_admissible(ind, weight)
    if _pdeg(ind.polynomial) < 1:
        raise ValueError("indicial polynomial is constant; nothing to invert")
    lc = ind.polynomial[-1]
    terms = []
    for root in ind.roots:
        blocks = _partial_fraction_block(ind.polynomial, root, ind.roots, lc)
        for j, a_j in enumerate(blocks, start=1):
            if not a_j:
                continue
            fact = ComplexRational.of(math.factorial(j - 1))
            if root.value.re < weight.gamma:
                terms.append(KernelTerm(-root.value, j - 1, "rb", a_j / fact))
            else:
                sign = _CR1 if (j - 1) % 2 else -_CR1
                terms.append(KernelTerm(root.value, j - 1, "lb", sign * a_j / fact))
    terms.sort(key=lambda t: (t.side, t.z.key(), t.p))
    return ModelKernel(tuple(terms))


# ---------------------------------------------------------------------------
# numeric validation of a kernel against its operator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ApplyCheckReport:
    max_residual: float
    x: np.ndarray
    applied: np.ndarray
    expected: np.ndarray

    def to_jsonable(self):
        return {"max_residual": float(f"{self.max_residual:.12g}")}


def apply_check(op: BDiffOp, kernel: ModelKernel, v: Callable[[float], float],
                support: tuple, spec: QuadratureSpec = QuadratureSpec(1e-12, 1e-12, 300),
                x_grid=None) -> ApplyCheckReport:
    """Check numerically that the kernel inverts a constant-coefficient operator.

    Computes u = Kv by quadrature (splitting at the kernel jump x' = x),
    applies the operator by log-grid stencils, and reports the maximum
    deviation from v on the trimmed grid.  The default grid spacing balances
    stencil truncation against quadrature noise amplified by differentiation.
    """
    if not op.has_constant_coefficients:
        raise ValueError("apply_check expects a constant-coefficient operator")
    a, b = support
    if x_grid is None:
        lo, hi = a / 2.0, b * 2.0
        n = int(math.ceil(math.log(hi / lo) / 0.003)) + 1
        ratio = (lo / hi) ** (1.0 / (n - 1))
        x_grid = geometric_grid(hi, ratio, n)
    u = np.empty_like(x_grid)
    for i, x in enumerate(x_grid):
        u[i] = integrate(
            lambda t: kernel.evaluate(t / x) * v(t) / t, a, b, spec, points=[x]
        )
    x_out, applied = apply_bop_numeric(op, u, x_grid)
    expected = np.array([v(x) for x in x_out])
    residual = float(np.max(np.abs(applied - expected)))
    return ApplyCheckReport(residual, x_out, applied, expected)


# ---------------------------------------------------------------------------
# full-calculus descriptors: composition, action, parametrix
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FullCalcDescriptor:
    """(order, E_lb, E_rb): the index data of a full-calculus operator.

    A full-calculus kernel decomposes into a near-diagonal (small-calculus)
    part, a boundary-expansion part carrying (E_lb, 0, E_rb), and a residual
    part smooth before blow-up; all bookkeeping here consumes only the order
    and the two boundary sets, so the three-part split stays implicit.
    """

    order: float
    E_lb: IndexSet
    E_rb: IndexSet

    def to_jsonable(self) -> dict:
        order = "-inf" if self.order == -math.inf else self.order
        return {"order": order, "E_lb": self.E_lb.to_jsonable(), "E_rb": self.E_rb.to_jsonable()}

    @classmethod
    def from_jsonable(cls, data: dict) -> "FullCalcDescriptor":
        raw = data["order"]
        order = -math.inf if raw == "-inf" else float(raw)
        return cls(order, IndexSet.from_jsonable(data["E_lb"]), IndexSet.from_jsonable(data["E_rb"]))


IDENTITY_DESCRIPTOR = FullCalcDescriptor(0.0, EMPTY, EMPTY)


def _inf_sum_positive(e: IndexSet, f: IndexSet) -> bool:
    a, b = e.inf_re(), f.inf_re()
    if a == math.inf or b == math.inf:
        return True
    return a + b > 0


def compose_descriptors(p: FullCalcDescriptor, q: FullCalcDescriptor) -> FullCalcDescriptor:
    """Index data of a composition: orders add, boundary sets extend-union.

    Requires inf E_rb(p) + inf E_lb(q) > 0; at or below the threshold the
    composition integral diverges and the descriptor is undefined.
    """
    if not _inf_sum_positive(p.E_rb, q.E_lb):
        raise CompositionUndefined(
            f"inf E_rb + inf F_lb = {p.E_rb.inf_re()} + {q.E_lb.inf_re()} <= 0"
        )
    return FullCalcDescriptor(
        p.order + q.order,
        p.E_lb.extended_union(q.E_lb),
        p.E_rb.extended_union(q.E_rb),
    )


def descriptor_sum(p: FullCalcDescriptor, q: FullCalcDescriptor) -> FullCalcDescriptor:
    """Index data of an operator sum: max order, plain unions."""
    return FullCalcDescriptor(
        max(p.order, q.order), p.E_lb.union(q.E_lb), p.E_rb.union(q.E_rb)
    )


def action_index(p: FullCalcDescriptor, f: IndexSet) -> IndexSet:
    """Index set of P w for w with index set f: E_lb extended-union f."""
    if not _inf_sum_positive(p.E_rb, f):
        raise CompositionUndefined(
            f"inf E_rb + inf F = {p.E_rb.inf_re()} + {f.inf_re()} <= 0"
        )
    return p.E_lb.extended_union(f)


@dataclass(frozen=True)
class ParametrixReport:
    parametrix: FullCalcDescriptor
    remainder: FullCalcDescriptor
    steps: tuple

    def to_jsonable(self):
        return {
            "parametrix": self.parametrix.to_jsonable(),
            "remainder": self.remainder.to_jsonable(),
            "steps": list(self.steps),
        }


def parametrix_indices(op: BDiffOp, gamma, steps: int) -> ParametrixReport:
    """Predicted index sets of the Neumann-iterated parametrix.

    Step 0 is the small-calculus parametrix (trivial boundary sets, smoothing
    remainder).  Step 1 adds the boundary correction carrying the weight
    split of the spectrum; further steps compose with powers of the
    remainder, raising log powers through repeated extended unions.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    ind = indicial(op)
    m = float(op.order)
    small = FullCalcDescriptor(-m, EMPTY, EMPTY)
    if steps == 0:
        return ParametrixReport(
            small, FullCalcDescriptor(-math.inf, EMPTY, EMPTY), ("small-calculus parametrix only",)
        )
    e_lb, e_rb = split_spec(ind, gamma)
    q = FullCalcDescriptor(-m, e_lb, e_rb)
    r = FullCalcDescriptor(-math.inf, e_lb, e_rb)
    log = [f"weight split: E_lb={e_lb}, E_rb={e_rb}"]
    neumann = IDENTITY_DESCRIPTOR
    r_power = r
    for j in range(1, steps):
        try:
            neumann = descriptor_sum(neumann, r_power)
            r_power = compose_descriptors(r_power, r)
        except CompositionUndefined as exc:
            raise CompositionUndefined(f"remainder power {j + 1}: {exc}") from exc
        log.append(f"Neumann term {j} accumulated")
    try:
        parametrix = compose_descriptors(q, neumann)
    except CompositionUndefined as exc:
        raise CompositionUndefined(f"final composition: {exc}") from exc
    log.append(f"parametrix after {steps} step(s)")
    return ParametrixReport(parametrix, r_power, tuple(log))


# ---------------------------------------------------------------------------
# front-face (non-)compactness criterion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HsReport:
    """Hilbert-Schmidt norm growth of a localized smoothing kernel.

    The truncated squared norm over x in [eps, C] grows like
    slope * log(1/eps); the slope equals the squared ds/s norm of the
    front-face restriction, so slope 0 iff the kernel vanishes there.
    """

    slope: float
    reference: float
    eps: tuple
    norms: tuple

    def to_jsonable(self):
        return {
            "slope": float(f"{self.slope:.12g}"),
            "reference": float(f"{self.reference:.12g}"),
            "eps": [float(e) for e in self.eps],
            "norms": [float(f"{n:.12g}") for n in self.norms],
        }


def hs_front_face_criterion(p: Callable[[float, float], float], support_c: float,
                            eps: float, cutoff: Optional[Callable[[float], float]] = None,
                            spec: QuadratureSpec = QuadratureSpec(1e-9, 1e-9, 200),
                            n_eps: int = 4) -> HsReport:
    """Probe the squared Hilbert-Schmidt norm of phi(x) p(x, s) for divergence.

    p must be supported in x <= C, 1/C <= s <= C.  The cutoff phi defaults to
    a smooth plateau with phi(0) = 1.  Norms are accumulated over a geometric
    ladder of lower cutoffs and regressed against log(1/eps).
    """
    phi = cutoff if cutoff is not None else plateau_cutoff(support_c / 4.0, support_c / 2.0)

    def inner(x):
        return integrate(
            lambda s: (phi(x) * p(x, s)) ** 2 / s, 1.0 / support_c, support_c, spec
        )

    eps_list = [eps * 10.0 ** (-k) for k in range(n_eps)]
    norms = []
    total = integrate(lambda x: inner(x) / x, eps_list[0], support_c, spec)
    norms.append(total)
    for e_prev, e_next in zip(eps_list, eps_list[1:]):
        total += integrate(lambda x: inner(x) / x, e_next, e_prev, spec)
        norms.append(total)
    slope, _ = np.polyfit([math.log(1.0 / e) for e in eps_list], norms, 1)
    reference = integrate(
        lambda s: (phi(0.0) * p(0.0, s)) ** 2 / s, 1.0 / support_c, support_c, spec
    )
    return HsReport(float(slope), reference, tuple(eps_list), tuple(norms))
