"""Brute-force numeric oracle: quadrature push-forwards, expansion fits,
explicit model-ODE solutions, kernel convolution, and log-grid application
of b-differential operators.

Everything here works on geometric grids x_k = C r^k, where x d/dx is an
exact translation-invariant operation in log x.  Expansion fitting uses the
basis x^z log^p(1/x) (non-negative logs on (0,1] condition better); the sign
conversion to coefficients of log^p x is (-1)^p and is exposed explicitly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
import scipy.integrate

from .errors import (
    ConditioningError,
    FitRejection,
    IntegrabilityError,
    QuadratureError,
)
from .indexsets import IndexEntry, IndexSet
from .rationals import ComplexRational, as_fraction


@dataclass(frozen=True)
class QuadratureSpec:
    """Adaptive-subdivision quadrature contract (backed by scipy's QUADPACK)."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_depth: int = 200

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("tolerances must be positive")


DEFAULT_QUAD = QuadratureSpec()


def _raw_quad(f, a, b, spec, points=None):
    """quad with warnings captured; returns (value, err, warned)."""
    kwargs = dict(epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_depth)
    if points and np.isfinite(a) and np.isfinite(b):
        inside = [p for p in points if a < p < b]
        if inside:
            kwargs["points"] = inside
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        value, err = scipy.integrate.quad(f, a, b, **kwargs)
    warned = any(issubclass(w.category, scipy.integrate.IntegrationWarning) for w in caught)
    return value, err, warned


def integrate(f, a, b, spec=DEFAULT_QUAD, points=None) -> float:
    """Definite integral over a well-behaved (finite, non-divergent) range."""
    value, err, warned = _raw_quad(f, a, b, spec, points)
    if warned:
        raise QuadratureError(f"quadrature did not converge on [{a}, {b}] (err={err:.3g})")
    return value


_PROBE_RATIO = 1e-2


def _probe_endpoint(deltas, segment):
    """Classify an endpoint singularity from increments between cutoffs.

    ``deltas`` approach the bad endpoint geometrically; ``segment(d1, d2)``
    integrates between consecutive cutoffs.  Estimates the local power alpha
    of the antiderivative; alpha <= ~0 means divergence.
    Returns (sum of increments, tail estimate) or raises IntegrabilityError.
    """
    increments = []
    for d_outer, d_inner in zip(deltas, deltas[1:]):
        val, _, warned = segment(d_inner, d_outer)
        if warned:
            raise QuadratureError("quadrature failed while probing an endpoint")
        increments.append(val)
    mags = [abs(v) for v in increments]
    total = sum(increments)
    if max(mags) < 1e-14 * (1 + abs(total)):
        return total, 0.0
    alphas = []
    for m1, m2 in zip(mags, mags[1:]):
        if m1 > 0 and m2 > 0:
            alphas.append(math.log(m2 / m1) / math.log(_PROBE_RATIO))
    if not alphas:
        return total, 0.0
    alpha = sorted(alphas)[len(alphas) // 2]
    if alpha <= 5e-3:
        raise IntegrabilityError(
            f"integral diverges at the endpoint (local power estimate {alpha:.3g})"
        )
    rho_a = _PROBE_RATIO ** alpha
    tail = increments[-1] * rho_a / (1.0 - rho_a)
    return total, tail


def integrate_from_zero(f, b, spec=DEFAULT_QUAD) -> float:
    """Integral over (0, b] with divergence detection at 0.

    Integrable endpoint singularities are handled by the adaptive rule; when
    it fails to converge, geometric cutoffs toward 0 classify the endpoint
    and either raise IntegrabilityError or return an extrapolated value.
    """
    value, err, warned = _raw_quad(f, 0.0, b, spec)
    if not warned:
        return value
    deltas = [b * _PROBE_RATIO ** (k + 1) for k in range(6)]
    head, _, warned2 = _raw_quad(f, deltas[0], b, spec)
    if warned2:
        raise QuadratureError("quadrature failed away from the endpoint")
    inc, tail = _probe_endpoint(deltas, lambda d1, d2: _raw_quad(f, d1, d2, spec))
    return head + inc + tail


def integrate_to_inf(f, a, spec=DEFAULT_QUAD) -> float:
    """Integral over [a, inf) with divergence detection at infinity."""
    value, err, warned = _raw_quad(f, a, np.inf, spec)
    if not warned:
        return value
    cuts = [a / _PROBE_RATIO ** (k + 1) for k in range(6)]
    head, _, warned2 = _raw_quad(f, a, cuts[0], spec)
    if warned2:
        raise QuadratureError("quadrature failed on the finite part")
    # probe the endpoint at infinity through the substitution t -> 1/u
    inc, tail = _probe_endpoint(
        [1.0 / c for c in cuts],
        lambda u1, u2: _raw_quad(lambda u: f(1.0 / u) / (u * u), u1, u2, spec),
    )
    return head + inc + tail


# ---------------------------------------------------------------------------
# grids and standard test functions
# ---------------------------------------------------------------------------


def geometric_grid(top: float, ratio: float = 0.8, n: int = 60) -> np.ndarray:
    """x_k = top * ratio^k, k = 0..n-1, ascending."""
    if not 0 < ratio < 1 or top <= 0:
        raise ValueError("need 0 < ratio < 1 and top > 0")
    return top * ratio ** np.arange(n)[::-1].astype(float)


def smooth_bump(center: float, halfwidth: float) -> Callable[[float], float]:
    """C^infinity bump, value 1 at the center, support (center +- halfwidth)."""
    def f(t):
        u = (t - center) / halfwidth
        if abs(u) >= 1.0:
            return 0.0
        return math.exp(1.0 - 1.0 / (1.0 - u * u))
    return f


def plateau_cutoff(lo: float, hi: float) -> Callable[[float], float]:
    """Smooth monotone cutoff: 1 on [0, lo], 0 on [hi, inf)."""
    if not 0 < lo < hi:
        raise ValueError("need 0 < lo < hi")

    def edge(u):
        return math.exp(-1.0 / u) if u > 0 else 0.0

    def f(t):
        if t <= lo:
            return 1.0
        if t >= hi:
            return 0.0
        u = (t - lo) / (hi - lo)
        a, b = edge(1.0 - u), edge(u)
        return a / (a + b)

    return f


@dataclass(frozen=True)
class SampledFunction2D:
    """Pointwise-evaluable function on (0, C]^2 with a recorded support bound."""

    evaluator: Callable[[float, float], float]
    support: float
    smoothness: str = "smooth in the interior"

    def __call__(self, x: float, y: float) -> float:
        return self.evaluator(x, y)


@dataclass(frozen=True)
class Sampled1D:
    x: np.ndarray
    values: np.ndarray
    failed: tuple = ()

    def to_jsonable(self):
        return {
            "x": [float(v) for v in self.x],
            "values": [float(v) for v in self.values],
            "failed": list(self.failed),
        }


def numeric_pushforward(u: SampledFunction2D, spec: QuadratureSpec, x_grid) -> Sampled1D:
    """Fiber integrals u~(x_k) = int_0^C u(x_k, y) dy by adaptive quadrature.

    Divergent fibers are flagged per grid point rather than aborting the
    whole sweep.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    values = np.empty_like(x_grid)
    failed = []
    for i, x in enumerate(x_grid):
        try:
            values[i] = integrate_from_zero(lambda y: u(x, y), u.support, spec)
        except (IntegrabilityError, QuadratureError):
            values[i] = np.nan
            failed.append(i)
    return Sampled1D(x_grid, values, tuple(failed))


def pushforward_chart_split(u: SampledFunction2D, cutoff: Callable[[float], float],
                            x: float, spec: QuadratureSpec = DEFAULT_QUAD):
    """Split the fiber integral smoothly in y/x: near-diagonal + far part.

    A integrates over the fiber direction of the front-face chart
    (substitution y = x eta against cutoff(eta)); B integrates the remaining
    1 - cutoff(y/x) part directly in y.  A + B equals the plain fiber
    integral for any smooth cutoff.
    """
    eta_hi = u.support / x

    def a_integrand(eta):
        c = cutoff(eta)
        return x * u(x, x * eta) * c if c else 0.0

    def b_integrand(y):
        c = 1.0 - cutoff(y / x)
        return u(x, y) * c if c else 0.0

    a = integrate_from_zero(a_integrand, eta_hi, spec)
    b = integrate_from_zero(b_integrand, u.support, spec)
    return a, b


# ---------------------------------------------------------------------------
# expansion fitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhgExpansion:
    """Fitted finite expansion sum coeff * x^z * log^p(1/x).

    Coefficients are stored against the log(1/x) basis; multiply by (-1)^p
    for the coefficient of x^z log^p x.
    """

    terms: tuple  # ((z, p, coeff), ...) sorted by (z, p)
    fit_residual: float
    decay_estimate: Optional[float]
    grid_meta: str

    def coeff(self, z, p: int) -> float:
        zf = float(as_fraction(z) if not isinstance(z, float) else z)
        for tz, tp, tc in self.terms:
            if tp == p and abs(float(tz) - zf) < 1e-12:
                return tc
        raise KeyError(f"term ({z}, {p}) was not in the fitted basis")

    def coeff_log_x(self, z, p: int) -> float:
        """Coefficient of x^z log^p x (sign-converted from the log(1/x) basis)."""
        return ((-1) ** p) * self.coeff(z, p)

    def significant_terms(self, tol: float):
        return tuple((z, p) for z, p, c in self.terms if abs(c) > tol)

    def to_jsonable(self) -> dict:
        return {
            "basis": "x^z log^p(1/x)",
            "terms": [
                {"z": float(z), "p": int(p), "coeff": float(f"{c:.12g}")}
                for z, p, c in self.terms
            ],
            "residual": float(f"{self.fit_residual:.12g}"),
            "decay_estimate": None if self.decay_estimate is None
            else float(f"{self.decay_estimate:.12g}"),
            "grid": self.grid_meta,
        }


def _candidate_entries(candidate, cutoff):
    if isinstance(candidate, IndexSet):
        entries = candidate.truncate(cutoff)
    else:
        entries = [IndexEntry.of(e) for e in candidate]
    out = []
    for e in entries:
        if e.z.im != 0:
            raise ValueError("fitting supports real exponents only")
        out.append((e.z.re, e.p))
    return sorted(set(out))


def _next_exponent_after(candidate, cutoff):
    if not isinstance(candidate, IndexSet):
        return float(cutoff) + 1.0
    wide = candidate.truncate(as_fraction(cutoff) + 3)
    beyond = [float(e.z.re) for e in wide if e.z.re > as_fraction(cutoff)]
    return min(beyond) if beyond else float(cutoff) + 1.0


def fit_expansion(x, values, candidate, cutoff, *,
                  cond_guard: float = 1e13,
                  merge_gap: float = 1e-2,
                  subgrid: int = 20,
                  check_decay: bool = True,
                  decay_floor: float = 1e-7) -> PhgExpansion:
    """Least-squares fit of samples against a candidate index-set truncation.

    The candidate (an IndexSet, truncated at ``Re z <= cutoff``, or an
    explicit entry list) provides the basis ``x^z log^p(1/x)``.  Exponents
    closer than ``merge_gap`` at equal log power are merged with a warning
    (the basis would collapse).  After fitting, the residual on the
    ``subgrid`` smallest x must decay at least like the first omitted
    exponent, or the fit is rejected.  Fits whose residual already sits at
    the numeric floor (below ``decay_floor`` relative to the data scale,
    where coefficient leakage hides any decay) pass unconditionally.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    pairs = _candidate_entries(candidate, cutoff)
    if not pairs:
        raise ValueError("empty candidate basis")

    merged = []
    for z, p in pairs:
        zf = float(z)
        clash = next((m for m in merged if m[1] == p and abs(float(m[0]) - zf) < merge_gap), None)
        if clash is not None:
            warnings.warn(
                f"merging near-coincident exponents {clash[0]} and {z} at log power {p}",
                stacklevel=2,
            )
            continue
        merged.append((z, p))

    logs = np.log(1.0 / x)
    cols = [x ** float(z) * logs ** p for z, p in merged]
    a = np.column_stack(cols)
    scale = np.linalg.norm(a, axis=0)
    if np.any(scale == 0):
        raise ConditioningError("zero basis column on this grid")
    a_scaled = a / scale
    cond = np.linalg.cond(a_scaled)
    if cond > cond_guard:
        raise ConditioningError(
            f"basis condition number {cond:.3g} exceeds the guard {cond_guard:.3g}"
        )
    coeffs, *_ = np.linalg.lstsq(a_scaled, values, rcond=None)
    coeffs = coeffs / scale
    resid = values - a @ coeffs
    fit_residual = float(np.max(np.abs(resid)))

    decay = None
    scale = 1.0 + float(np.max(np.abs(values)))
    if check_decay and fit_residual > decay_floor * scale:
        order = np.argsort(x)
        small = order[: min(subgrid, len(x))]
        floor = 1e-13 * scale
        usable = small[np.abs(resid[small]) > floor]
        if len(usable) >= 5:
            slope, _ = np.polyfit(np.log(x[usable]), np.log(np.abs(resid[usable])), 1)
            decay = float(slope)
            required = _next_exponent_after(candidate, cutoff)
            if decay < required - 0.6:
                raise FitRejection(
                    f"residual decays like x^{decay:.2f} but the candidate truncation "
                    f"requires at least x^{required:.2f}; "
                    f"max residual {fit_residual:.3g} on grid of {len(x)} points"
                )

    terms = tuple(sorted(
        ((z, p, float(c)) for (z, p), c in zip(merged, coeffs)),
        key=lambda t: (float(t[0]), t[1]),
    ))
    meta = f"{len(x)} points in [{x.min():.3g}, {x.max():.3g}]"
    return PhgExpansion(terms, fit_residual, decay, meta)


def compare_with_prediction(expansion: PhgExpansion, predicted: IndexSet,
                            cutoff, coeff_tol: float = 1e-6) -> dict:
    """Containment check of fitted terms against a symbolic prediction."""
    extra = []
    for z, p in expansion.significant_terms(coeff_tol):
        zq = as_fraction(z) if not isinstance(z, Fraction) else z
        if not predicted.contains(zq, p):
            extra.append((float(z), p))
    fitted = {(float(z), p) for z, p, _ in expansion.terms}
    missing = [
        (float(e.z.re), e.p)
        for e in predicted.truncate(cutoff)
        if e.z.im == 0 and (float(e.z.re), e.p) not in fitted
    ]
    return {"contained": not extra, "extra": extra, "missing": missing}


# ---------------------------------------------------------------------------
# model ODE and kernels
# ---------------------------------------------------------------------------


def solve_model_ode(c, v: Callable[[float], float], x_grid,
                    spec: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Explicit decaying solution of (x d/dx + c) u = v on the half-line:
    u(x) = x^(-c) * int_0^x t^(c-1) v(t) dt.

    Divergence of the integral at 0 (violated weight condition) raises
    IntegrabilityError.  Like the fitting layer, this is restricted to real
    c; oscillatory exponents stay symbolic.
    """
    if isinstance(c, ComplexRational):
        if c.im:
            raise ValueError("solve_model_ode supports real coefficients only")
        c = c.re
    if isinstance(c, complex):
        raise ValueError("solve_model_ode supports real coefficients only")
    cf = float(c)
    x_grid = np.asarray(x_grid, dtype=float)
    if np.any(np.diff(x_grid) <= 0):
        raise ValueError("grid must be strictly increasing")

    def g(t):
        return t ** (cf - 1.0) * v(t)

    acc = integrate_from_zero(g, x_grid[0], spec)
    out = np.empty_like(x_grid)
    out[0] = acc
    for i in range(1, len(x_grid)):
        acc += integrate(g, x_grid[i - 1], x_grid[i], spec)
        out[i] = acc
    return out * x_grid ** (-cf)


def _kernel_eval(kernel, s: float) -> float:
    if callable(kernel):
        return kernel(s)
    return kernel.evaluate(s)


def _kernel_support(kernel):
    """(lo, hi) support of the kernel in the ratio variable s."""
    if isinstance(kernel, tuple):
        raise TypeError("wrap plain callables as (f, (lo, hi)) via KernelWindow")
    if hasattr(kernel, "support"):
        return kernel.support
    has_rb = any(t.side == "rb" for t in kernel.terms)
    has_lb = any(t.side == "lb" for t in kernel.terms)
    lo = 0.0 if has_rb else 1.0
    hi = math.inf if has_lb else 1.0
    return lo, hi


@dataclass(frozen=True)
class KernelWindow:
    """A plain callable kernel with explicit support, for convolution tests."""

    fn: Callable[[float], float]
    support: tuple

    def evaluate(self, s: float) -> float:
        lo, hi = self.support
        return self.fn(s) if lo < s < hi else 0.0


@dataclass(frozen=True)
class ConvolutionResult:
    s: np.ndarray
    values: np.ndarray
    expansion: Optional[PhgExpansion] = None
    prediction_report: Optional[dict] = None


def convolve_model_kernels(k1, k2, s_grid, spec: QuadratureSpec = DEFAULT_QUAD,
                           predicted: Optional[IndexSet] = None,
                           fit_cutoff=None) -> ConvolutionResult:
    """Multiplicative convolution (k1 * k2)(s) = int k1(s/t) k2(t) dt/t.

    This realizes operator composition on kernels of the ratio variable.
    The integration range follows the kernel supports; a divergent overlap
    at t -> 0 or t -> inf (the violated composition condition) raises
    IntegrabilityError.  If a predicted index set is supplied the samples
    are fitted against its truncation and a containment report is attached.
    """
    lo1, hi1 = _kernel_support(k1)
    lo2, hi2 = _kernel_support(k2)
    s_grid = np.asarray(s_grid, dtype=float)
    values = np.empty_like(s_grid)
    for i, s in enumerate(s_grid):
        # k1(s/t) != 0 for s/hi1 < t < s/lo1 (with 1/0 = inf)
        lo = max(s / hi1 if hi1 != math.inf else 0.0, lo2)
        hi = min(s / lo1 if lo1 > 0.0 else math.inf, hi2)
        if hi <= lo:
            values[i] = 0.0
            continue

        def integrand(t, s=s):
            return _kernel_eval(k1, s / t) * _kernel_eval(k2, t) / t

        breakpoints = [p for p in (s, 1.0) if lo < p < hi]
        if lo == 0.0:
            values[i] = integrate_from_zero(integrand, hi if math.isfinite(hi) else 1.0, spec)
            if not math.isfinite(hi):
                values[i] += integrate_to_inf(integrand, 1.0, spec)
        elif not math.isfinite(hi):
            values[i] = integrate(integrand, lo, 1.0 + lo, spec) + \
                integrate_to_inf(integrand, 1.0 + lo, spec)
        else:
            values[i] = integrate(integrand, lo, hi, spec, points=breakpoints)

    expansion = None
    report = None
    if predicted is not None:
        cutoff = fit_cutoff if fit_cutoff is not None else predicted.inf_re() + 3
        expansion = fit_expansion(s_grid, values, predicted, cutoff)
        report = compare_with_prediction(expansion, predicted, cutoff)
    return ConvolutionResult(s_grid, values, expansion, report)


# ---------------------------------------------------------------------------
# b-operator application on geometric grids
# ---------------------------------------------------------------------------


def _log_step(x_grid: np.ndarray) -> float:
    t = np.log(x_grid)
    steps = np.diff(t)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
        raise ValueError("grid must be geometric (uniform in log x)")
    return float(steps[0])


def _dlog(values: np.ndarray, h: float) -> np.ndarray:
    """Sixth-order central first derivative in log x; trims 3 points per side."""
    v = values
    return (
        -v[:-6] + 9.0 * v[1:-5] - 45.0 * v[2:-4] + 45.0 * v[4:-2] - 9.0 * v[5:-1] + v[6:]
    ) / (60.0 * h)


def apply_bop_numeric(op, values, x_grid):
    """Apply sum_j a_j(x) (x d/dx)^j by stencils on a geometric grid.

    x d/dx is d/d(log x), so the stencil is translation invariant on the
    grid.  Returns (trimmed grid, result); 2*order points are lost per side.
    Warns when the log spacing is too coarse for the stencil order.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    values = np.asarray(values, dtype=float)
    h = _log_step(x_grid)
    if abs(h) > 0.25:
        warnings.warn(
            f"log-grid step {abs(h):.3g} is coarse; derivative accuracy will suffer",
            stacklevel=2,
        )
    m = op.order
    trim = 3 * m
    if trim * 2 + 7 > len(values):
        raise ValueError("grid too short for the stencil width")
    x_out = x_grid[trim: len(x_grid) - trim] if trim else x_grid
    total = np.zeros(len(x_out), dtype=complex)
    d = values.astype(float)
    for j in range(m + 1):
        pad = trim - 3 * j
        aligned = d[pad: len(d) - pad] if pad else d
        total += op.eval_coeff(j, x_out) * aligned
        if j < m:
            d = _dlog(d, h)
    if np.max(np.abs(total.imag)) < 1e-12 * (1.0 + np.max(np.abs(total.real))):
        return x_out, total.real
    return x_out, total
