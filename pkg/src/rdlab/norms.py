"""Operator-norm estimation for left convolution on l2 of the group.

Three estimators bracket ||a||:

* ``op_norm_trace_power``: monotone lower bounds from traces of powers of
  b = a* a.  With tau(x) = x(e), the values tau(b^m)^(1/2m) increase to
  ||a|| as m grows; powers are built by repeated convolution squaring, and
  the last trace never needs a full product since tau(b^(2m)) = ||b^m||_2^2.
* ``op_norm_power_iteration``: largest singular value of the convolution
  operator compressed to l2(B_R); always a lower bound.
* ``op_norm_positive_amenable``: for amenable groups and nonnegative
  coefficients the norm equals ||a||_1 exactly.

||a||_1 is always a valid upper bound.

Free-group elements whose coefficients are constant on spheres form a
commutative subalgebra indexed by sphere radius.  ``RadialElement`` holds
such functions as one coefficient per radius, and convolution uses the
sphere product rule chi(S_1) chi(S_n) = chi(S_{n+1}) + (2r-1) chi(S_{n-1})
(n >= 2, with chi(S_1)^2 = chi(S_2) + 2r delta_e), extended bilinearly.
Supports then grow linearly in the radius instead of exponentially, which
is what makes deep trace powers on free groups affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .algebra import AlgebraElement, adjoint, convolve, norm
from .errors import BudgetExceededError, IndexRadiusError, RdlabError
from .groups import DEFAULT_BUDGET, FreeGroup, LengthIndex

TRACE_CONVERGED_RTOL = 1e-10
POWER_CONVERGED_RTOL = 1e-10


@dataclass
class NormEstimate:
    """Bracket [lower, upper] for an operator norm plus iteration diagnostics.

    ``extrapolated``, when present, is a convergence diagnostic (the
    zero-of-1/k intercept of the step sequence), never a rigorous bound.
    """

    lower: float
    upper: float
    method: str
    steps: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    extrapolated: float = None

    def __post_init__(self):
        if self.lower > self.upper + 1e-12 * max(1.0, abs(self.upper)):
            raise RdlabError(
                f"norm bracket inverted: lower={self.lower} > upper={self.upper}")

    def to_json_dict(self):
        out = {
            "lower": self.lower,
            "upper": self.upper,
            "method": self.method,
            "steps": list(self.steps),
            "iterations": self.iterations,
            "converged": self.converged,
        }
        if self.extrapolated is not None:
            out["extrapolated"] = self.extrapolated
        return out


# -- radial subalgebra of a free group --------------------------------------


@dataclass
class RadialElement:
    """sum_j coeffs[j] * chi(S_j) on the free group of the given rank."""

    rank: int
    coeffs: list

    def trimmed(self):
        c = list(self.coeffs)
        while c and c[-1] == 0.0:
            c.pop()
        return RadialElement(rank=self.rank, coeffs=c or [0.0])

    def top_radius(self):
        return len(self.coeffs) - 1


def free_sphere_size(rank, j):
    if j == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (j - 1)


def free_ball_size(rank, n):
    return sum(free_sphere_size(rank, j) for j in range(n + 1))


def radial_ball(rank, n):
    return RadialElement(rank=rank, coeffs=[1.0] * (n + 1))


def radial_sphere(rank, n):
    return RadialElement(rank=rank, coeffs=[0.0] * n + [1.0])


def radial_from_algebra(a: AlgebraElement):
    """The radial form of ``a``, or None if it is not constant on spheres.

    Values must match bitwise within each sphere and every occupied sphere
    must be complete; anything else falls back to the dense path.
    """
    spec = a.spec
    if not isinstance(spec, FreeGroup) or not spec.has_standard_generators():
        return None
    by_len = {}
    for g, c in a.coeffs.items():
        by_len.setdefault(len(g), []).append(c)
    top = max(by_len) if by_len else 0
    coeffs = [0.0] * (top + 1)
    for j, values in by_len.items():
        if len(values) != free_sphere_size(spec.rank, j):
            return None
        first = values[0]
        if any(v != first for v in values):
            return None
        coeffs[j] = first
    return RadialElement(rank=spec.rank, coeffs=coeffs)


def radial_to_algebra(x: RadialElement, index: LengthIndex):
    spec = index.spec
    if not isinstance(spec, FreeGroup) or spec.rank != x.rank:
        raise RdlabError("index group does not match the radial element rank")
    if x.top_radius() > index.radius:
        raise IndexRadiusError("index too small to expand the radial element")
    coeffs = {}
    for j, c in enumerate(x.coeffs):
        if c == 0.0:
            continue
        for g in index.sphere(j):
            coeffs[g] = c
    return AlgebraElement(spec=spec, coeffs=coeffs, support_radius=x.top_radius())


def _apply_sphere_one(rank, d):
    """Coefficients of chi(S_1) * (sum d_n chi(S_n))."""
    q = 2 * rank - 1
    out = [0.0] * (len(d) + 1)
    if len(d) > 1:
        out[0] = 2 * rank * d[1]
    out[1] += d[0]
    for n in range(2, len(d)):
        out[n - 1] += q * d[n]
    for n in range(1, len(d)):
        out[n + 1] += d[n]
    return out


def radial_convolve(x: RadialElement, y: RadialElement):
    """Convolution via the sphere recursion; cost O(M_x (M_x + M_y))."""
    if x.rank != y.rank:
        raise RdlabError("radial operands have different free-group ranks")
    rank = x.rank
    q = 2 * rank - 1
    cx = x.coeffs
    # y_m = chi(S_m) * y, built by the three-term recursion in m
    y_prev = list(y.coeffs)            # m = 0
    out = [cx[0] * v for v in y_prev]

    def add(acc, vec, c):
        if len(vec) > len(acc):
            acc.extend([0.0] * (len(vec) - len(acc)))
        for i, v in enumerate(vec):
            acc[i] += c * v

    if len(cx) > 1:
        y_cur = _apply_sphere_one(rank, y_prev)   # m = 1
        add(out, y_cur, cx[1])
        for m in range(2, len(cx)):
            bump = 2 * rank if m == 2 else q
            y_next = _apply_sphere_one(rank, y_cur)
            for i, v in enumerate(y_prev):
                y_next[i] -= bump * v
            y_prev, y_cur = y_cur, y_next
            add(out, y_cur, cx[m])
    return RadialElement(rank=rank, coeffs=out).trimmed()


def _sphere_size_f(rank, j):
    # exact when it fits a double; +inf past the float range (the caller's
    # step ladder then stops gracefully instead of raising OverflowError)
    try:
        return float(free_sphere_size(rank, j))
    except OverflowError:
        return math.inf


def radial_l1(x: RadialElement):
    return sum(abs(c) * _sphere_size_f(x.rank, j) for j, c in enumerate(x.coeffs)
               if c != 0.0)


def radial_l2(x: RadialElement):
    return math.sqrt(radial_inner(x, x))


def radial_inner(x: RadialElement, y: RadialElement):
    return sum(cx * cy * _sphere_size_f(x.rank, j)
               for j, (cx, cy) in enumerate(zip(x.coeffs, y.coeffs))
               if cx != 0.0 and cy != 0.0)


# -- trace of convolution powers ---------------------------------------------


class _DenseOps:
    """Convolution-algebra operations on sparse AlgebraElements."""

    def __init__(self, a, budget):
        self.budget = budget
        self.b = convolve(adjoint(a), a, budget=budget)

    def square(self, x):
        return convolve(x, x, budget=self.budget)

    def mul(self, x, y):
        return convolve(x, y, budget=self.budget)

    @staticmethod
    def inner(x, y):
        small, big = (x, y) if len(x.coeffs) <= len(y.coeffs) else (y, x)
        return sum(c * big.coeffs.get(g, 0.0) for g, c in small.coeffs.items())

    @staticmethod
    def trace(x):
        return x.coeffs.get(x.spec.identity(), 0.0)

    @staticmethod
    def size(x):
        return len(x.coeffs)


class _RadialOps:
    """Same interface as _DenseOps on radial free-group elements."""

    def __init__(self, ra, budget):
        self.budget = budget
        self.b = radial_convolve(ra, ra)  # radial elements are self-adjoint

    def square(self, x):
        return self._guard(radial_convolve(x, x))

    def mul(self, x, y):
        return self._guard(radial_convolve(x, y))

    def _guard(self, x):
        if self.budget is not None and len(x.coeffs) > self.budget:
            raise BudgetExceededError("radial support passed the budget")
        return x

    @staticmethod
    def inner(x, y):
        return radial_inner(x, y)

    @staticmethod
    def trace(x):
        return x.coeffs[0]

    @staticmethod
    def size(x):
        return len(x.coeffs)


def _trace_exponents(depth, exponent):
    """b-exponents at which steps are reported: powers of two, then the target."""
    if exponent is not None:
        if exponent < 2 or exponent % 2:
            raise ValueError("exponent must be an even integer >= 2")
        target = exponent // 2
        ms = [1]
        while ms[-1] * 2 < target:
            ms.append(ms[-1] * 2)
        if ms[-1] != target:
            ms.append(target)
        return ms
    if depth < 1:
        raise ValueError("depth must be >= 1")
    return [2 ** j for j in range(depth + 1)]


def op_norm_trace_power(a: AlgebraElement, depth=6, budget=DEFAULT_BUDGET,
                        exponent=None, extrapolate=False):
    """Monotone lower bounds tau(b^m)^(1/2m) -> ||a|| for b = a* a.

    ``depth`` requests steps at b-exponents 1, 2, 4, ..., 2^depth; passing
    ``exponent`` = 2k instead ends the ladder with an exact step at b-exponent
    k (so the last step uses the a-exponent 2k), reached by binary
    exponentiation over the squares already computed.  Stops early if the
    support budget or float range is exhausted, reporting what was achieved.

    ``extrapolate`` fits log(step) against 1/k over the last half of the
    ladder and reports the intercept (the polynomial-correction limit) as a
    diagnostic; the returned bound stays the last computed step.
    """
    if isinstance(a, RadialElement):
        radial = a.trimmed()
        if not any(radial.coeffs):
            return NormEstimate(lower=0.0, upper=0.0, method="trace_power",
                                steps=[0.0], iterations=1, converged=True)
        ops = _RadialOps(radial, budget)
        upper = radial_l1(radial)
    else:
        if not a.coeffs:
            return NormEstimate(lower=0.0, upper=0.0, method="trace_power",
                                steps=[0.0], iterations=1, converged=True)
        radial = radial_from_algebra(a)
        ops = _RadialOps(radial, budget) if radial is not None else _DenseOps(a, budget)
        upper = norm(a, "l1")
    ms = _trace_exponents(depth, exponent)

    # powers[j] = b^(2^j); traces come from inner products of half powers
    powers = [ops.b]
    steps = []
    hit_budget = False
    for m in ms:
        try:
            if m == 1:
                trace = ops.trace(ops.b)
            elif m & (m - 1) == 0:
                j = m.bit_length() - 1
                while len(powers) < j:
                    powers.append(ops.square(powers[-1]))
                half = powers[j - 1]
                trace = ops.inner(half, half)
            else:
                half = _binary_power(ops, powers, m // 2)
                other = ops.mul(half, ops.b) if m % 2 else half
                trace = ops.inner(half, other)
        except BudgetExceededError:
            hit_budget = True
            break
        if not math.isfinite(trace) or trace <= 0.0:
            break
        steps.append(trace ** (1.0 / (2.0 * m)))
    if not steps:
        raise BudgetExceededError("trace-power estimator exhausted its budget "
                                  "before the first step")
    converged = (len(steps) >= 2 and not hit_budget and
                 abs(steps[-1] - steps[-2]) <= TRACE_CONVERGED_RTOL * steps[-1])
    diagnostic = None
    if extrapolate:
        diagnostic = _extrapolate_steps(ms[: len(steps)], steps)
    return NormEstimate(lower=steps[-1], upper=upper,
                        method="trace_power", steps=steps,
                        iterations=len(steps), converged=converged,
                        extrapolated=diagnostic)


def _extrapolate_steps(ms, steps):
    """Intercept of log(step) regressed on 1/k over the last half of the ladder."""
    half = len(steps) // 2
    xs = [1.0 / m for m in ms[half:]]
    ys = [math.log(s) for s in steps[half:]]
    if len(xs) < 2 or max(xs) == min(xs):
        return None
    mean_x = sum(xs) / len(xs)
    mean_y = sum(ys) / len(ys)
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    return math.exp(mean_y - (sxy / sxx) * mean_x)


def _binary_power(ops, powers, m):
    """b^m from the cached squares, extending the cache as needed."""
    j = 0
    result = None
    while m:
        if m & 1:
            while len(powers) <= j:
                powers.append(ops.square(powers[-1]))
            result = powers[j] if result is None else ops.mul(result, powers[j])
        m >>= 1
        j += 1
    return result


# -- compressed power iteration ----------------------------------------------


def op_norm_power_iteration(a: AlgebraElement, R, iters=200, seed=0,
                            index: LengthIndex = None, tol=POWER_CONVERGED_RTOL):
    """Largest singular value of convolution by ``a`` compressed to l2(B_R).

    Builds the sparse matrix of v -> a*v from B_R into the reachable set and
    applies power iteration to its normal matrix; the Rayleigh quotient is a
    lower bound for ||a||^2 at every step.  Deterministic for a fixed seed.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if index is None or index.spec != a.spec:
        raise IndexRadiusError("power iteration needs a LengthIndex for the group")
    if index.radius < R:
        raise IndexRadiusError(f"index radius {index.radius} < domain radius {R}")
    if R < a.support_radius:
        raise IndexRadiusError(
            f"domain radius {R} below element support radius {a.support_radius}")
    spec = a.spec
    cols = [g for n in range(R + 1) for g in index.sphere(n)]
    rows_of = {}
    data, row_idx, col_idx = [], [], []
    supp = list(a.coeffs.items())
    for j, g in enumerate(cols):
        for s, c in supp:
            h = spec.multiply(s, g)
            i = rows_of.setdefault(h, len(rows_of))
            data.append(c)
            row_idx.append(i)
            col_idx.append(j)
    mat = scipy.sparse.csr_matrix(
        (data, (row_idx, col_idx)), shape=(len(rows_of), len(cols)))

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(len(cols))
    v /= np.linalg.norm(v)
    steps = []
    converged = False
    used = 0
    for _ in range(iters):
        w = mat @ v
        rayleigh = float(w @ w)
        steps.append(math.sqrt(max(rayleigh, 0.0)))
        used += 1
        v = mat.T @ w
        nv = np.linalg.norm(v)
        if nv == 0.0:
            break
        v /= nv
        if len(steps) >= 2 and abs(steps[-1] - steps[-2]) <= tol * max(steps[-1], 1e-300):
            converged = True
            break
    return NormEstimate(lower=steps[-1], upper=norm(a, "l1"),
                        method="power_iteration", steps=steps,
                        iterations=used, converged=converged)


# -- exact and trivial brackets ------------------------------------------------


def op_norm_positive_amenable(a: AlgebraElement):
    """||a|| = ||a||_1 for nonnegative coefficients on an amenable group."""
    if not a.spec.amenable:
        raise RdlabError(
            f"{a.spec.descriptor()} is not flagged amenable; the l1 identity "
            "does not apply")
    if not a.is_nonnegative():
        raise RdlabError("the l1 identity needs nonnegative coefficients")
    value = norm(a, "l1")
    return NormEstimate(lower=value, upper=value, method="amenable_exact",
                        steps=[], iterations=0, converged=True)


def op_norm_l1_bracket(a: AlgebraElement):
    """The free bracket ||a||_2 <= ||a|| <= ||a||_1."""
    return NormEstimate(lower=norm(a, "l2"), upper=norm(a, "l1"),
                        method="l1_bound", steps=[], iterations=0, converged=False)
