"""Quantitative rapid-decay measurements on concrete groups.

The rapid decay property with exponent s asks for a constant C with
||a|| <= C (1+n)^s ||a||_2 for every a supported in the n-ball.  Nothing
here proves or refutes the property; instead the module measures its finite
numerical content:

* witness ratio series ||a||/||a||_2 for the ball, sphere, and power-weighted
  sphere-sum witnesses, with exact norms on amenable groups;
* log-log exponent fits and the constant series C_s(n) = ratio / (1+n)^s
  whose divergence trend is the finite shadow of "s is too small";
* exact pointwise inequalities: the ball convolution bound
  chi(B_n) chi(B_{n+k}) >= |B_n| chi(B_k), and its consequence for products
  of power-weighted normalized-ball series;
* the l2 doubling condition ||chi(B_{r(k+1)})||_2 >= 2 ||chi(B_{rk})||_2 and
  the resulting two-sided l2 bounds for those series;
* subgroup domination (heredity) checks through an embedding;
* the sphere series sum (1+n)^{-d} |S_n| whose divergence pins the growth
  degree from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .algebra import (
    AlgebraElement,
    GEQ_TOLERANCE,
    char_ball,
    char_sphere,
    convolve,
    linear_combine,
    norm,
    pointwise_geq,
    scale,
)
from .errors import CoverageError, IndexRadiusError, RdlabError
from .groups import (
    DEFAULT_BUDGET,
    DirectProduct,
    Embedding,
    FiniteCyclic,
    FreeAbelian,
    FreeGroup,
    GroupSpec,
    LengthIndex,
    embed,
)
from .norms import (
    NormEstimate,
    RadialElement,
    op_norm_l1_bracket,
    op_norm_positive_amenable,
    op_norm_power_iteration,
    op_norm_trace_power,
    radial_ball,
    radial_convolve,
    radial_l1,
    radial_l2,
    radial_sphere,
)

# dense supports above this size are never materialized implicitly
DENSE_ELEMENT_BUDGET = DEFAULT_BUDGET


# -- closed-form growth ------------------------------------------------------


def closed_sphere_series(spec, up_to):
    """Sphere sizes |S_0..S_up_to| from closed forms, or None if unavailable."""
    if not spec.has_standard_generators():
        return None
    if isinstance(spec, FreeAbelian):
        d = spec.rank
        balls = [sum((2 ** i) * math.comb(d, i) * math.comb(n, i)
                     for i in range(min(d, n) + 1)) for n in range(up_to + 1)]
        return _diff(balls)
    if isinstance(spec, FreeGroup):
        r = spec.rank
        return [1] + [2 * r * (2 * r - 1) ** (j - 1) for j in range(1, up_to + 1)]
    if isinstance(spec, FiniteCyclic):
        balls = [min(2 * n + 1, spec.order) for n in range(up_to + 1)]
        return _diff(balls)
    if isinstance(spec, DirectProduct):
        series = [1] + [0] * up_to
        for f in spec.factors:
            part = closed_sphere_series(f, up_to)
            if part is None:
                return None
            series = _series_product(series, part, up_to)
        return series
    return None


def _diff(balls):
    return [balls[0]] + [b - a for a, b in zip(balls, balls[1:])]


def _series_product(a, b, up_to):
    out = [0] * (up_to + 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j in range(min(len(b), up_to + 1 - i)):
            out[i + j] += x * b[j]
    return out


def sphere_sizes(spec, up_to, index: LengthIndex = None):
    """|S_0..S_up_to|, preferring closed forms, else the index."""
    closed = closed_sphere_series(spec, up_to)
    if closed is not None:
        return closed
    if index is None or index.radius < up_to:
        raise IndexRadiusError(
            f"need sphere sizes to radius {up_to} for {spec.descriptor()}; "
            "supply a LengthIndex of that radius")
    return list(index.sphere_sizes[: up_to + 1])


def ball_sizes(spec, up_to, index: LengthIndex = None):
    out = []
    total = 0
    for s in sphere_sizes(spec, up_to, index):
        total += s
        out.append(total)
    return out


# -- witness elements and ratio series ----------------------------------------


def witness_element(spec, witness, n, index: LengthIndex, d_hat=None):
    """The witness supported in B_n: "ball", "sphere", or "aN" (power-weighted
    sphere sum with exponent d_hat: sum_{m<=n} (1+m)^(-d_hat) chi(S_m))."""
    if witness == "ball":
        return char_ball(index, n)
    if witness == "sphere":
        return char_sphere(index, n)
    if witness == "aN":
        if d_hat is None or d_hat <= 0:
            raise ValueError("the aN witness needs d_hat > 0")
        terms = [((1.0 + m) ** (-d_hat), char_sphere(index, m))
                 for m in range(1, n + 1)]
        return linear_combine(terms)
    raise ValueError(f"unknown witness {witness!r}")


def witness_label(witness, d_hat=None):
    return f"aN({d_hat:g})" if witness == "aN" else witness


def _radial_witness(spec, witness, n, d_hat=None):
    """Radial form of a ball/sphere/aN witness on a standard free group."""
    if not (isinstance(spec, FreeGroup) and spec.has_standard_generators()):
        return None
    if witness == "ball":
        return radial_ball(spec.rank, n)
    if witness == "sphere":
        return radial_sphere(spec.rank, n)
    if witness == "aN":
        if d_hat is None or d_hat <= 0:
            raise ValueError("the aN witness needs d_hat > 0")
        return RadialElement(rank=spec.rank,
                             coeffs=[0.0] + [(1.0 + m) ** (-d_hat)
                                             for m in range(1, n + 1)])
    raise ValueError(f"unknown witness {witness!r}")


def _radial_bracket(x: RadialElement, spec, method, **kwargs):
    """Norm bracket of a radial witness without leaving the radial algebra.

    Returns None when the method genuinely needs the dense element (power
    iteration).  Rank-1 free groups are amenable, so nonnegative radial
    witnesses there get the exact l1 value.
    """
    if method == "power":
        return None
    nonneg = all(c >= 0.0 for c in x.coeffs)
    if method == "exact" or (method == "auto" and spec.amenable):
        if not spec.amenable:
            raise RdlabError(f"{spec.descriptor()} is not flagged amenable")
        if not nonneg:
            raise RdlabError("the l1 identity needs nonnegative coefficients")
        value = radial_l1(x)
        return NormEstimate(lower=value, upper=value, method="amenable_exact",
                            steps=[], iterations=0, converged=True)
    if method == "l1":
        return NormEstimate(lower=radial_l2(x), upper=radial_l1(x),
                            method="l1_bound", steps=[], iterations=0,
                            converged=False)
    return op_norm_trace_power(x, depth=kwargs.get("depth", 6),
                               budget=kwargs.get("budget", DEFAULT_BUDGET),
                               exponent=kwargs.get("exponent"),
                               extrapolate=kwargs.get("extrapolate", False))


def norm_bracket(a: AlgebraElement, method="auto", index=None, **kwargs):
    """Dispatch to a norm estimator; "auto" prefers the exact amenable value."""
    if method == "exact":
        return op_norm_positive_amenable(a)
    if method == "trace":
        return op_norm_trace_power(
            a, depth=kwargs.get("depth", 6), budget=kwargs.get("budget", DEFAULT_BUDGET),
            exponent=kwargs.get("exponent"),
            extrapolate=kwargs.get("extrapolate", False))
    if method == "power":
        R = kwargs.get("R")
        if R is None:
            R = max(a.support_radius, 1)
        return op_norm_power_iteration(
            a, R=R, iters=kwargs.get("iters", 200), seed=kwargs.get("seed", 0),
            index=index)
    if method == "l1":
        return op_norm_l1_bracket(a)
    if method == "auto":
        if a.spec.amenable and a.is_nonnegative():
            return op_norm_positive_amenable(a)
        return op_norm_trace_power(
            a, depth=kwargs.get("depth", 6), budget=kwargs.get("budget", DEFAULT_BUDGET),
            exponent=kwargs.get("exponent"),
            extrapolate=kwargs.get("extrapolate", False))
    raise ValueError(f"unknown norm method {method!r}")


@dataclass
class RatioEntry:
    n: int
    norm_lower: float
    norm_upper: float
    l2: float

    @property
    def ratio_lower(self):
        return self.norm_lower / self.l2

    @property
    def ratio_upper(self):
        return self.norm_upper / self.l2

    def ratio(self, which):
        return self.ratio_lower if which == "lower" else self.ratio_upper


@dataclass
class RatioSeries:
    """Per-n operator-norm-to-l2 ratios of a witness family."""

    group: str
    witness: str
    method: str
    entries: list = field(default_factory=list)

    def to_csv_rows(self):
        for e in self.entries:
            yield [self.group, self.witness, e.n, e.norm_lower, e.norm_upper,
                   e.l2, e.ratio_lower, e.ratio_upper]

    def to_json_dict(self):
        return {
            "group": self.group,
            "witness": self.witness,
            "method": self.method,
            "entries": [{"n": e.n, "norm_lower": e.norm_lower,
                         "norm_upper": e.norm_upper, "l2": e.l2,
                         "ratio_lower": e.ratio_lower,
                         "ratio_upper": e.ratio_upper} for e in self.entries],
        }


def ratio_series(spec, witness, n_list, method="auto", index=None, d_hat=None,
                 **kwargs):
    """Norm bracket and l2 norm of the witness at each n (skips empty witnesses).

    Free-group ball/sphere/aN witnesses stay in the radial subalgebra, so no
    index (and no exponentially large enumeration) is needed for them; every
    other case materializes the witness from ``index``.
    """
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n values must be strictly increasing")
    series = RatioSeries(group=spec.descriptor(),
                         witness=witness_label(witness, d_hat), method=method)
    for n in n_list:
        est = None
        radial = _radial_witness(spec, witness, n, d_hat)
        if radial is not None:
            l2 = radial_l2(radial)
            if l2 == 0.0:
                continue
            est = _radial_bracket(radial, spec, method, **kwargs)
        if est is None:
            if index is None or index.spec != spec:
                raise IndexRadiusError(
                    "ratio_series needs a LengthIndex for this witness")
            if n > index.radius:
                raise IndexRadiusError(
                    f"n {n} exceeds index radius {index.radius}")
            element = witness_element(spec, witness, n, index, d_hat)
            l2 = norm(element, "l2")
            if l2 == 0.0:
                continue
            est = norm_bracket(element, method=method, index=index, **kwargs)
        series.entries.append(RatioEntry(n=n, norm_lower=est.lower,
                                         norm_upper=est.upper, l2=l2))
    return series


# -- exponent fitting ----------------------------------------------------------


@dataclass
class ExponentFit:
    """Least-squares fit of log(value) against log(1+n)."""

    slope: float
    intercept: float
    residual_sum: float
    r_squared: float
    window: tuple
    points: int

    @property
    def constant(self):
        """exp(intercept): the multiplicative constant of the fitted power law."""
        return math.exp(self.intercept)


def fit_loglog(pairs, window=(4, None)):
    """Fit log y = slope * log(1+n) + intercept over window; needs >= 3 points."""
    lo, hi = window
    pts = [(n, y) for n, y in pairs
           if n >= lo and (hi is None or n <= hi) and y > 0]
    if len(pts) < 3:
        raise ValueError(f"degenerate fit window {window!r}: {len(pts)} usable points")
    xs = [math.log1p(n) for n, _ in pts]
    ys = [math.log(y) for _, y in pts]
    m = len(pts)
    mean_x = sum(xs) / m
    mean_y = sum(ys) / m
    sxx = sum((x - mean_x) ** 2 for x in xs)
    if sxx == 0.0:
        raise ValueError("degenerate fit window: no spread in n")
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - slope * x - intercept) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    # constant data (ss_tot at float-dust level) is fit perfectly by slope 0
    if ss_tot <= 1e-20 * max(1.0, mean_y * mean_y) * m:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return ExponentFit(slope=slope, intercept=intercept, residual_sum=ss_res,
                       r_squared=r2, window=(lo, hi if hi is not None else pts[-1][0]),
                       points=m)


def fit_exponent(series: RatioSeries, window=(4, None), which="lower"):
    return fit_loglog(((e.n, e.ratio(which)) for e in series.entries), window)


def rd_constant_series(series: RatioSeries, s, which="lower",
                       growth_threshold=1.25):
    """C_s(n) = ratio(n) / (1+n)^s with a divergence-trend verdict.

    "divergent" needs the last half of the series nondecreasing and total
    growth last/first >= growth_threshold; anything else is "bounded trend".
    No finite computation proves unboundedness, so this is a trend call.
    """
    points = [(e.n, e.ratio(which) / (1.0 + e.n) ** s) for e in series.entries]
    if not points:
        raise ValueError("empty ratio series")
    values = [c for _, c in points]
    tail = values[len(values) // 2:]
    monotone = all(b >= a - 1e-12 for a, b in zip(tail, tail[1:]))
    grew = values[-1] >= growth_threshold * values[0]
    verdict = "divergent" if (monotone and grew) else "bounded trend"
    return points, verdict


def delocalize_constant(C, s, eps):
    """Constant turning a ball-wise bound into a weighted-norm bound.

    Splitting along the annuli {2^n - 1 <= |g| < 2^(n+1) - 1} and applying
    Cauchy-Schwarz across annuli gives
    C' = 2^s C (sum_n 4^(-eps n))^(1/2) = 2^s C (1 - 4^(-eps))^(-1/2).
    """
    if eps <= 0:
        raise ValueError("eps must be > 0")
    if C < 0:
        raise ValueError("C must be >= 0")
    return (2.0 ** s) * C / math.sqrt(1.0 - 4.0 ** (-eps))


# -- exact pointwise inequalities ----------------------------------------------


def verify_ball_product_bound(spec, n, k, index: LengthIndex = None,
                              budget=DEFAULT_BUDGET):
    """Check chi(B_n) * chi(B_{n+k}) >= |B_n| chi(B_k) on the ball B_k.

    Holds with slack exactly 0 for every group: each g in B_n contributes to
    the coefficient at every h in B_k because g^-1 h lands in B_{n+k}.
    Returns (ok, min slack).  Free-group ball witnesses are handled in the
    radial subalgebra, everything else by dense convolution.
    """
    if n < 1 or k < 1:
        raise ValueError("n and k must be >= 1")
    if isinstance(spec, FreeGroup) and spec.has_standard_generators():
        from .norms import free_ball_size
        lhs = radial_convolve(radial_ball(spec.rank, n),
                              radial_ball(spec.rank, n + k))
        size = free_ball_size(spec.rank, n)
        slack = min(lhs.coeffs[i] - size for i in range(k + 1))
        return (slack >= GEQ_TOLERANCE, slack)
    if index is None or index.radius < n + k:
        raise IndexRadiusError(f"need index radius >= {n + k}")
    lhs = convolve(char_ball(index, n), char_ball(index, n + k), budget=budget)
    rhs = scale(float(index.ball_sizes[n]), char_ball(index, k))
    return pointwise_geq(lhs, rhs, region=k, index=index)


def ball_product_sweep(spec, max_sum, index: LengthIndex = None,
                       budget=DEFAULT_BUDGET):
    """Min slack of the ball product bound over all n, k >= 1 with n+k <= max_sum."""
    worst = (math.inf, None, None)
    for n in range(1, max_sum):
        for k in range(1, max_sum - n + 1):
            _, slack = verify_ball_product_bound(spec, n, k, index, budget)
            if slack < worst[0]:
                worst = (slack, n, k)
    slack, n, k = worst
    if n is None:
        raise ValueError("max_sum must be >= 2")
    return (slack >= GEQ_TOLERANCE, slack, (n, k))


def doubling_ratios(spec, r, k_max, index: LengthIndex = None):
    """Consecutive l2 ratios ||chi(B_{r(k+1)})||_2 / ||chi(B_{rk})||_2, k <= k_max."""
    if r < 1 or k_max < 1:
        raise ValueError("r and k_max must be >= 1")
    sizes = ball_sizes(spec, r * (k_max + 1), index)
    return [math.sqrt(sizes[r * (k + 1)] / sizes[r * k])
            for k in range(1, k_max + 1)]


def verify_doubling(spec, r, k_max, index: LengthIndex = None):
    """(min ratio, min ratio >= 2) over k in [1, k_max]."""
    ratios = doubling_ratios(spec, r, k_max, index)
    min_ratio = min(ratios)
    return (min_ratio, min_ratio >= 2.0)


# -- power-weighted normalized-ball series ---------------------------------------


@dataclass
class BallSeries:
    """Truncation of sum_{k>=1} k^(-alpha) chi(B_{rk}) / ||chi(B_{rk})||_2.

    The coefficient function is constant on spheres: on sphere i it equals
    shell_values[j-1] for j = max(1, ceil(i/r)), i.e. the tail sum
    sum_{k=j..K} k^(-alpha)/||chi(B_{rk})||_2.  A dense AlgebraElement is
    attached only when the support fits the budget; all norms come from the
    sphere-size bookkeeping either way (identical values).
    """

    spec: GroupSpec
    r: int
    alpha: float
    K: int
    sphere_size_list: list
    ball_size_at_rk: list
    shell_values: list
    element: AlgebraElement = None

    @property
    def group(self):
        return self.spec.descriptor()

    def support_radius(self):
        return self.r * self.K

    def value_on_sphere(self, i):
        if i == 0:
            return self.shell_values[0]
        j = -(-i // self.r)  # ceil
        if j > self.K:
            return 0.0
        return self.shell_values[j - 1]

    def radial(self):
        if not (isinstance(self.spec, FreeGroup) and self.spec.has_standard_generators()):
            return None
        return RadialElement(rank=self.spec.rank,
                             coeffs=[self.value_on_sphere(i)
                                     for i in range(self.support_radius() + 1)])

    def l2_squared(self):
        return sum(self.value_on_sphere(i) ** 2 * s
                   for i, s in enumerate(self.sphere_size_list))

    def l2(self):
        return math.sqrt(self.l2_squared())

    def weighted_l2(self, t):
        total = sum(self.value_on_sphere(i) ** 2 * (1.0 + i) ** (2.0 * t) * s
                    for i, s in enumerate(self.sphere_size_list))
        return math.sqrt(total)

    def ball_l2(self, k):
        return math.sqrt(self.ball_size_at_rk[k - 1])

    def min_doubling_ratio(self):
        """Min of ||chi(B_{r(k+1)})||_2/||chi(B_{rk})||_2 over pairs inside the
        truncation (k = 1..K-1); inf when K = 1."""
        if self.K == 1:
            return math.inf
        return min(self.ball_l2(k + 1) / self.ball_l2(k)
                   for k in range(1, self.K))

    def to_json_dict(self):
        return {
            "group": self.group,
            "r": self.r,
            "alpha": self.alpha,
            "K": self.K,
            "ball_sizes": list(self.ball_size_at_rk),
            "shell_values": list(self.shell_values),
            "element": self.element.to_json_dict() if self.element else None,
        }


def build_ball_series(spec, r, alpha, K, index: LengthIndex = None,
                      budget=DENSE_ELEMENT_BUDGET):
    """Construct the truncated series; materializes the dense element only when
    an index covers radius r*K and the support fits the budget."""
    if r < 1 or K < 1:
        raise ValueError("r and K must be >= 1")
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    top = r * K
    spheres = sphere_sizes(spec, top, index)
    balls = list(_accumulate(spheres))
    ball_at_rk = [balls[r * k] for k in range(1, K + 1)]

    shell = [0.0] * K
    tail = 0.0
    for k in range(K, 0, -1):
        tail += k ** (-alpha) / math.sqrt(ball_at_rk[k - 1])
        shell[k - 1] = tail

    series = BallSeries(spec=spec, r=r, alpha=alpha, K=K,
                        sphere_size_list=spheres, ball_size_at_rk=ball_at_rk,
                        shell_values=shell)
    if index is not None and index.spec == spec and index.radius >= top \
            and balls[top] <= budget:
        coeffs = {}
        for i in range(top + 1):
            v = series.value_on_sphere(i)
            for g in index.sphere(i):
                coeffs[g] = v
        series.element = AlgebraElement(spec=spec, coeffs=coeffs, support_radius=top)
    return series


def _accumulate(xs):
    total = 0
    for x in xs:
        total += x
        yield total


@dataclass
class SeriesL2Bounds:
    lower: float       # sum_{k<=K} k^(-2 alpha); holds unconditionally
    actual: float      # ||series||_2^2
    upper: float       # 4 * lower; asserted only under doubling
    doubling_ok: bool
    min_doubling_ratio: float

    def to_json_dict(self):
        return {"lower": self.lower, "actual": self.actual, "upper": self.upper,
                "doubling_ok": self.doubling_ok,
                "min_doubling_ratio": self.min_doubling_ratio}


def ball_series_l2_bounds(series: BallSeries):
    """Two-sided bounds for ||series||_2^2 against the zeta partial sum.

    The lower bound keeps only diagonal inner products (all terms are
    nonnegative).  The upper bound 4x rests on the l2 doubling of consecutive
    truncation balls; ``doubling_ok`` reports whether that held.
    """
    diag = sum(k ** (-2.0 * series.alpha) for k in range(1, series.K + 1))
    min_ratio = series.min_doubling_ratio()
    return SeriesL2Bounds(lower=diag, actual=series.l2_squared(),
                          upper=4.0 * diag,
                          doubling_ok=bool(min_ratio >= 2.0),
                          min_doubling_ratio=min_ratio)


@dataclass
class SeriesProductReport:
    ok: bool
    min_slack: float
    # per j: (j, sum_{k<=K-j} (j+k)^-(a+b), j^-(a+b-1)/(a+b-1)); diagnostic only
    tail_comparison: list


def verify_series_product_bound(spec, r, alpha, beta, K,
                                index: LengthIndex = None,
                                budget=DEFAULT_BUDGET):
    """Finite pointwise bound for the product of two truncated series.

    Checks S(alpha) * S(beta) >= sum_{j,k>=1, j+k<=K} k^(-alpha) (j+k)^(-beta)
    chi(B_{rj})/||chi(B_{rj})||_2, which follows from the ball product bound
    plus ||chi(B_{r(j+k)})||_2 <= ||chi(B_{rj})||_2 ||chi(B_{rk})||_2 term by
    term, so the slack is expected >= 0 for every group.  The reported tail
    comparison against the integral j^-(a+b-1)/(a+b-1) is a convergence
    diagnostic, never an assertion: truncated sums fall below the integral.
    """
    if alpha <= 0 or beta <= 0 or alpha + beta <= 1:
        raise ValueError("need alpha, beta > 0 with alpha + beta > 1")
    za = build_ball_series(spec, r, alpha, K, index)
    zb = build_ball_series(spec, r, beta, K, index)

    weights = [sum(k ** (-alpha) * (j + k) ** (-beta) for k in range(1, K - j + 1))
               for j in range(1, K)]

    ra, rb = za.radial(), zb.radial()
    if ra is not None:
        lhs = radial_convolve(ra, rb).coeffs
        top = 2 * r * K
        rhs = [0.0] * (top + 1)
        for j, w in enumerate(weights, start=1):
            c = w / za.ball_l2(j)
            for i in range(r * j + 1):
                rhs[i] += c
        slacks = [(lhs[i] if i < len(lhs) else 0.0) - rhs[i] for i in range(top + 1)]
        min_slack = min(slacks)
    else:
        if za.element is None or zb.element is None:
            raise IndexRadiusError(
                f"need an index of radius >= {r * K} to materialize the series "
                f"on {spec.descriptor()}")
        lhs = convolve(za.element, zb.element, budget=budget)
        if weights:
            rhs = linear_combine([(w / za.ball_l2(j), char_ball(index, r * j))
                                  for j, w in enumerate(weights, start=1)])
            _, min_slack = pointwise_geq(lhs, rhs)
        else:
            min_slack = min(lhs.coeffs.values(), default=0.0)

    power = alpha + beta
    tails = [(j, sum((j + k) ** (-power) for k in range(1, K - j + 1)),
              j ** (-(power - 1.0)) / (power - 1.0))
             for j in range(1, K)]
    return SeriesProductReport(ok=min_slack >= GEQ_TOLERANCE,
                               min_slack=min_slack, tail_comparison=tails)


# -- sphere series divergence ---------------------------------------------------


@dataclass
class SphereSumReport:
    d_hat: float
    partial_sums: list            # partial_sums[m-1] = sum_{n<=m} (1+n)^(-d_hat) |S_n|
    increments: list              # [(m, S(2m) - S(m))] for m = N//4, N//2

    def final(self):
        return self.partial_sums[-1]


def harmonic_sphere_sum(spec, d_hat, N, index: LengthIndex = None):
    """Partial sums of sum_n (1+n)^(-d_hat) |S_n|.

    With d_hat at the growth degree the series diverges (|S_n| grows like
    n^(d-1)); with d_hat too large the doubling increments S(2m) - S(m) die
    out, which is how a wrong exponent shows up.
    """
    if d_hat <= 0:
        raise ValueError("d_hat must be > 0")
    if N < 1:
        raise ValueError("N must be >= 1")
    sizes = sphere_sizes(spec, N, index)
    sums = []
    total = 0.0
    for n in range(1, N + 1):
        total += (1.0 + n) ** (-d_hat) * sizes[n]
        sums.append(total)
    increments = []
    for m in (N // 4, N // 2):
        if m >= 1 and 2 * m <= N:
            increments.append((m, sums[2 * m - 1] - sums[m - 1]))
    return SphereSumReport(d_hat=d_hat, partial_sums=sums, increments=increments)


# -- heredity -------------------------------------------------------------------


@dataclass
class HeredityRow:
    n: int
    subgroup_count: int
    sub_ratio_lower: float
    sub_ratio_upper: float
    ambient_ratio_lower: float
    ambient_ratio_upper: float

    @property
    def dominated(self):
        return self.sub_ratio_lower <= self.ambient_ratio_upper + 1e-9


@dataclass
class HeredityReport:
    ok: bool
    rows: list


def verify_heredity(embedding: Embedding, n_list, sub_index: LengthIndex,
                    ambient_index: LengthIndex = None, method="auto", **kwargs):
    """Subgroup witness ratios, measured in the ambient word-length, against
    the ambient ball-witness ratio at the same n.

    For each n the subgroup witness is the indicator of the elements whose
    image has ambient length <= n; its image lands in the ambient n-ball and
    stays injective, so domination is the expected outcome.  Raises
    CoverageError when the enumerated subgroup range cannot certify the
    requested n (some longer subgroup element might still have a short image).
    """
    n_list = list(n_list)
    sub = embedding.sub
    ambient = embedding.ambient
    elems = [g for m in range(sub_index.radius + 1) for g in sub_index.sphere(m)]
    image_length = {g: embedding.ambient_length(g, ambient_index) for g in elems}

    top_sphere = sub_index.sphere(sub_index.radius)
    if top_sphere:
        fringe = min(image_length[g] for g in top_sphere)
        if fringe <= max(n_list):
            raise CoverageError(
                f"subgroup index radius {sub_index.radius} cannot certify "
                f"n up to {max(n_list)}: outermost images reach length {fringe}")

    rows = []
    for n in n_list:
        members = [g for g in elems if image_length[g] <= n]
        coeffs = {g: 1.0 for g in members}
        radius = max((sub_index.length(g) for g in members), default=0)
        witness = AlgebraElement(spec=sub, coeffs=coeffs, support_radius=radius)
        sub_est = norm_bracket(witness, method=method, index=sub_index, **kwargs)
        sub_l2 = math.sqrt(len(members))

        amb_size = ball_sizes(ambient, n, ambient_index)[n]
        if ambient.amenable:
            amb_lower = amb_upper = float(amb_size)
        else:
            amb_radial = _radial_witness(ambient, "ball", n)
            amb_est = None
            if amb_radial is not None:
                amb_est = _radial_bracket(amb_radial, ambient, method, **kwargs)
            if amb_est is None:
                if ambient_index is None or ambient_index.radius < n:
                    raise IndexRadiusError(
                        f"need ambient index radius >= {n} for "
                        f"{ambient.descriptor()}")
                amb_est = norm_bracket(char_ball(ambient_index, n),
                                       method=method, index=ambient_index,
                                       **kwargs)
            amb_lower, amb_upper = amb_est.lower, amb_est.upper
        amb_l2 = math.sqrt(amb_size)
        rows.append(HeredityRow(
            n=n, subgroup_count=len(members),
            sub_ratio_lower=sub_est.lower / sub_l2,
            sub_ratio_upper=sub_est.upper / sub_l2,
            ambient_ratio_lower=amb_lower / amb_l2,
            ambient_ratio_upper=amb_upper / amb_l2))
    return HeredityReport(ok=all(r.dominated for r in rows), rows=rows)


def standard_embeddings():
    """Named generator-image maps for the embeddings shipped with the CLI."""
    z = FreeAbelian(1)
    z2 = FreeAbelian(2)
    f2 = FreeGroup(2)
    trivial = FiniteCyclic(1)
    return {
        "Z:Z^2": (z, z2, {(1,): (1, 0)}),
        "Z:Z^2:diag": (z, z2, {(1,): (1, 1)}),
        "e:Z^2": (trivial, z2, {}),
        "Z:F2": (z, f2, {(1,): "a"}),
        "Z:Z": (z, z, {(1,): (1,)}),
    }


def standard_embedding(name, check_radius=3):
    try:
        sub, ambient, images = standard_embeddings()[name]
    except KeyError:
        raise ValueError(f"unknown embedding {name!r}; choose from "
                         f"{sorted(standard_embeddings())}") from None
    return embed(sub, ambient, images, check_radius=check_radius)


# -- incompatible-bounds trace ----------------------------------------------------


@dataclass
class DivergenceParameters:
    """Exponents for the incompatibility trace at a hypothetical s < 1/2.

    Constraints: s < t < 1/2, alpha > 1/2 + t, beta > 1/2, and
    alpha + beta - 1 <= 1/2 (so the product series cannot be
    square-summable while both factors are controlled).
    """

    s: float
    t: float
    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 <= self.s < 0.5:
            raise ValueError("need 0 <= s < 1/2")
        if not self.s < self.t < 0.5:
            raise ValueError("need s < t < 1/2")
        if not self.alpha > 0.5 + self.t:
            raise ValueError("need alpha > 1/2 + t")
        if not self.beta > 0.5:
            raise ValueError("need beta > 1/2")
        if not self.alpha + self.beta - 1.0 <= 0.5:
            raise ValueError("need alpha + beta - 1 <= 1/2")


@dataclass
class ContradictionReport:
    params: DivergenceParameters
    r: int
    K: int
    weighted_norm: float          # ||S(alpha)||_{2,t}
    weighted_bound: float         # (2r)^t ||S(alpha - t)||_2
    weighted_ok: bool
    beta_l2: float                # ||S(beta)||_2
    beta_bound: float             # 2 sqrt(sum k^(-2 beta)); valid under doubling
    beta_ok: bool
    min_doubling_ratio: float
    exhibit_exponent: float       # 2 (alpha + beta - 1) <= 1
    exhibit_partial_sums: list    # partial sums of k^(-2(alpha+beta-1)); unbounded

    def to_json_dict(self):
        return {
            "params": {"s": self.params.s, "t": self.params.t,
                       "alpha": self.params.alpha, "beta": self.params.beta},
            "r": self.r, "K": self.K,
            "weighted_norm": self.weighted_norm,
            "weighted_bound": self.weighted_bound,
            "weighted_ok": self.weighted_ok,
            "beta_l2": self.beta_l2,
            "beta_bound": self.beta_bound,
            "beta_ok": self.beta_ok,
            "min_doubling_ratio": self.min_doubling_ratio,
            "exhibit_exponent": self.exhibit_exponent,
            "exhibit_partial_sums": list(self.exhibit_partial_sums),
        }


def contradiction_trace(spec, params: DivergenceParameters, r, K,
                        index: LengthIndex = None):
    """Numerical shadow of the incompatibility at s < 1/2 on ``spec``.

    Requires the doubling condition at scale r (the construction's standing
    assumption).  Reports (i) the weighted norm of the alpha-series against
    its (2r)^t bound, (ii) the l2 norm of the beta-series against its
    convergent bound, and (iii) the unbounded partial sums standing in for
    the series at exponent alpha + beta - 1, which no square-summable element
    can carry.
    """
    za = build_ball_series(spec, r, params.alpha, K, index)
    min_ratio = za.min_doubling_ratio()
    if min_ratio < 2.0:
        raise RdlabError(
            f"doubling fails on {spec.descriptor()} at r={r} "
            f"(min ratio {min_ratio:.4f} < 2); pick a faster-growing group or larger r")

    weighted = za.weighted_l2(params.t)
    za_shift = build_ball_series(spec, r, params.alpha - params.t, K, index)
    bound = (2.0 * r) ** params.t * za_shift.l2()

    zb = build_ball_series(spec, r, params.beta, K, index)
    beta_l2 = zb.l2()
    beta_bound = 2.0 * math.sqrt(sum(k ** (-2.0 * params.beta)
                                     for k in range(1, K + 1)))

    gamma = params.alpha + params.beta - 1.0
    sums = []
    total = 0.0
    for k in range(1, K + 1):
        total += k ** (-2.0 * gamma)
        sums.append(total)

    rel = 1e-9
    return ContradictionReport(
        params=params, r=r, K=K,
        weighted_norm=weighted, weighted_bound=bound,
        weighted_ok=weighted <= bound * (1 + rel),
        beta_l2=beta_l2, beta_bound=beta_bound,
        beta_ok=beta_l2 <= beta_bound * (1 + rel),
        min_doubling_ratio=min_ratio,
        exhibit_exponent=2.0 * gamma,
        exhibit_partial_sums=sums)


# -- consolidated report -----------------------------------------------------------


@dataclass
class RdReport:
    """Growth and witness measurements with divergence verdicts per s."""

    group: str
    growth_fit: ExponentFit
    ball_fit: ExponentFit
    sphere_fit: ExponentFit
    ball_series: RatioSeries
    sphere_series: RatioSeries
    constant_series: dict         # s -> {"points": [(n, C_s)], "verdict": str}
    manifest_ref: str = None

    def to_json_dict(self):
        def fit_dict(f):
            return {"slope": f.slope, "intercept": f.intercept,
                    "residual_sum": f.residual_sum, "r_squared": f.r_squared,
                    "window": list(f.window), "points": f.points}
        return {
            "group": self.group,
            "growth_fit": fit_dict(self.growth_fit),
            "ball_fit": fit_dict(self.ball_fit),
            "sphere_fit": fit_dict(self.sphere_fit),
            "ball_series": self.ball_series.to_json_dict(),
            "sphere_series": self.sphere_series.to_json_dict(),
            "constant_series": {
                str(s): {"points": [[n, c] for n, c in data["points"]],
                         "verdict": data["verdict"]}
                for s, data in self.constant_series.items()},
            "manifest_ref": self.manifest_ref,
        }


def build_report(spec, n_list, s_values=(), method="auto",
                 index: LengthIndex = None, window=(4, None), **kwargs):
    n_list = list(n_list)
    balls = ball_sizes(spec, max(n_list), index)
    growth_fit = fit_loglog(((n, balls[n]) for n in n_list), window)
    ball_ser = ratio_series(spec, "ball", n_list, method=method, index=index,
                            **kwargs)
    sphere_ser = ratio_series(spec, "sphere", n_list, method=method, index=index,
                              **kwargs)
    constant = {}
    for s in s_values:
        points, verdict = rd_constant_series(ball_ser, s)
        constant[s] = {"points": points, "verdict": verdict}
    return RdReport(group=spec.descriptor(),
                    growth_fit=growth_fit,
                    ball_fit=fit_exponent(ball_ser, window),
                    sphere_fit=fit_exponent(sphere_ser, window),
                    ball_series=ball_ser,
                    sphere_series=sphere_ser,
                    constant_series=constant)
