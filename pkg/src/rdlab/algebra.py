"""Finitely supported real coefficient functions on a group.

Elements are sparse maps from canonical group elements to nonzero doubles.
Products are convolutions: (a*b)(h) = sum_g a(g) b(g^-1 h).  All operations
treat elements as immutable and are safe to run concurrently.

Coefficients are real: every witness family handled here (ball and sphere
indicators, their power-weighted sums) is real and nonnegative, so complex
storage would buy nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import BudgetExceededError, IndexRadiusError, SpecMismatchError
from .groups import DEFAULT_BUDGET, GroupSpec, LengthIndex, word_length

# Slack threshold below which a floating comparison counts as a violation;
# the test surface is dominated by exact small-integer sums.
GEQ_TOLERANCE = -1e-9


@dataclass
class AlgebraElement:
    """Sparse real function on a group; ``support_radius`` bounds its support.

    ``support_radius`` is the smallest *known* n with support inside B_n; it
    is maintained arithmetically (sums under convolution, maxima under linear
    combination), not recomputed from lengths.
    """

    spec: GroupSpec
    coeffs: dict = field(repr=False)
    support_radius: int = 0

    def __post_init__(self):
        self.coeffs = {g: c for g, c in self.coeffs.items() if c != 0.0}

    def __len__(self):
        return len(self.coeffs)

    def value(self, g):
        return self.coeffs.get(g, 0.0)

    def is_nonnegative(self):
        return all(c >= 0.0 for c in self.coeffs.values())

    def to_json_dict(self):
        key = self.spec.element_key
        pairs = sorted((key(g), c) for g, c in self.coeffs.items())
        return {
            "group": self.spec.descriptor(),
            "support_radius": self.support_radius,
            "coeffs": [[k, c] for k, c in pairs],
        }

    @classmethod
    def from_json_dict(cls, spec, data):
        if data["group"] != spec.descriptor():
            raise SpecMismatchError(
                f"element JSON is for {data['group']!r}, not {spec.descriptor()!r}")
        coeffs = {spec.parse_key(k): float(c) for k, c in data["coeffs"]}
        return cls(spec=spec, coeffs=coeffs, support_radius=int(data["support_radius"]))


def point_mass(spec, g, length=None, index=None):
    """The delta function at ``g`` (the convolution identity when g = e)."""
    spec.check_element(g)
    if length is None:
        length = word_length(spec, g, index)
    return AlgebraElement(spec=spec, coeffs={g: 1.0}, support_radius=length)


def char_ball(index: LengthIndex, n):
    if n > index.radius:
        raise IndexRadiusError(f"ball {n} exceeds index radius {index.radius}")
    coeffs = {g: 1.0 for g in index.ball(n)}
    return AlgebraElement(spec=index.spec, coeffs=coeffs, support_radius=n)


def char_sphere(index: LengthIndex, n):
    if n > index.radius:
        raise IndexRadiusError(f"sphere {n} exceeds index radius {index.radius}")
    coeffs = {g: 1.0 for g in index.sphere(n)}
    return AlgebraElement(spec=index.spec, coeffs=coeffs, support_radius=n)


def characteristic(spec, shape, index: LengthIndex):
    """Indicator element for ("ball", n), ("sphere", n), or ("point", g)."""
    kind, arg = shape
    if index is not None and index.spec != spec:
        raise SpecMismatchError("index was built for a different group")
    if kind == "ball":
        return char_ball(index, arg)
    if kind == "sphere":
        return char_sphere(index, arg)
    if kind == "point":
        return point_mass(spec, arg, index=index)
    raise ValueError(f"unknown shape kind {kind!r}")


def convolve(a: AlgebraElement, b: AlgebraElement, budget=DEFAULT_BUDGET):
    """Convolution product; cost is |supp a| * |supp b| sparse updates."""
    if a.spec != b.spec:
        raise SpecMismatchError("convolution operands live on different groups")
    mul = a.spec.multiply
    # outer loop over the smaller support keeps the per-row dict hot
    if len(a.coeffs) <= len(b.coeffs):
        left, right, flip = a.coeffs, b.coeffs, False
    else:
        left, right, flip = b.coeffs, a.coeffs, True
    out = {}
    get = out.get
    for g, cg in left.items():
        for h, ch in right.items():
            k = mul(h, g) if flip else mul(g, h)
            out[k] = get(k, 0.0) + cg * ch
        if budget is not None and len(out) > budget:
            raise BudgetExceededError(
                f"convolution support passed {budget} elements")
    return AlgebraElement(spec=a.spec, coeffs=out,
                          support_radius=a.support_radius + b.support_radius)


def adjoint(a: AlgebraElement):
    """a*(g) = a(g^-1); an involution, isometric for the l2 norm."""
    inv = a.spec.inverse
    return AlgebraElement(spec=a.spec,
                          coeffs={inv(g): c for g, c in a.coeffs.items()},
                          support_radius=a.support_radius)


def norm(a: AlgebraElement, kind, index: LengthIndex = None):
    """Norms on coefficients: kind is "l1", "l2", or ("l2s", s).

    The weighted norm ||a||_{2,s} = sqrt(sum |a_g|^2 (1+|g|)^{2s}) needs word
    lengths: either a closed form or an index covering the support.
    """
    if kind == "l1":
        return sum(abs(c) for c in a.coeffs.values())
    if kind == "l2":
        return math.sqrt(sum(c * c for c in a.coeffs.values()))
    if isinstance(kind, tuple) and kind[0] == "l2s":
        s = float(kind[1])
        if s < 0:
            raise ValueError("weight exponent s must be >= 0")
        total = 0.0
        for g, c in a.coeffs.items():
            ell = word_length(a.spec, g, index)
            total += c * c * (1.0 + ell) ** (2.0 * s)
        return math.sqrt(total)
    raise ValueError(f"unknown norm kind {kind!r}")


def pointwise_geq(a: AlgebraElement, b: AlgebraElement, region=None,
                  index: LengthIndex = None):
    """Whether a >= b pointwise on the union of supports; returns (ok, min slack).

    ``region`` restricts the comparison to the ball of that radius; groups
    without a closed length formula then need ``index`` (covering the region)
    to decide membership.  Slack down to GEQ_TOLERANCE still counts as >=.
    """
    if a.spec != b.spec:
        raise SpecMismatchError("comparison operands live on different groups")
    spec = a.spec

    def in_region(g):
        if region is None:
            return True
        closed = spec.word_length_closed(g)
        if closed is not None:
            return closed <= region
        if index is None:
            raise IndexRadiusError(
                "region comparison on this group needs a LengthIndex")
        if index.radius < region:
            raise IndexRadiusError(
                f"index radius {index.radius} cannot certify region {region}")
        return g in index and index.length(g) <= region

    min_slack = math.inf
    support = set(a.coeffs) | set(b.coeffs)
    for g in support:
        if not in_region(g):
            continue
        slack = a.value(g) - b.value(g)
        if slack < min_slack:
            min_slack = slack
    if min_slack is math.inf:
        min_slack = 0.0
    return (min_slack >= GEQ_TOLERANCE, min_slack)


def linear_combine(terms):
    """sum_i c_i a_i over (scalar, element) pairs, dropping zero coefficients."""
    terms = list(terms)
    if not terms:
        raise ValueError("linear_combine needs at least one term")
    spec = terms[0][1].spec
    out = {}
    radius = 0
    for c, a in terms:
        if a.spec != spec:
            raise SpecMismatchError("terms live on different groups")
        if c == 0.0:
            continue
        radius = max(radius, a.support_radius)
        for g, v in a.coeffs.items():
            out[g] = out.get(g, 0.0) + c * v
    return AlgebraElement(spec=spec, coeffs=out, support_radius=radius)


def scale(c, a: AlgebraElement):
    return linear_combine([(c, a)])


def annulus_index(length):
    """The n with 2^n - 1 <= length < 2^(n+1) - 1."""
    return (length + 1).bit_length() - 1


def annulus_decompose(a: AlgebraElement, index: LengthIndex):
    """Split ``a`` along the annuli A_n = {g : 2^n - 1 <= |g| < 2^(n+1) - 1}.

    Pieces are indexed by n, have pairwise disjoint supports, and sum back to
    ``a`` exactly.  Empty annuli inside the range yield empty pieces.
    """
    buckets = {}
    for g, c in a.coeffs.items():
        ell = word_length(a.spec, g, index)
        buckets.setdefault(annulus_index(ell), {})[g] = c
    top = max(buckets) if buckets else 0
    pieces = []
    for n in range(top + 1):
        radius = min(a.support_radius, 2 ** (n + 1) - 2)
        pieces.append(AlgebraElement(spec=a.spec,
                                     coeffs=buckets.get(n, {}),
                                     support_radius=radius))
    return pieces
