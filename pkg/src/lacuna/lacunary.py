"""Iterated Whitney interval systems and their endpoint frequency sets.

The order-1 system is the family of dyadic blocks ``±[2^k, 2^(k+1))``.  The
order-``tau`` system is obtained by replacing every interval of the previous
order with its Whitney decomposition: the maximal dyadic subintervals ``L``
of ``I`` with ``dist(L, R \\ I) = |L|``.  Each interval carries its parent
and its *anchor*: the endpoint of the parent at distance ``|L|`` from ``L``.

All endpoint/scale arithmetic is exact (:class:`~lacuna.dyadic.DyadicScalar`);
intervals are half-open ``[left, right)`` on both half-axes.

The point sets ``lac_tau`` are the signed sums ``±2^{n_1} ± ... ± 2^{n_tau}``
with strictly decreasing exponents, which is the closure of the interval
endpoint sets; scale truncation bounds the smallest exponent from below.
Endpoints of the truncated interval system are always contained in the
matching signed-sum set (asserted in the test suite), while the reverse
containment fails exactly at points that are limits of interval endpoints
(e.g. powers of two for order 2), which is why the signed-sum semantics is
the one exposed here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .dyadic import ONE, ZERO, DyadicScalar

# Order-0 sentinel: the two open half-lines.  Order-1 intervals have
# parent=None and anchor 0; callers that need "the parent of an order-1
# interval" should treat these markers as that parent.
NEG_HALFLINE = "(-inf,0)"
POS_HALFLINE = "(0,inf)"
LAMBDA_0 = (NEG_HALFLINE, POS_HALFLINE)


@dataclass(frozen=True)
class LacInterval:
    """Half-open interval ``[left, right)`` with Whitney lineage."""

    left: DyadicScalar
    right: DyadicScalar
    order: int
    anchor: DyadicScalar
    # lineage is auxiliary: it never enters equality/hashing and is not
    # serialized, so identity is geometry + order + anchor
    parent: Optional["LacInterval"] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not self.left < self.right:
            raise ValueError("empty or reversed interval")

    @property
    def length(self) -> DyadicScalar:
        return self.right - self.left

    @property
    def center(self) -> DyadicScalar:
        # lengths are powers of two so the midpoint is dyadic
        return self.left + self.length.scale_pow2(-1)

    def scale_log2(self) -> int:
        return self.length.log2()

    def contains(self, x: DyadicScalar) -> bool:
        return self.left <= x and x < self.right

    def covers(self, lo: DyadicScalar, hi: DyadicScalar) -> bool:
        return self.left <= lo and hi <= self.right

    def key(self) -> tuple:
        return (self.order, self.left, self.right, self.anchor)

    def __repr__(self) -> str:
        return (
            f"LacInterval(order={self.order}, "
            f"[{float(self.left):g},{float(self.right):g}), "
            f"anchor={float(self.anchor):g})"
        )


@dataclass(frozen=True)
class WhitneyResult:
    intervals: tuple[LacInterval, ...]
    over_truncated: bool


def _require_pow2(x: DyadicScalar, what: str) -> None:
    if not (x.mantissa == 1):
        raise ValueError(f"{what} must be a positive power of two, got {x!r}")


def whitney(interval: LacInterval, min_scale: DyadicScalar) -> WhitneyResult:
    """Maximal dyadic ``L ⊂ I`` with ``dist(L, R\\I) = |L|`` and ``|L| ≥ min_scale``.

    The pieces at scale ``|I|/2^j`` (j ≥ 2) are the two intervals adjacent to
    the inner quarter marks: ``[A + |I|/2^j, A + |I|/2^(j-1))`` and its mirror
    at ``B``; no piece of scale ``|I|/2`` exists.  ``over_truncated`` is set
    when ``min_scale > |I|/4`` (nothing survives).
    """
    _require_pow2(min_scale, "min_scale")
    length = interval.length
    _require_pow2(length, "interval length")
    s_parent = length.log2()
    # dyadic interval check: left endpoint must be a multiple of the length
    ratio = interval.left.scale_pow2(-s_parent)
    if not ratio.is_zero and ratio.exponent < 0:
        raise ValueError(f"{interval!r} is not a dyadic interval")

    s_min = min_scale.log2()
    if s_min > s_parent - 2:
        return WhitneyResult(tuple(), True)

    pieces = []
    a, b = interval.left, interval.right
    for s in range(s_min, s_parent - 1):  # piece scales 2^s, s <= s_parent-2
        step = DyadicScalar.pow2(s)
        double = DyadicScalar.pow2(s + 1)
        pieces.append(
            LacInterval(a + step, a + double, interval.order + 1, a, interval)
        )
        pieces.append(
            LacInterval(b - double, b - step, interval.order + 1, b, interval)
        )
    pieces.sort(key=lambda piece: piece.left.as_fraction())
    return WhitneyResult(tuple(pieces), False)


def lambda_tau(
    tau: int, min_scale: DyadicScalar, max_abs: DyadicScalar
) -> list[LacInterval]:
    """Order-``tau`` interval system, truncated and windowed.

    Keeps intervals with ``|L| ≥ min_scale`` contained in ``[-max_abs, max_abs]``.
    ``tau = 0`` is rejected: the order-0 objects are the half-line sentinels
    ``LAMBDA_0``, not bounded intervals.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1; order 0 is the LAMBDA_0 sentinel")
    _require_pow2(min_scale, "min_scale")
    if max_abs <= ZERO:
        raise ValueError("max_abs must be positive")

    if tau == 1:
        out = []
        k = min_scale.log2()
        while DyadicScalar.pow2(k + 1) <= max_abs:
            lo, hi = DyadicScalar.pow2(k), DyadicScalar.pow2(k + 1)
            out.append(LacInterval(lo, hi, 1, ZERO, None))
            out.append(LacInterval(-hi, -lo, 1, ZERO, None))
            k += 1
        out.sort(key=lambda piece: piece.left.as_fraction())
        return out

    parents = lambda_tau(tau - 1, min_scale.scale_pow2(2), max_abs)
    out = []
    for parent in parents:
        out.extend(whitney(parent, min_scale).intervals)
    out.sort(key=lambda piece: piece.left.as_fraction())
    return out


def normalize_to_origin(interval: LacInterval) -> LacInterval:
    """Translate by the anchor: ``L - λ(L)`` lands on ``±[|L|, 2|L|)``.

    Identity for order-1 intervals (their anchor is 0).  The result is tagged
    order 1 with anchor 0: it is an order-1 block up to mirror symmetry, which
    is what the spectral modulation identity consumes.
    """
    if interval.order == 1:
        return interval
    left = interval.left - interval.anchor
    right = interval.right - interval.anchor
    return LacInterval(left, right, 1, ZERO, None)


@dataclass(frozen=True)
class LacPointSet:
    """Signed-sum frequency set of a given order with truncation metadata."""

    order: int
    min_scale: DyadicScalar
    max_abs: DyadicScalar
    points: tuple[DyadicScalar, ...]

    def __contains__(self, x: DyadicScalar) -> bool:
        return x in set(self.points)

    def __len__(self) -> int:
        return len(self.points)


def _floor_log2(x: DyadicScalar) -> int:
    if x <= ZERO:
        raise ValueError("positive value required")
    return x.exponent + abs(x.mantissa).bit_length() - 1


def lac_tau(
    tau: int, min_scale: DyadicScalar, max_abs: DyadicScalar
) -> LacPointSet:
    """Signed sums ``±2^{n_1} ± ... ± 2^{n_tau}``, ``n_1 > ... > n_tau``.

    Truncation: smallest exponent ``n_tau ≥ log2(min_scale)``; window:
    ``|x| ≤ max_abs``.  Values are deduplicated (distinct representations can
    collide, e.g. ``2^4 - 2^2 = 2^3 + 2^2``).  ``tau = 0`` gives ``{0}``.
    """
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if tau == 0:
        return LacPointSet(0, min_scale, max_abs, (ZERO,))
    _require_pow2(min_scale, "min_scale")
    if max_abs <= ZERO:
        raise ValueError("max_abs must be positive")

    emin = min_scale.log2()
    # |x| > 2^(n_1 - tau + 1) for any tau-term sum led by 2^(n_1), so larger
    # leading exponents cannot re-enter the window
    emax = _floor_log2(max_abs) + tau
    if emax < emin + tau - 1:
        return LacPointSet(tau, min_scale, max_abs, tuple())

    values: set[DyadicScalar] = set()
    exponents = range(emin, emax + 1)
    for combo in itertools.combinations(exponents, tau):
        weights = [1 << (e - emin) for e in combo]
        for signs in itertools.product((1, -1), repeat=tau):
            total = sum(s * w for s, w in zip(signs, weights))
            x = DyadicScalar(total, emin)
            if abs(x) <= max_abs:
                values.add(x)
    points = tuple(sorted(values, key=lambda v: v.as_fraction()))
    return LacPointSet(tau, min_scale, max_abs, points)


def dilate_set(points: LacPointSet, factor: DyadicScalar) -> LacPointSet:
    """Exact dilation ``x -> factor * x`` (factor a power of two)."""
    _require_pow2(abs(factor), "dilation factor")
    k = factor.log2()
    return LacPointSet(
        points.order,
        points.min_scale.scale_pow2(k),
        points.max_abs.scale_pow2(k),
        tuple(p.scale_pow2(k) for p in points.points),
    )


def dilate_interval(interval: LacInterval, k: int) -> LacInterval:
    """Scale an interval (and its lineage) by ``2**k``."""
    parent = dilate_interval(interval.parent, k) if interval.parent else None
    return LacInterval(
        interval.left.scale_pow2(k),
        interval.right.scale_pow2(k),
        interval.order,
        interval.anchor.scale_pow2(k),
        parent,
    )


def endpoints_of(intervals: Iterable[LacInterval]) -> tuple[DyadicScalar, ...]:
    seen: set[DyadicScalar] = set()
    for interval in intervals:
        seen.add(interval.left)
        seen.add(interval.right)
    return tuple(sorted(seen, key=lambda v: v.as_fraction()))


def containing_interval(
    family: Iterable[LacInterval], lo: DyadicScalar, hi: DyadicScalar
) -> Optional[LacInterval]:
    """The unique family interval covering ``[lo, hi)``, or None."""
    hit = None
    for interval in family:
        if interval.covers(lo, hi):
            if hit is not None:
                raise ValueError("cover is not unique")
            hit = interval
    return hit


# -- serialization -----------------------------------------------------------
# line format: order left_mantissa left_exp right_mantissa right_exp
#              anchor_mantissa anchor_exp
# (parent lineage beyond the anchor is not serialized)


def interval_to_line(interval: LacInterval) -> str:
    parts = [
        interval.order,
        interval.left.mantissa,
        interval.left.exponent,
        interval.right.mantissa,
        interval.right.exponent,
        interval.anchor.mantissa,
        interval.anchor.exponent,
    ]
    return " ".join(str(p) for p in parts)


def interval_from_line(line: str) -> LacInterval:
    fields = line.split()
    if len(fields) != 7:
        raise ValueError(f"expected 7 fields, got {len(fields)}: {line!r}")
    order = int(fields[0])
    nums = [int(f) for f in fields[1:]]
    return LacInterval(
        DyadicScalar(nums[0], nums[1]),
        DyadicScalar(nums[2], nums[3]),
        order,
        DyadicScalar(nums[4], nums[5]),
        None,
    )


def write_intervals(path, intervals: Iterable[LacInterval]) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for interval in intervals:
            fh.write(interval_to_line(interval) + "\n")


def read_intervals(path) -> list[LacInterval]:
    out = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(interval_from_line(line))
    return out
