"""Core market types and the budget-constrained demand correspondence.

Conventions used throughout the package:

* goods are indexed 1..n in bang-per-buck sets; index 0 is the implicit money
  good with price 1 and per-unit value 1 for every buyer. Money is never
  stored in vectors.
* vectors (supplies, values, prices, bundles) are plain tuples of length n;
  entry k belongs to good k+1.
* a buyer is "strict" at prices p if money is not among its bang-per-buck
  maximizers, in which case any demanded bundle spends the full budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from .numeric import EXACT, Number, NumericMode

MONEY = 0

PriceVector = Tuple[Number, ...]
Bundle = Tuple[Number, ...]
Allocation = Tuple[Bundle, ...]


class MarketError(Exception):
    """Base class for errors raised by this package."""


@dataclass(frozen=True)
class Outcome:
    """A price vector together with one bundle per buyer."""

    prices: "PriceVector"
    allocation: "Allocation"

    def __post_init__(self):
        object.__setattr__(self, "prices", tuple(self.prices))
        object.__setattr__(self, "allocation", tuple(tuple(b) for b in self.allocation))


class PriceDomainError(MarketError):
    """A price vector had a nonpositive entry; bang-per-buck ratios are undefined there."""


@dataclass(frozen=True)
class Good:
    name: str
    supply: Number

    def __post_init__(self):
        if not self.name:
            raise MarketError("good name must be nonempty")


@dataclass(frozen=True)
class Buyer:
    name: str
    values: Tuple[Number, ...]
    budget: Number

    def __post_init__(self):
        if not self.name:
            raise MarketError("buyer name must be nonempty")
        object.__setattr__(self, "values", tuple(self.values))


@dataclass(frozen=True)
class Market:
    goods: Tuple[Good, ...]
    buyers: Tuple[Buyer, ...]
    mode: NumericMode = EXACT

    def __post_init__(self):
        object.__setattr__(self, "goods", tuple(self.goods))
        object.__setattr__(self, "buyers", tuple(self.buyers))

    @property
    def n(self) -> int:
        return len(self.goods)

    @property
    def m(self) -> int:
        return len(self.buyers)

    @property
    def supplies(self) -> Tuple[Number, ...]:
        return tuple(g.supply for g in self.goods)

    def coerced(self, mode: NumericMode) -> "Market":
        """The same market with every number brought into `mode`."""
        goods = tuple(Good(g.name, mode.coerce(g.supply)) for g in self.goods)
        buyers = tuple(
            Buyer(b.name, tuple(mode.coerce(v) for v in b.values), mode.coerce(b.budget))
            for b in self.buyers
        )
        return Market(goods, buyers, mode)


@dataclass(frozen=True)
class BangPerBuckSet:
    """Argmax of v_j / p_j over goods and money for one buyer at fixed prices."""

    buyer: int
    goods: frozenset  # subset of {0, 1, .., n}; 0 is money
    max_ratio: Number

    @property
    def strict(self) -> bool:
        return MONEY not in self.goods


def validate_market(market: Market) -> list:
    """Check all type invariants; returns a list of violation strings (empty = valid)."""
    violations = []
    if market.n < 1:
        violations.append("market: needs at least one good")
    if market.m < 1:
        violations.append("market: needs at least one buyer")
    for g in market.goods:
        if g.supply < 0:
            violations.append(f"good {g.name}: negative supply {g.supply}")
    names = [g.name for g in market.goods]
    if len(set(names)) != len(names):
        violations.append("goods: duplicate names")
    for b in market.buyers:
        if len(b.values) != market.n:
            violations.append(
                f"buyer {b.name}: {len(b.values)} values for {market.n} goods"
            )
            continue
        if b.budget < 0:
            violations.append(f"buyer {b.name}: negative budget {b.budget}")
        for g, v in zip(market.goods, b.values):
            if v < 0:
                violations.append(f"buyer {b.name}: negative value for good {g.name}")
    for k, g in enumerate(market.goods):
        if not any(len(b.values) == market.n and b.values[k] > 0 for b in market.buyers):
            violations.append(
                f"good {g.name}: valued 0 by every buyer (remove it with strip_worthless_goods)"
            )
    return violations


def require_valid(market: Market) -> None:
    violations = validate_market(market)
    if violations:
        raise MarketError("invalid market: " + "; ".join(violations))


def strip_worthless_goods(market: Market) -> Market:
    """Drop goods valued 0 by every buyer (the caller's explicit modeling action)."""
    keep = [
        k for k in range(market.n) if any(b.values[k] > 0 for b in market.buyers)
    ]
    goods = tuple(market.goods[k] for k in keep)
    buyers = tuple(
        Buyer(b.name, tuple(b.values[k] for k in keep), b.budget) for b in market.buyers
    )
    return Market(goods, buyers, market.mode)


def _check_prices(p: Sequence[Number]) -> None:
    for entry in p:
        if entry <= 0:
            raise PriceDomainError(f"undefined ratio: nonpositive price {entry}")


def bang_per_buck(buyer: Buyer, p: PriceVector, tol: Number = 0, index: int = -1) -> BangPerBuckSet:
    """Bang-per-buck maximizer set of one buyer.

    Money (index 0, ratio 1) always competes. A good j is included whenever
    v_j / p_j >= (1 - tol) * max_ratio, so tol = 0 gives the exact argmax and a
    small relative tol makes boundary ties reproducible in float mode.
    """
    _check_prices(p)
    best = 1  # money
    ratios = []
    for v, price in zip(buyer.values, p):
        r = v / price
        ratios.append(r)
        if r > best:
            best = r
    cutoff = (1 - tol) * best
    members = {j + 1 for j, r in enumerate(ratios) if r >= cutoff}
    if 1 >= cutoff:
        members.add(MONEY)
    return BangPerBuckSet(index, frozenset(members), best)


def demand_vertices(buyer: Buyer, p: PriceVector, tol: Number = 0) -> Tuple[Bundle, ...]:
    """Extreme points of the demanded set: one spike per maximizing good, plus
    the zero bundle when money maximizes. The demanded set is their convex hull."""
    bpb = bang_per_buck(buyer, p, tol)
    n = len(p)
    vertices = []
    if MONEY in bpb.goods:
        vertices.append(tuple(0 * v for v in p))
    for j in sorted(bpb.goods - {MONEY}):
        spike = [0 * v for v in p]
        spike[j - 1] = buyer.budget / p[j - 1]
        vertices.append(tuple(spike))
    return tuple(vertices)


def is_demanded(buyer: Buyer, p: PriceVector, x: Bundle, tol: Number = 0) -> bool:
    """Membership test for the demand correspondence.

    True iff (a) positive quantities only on bang-per-buck goods, (b) spend
    does not exceed the budget, and (c) the budget is exhausted whenever money
    is not a maximizer. Comparisons use a money-scale slack of
    tol * max(1, budget).
    """
    _check_prices(p)
    if len(x) != len(p):
        return False
    bpb = bang_per_buck(buyer, p, tol)
    slack = tol * max(1, buyer.budget)
    spend = 0
    for j, (price, qty) in enumerate(zip(p, x), start=1):
        if qty < -slack:
            return False
        spend += price * qty
        if price * qty > slack and j not in bpb.goods:
            return False
    if spend > buyer.budget + slack:
        return False
    if bpb.strict and spend < buyer.budget - slack:
        return False
    return True


def aggregate(allocation: Allocation, n: int) -> Bundle:
    totals = [0] * n
    for bundle in allocation:
        for k in range(n):
            totals[k] = totals[k] + bundle[k]
    return tuple(totals)


def zero_bundle(market: Market) -> Bundle:
    zero = market.mode.coerce(0)
    return tuple(zero for _ in range(market.n))
