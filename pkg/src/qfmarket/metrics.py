"""Revenue, social welfare, and equilibrium / efficiency certificates.

An outcome is a competitive equilibrium when it is feasible and sells out
every positively priced good. For budget-constrained quasi-linear buyers this
is equivalent to constrained efficiency, so the certificate here is
structural: verify the equilibrium conditions, and report welfare slacks
against challenger outcomes as corroborating evidence rather than proof.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from .market import Allocation, Bundle, Market, MarketError, Outcome, aggregate
from .feasibility import outcome_is_feasible
from .numeric import Number

VERDICT_CERTIFIED = "certified-CE-hence-efficient"
VERDICT_NOT_CE = "not-CE"


class ChallengerRejectedError(MarketError):
    """A challenger outcome handed to the efficiency certifier is infeasible."""

    def __init__(self, index: int):
        super().__init__(f"challenger {index} is not a feasible outcome")
        self.index = index


@dataclass(frozen=True)
class EfficiencyCertificate:
    verdict: str
    welfare: Number
    slacks: Tuple[Number, ...]  # Eq.-style welfare-minus-payment margins, one per challenger
    min_slack: Optional[Number]

    @property
    def certified(self) -> bool:
        return self.verdict == VERDICT_CERTIFIED


def revenue(outcome: Outcome) -> Number:
    """Total money the seller collects: sum over buyers of p . x_i."""
    total = 0
    for bundle in outcome.allocation:
        for price, qty in zip(outcome.prices, bundle):
            total = total + price * qty
    return total


def social_welfare(
    market: Market,
    allocation: Allocation,
    valuations: Optional[Sequence[Callable[[Bundle], Number]]] = None,
) -> Number:
    """Sum of buyer valuations of their bundles.

    By default buyer i contributes the linear value v_i . x_i; passing
    `valuations` (one callable per buyer) overrides that, which the
    single-good concave module uses.
    """
    if len(allocation) != market.m:
        raise MarketError("allocation size does not match buyer count")
    total = 0
    if valuations is None:
        for buyer, bundle in zip(market.buyers, allocation):
            for v, qty in zip(buyer.values, bundle):
                total = total + v * qty
    else:
        for fn, bundle in zip(valuations, allocation):
            total = total + fn(bundle)
    return total


def is_competitive_equilibrium(market: Market, outcome: Outcome, tol: Number = None) -> bool:
    """True iff the outcome is feasible and clears every positively priced good."""
    if tol is None:
        tol = market.mode.tol
    if not outcome_is_feasible(market, outcome.prices, outcome.allocation, tol):
        return False
    totals = aggregate(outcome.allocation, market.n)
    for price, total, good in zip(outcome.prices, totals, market.goods):
        if price > tol and good.supply - total > tol * max(1, good.supply):
            return False
    return True


def eq1_slack(market: Market, subject: Outcome, challenger_allocation: Allocation) -> Number:
    """Welfare advantage of the subject minus the payment difference.

    Quasi-linearity gives welfare(x) - welfare(y) >= p . (agg x - agg y) for a
    competitive equilibrium (p, x) against any feasible allocation y, and the
    right side is itself >= 0 when x clears the market. The slack is the gap
    between the two sides; nonnegative slack for every challenger is evidence
    of constrained efficiency.
    """
    diff = social_welfare(market, subject.allocation) - social_welfare(
        market, challenger_allocation
    )
    agg_x = aggregate(subject.allocation, market.n)
    agg_y = aggregate(challenger_allocation, market.n)
    payment = 0
    for price, a, b in zip(subject.prices, agg_x, agg_y):
        payment = payment + price * (a - b)
    return diff - payment


def certify_constrained_efficiency(
    market: Market,
    outcome: Outcome,
    challengers: Sequence[Outcome] = (),
    tol: Number = None,
) -> EfficiencyCertificate:
    """Certify the outcome efficient among feasible outcomes, or reject it.

    The verdict rests on the equilibrium check alone; challenger outcomes
    (each must be feasible, else ChallengerRejectedError with its index) add
    recorded welfare slacks that a certified verdict must keep above -tol.
    """
    if tol is None:
        tol = market.mode.tol
    for k, ch in enumerate(challengers):
        if not outcome_is_feasible(market, ch.prices, ch.allocation, tol):
            raise ChallengerRejectedError(k)
    slacks = tuple(eq1_slack(market, outcome, ch.allocation) for ch in challengers)
    min_slack = min(slacks) if slacks else None
    verdict = (
        VERDICT_CERTIFIED
        if is_competitive_equilibrium(market, outcome, tol)
        else VERDICT_NOT_CE
    )
    if verdict == VERDICT_CERTIFIED and slacks and min_slack < -tol:
        # A genuine equilibrium cannot lose welfare to a feasible challenger;
        # reaching this line means the feasibility tolerance let a bad
        # challenger through, so refuse to certify.
        verdict = VERDICT_NOT_CE
    return EfficiencyCertificate(verdict, social_welfare(market, outcome.allocation), slacks, min_slack)
