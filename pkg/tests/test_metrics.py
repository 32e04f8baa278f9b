"""Revenue, welfare, and the equilibrium / efficiency certificates."""

from fractions import Fraction

import pytest

from qfmarket.feasibility import check_clearing, check_feasible
from qfmarket.market import Buyer, Good, Market, MarketError, Outcome
from qfmarket.metrics import (
    VERDICT_CERTIFIED,
    VERDICT_NOT_CE,
    ChallengerRejectedError,
    certify_constrained_efficiency,
    eq1_slack,
    is_competitive_equilibrium,
    revenue,
    social_welfare,
)
from qfmarket.numeric import EXACT

F = Fraction

MINIMAL = (F(3, 5), F(3, 5))


def _equilibrium(ref_exact) -> Outcome:
    return Outcome(MINIMAL, check_clearing(ref_exact, MINIMAL).allocation)


def test_revenue_is_price_dot_aggregate(ref_exact):
    out = _equilibrium(ref_exact)
    assert revenue(out) == F(3)
    assert revenue(Outcome(MINIMAL, ((F(0), F(0)),) * 3)) == 0


def test_social_welfare(ref_exact):
    out = _equilibrium(ref_exact)
    assert social_welfare(ref_exact, out.allocation) == F(15)
    with pytest.raises(MarketError):
        social_welfare(ref_exact, out.allocation[:2])


def test_social_welfare_with_callable_valuations():
    market = Market((Good("A", F(4)),), (Buyer("b", (F(1),), F(2)),), EXACT)
    allocation = ((F(4),),)
    assert social_welfare(market, allocation) == F(4)
    assert social_welfare(market, allocation, valuations=(lambda x: x[0] * x[0],)) == F(16)


def test_is_competitive_equilibrium(ref_exact):
    assert is_competitive_equilibrium(ref_exact, _equilibrium(ref_exact))
    # feasible but leaves supply unsold at positive prices
    loose = Outcome((F(2), F(2)), check_feasible(ref_exact, (F(2), F(2))).allocation)
    assert not is_competitive_equilibrium(ref_exact, loose)
    # infeasible outright
    assert not is_competitive_equilibrium(
        ref_exact, Outcome(MINIMAL, ((F(9), F(9)),) * 3)
    )


def test_eq1_slack_nonnegative_against_feasible_challengers(ref_exact):
    subject = _equilibrium(ref_exact)
    for q in ((F(1), F(1)), (F(2), F(2)), (F(7, 10), F(21, 20))):
        challenger = check_feasible(ref_exact, q).allocation
        assert eq1_slack(ref_exact, subject, challenger) >= 0


def test_certify_constrained_efficiency(ref_exact):
    subject = _equilibrium(ref_exact)
    challengers = (
        Outcome((F(1), F(1)), check_feasible(ref_exact, (F(1), F(1))).allocation),
        Outcome((F(2), F(2)), check_feasible(ref_exact, (F(2), F(2))).allocation),
    )
    cert = certify_constrained_efficiency(ref_exact, subject, challengers)
    assert cert.verdict == VERDICT_CERTIFIED and cert.certified
    assert cert.welfare == F(15)
    assert len(cert.slacks) == 2
    assert cert.min_slack == min(cert.slacks) >= 0


def test_certify_rejects_non_equilibrium_outcomes(ref_exact):
    loose = Outcome((F(2), F(2)), check_feasible(ref_exact, (F(2), F(2))).allocation)
    cert = certify_constrained_efficiency(ref_exact, loose)
    assert cert.verdict == VERDICT_NOT_CE and not cert.certified
    assert cert.min_slack is None


def test_certify_rejects_infeasible_challengers_by_index(ref_exact):
    subject = _equilibrium(ref_exact)
    bad = Outcome((F(1, 2), F(1, 2)), ((F(9), F(9)),) * 3)
    with pytest.raises(ChallengerRejectedError) as err:
        certify_constrained_efficiency(ref_exact, subject, (subject, bad))
    assert err.value.index == 1
