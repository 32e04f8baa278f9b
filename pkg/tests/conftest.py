"""Shared fixtures: the two-good reference market and the fixture directory.

The reference market (three unit-budget buyers over goods A and B with
supplies 3 and 2) has minimal clearing price (3/5, 3/5), revenue 3, and
welfare 15; most deterministic tests pin those numbers.
"""

import pathlib

import pytest

from qfmarket.market import Buyer, Good, Market
from qfmarket.numeric import EXACT, float_mode


def reference_market(mode):
    goods = (Good("A", mode.coerce(3)), Good("B", mode.coerce(2)))
    buyers = (
        Buyer("buyer1", (mode.coerce(2), mode.coerce(3)), mode.coerce(1)),
        Buyer("buyer2", (mode.coerce(2), mode.coerce(2)), mode.coerce(1)),
        Buyer("buyer3", (mode.coerce(4), mode.coerce(2)), mode.coerce(1)),
    )
    return Market(goods, buyers, mode)


@pytest.fixture
def ref_exact():
    return reference_market(EXACT)


@pytest.fixture
def ref_float():
    return reference_market(float_mode())


@pytest.fixture(scope="session")
def fixture_dir():
    return pathlib.Path(__file__).parent / "fixtures"
