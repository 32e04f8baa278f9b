"""Numeric modes: exact rational arithmetic or floats with a relative tolerance.

Every quantity in a market (values, budgets, supplies, prices, bundles) is
either a `fractions.Fraction` (exact mode) or a `float` (float mode). Exact
mode uses a zero tolerance everywhere; float mode carries an explicit relative
tolerance used for argmax ties, budget checks, and flow saturation tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[Fraction, float, int]

DEFAULT_FLOAT_TOL = 1e-9

EXACT_KIND = "exact"
FLOAT_KIND = "float"


@dataclass(frozen=True)
class NumericMode:
    kind: str
    tol: Number

    def __post_init__(self):
        if self.kind not in (EXACT_KIND, FLOAT_KIND):
            raise ValueError(f"unknown numeric mode {self.kind!r}")
        if self.kind == EXACT_KIND and self.tol != 0:
            raise ValueError("exact mode requires tol = 0")
        if self.tol < 0:
            raise ValueError("tolerance must be nonnegative")

    @property
    def is_exact(self) -> bool:
        return self.kind == EXACT_KIND

    def coerce(self, value: Number) -> Number:
        """Bring a number into this mode's representation."""
        if self.is_exact:
            if isinstance(value, Fraction):
                return value
            if isinstance(value, int):
                return Fraction(value)
            if isinstance(value, float):
                # Read floats through their shortest decimal repr so that a
                # literal 0.1 becomes 1/10 rather than the binary expansion.
                return Fraction(repr(value))
            raise TypeError(f"cannot coerce {type(value).__name__} to rational")
        return float(value)


EXACT = NumericMode(EXACT_KIND, 0)
FLOAT_DEFAULT = NumericMode(FLOAT_KIND, DEFAULT_FLOAT_TOL)


def float_mode(tol: float = DEFAULT_FLOAT_TOL) -> NumericMode:
    return NumericMode(FLOAT_KIND, tol)


def parse_number(token, mode: NumericMode) -> Number:
    """Parse a JSON-ish numeric token.

    Accepts ints, floats, and strings of the form "p/q" or a plain decimal
    string. In exact mode everything becomes a Fraction; in float mode
    everything becomes a float (rationals are divided out).
    """
    if isinstance(token, str):
        text = token.strip()
        try:
            if "/" in text:
                num, den = text.split("/", 1)
                value = Fraction(int(num.strip()), int(den.strip()))
            else:
                value = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad numeric literal {token!r}") from exc
        return value if mode.is_exact else float(value)
    if isinstance(token, bool) or not isinstance(token, (int, float, Fraction)):
        raise ValueError(f"bad numeric literal {token!r}")
    return mode.coerce(token)


def format_number(value: Number, mode: NumericMode = None) -> str:
    """Render a number for reports: 'p/q' in exact mode, 12 significant digits otherwise."""
    if isinstance(value, Fraction) and (mode is None or mode.is_exact):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return format(float(value), ".12g")


def number_to_json(value: Number) -> object:
    """JSON-friendly form: Fractions as 'p/q' strings (ints plain), floats as floats."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value)
        return f"{value.numerator}/{value.denominator}"
    return float(value)
