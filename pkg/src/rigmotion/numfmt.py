"""Deterministic number formatting and quantization.

All on-disk and on-wire numbers in this package go through these helpers
so that golden files are bit-exact. Quantization operates on the shortest
decimal representation of the float (``repr``), with ties rounded away
from zero; plain digit chopping is deliberately not used because it can
introduce up to 10% error at one significant figure (0.99 -> 0.9).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

SIGNIFICANT_FIGURES = "significant_figures"
DECIMAL_PLACES = "decimal_places"


@dataclass(frozen=True)
class QuantizeSpec:
    """How to round numbers when emitting animation strings.

    mode: "significant_figures" or "decimal_places"; digits >= 1.
    """

    mode: str = SIGNIFICANT_FIGURES
    digits: int = 1

    def __post_init__(self) -> None:
        if self.mode not in (SIGNIFICANT_FIGURES, DECIMAL_PLACES):
            raise ValueError(f"unknown quantize mode: {self.mode!r}")
        if self.digits < 1:
            raise ValueError("digits must be >= 1")


#: Matches the paper's single-significant-figure exchange format.
LLM_EXCHANGE = QuantizeSpec(SIGNIFICANT_FIGURES, 1)
#: Default for archival serialization (fmt, clip JSON keys in .anim.txt form).
ARCHIVAL = QuantizeSpec(DECIMAL_PLACES, 4)


def _to_decimal(x: float) -> Decimal:
    if not math.isfinite(x):
        raise ValueError(f"cannot format non-finite number {x}")
    return Decimal(repr(float(x)))


def _strip(d: Decimal) -> str:
    """Plain decimal string, no exponent, no trailing zeros, -0 folded to 0."""
    if d == 0:
        return "0"
    text = format(d.normalize(), "f")
    return text


def quantize_decimal(x: float, spec: QuantizeSpec) -> Decimal:
    d = _to_decimal(x)
    if spec.mode == DECIMAL_PLACES:
        exp = Decimal(1).scaleb(-spec.digits)
        return d.quantize(exp, rounding=ROUND_HALF_UP)
    if d == 0:
        return Decimal(0)
    magnitude = d.adjusted()  # exponent of the leading significant digit
    exp = Decimal(1).scaleb(magnitude - spec.digits + 1)
    return d.quantize(exp, rounding=ROUND_HALF_UP)


def quantize(x: float, spec: QuantizeSpec) -> float:
    return float(quantize_decimal(x, spec))


def format_quantized(x: float, spec: QuantizeSpec) -> str:
    return _strip(quantize_decimal(x, spec))


def canonical_number(x: float) -> str:
    """Canonical JSON number: up to 6 decimal places, no exponent."""
    d = _to_decimal(x).quantize(Decimal("0.000001"), rounding=ROUND_HALF_UP)
    return _strip(d)
