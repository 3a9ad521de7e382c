import pytest

from rigmotion.numfmt import (
    ARCHIVAL,
    DECIMAL_PLACES,
    LLM_EXCHANGE,
    SIGNIFICANT_FIGURES,
    QuantizeSpec,
    canonical_number,
    format_quantized,
    quantize,
)

SIG1 = QuantizeSpec(SIGNIFICANT_FIGURES, 1)
SIG2 = QuantizeSpec(SIGNIFICANT_FIGURES, 2)
DP2 = QuantizeSpec(DECIMAL_PLACES, 2)
DP4 = QuantizeSpec(DECIMAL_PLACES, 4)

# Hand-checked quantization table (ties round away from zero).
TABLE = [
    (0.1234, SIG1, "0.1"),
    (0.04678, SIG1, "0.05"),
    (0.95, SIG1, "1"),
    (-0.95, SIG1, "-1"),
    (0.0, SIG1, "0"),
    (1.0, SIG1, "1"),
    (-0.3499, SIG1, "-0.3"),
    (0.35, SIG1, "0.4"),
    (123.4, SIG1, "100"),
    (0.00049, SIG1, "0.0005"),
    (9.9, SIG1, "10"),
    (-0.05, SIG1, "-0.05"),
    (2.0, SIG1, "2"),
    (0.5, SIG1, "0.5"),
    (0.1234, SIG2, "0.12"),
    (0.125, SIG2, "0.13"),
    (123.4, SIG2, "120"),
    (0.1234, DP2, "0.12"),
    (0.005, DP2, "0.01"),
    (-0.005, DP2, "-0.01"),
    (2.675, DP2, "2.68"),
    (0.7071068, DP4, "0.7071"),
]


@pytest.mark.parametrize("value,spec,expected", TABLE)
def test_quantization_table(value, spec, expected):
    assert format_quantized(value, spec) == expected
    assert quantize(value, spec) == float(expected)


def test_quantize_is_idempotent():
    for value, spec, _ in TABLE:
        once = quantize(value, spec)
        assert quantize(once, spec) == once


def test_no_exponent_in_output():
    assert format_quantized(1.5e-5, QuantizeSpec(SIGNIFICANT_FIGURES, 1)) == "0.00002"
    assert format_quantized(123456.0, QuantizeSpec(SIGNIFICANT_FIGURES, 2)) == "120000"


def test_canonical_number():
    assert canonical_number(0.7071068) == "0.707107"
    assert canonical_number(1.0) == "1"
    assert canonical_number(0.0) == "0"
    assert canonical_number(-0.0000004) == "0"  # -0 folds to 0
    assert canonical_number(-2.5) == "-2.5"
    assert canonical_number(1e-7) == "0"


def test_bad_specs_rejected():
    with pytest.raises(ValueError):
        QuantizeSpec("chop", 1)
    with pytest.raises(ValueError):
        QuantizeSpec(SIGNIFICANT_FIGURES, 0)


def test_defaults():
    assert LLM_EXCHANGE.digits == 1
    assert ARCHIVAL.mode == DECIMAL_PLACES and ARCHIVAL.digits == 4
