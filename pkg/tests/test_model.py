"""Tests for model parameter validation and normalization."""

import math

import pytest

from skewshadow.model import ModelParams, NormalizedParams, normalize, validate
from skewshadow.utils.exceptions import ParameterError


class TestValidate:
    def test_running_example(self):
        """(0.5, 3.0) gives a0 = -ln 2, a1 = ln 3 and the mean drift."""
        p = validate(0.5, 3.0)

        assert p.a0 == pytest.approx(-math.log(2), rel=1e-15)
        assert p.a1 == pytest.approx(math.log(3), rel=1e-15)
        assert p.v == (p.a0 + p.a1) / 2
        assert p.v == pytest.approx(0.2027326, abs=1e-7)
        assert p.is_expanding

    def test_zero_drift_rejected(self):
        """lambda0 * lambda1 == 1 names the violated constraint."""
        with pytest.raises(ParameterError) as exc:
            validate(0.5, 2.0)

        assert exc.value.constraint == "lambda0 * lambda1 != 1"
        assert "lambda0 * lambda1 != 1" in str(exc.value)
        assert exc.value.error_code == "PARAMETER_ERROR"

    @pytest.mark.parametrize(
        "lambda0, lambda1, constraint",
        [
            (2.0, 3.0, "0 < lambda0 < 1"),
            (0.0, 3.0, "0 < lambda0 < 1"),
            (-0.5, 3.0, "0 < lambda0 < 1"),
            (0.5, 1.0, "lambda1 > 1"),
            (0.5, 0.7, "lambda1 > 1"),
            (float("nan"), 3.0, "finite"),
            (0.5, float("inf"), "finite"),
            ("abc", 3.0, "finite"),
        ],
    )
    def test_invalid_multipliers(self, lambda0, lambda1, constraint):
        """Every excluded case raises with its own constraint."""
        with pytest.raises(ParameterError) as exc:
            validate(lambda0, lambda1)
        assert exc.value.details["constraint"] == constraint

    def test_signs_of_log_rates(self):
        """a0 < 0 < a1 for every valid pair."""
        for lambda0, lambda1 in [(0.1, 1.5), (0.9, 30.0), (1 / 3, 2.0)]:
            p = validate(lambda0, lambda1)
            assert p.a0 < 0 < p.a1


class TestNormalize:
    def test_positive_drift_unchanged(self):
        """(0.5, 3.0) already has v > 0."""
        n = normalize(validate(0.5, 3.0))

        assert n.inverted is False
        assert n.params.lambda0 == 0.5
        assert n.params.lambda1 == 3.0

    def test_negative_drift_inverted(self):
        """(1/3, 2) becomes (1/2, 3) with inverted = True."""
        n = normalize(validate(1 / 3, 2.0))

        assert n.inverted is True
        assert n.params.lambda0 == pytest.approx(0.5, rel=1e-15)
        assert n.params.lambda1 == pytest.approx(3.0, rel=1e-15)
        assert n.v > 0

    def test_idempotent(self):
        """normalize(normalize(p)) is normalize(p)."""
        once = normalize(validate(1 / 3, 2.0))
        assert normalize(once) is once

    def test_inverse_twice_is_identity(self):
        """Swapping to the inverse map twice returns the original pair."""
        p = validate(0.4, 5.0)
        back = p.inverse().inverse()

        assert back.lambda0 == pytest.approx(p.lambda0, rel=1e-15)
        assert back.lambda1 == pytest.approx(p.lambda1, rel=1e-15)

    def test_exactly_one_drift_sign(self):
        """Every valid pair normalizes to v > 0."""
        for lambda0, lambda1 in [(0.2, 1.1), (0.9, 1.2), (0.5, 3.0), (1 / 3, 2.0)]:
            p = validate(lambda0, lambda1)
            assert (p.v > 0) != (p.v < 0)
            assert normalize(p).v > 0

    def test_normalized_requires_positive_drift(self):
        """NormalizedParams refuses a negative-drift model."""
        p = validate(1 / 3, 2.0)
        with pytest.raises(ParameterError):
            NormalizedParams(params=p)

    def test_params_are_frozen(self):
        """Parameter records are immutable."""
        p = validate(0.5, 3.0)
        with pytest.raises(Exception):
            p.lambda0 = 0.1  # type: ignore[misc]
        assert isinstance(p, ModelParams)
