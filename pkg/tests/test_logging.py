"""Tests for structured logging, metrics and the exception hierarchy."""

import io
import json
import logging
import sys

import pytest

from skewshadow.logging import JSONFormatter, get_logger, setup_logging
from skewshadow.metrics import HAS_PROMETHEUS, SimulationMetrics
from skewshadow.utils.exceptions import (
    ConfigurationError,
    ConsistencyError,
    InstanceFormatError,
    ParameterError,
    SkewShadowError,
    SolverError,
)


class TestLogging:
    def test_json_records(self):
        """One JSON object per line with extra fields inlined."""
        stream = io.StringIO()
        setup_logging(level="INFO", json_format=True, stream=stream)
        get_logger("skewshadow.montecarlo").info(
            "sweep cell done", extra={"n": 800, "c": 1.5, "p_hat": 0.42}
        )

        record = json.loads(stream.getvalue().strip())
        assert record["msg"] == "sweep cell done"
        assert record["level"] == "INFO"
        assert record["logger"] == "skewshadow.montecarlo"
        assert (record["n"], record["c"], record["p_hat"]) == (800, 1.5, 0.42)

    def test_level_filters(self):
        stream = io.StringIO()
        setup_logging(level="WARNING", stream=stream)
        get_logger("skewshadow.shadow").info("k_fast converged")

        assert stream.getvalue() == ""

    def test_text_format(self):
        stream = io.StringIO()
        setup_logging(level="DEBUG", json_format=False, stream=stream)
        get_logger().debug("ruin exponent solved")

        line = stream.getvalue()
        assert "[DEBUG] skewshadow: ruin exponent solved" in line

    def test_unknown_level(self):
        with pytest.raises(ValueError):
            setup_logging(level="CHATTY")

    def test_unserializable_extra(self):
        record = logging.LogRecord(
            "skewshadow", logging.INFO, __file__, 1, "cell", None, None
        )
        record.shape = {1, 2}
        data = json.loads(JSONFormatter().format(record))
        assert data["shape"] == str({1, 2})

    def test_record_fields_stay_out(self):
        """Only the four fixed keys and the extra fields reach the JSON object."""
        record = logging.LogRecord(
            "skewshadow", logging.INFO, __file__, 1, "cell", None, None
        )
        record.n = 800
        data = json.loads(JSONFormatter().format(record))
        assert set(data) == {"ts", "level", "logger", "msg", "n"}

    def test_exception_logged(self):
        try:
            raise SolverError("no bracket", solver="ruin-bracket")
        except SolverError:
            record = logging.LogRecord(
                "skewshadow", logging.ERROR, __file__, 1, "failed", None, sys.exc_info()
            )
        data = json.loads(JSONFormatter().format(record))
        assert "SolverError" in data["exception"]


class TestMetrics:
    def test_disabled_is_noop(self):
        metrics = SimulationMetrics(enabled=False)
        with metrics.track_chunk("s", 64):
            pass
        metrics.record_guard(3)

        assert metrics.enabled is False

    @pytest.mark.skipif(not HAS_PROMETHEUS, reason="prometheus_client not installed")
    def test_counts_samples(self):
        from prometheus_client import REGISTRY

        metrics = SimulationMetrics(enabled=True, prefix="skewshadow_test")
        with metrics.track_chunk("ruin", 4096):
            pass
        metrics.record_guard(2)

        samples = REGISTRY.get_sample_value(
            "skewshadow_test_samples_total", {"estimator": "ruin"}
        )
        guards = REGISTRY.get_sample_value("skewshadow_test_guard_recomputations_total")
        assert samples == 4096
        assert guards == 2


class TestExceptions:
    def test_hierarchy(self):
        for error in (
            ParameterError("x"),
            ConfigurationError("x"),
            InstanceFormatError("x"),
            SolverError("x"),
            ConsistencyError("x"),
        ):
            assert isinstance(error, SkewShadowError)

    def test_parameter_error(self):
        error = ParameterError(
            "lambda1 = 0.5 violates lambda1 > 1", constraint="lambda1 > 1"
        )

        assert str(error) == "[PARAMETER_ERROR] lambda1 = 0.5 violates lambda1 > 1"
        assert error.details == {"constraint": "lambda1 > 1"}

    def test_configuration_error(self):
        error = ConfigurationError("bad seed", config_key="seed")
        assert error.config_key == "seed"
        assert error.error_code == "CONFIGURATION_ERROR"

    def test_instance_error_line_number(self):
        error = InstanceFormatError("bit must be 0 or 1", line_number=4, path="a.txt")

        assert error.message == "line 4: bit must be 0 or 1"
        assert error.details == {"line_number": 4, "path": "a.txt"}

    def test_consistency_error_values(self):
        error = ConsistencyError("mismatch", statistic=1.0, oracle=2.0)
        assert error.details == {"statistic": 1.0, "oracle": 2.0}

    def test_plain_message_without_code(self):
        assert str(SkewShadowError("plain")) == "plain"
