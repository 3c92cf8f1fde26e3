import math
import pickle

import pytest

from pyclawfdr import config
from pyclawfdr.common import (
    inf,
    nan,
    NEG_INFINITY,
    Sidedness,
    WeightKind,
    DistanceNorm,
    EstimatorKind,
    CovariateKind,
    ClawError,
    ClawNumericError,
    ConfigError,
    DegenerateSample,
    ParseError,
    ReplicationError,
    leq,
    geq,
)


class Test(object):
    def test_inf(self):
        assert math.isinf(inf)
        assert math.isinf(-inf)
        assert NEG_INFINITY == -inf

    def test_nan(self):
        assert math.isnan(nan)

    def test_enums(self):
        assert Sidedness("two_sided") is Sidedness.two_sided
        assert Sidedness.left == "left"
        assert WeightKind("gaussian") is WeightKind.gaussian
        assert DistanceNorm("euclidean") is DistanceNorm.euclidean
        assert EstimatorKind("plain") is EstimatorKind.plain
        assert CovariateKind("categorical") is CovariateKind.categorical
        with pytest.raises(ValueError):
            Sidedness("both")

    def test_hierarchy(self):
        assert issubclass(DegenerateSample, ClawError)
        assert issubclass(ClawError, ValueError)
        assert not issubclass(ClawNumericError, ClawError)
        assert issubclass(ClawNumericError, ArithmeticError)

    def test_parse_error(self):
        e = ParseError("bad value", line=3)
        assert str(e) == "line 3: bad value"
        assert e.line == 3
        assert e.detail == "bad value"
        assert str(ParseError("bad value")) == "bad value"
        e_ = pickle.loads(pickle.dumps(e))
        assert type(e_) is ParseError
        assert str(e_) == str(e)
        assert e_.line == 3

    def test_config_error(self):
        e = ConfigError("config.alpha", "must lie in (0, 1]")
        assert str(e) == "config.alpha: must lie in (0, 1]"
        assert e.field == "config.alpha"
        e_ = pickle.loads(pickle.dumps(e))
        assert str(e_) == str(e)
        assert e_.field == e.field

    def test_replication_error(self):
        e = ReplicationError(4, 123, ZeroDivisionError("division by zero"))
        assert e.replication == 4
        assert e.seed == 123
        assert isinstance(e.cause, ZeroDivisionError)
        assert "replication 4" in str(e)
        assert "ZeroDivisionError: division by zero" in str(e)
        e_ = pickle.loads(pickle.dumps(e))
        assert e_.cause is None
        assert e_.cause_text == e.cause_text
        assert str(e_) == str(e)

    def test_leq_geq(self):
        assert leq(1.0, 1.0)
        assert leq(1.0 + 1e-12, 1.0)
        assert not leq(1.0 + 1e-6, 1.0)
        assert leq(0.1 + 0.2, 0.3)
        assert geq(1.0 - 1e-12, 1.0)
        assert not geq(0.5, 1.0)
        assert not leq(1.0 + 1e-12, 1.0, tol=0.0)
        assert list(leq([0.5, 1.5], 1.0)) == [True, False]

    def test_comparison_tolerance_setting(self, monkeypatch):
        assert not leq(1.0 + 1e-8, 1.0)
        assert not geq(1.0 - 1e-8, 1.0)
        monkeypatch.setattr(config, "COMPARISON_TOLERANCE", 1e-6)
        assert leq(1.0 + 1e-8, 1.0)
        assert geq(1.0 - 1e-8, 1.0)
