import pickle

import numpy
import pytest

from pyclawfdr.common import (
    NEG_INFINITY,
    CovariateKind,
    EstimatorKind,
    Sidedness,
    WeightKind,
    ConfigError,
    EmptyDataset,
    LengthMismatch,
    MixedCovariateKinds,
    NonFiniteValue,
)
from pyclawfdr.model import (
    TestUnit,
    Dataset,
    ClawConfig,
    DecisionResult,
    validate_dataset,
)


class TestDataset(object):
    def test_categorical(self):
        d = Dataset.from_arrays([1.0, 2.0, 3.0], ["a", "b", "a"], t_cal=[0.1, 0.2, 0.3])
        assert validate_dataset(d) is d
        assert d.m == 3
        assert d.covariate_kind == CovariateKind.categorical
        assert d.covariate_dimension == 0
        assert list(d.covariates) == ["a", "b", "a"]
        assert d.t.tolist() == [1.0, 2.0, 3.0]
        assert d.t_cal.tolist() == [0.1, 0.2, 0.3]
        with pytest.raises(ValueError):
            d.t[0] = 5.0

    def test_real(self):
        d = validate_dataset(Dataset.from_arrays([1.0, 2.0], [0.5, 1.5]))
        assert d.covariate_kind == CovariateKind.real
        assert d.covariates.shape == (2, 1)
        assert d.t_cal is None
        d = validate_dataset(Dataset.from_arrays([1.0, 2.0], [[0, 1], [2, 3]]))
        assert d.covariate_dimension == 2
        assert d.covariates.tolist() == [[0.0, 1.0], [2.0, 3.0]]

    def test_not_validated(self):
        d = Dataset([TestUnit(1.0, "a")])
        with pytest.raises(RuntimeError):
            d.t

    def test_errors(self):
        with pytest.raises(EmptyDataset):
            validate_dataset(Dataset([]))
        with pytest.raises(NonFiniteValue):
            validate_dataset(Dataset.from_arrays([1.0, float("nan")], ["a", "a"]))
        with pytest.raises(NonFiniteValue):
            validate_dataset(Dataset.from_arrays([1.0, 2.0], ["a", "a"], t_cal=[0.0, float("inf")]))
        with pytest.raises(NonFiniteValue):
            validate_dataset(Dataset([TestUnit(1.0, "a", 0.0), TestUnit(2.0, "a")]))
        with pytest.raises(MixedCovariateKinds):
            validate_dataset(Dataset([TestUnit(1.0, "a"), TestUnit(2.0, 0.5)]))
        with pytest.raises(MixedCovariateKinds):
            validate_dataset(Dataset([TestUnit(1.0, (0.0, 1.0)), TestUnit(2.0, (0.5,))]))
        with pytest.raises(MixedCovariateKinds):
            validate_dataset(Dataset([TestUnit(1.0, True)]))
        with pytest.raises(NonFiniteValue):
            validate_dataset(Dataset.from_arrays([1.0], [float("nan")]))
        with pytest.raises(LengthMismatch):
            Dataset.from_arrays([1.0, 2.0], ["a"])
        with pytest.raises(LengthMismatch):
            validate_dataset(Dataset.from_arrays([1.0, 2.0], ["a", "b"], truth=[1]))
        with pytest.raises(NonFiniteValue):
            validate_dataset(Dataset.from_arrays([1.0], ["a"], null_pool=[0.0, float("nan")]))

    def test_with_calibration_and_swapped(self):
        d = Dataset.from_arrays([1.0, 2.0, 3.0], ["a", "b", "a"], t_cal=[0.1, 0.2, 0.3])
        e = validate_dataset(d.swapped([1]))
        assert e.t.tolist() == [1.0, 0.2, 3.0]
        assert e.t_cal.tolist() == [0.1, 2.0, 0.3]
        f = validate_dataset(d.with_calibration([5.0, 6.0, 7.0]))
        assert f.t_cal.tolist() == [5.0, 6.0, 7.0]
        with pytest.raises(LengthMismatch):
            d.with_calibration([1.0])

    def test_unit_equality(self):
        assert TestUnit(1, "a", 2) == TestUnit(1.0, "a", 2.0)
        assert TestUnit(1, "a") != TestUnit(1, "b")


class TestClawConfig(object):
    def test_defaults(self):
        cfg = ClawConfig()
        assert cfg.alpha == 0.05
        assert cfg.lam == 0.5
        assert cfg.epsilon == 0.001
        assert cfg.clfdr_cap == 0.999
        assert cfg.bandwidth == "silverman"
        assert cfg.fixed_bandwidth is None
        assert cfg.weights is WeightKind.group
        assert cfg.sidedness is Sidedness.two_sided
        assert cfg.estimator is EstimatorKind.conformal
        assert cfg.seed == 0

    def test_immutable(self):
        cfg = ClawConfig()
        with pytest.raises(AttributeError):
            cfg.alpha = 0.1
        cfg2 = cfg.replace(alpha=0.1, bandwidth=0.5)
        assert cfg.alpha == 0.05
        assert cfg2.alpha == 0.1
        assert cfg2.fixed_bandwidth == 0.5
        assert cfg2 != cfg
        assert cfg2 == pickle.loads(pickle.dumps(cfg2))
        with pytest.raises(ConfigError):
            cfg.replace(junk=1)

    @pytest.mark.parametrize(
        "kwds, field",
        [
            ({"alpha": 0.0}, "alpha"),
            ({"alpha": 1.0}, "alpha"),
            ({"alpha": "0.1"}, "alpha"),
            ({"lam": 1.0}, "lam"),
            ({"epsilon": 0.5}, "epsilon"),
            ({"clfdr_cap": 1.0}, "clfdr_cap"),
            ({"density_floor": 0.0}, "density_floor"),
            ({"bandwidth": "scott"}, "bandwidth"),
            ({"bandwidth": -1.0}, "bandwidth"),
            ({"weights": "gaussian"}, "weight_scale"),
            ({"weights": "custom"}, "custom_weights"),
            ({"weights": "nearest"}, "weights"),
            ({"sidedness": "up"}, "sidedness"),
            ({"seed": -1}, "seed"),
            ({"seed": 1.5}, "seed"),
            ({"seed": True}, "seed"),
            ({"train_fraction": 1.0}, "train_fraction"),
            ({"estimator": "oracle"}, "estimator"),
        ],
    )
    def test_invalid(self, kwds, field):
        with pytest.raises(ConfigError) as excinfo:
            ClawConfig(**kwds)
        assert excinfo.value.field == field

    def test_dict(self):
        cfg = ClawConfig(weights="gaussian", weight_scale=2.0, seed=7)
        data = cfg.to_dict()
        assert data["weights"] == "gaussian"
        assert data["custom_weights"] is False
        assert ClawConfig.from_dict(data) == cfg
        with pytest.raises(ConfigError) as excinfo:
            ClawConfig.from_dict({"alpha": 2.0})
        assert excinfo.value.field == "config.alpha"
        with pytest.raises(ConfigError) as excinfo:
            ClawConfig.from_dict({"junk": 1})
        assert excinfo.value.field == "config.junk"
        with pytest.raises(ConfigError):
            ClawConfig.from_dict([])


class TestDecisionResult(object):
    def test_basic(self):
        d = DecisionResult([0, 2], 0.5, [3.0, 0.0, 3.0], [0.1, 0.9, 0.2], [0.8, 0.3, 0.7])
        assert d.n_rejected == 2
        assert d.scores.shape == (3, 2)
        with pytest.raises(AssertionError):
            DecisionResult([0], NEG_INFINITY, [1.0], [0.1], [0.2])
        d = DecisionResult([], NEG_INFINITY, numpy.zeros(2), [0.1, 0.2], [0.3, 0.4])
        assert d.n_rejected == 0
