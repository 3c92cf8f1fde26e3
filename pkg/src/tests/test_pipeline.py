import numpy
import pytest
import scipy.stats

from pyclawfdr.common import (
    NEG_INFINITY,
    ClawError,
    EmptyCalibration,
    LengthMismatch,
    MissingColumn,
    NonFiniteValue,
    ParseError,
)
from pyclawfdr.model import ClawConfig, Dataset
from pyclawfdr.pipeline import (
    StandardNormalNull,
    TabulatedNull,
    MixtureTruth,
    claw_run,
    oracle_scores,
)
from pyclawfdr.mirror import ebh

from six import StringIO


def _grouped_data(m, seed, full_null=False):
    rng = numpy.random.RandomState(seed)
    S = numpy.where(numpy.arange(m) < m // 2, "g1", "g2")
    T = rng.normal(size=m)
    if not full_null:
        signal = (S == "g1") & (rng.uniform(size=m) < 0.4)
        T[signal] += 3.5
    T_cal = rng.normal(size=m)
    return Dataset.from_arrays(T, list(S), t_cal=T_cal)


class TestNulls(object):
    def test_standard_normal(self):
        f0 = StandardNormalNull()
        assert f0.cdf(0.0) == 0.5
        assert f0.pdf(0.0) == pytest.approx(0.3989422804)
        assert f0.sf(1.0) == pytest.approx(1 - scipy.stats.norm.cdf(1.0))
        assert f0.describe() == "standard_normal"

    def test_tabulated(self):
        grid = numpy.linspace(-8, 8, 3201)
        f0 = TabulatedNull(grid, scipy.stats.norm.cdf(grid), source="normal.csv")
        t = numpy.array([-1.0, 0.0, 0.5, 2.0])
        assert numpy.allclose(f0.cdf(t), scipy.stats.norm.cdf(t), atol=1e-5)
        assert numpy.allclose(f0.pdf(t), scipy.stats.norm.pdf(t), atol=1e-4)
        assert f0.cdf(-20.0) == 0.0
        assert f0.cdf(20.0) == 1.0
        assert f0.pdf(20.0) == 0.0
        assert f0.describe() == {"table": "normal.csv"}

    def test_tabulated_errors(self):
        with pytest.raises(LengthMismatch):
            TabulatedNull([0.0, 1.0], [0.5])
        with pytest.raises(ClawError):
            TabulatedNull([0.0], [0.5])
        with pytest.raises(NonFiniteValue):
            TabulatedNull([0.0, float("nan")], [0.0, 1.0])
        with pytest.raises(ClawError):
            TabulatedNull([1.0, 0.0], [0.0, 1.0])
        with pytest.raises(ClawError):
            TabulatedNull([0.0, 1.0], [0.6, 0.4])

    def test_from_csv(self):
        f0 = TabulatedNull.from_csv(StringIO("t,cdf\n-1,0\n0,0.5\n1,1\n"))
        assert f0.cdf(0.5) == 0.75
        assert f0.describe() == {"table": None}
        with pytest.raises(MissingColumn):
            TabulatedNull.from_csv(StringIO("t,F\n0,0.5\n"))
        with pytest.raises(ParseError) as excinfo:
            TabulatedNull.from_csv(StringIO("t,cdf\n-1,0\n0,x\n"))
        assert excinfo.value.line == 3
        with pytest.raises(ParseError):
            TabulatedNull.from_csv(StringIO(""))


class TestClawRun(object):
    def test_basic(self):
        data = _grouped_data(200, 1)
        run = claw_run(data, StandardNormalNull(), ClawConfig(alpha=0.1))
        d = run.decision
        assert run.m == 200
        assert d.n_rejected > 0
        assert numpy.all(d.u[d.rejected] <= d.tau)
        assert numpy.all(d.u[d.rejected] < d.u_cal[d.rejected])
        assert ebh(d.evalues, 0.1).tolist() == d.rejected.tolist()

    def test_deterministic(self):
        a = claw_run(_grouped_data(80, 2), StandardNormalNull())
        b = claw_run(_grouped_data(80, 2), StandardNormalNull())
        assert numpy.array_equal(a.decision.u, b.decision.u)
        assert numpy.array_equal(a.decision.u_cal, b.decision.u_cal)
        assert a.tau == b.tau

    def test_swap_invariance(self):
        data = _grouped_data(120, 3)
        run = claw_run(data, StandardNormalNull(), ClawConfig(alpha=0.2))
        swap = numpy.arange(0, 120, 3)
        other = claw_run(data.swapped(swap), StandardNormalNull(), ClawConfig(alpha=0.2))
        u = run.decision.u.copy()
        u_cal = run.decision.u_cal.copy()
        u[swap], u_cal[swap] = run.decision.u_cal[swap], run.decision.u[swap]
        assert numpy.array_equal(other.decision.u, u)
        assert numpy.array_equal(other.decision.u_cal, u_cal)

    def test_single_unit(self):
        data = Dataset.from_arrays([3.0], ["a"], t_cal=[0.2])
        run = claw_run(data, StandardNormalNull(), ClawConfig(bandwidth=1.0))
        d = run.decision
        assert (run.tau == NEG_INFINITY) or (run.tau == min(d.u[0], d.u_cal[0]))
        assert d.n_rejected <= 1

    def test_real_covariates(self):
        rng = numpy.random.RandomState(4)
        S = numpy.arange(100, dtype=float)
        T = rng.normal(size=100)
        T[40:60] += 4.0
        data = Dataset.from_arrays(T, S, t_cal=rng.normal(size=100))
        cfg = ClawConfig(alpha=0.1, weights="gaussian", weight_scale=10.0)
        run = claw_run(data, StandardNormalNull(), cfg)
        d = run.decision
        assert run.weight_matrix.symmetric
        assert numpy.all(d.u[d.rejected] < d.u_cal[d.rejected])
        if d.n_rejected:
            assert d.fdp_estimate <= 0.1 + 1e-12

    def test_missing_calibration(self):
        data = Dataset.from_arrays([1.0, 2.0], ["a", "b"])
        with pytest.raises(EmptyCalibration):
            claw_run(data, StandardNormalNull())


class TestOracle(object):
    def test_ratio(self):
        model = MixtureTruth([0.5, 0.1], [0.0, -2.0], [1.0, 0.5])
        r = model.ratio(numpy.array([0.3, -2.0]))
        assert r[0] == pytest.approx(1.0)
        expected = 0.9 * scipy.stats.norm.pdf(2.0) / (0.1 * scipy.stats.norm.pdf(0.0) / 0.5)
        assert r[1] == pytest.approx(expected)
        assert r[1] == pytest.approx(0.6090, abs=1e-4)
        assert MixtureTruth([0.0], 1.0, 1.0).ratio(numpy.array([0.0]))[0] == numpy.inf

    def test_oracle_scores(self):
        data = Dataset.from_arrays([0.3, -2.0], ["a", "b"], t_cal=[-2.0, 0.3])
        model = MixtureTruth([0.5, 0.1], [0.0, -2.0], [1.0, 0.5])
        u, u_cal = oracle_scores(data, model)
        assert u[0] == pytest.approx(1.0)
        assert u_cal[1] == pytest.approx(model.ratio(numpy.array([0.3, 0.3]))[1])
        data = Dataset.from_arrays([0.3, -2.0], ["a", "b"], t_cal=[-2.0, 0.3],
                                   truth_model=model)
        v, v_cal = oracle_scores(data)
        assert numpy.array_equal(u, v)
        with pytest.raises(ClawError):
            oracle_scores(Dataset.from_arrays([0.3], ["a"], t_cal=[0.1]))
        with pytest.raises(LengthMismatch):
            oracle_scores(Dataset.from_arrays([0.3], ["a"], t_cal=[0.1]), model)
