import pytest

from pyclawfdr.common import NEG_INFINITY
from pyclawfdr.model import ClawConfig, Dataset
from pyclawfdr.pipeline import StandardNormalNull, claw_run
from pyclawfdr.results import ClawRun, _yaml_scalar

from six import StringIO

yaml_available = False
try:
    import yaml

    yaml_available = True
except ImportError:
    pass


def _run(alpha=0.5):
    data = Dataset.from_arrays(
        [-3.5, 0.2, 0.5, 4.0, -0.1, 3.2],
        ["a", "a", "a", "b", "b", "b"],
        t_cal=[0.1, -0.4, 1.2, 0.3, -0.8, 0.6],
    )
    return claw_run(data, StandardNormalNull(), ClawConfig(alpha=alpha))


class TestClawRun(object):
    def test_properties(self):
        run = _run()
        assert isinstance(run, ClawRun)
        assert run.m == 6
        assert run.rejected is run.decision.rejected
        assert run.tau == run.decision.tau
        assert len(run.evalues) == 6
        assert run.wall_time is not None
        assert run.null_split is None

    def test_summary(self):
        run = _run()
        data = run.summary()
        assert data["m"] == 6
        assert data["alpha"] == 0.5
        assert data["n_rejected"] == len(run.rejected)
        assert data["tau_is_neg_infinity"] == (run.tau == NEG_INFINITY)
        assert data["estimator"] == "conformal"
        assert data["weights"] == "group"
        assert data["bandwidth"] == run.estimator_state.bandwidth

    def test_pprint(self):
        run = _run()
        out = StringIO()
        run.pprint(stream=out)
        text = out.getvalue()
        assert text.startswith("claw results:\n")
        assert " - m: 6\n" in text
        assert " - wall_time: " in text
        assert str(run) == text

    def test_write(self):
        if not yaml_available:
            pytest.skip("yaml is not available")
        run = _run()
        run.wall_time = None
        out = StringIO()
        run.write(out)
        data = yaml.safe_load(out.getvalue())
        assert data == run.summary()
        out = StringIO()
        run.write(out, prefix="  ")
        assert all(line.startswith("  ") for line in out.getvalue().splitlines())

    def test_yaml_scalar(self):
        assert _yaml_scalar(None) == "null"
        assert _yaml_scalar(True) == "true"
        assert _yaml_scalar(float("-inf")) == "-.inf"
        assert _yaml_scalar(float("inf")) == ".inf"
        assert _yaml_scalar(float("nan")) == ".nan"
        assert _yaml_scalar(0.5) == "0.5"
        assert _yaml_scalar("it's") == "'it''s'"
        assert _yaml_scalar(3) == "3"
        if yaml_available:
            assert yaml.safe_load(_yaml_scalar(float("-inf"))) == float("-inf")
            assert yaml.safe_load(_yaml_scalar("it's")) == "it's"
