import sys

import pyclawfdr


class Test(object):

    # See what Python versions the combined
    # coverage report includes
    def test_show_coverage(self):
        print(sys.version_info)

    def test_version(self):
        assert isinstance(pyclawfdr.__version__, str)
        major = pyclawfdr.__version__.split(".")[0]
        assert int(major) >= 0

    def test_exports(self):
        for name in (
            "config",
            "ClawConfig",
            "Dataset",
            "TestUnit",
            "validate_dataset",
            "claw_run",
            "semisup_claw_run",
            "integrative_claw",
            "mirror_threshold",
            "ebh",
            "bh",
            "storey_bh",
            "cbh_threshold",
            "ClawError",
            "ClawNumericError",
        ):
            assert hasattr(pyclawfdr, name)
        assert issubclass(pyclawfdr.ClawError, ValueError)
        assert issubclass(pyclawfdr.ClawNumericError, ArithmeticError)
