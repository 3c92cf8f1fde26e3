import os
import tempfile
import logging

import numpy
import pytest

from pyclawfdr.misc import (
    time_format,
    format_float,
    as_stream,
    parse_assignment,
    get_default_args,
    get_keyword_docs,
    get_simple_logger,
    make_rng,
)

from six import StringIO


class Test(object):
    def test_time_format(self):
        assert time_format(None) == "<unknown>"
        assert time_format(0.0) == "0.0 s"
        assert time_format(0.0, digits=2) == "0.00 s"
        assert time_format(24.9) == "24.9 s"
        assert time_format(93.462, digits=3) == "1.558 m"
        assert time_format(5607.72, digits=4) == "1.5577 h"
        assert time_format(134585.28, digits=3) == "1.558 d"
        assert time_format(0.23334, digits=1) == "233.3 ms"
        assert time_format(0.00023334, digits=2) == "233.34 us"

    def test_format_float(self):
        for x in (0.1, 1.0 / 3.0, 1e-300, 123456789.123456789, -2.5):
            assert float(format_float(x)) == x
        assert format_float(float("inf")) == "inf"
        assert format_float(1.0) == "1"

    def test_as_stream(self):
        fid, fname = tempfile.mkstemp()
        os.close(fid)
        try:
            with as_stream(fname) as f:
                assert not f.closed
                assert hasattr(f, "write")
            assert f.closed
            with open(fname) as f:
                with as_stream(f) as f_:
                    assert f is f_
                    assert not f.closed
                assert not f.closed
        finally:
            os.remove(fname)

    def test_parse_assignment(self):
        assert parse_assignment("mu=3") == ("mu", 3)
        assert type(parse_assignment("mu=3")[1]) is int
        assert parse_assignment("pi=0.25") == ("pi", 0.25)
        assert parse_assignment(" R = 20.0 ") == ("R", 20.0)
        for bad in ("mu", "mu=1=2", "=3", "mu=abc"):
            with pytest.raises(ValueError):
                parse_assignment(bad)

    def test_get_default_args(self):
        def f(a):  # pragma:nocover
            pass

        assert get_default_args(f) == {}

        def f(*args, **kwds):  # pragma:nocover
            pass

        assert get_default_args(f) == {}

        def f(a, b=1):  # pragma:nocover
            pass

        assert get_default_args(f) == {"b": 1}

        def f(a=(1,)):  # pragma:nocover
            pass

        assert get_default_args(f) == {"a": (1,)}

    def test_get_keyword_docs(self):
        import pyclawfdr.sim

        data = get_keyword_docs(pyclawfdr.sim.replicate.__doc__)
        kwds = get_default_args(pyclawfdr.sim.replicate)
        assert len(data) > 1
        for key in data:
            if "default" in data[key]:
                assert key in kwds
                assert data[key]["default"] == repr(kwds[key]) or \
                    data[key]["default"].startswith("``")

        def f():
            """Something

            Parameters
            ----------
            junk1 : int
                Junk1 description.
            junk2 : float, optional
                Junk2 description more than one
                line. (default: 0.5)
            """

        data = get_keyword_docs(f.__doc__)
        assert data == {
            "junk1": {"doc": "Junk1 description."},
            "junk2": {
                "default": "0.5",
                "doc": "Junk2 description more than one line.",
            },
        }

    def test_get_simple_logger(self):
        log = get_simple_logger(console=False)
        assert log.disabled
        log = get_simple_logger(console=True)
        assert not log.disabled
        assert len(log.handlers) == 2
        fid, fname = tempfile.mkstemp()
        out = StringIO()
        os.close(fid)
        formatter = logging.Formatter("[%(levelname)s] %(message)s")
        try:
            log = get_simple_logger(
                filename=fname,
                stream=out,
                console=False,
                formatter=formatter,
                level=logging.WARNING,
            )
            assert len(log.handlers) == 2
            log.error("error_line")
            log.warning("warning_line")
            log.info("info_line")
            for handler in log.handlers:
                handler.close()
            with open(fname) as f:
                lines = f.readlines()
                assert len(lines) == 2
                assert lines[0].strip() == "[ERROR] error_line"
                assert lines[1].strip() == "[WARNING] warning_line"
            lines = out.getvalue().splitlines()
            assert lines == ["[ERROR] error_line", "[WARNING] warning_line"]
        finally:
            os.remove(fname)

    def test_make_rng(self):
        a = make_rng(3, 1).random(5)
        b = make_rng(3, 1).random(5)
        c = make_rng(3, 2).random(5)
        assert numpy.array_equal(a, b)
        assert not numpy.array_equal(a, c)
