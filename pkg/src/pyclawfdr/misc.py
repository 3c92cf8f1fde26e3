"""
Small helpers shared by the result writers, the
simulation harness and the command-line interface.
"""
from typing import Union, Callable, Dict, Any, Optional, IO, Tuple
import contextlib
import logging
import inspect
import re
import sys

import numpy
import six

# (factor to the next unit, next unit) above one second
_LONG_UNITS = ((60.0, "m"), (60.0, "h"), (24.0, "d"))
_SHORT_UNITS = ("ms", "us", "ns")


def time_format(num, digits=1):
    # type: (Optional[float], int) -> str
    """Render a duration given in seconds with the
    largest unit that keeps the value at or above one.

    Example
    -------

    >>> time_format(0)
    '0.0 s'
    >>> time_format(0.002)
    '2.0 ms'
    >>> time_format(2001)
    '33.4 m'
    >>> time_format(90000, digits=2)
    '1.04 d'

    """
    if num is None:
        return "<unknown>"
    unit = "s"
    if num == 0.0 or num >= 1.0:
        for factor, larger in _LONG_UNITS:
            if num < factor:
                break
            num, unit = num / factor, larger
    else:
        for unit in _SHORT_UNITS:
            num *= 1000.0
            # stop at the first unit that shows a nonzero leading digit
            if abs(round(num, digits + 3)) >= 1:
                break
    return "%.*f %s" % (digits, num, unit)


def format_float(x):
    # type: (float) -> str
    """Serialize a float with 17 significant digits so that
    it parses back to the identical double.

    Example
    -------

    >>> format_float(0.1)
    '0.10000000000000001'
    >>> format_float(float('-inf'))
    '-inf'

    """
    return "%.17g" % (x)


@contextlib.contextmanager
def _borrowed(stream):
    yield stream


def as_stream(stream, mode="w", **kwds):
    # type: (Union[IO, str], str, Any) -> Any
    """Use either a file name or an already open file in a
    with statement.

    A name is opened with `mode` (and any extra keywords
    for ``open``) and closed again when the block exits.
    An open file is handed through and left open.
    """
    if isinstance(stream, six.string_types):
        return open(stream, mode=mode, **kwds)
    return _borrowed(stream)


def parse_assignment(text):
    # type: (str) -> Tuple[str, Union[int, float]]
    """Parse a ``name=value`` string into a name and a
    number. Values that are written as integers are
    returned as ``int``.

    Example
    -------

    >>> parse_assignment("mu=3")
    ('mu', 3)
    >>> parse_assignment(" pi = 0.15 ")
    ('pi', 0.15)

    """
    if text.count("=") != 1:
        raise ValueError("expected name=value, got %r" % (text))
    name, value = [v.strip() for v in text.split("=")]
    if name == "":
        raise ValueError("missing parameter name in %r" % (text))
    if re.match(r"^[+-]?\d+$", value):
        return name, int(value)
    try:
        return name, float(value)
    except ValueError:
        raise ValueError("invalid number %r for parameter %r" % (value, name))


def get_default_args(func):
    # type: (Callable[..., Any]) -> Dict[str, Any]
    """Map each parameter of `func` that has a default to
    that default.

    Example
    -------

    >>> def f(a, b=None):
    ...     pass
    >>> get_default_args(f)
    {'b': None}

    """
    empty = inspect.Parameter.empty
    params = inspect.signature(func).parameters.values()
    return dict((p.name, p.default) for p in params if p.default is not empty)


_SECTION = re.compile(r"^\s*Parameters\s*\n\s*-+\s*\n(.*?)(?:\n\s*\n|\Z)", re.S | re.M)
_ENTRY = re.compile(r"^\s*(\w+) : .+$")
_DEFAULT = re.compile(r"\(default: (.*)\)$")


def get_keyword_docs(doc):
    # type: (str) -> Dict[str, Dict[str, Any]]
    """Collect the help text of every entry in the
    'Parameters' section of a numpy-style docstring. A
    trailing ``(default: ...)`` is split off into a
    separate ``"default"`` item."""
    section = _SECTION.search(doc)
    assert section is not None
    texts = {}  # type: Dict[str, list]
    name = None
    for line in section.group(1).splitlines():
        entry = _ENTRY.match(line)
        if entry is not None:
            name = entry.group(1)
            texts[name] = []
        elif name is not None:
            texts[name].append(line.strip())
    out = {}  # type: Dict[str, Dict[str, Any]]
    for name, words in texts.items():
        text = " ".join(w for w in words if w)
        default = _DEFAULT.search(text)
        if default is None:
            out[name] = {"doc": text}
        else:
            out[name] = {
                "doc": text[: default.start()].strip(),
                "default": default.group(1),
            }
    return out


class _LevelRange(logging.Filter):
    def __init__(self, low=logging.NOTSET, high=logging.CRITICAL):
        super(_LevelRange, self).__init__()
        self.low = low
        self.high = high

    def filter(self, record):
        # type: (logging.LogRecord) -> bool
        return self.low <= record.levelno <= self.high


def get_simple_logger(
    name="pyclawfdr.cli",
    filename=None,
    stream=None,
    console=True,
    level=logging.INFO,
    formatter=None,
):
    # type: (str, Optional[str], Any, bool, int, Optional[logging.Formatter]) -> logging.Logger
    """Build a standalone logger for the command-line
    tool.

    Parameters
    ----------
    name : string
        The logger name. (default: "pyclawfdr.cli")
    filename : string, optional
        Also append records to this file. (default: None)
    stream : file-like object, optional
        Also write records to this stream. (default: None)
    console : bool, optional
        Send records up to WARNING to stdout and ERROR or
        above to stderr. (default: True)
    level : int, optional
        The threshold of the logger and of every handler.
        (default: ``logging.INFO``)
    formatter: ``logging.Formatter``, optional
        Applied to every handler. (default: None)

    Returns
    -------
    ``logging.Logger``
        The logger. It is disabled when it has no
        destination.
    """
    log = logging.Logger(name, level=level)
    handlers = []
    if filename is not None:
        handlers.append((logging.FileHandler(filename), None))
    if stream is not None:
        handlers.append((logging.StreamHandler(stream), None))
    if console:
        handlers.append((logging.StreamHandler(sys.stdout), _LevelRange(high=logging.WARNING)))
        handlers.append((logging.StreamHandler(sys.stderr), _LevelRange(low=logging.ERROR)))
    for handler, level_filter in handlers:
        handler.setLevel(level)
        if level_filter is not None:
            handler.addFilter(level_filter)
        if formatter is not None:
            handler.setFormatter(formatter)
        log.addHandler(handler)
    log.disabled = not handlers
    return log


def make_rng(*keys):
    # type: (int) -> numpy.random.Generator
    """Create a Philox generator seeded from the given
    nonnegative integers. Equal keys give identical
    streams on every platform.

    Example
    -------

    >>> a = make_rng(7, 0, 1).random(3)
    >>> b = make_rng(7, 0, 1).random(3)
    >>> bool((a == b).all())
    True

    """
    return numpy.random.Generator(
        numpy.random.Philox(numpy.random.SeedSequence([int(k) for k in keys]))
    )
