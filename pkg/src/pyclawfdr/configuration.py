"""
Process-wide configuration settings.

Settings can be overridden through environment variables
carrying the prefix ``CLAW_`` (for example ``CLAW_SEED``).
"""
import os
import platform

from pyclawfdr import __version__


def _seed(text):
    if text.strip().lower() in ("", "none"):
        return None
    value = int(text)
    if value < 0:
        raise ValueError("a seed must be nonnegative")
    return value


def _chunk_size(text):
    value = int(text)
    if value < 1:
        raise ValueError("the chunk size must be at least 1")
    return value


def _nonnegative(text):
    value = float(text)
    if not (value >= 0):
        raise ValueError("expected a nonnegative number")
    return value


_ENV_PREFIX = "CLAW_"

# parser of each setting when read from the environment
_PARSERS = {
    "SEED": _seed,
    "CHUNK_SIZE": _chunk_size,
    "WEIGHT_TRUNCATION": _nonnegative,
    "COMPARISON_TOLERANCE": _nonnegative,
}


class Configuration(object):
    """The main configuration object.

    Attributes
    ----------
    SEED : int or None
        A seed that overrides the seed stored in a run
        configuration file. The command-line ``--seed``
        flag still takes precedence. (default: None)
    CHUNK_SIZE : int
        The number of evaluation points processed per
        block when kernel sums are computed. Only affects
        memory use; results do not depend on it.
        (default: 512)
    WEIGHT_TRUNCATION : float
        Kernel weights strictly below this value are set
        to zero. A value of zero disables truncation.
        (default: 0.0)
    COMPARISON_TOLERANCE : float
        The relative tolerance used when an FDP estimate
        or step-up statistic is compared against its
        threshold. (default: 1e-10)
    """

    __slots__ = (
        "SEED",
        "CHUNK_SIZE",
        "WEIGHT_TRUNCATION",
        "COMPARISON_TOLERANCE",
    )

    def __init__(self):
        self.reset()

    def reset(self, use_environment=True):
        """Restore the defaults, then apply any CLAW_*
        environment variables when `use_environment` is
        True. An unparsable variable raises ValueError
        naming it."""
        self.SEED = None
        self.CHUNK_SIZE = 512
        self.WEIGHT_TRUNCATION = 0.0
        self.COMPARISON_TOLERANCE = 1e-10
        if not use_environment:
            return
        for symbol in self.__slots__:
            text = os.environ.get(_ENV_PREFIX + symbol)
            if text is None:
                continue
            try:
                value = _PARSERS[symbol](text)
            except ValueError as e:
                raise ValueError("invalid value %s%s=%s (%s)" % (_ENV_PREFIX, symbol, text, e))
            setattr(self, symbol, value)

    def __str__(self):
        lines = [
            "pyclawfdr version: %s" % (__version__),
            "loaded from: %s" % (os.path.dirname(__file__)),
            "python version: %s %s (%s, %s)"
            % (
                platform.python_implementation(),
                platform.python_version(),
                platform.system(),
                os.name,
            ),
            "configuration:",
        ]
        lines.extend(" - %s: %s" % (key, getattr(self, key)) for key in self.__slots__)
        return "\n".join(lines)


config = Configuration()

if __name__ == "__main__":  # pragma:nocover
    print(config)
