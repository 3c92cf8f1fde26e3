"""
The classical procedure with a known null distribution,
the null evaluators it accepts and the oracle scores used
to benchmark it.

Copyright by the pyclawfdr developers.
"""
from typing import Any, Optional, Tuple
import csv
import logging
import time

import numpy
import scipy.stats
import six

from pyclawfdr.common import (
    ClawError,
    EmptyCalibration,
    LengthMismatch,
    MissingColumn,
    NonFiniteValue,
    ParseError,
)
from pyclawfdr.model import ClawConfig, validate_dataset
from pyclawfdr.weights import build_weights
from pyclawfdr.estimators import ConformalClfdrScore
from pyclawfdr.mirror import decide
from pyclawfdr.results import ClawRun
from pyclawfdr.misc import as_stream

logger = logging.getLogger("pyclawfdr")


class StandardNormalNull(object):
    """The N(0, 1) null distribution."""

    __slots__ = ()

    def pdf(self, t):
        return scipy.stats.norm.pdf(t)

    def cdf(self, t):
        return scipy.stats.norm.cdf(t)

    def sf(self, t):
        return scipy.stats.norm.sf(t)

    def describe(self):
        return "standard_normal"


class TabulatedNull(object):
    """A null distribution given by its CDF on a grid.

    The CDF is linearly interpolated between grid points
    (and held at 0 and 1 outside the grid). The density is
    the interpolated numerical derivative of the tabulated
    CDF.

    Parameters
    ----------
    t : array_like
        Strictly increasing grid points.
    cdf : array_like
        Nondecreasing CDF values in [0, 1] at the grid
        points.
    """

    __slots__ = ("grid", "values", "_density", "source")

    def __init__(self, t, cdf, source=None):
        grid = numpy.asarray(t, dtype=float)
        values = numpy.asarray(cdf, dtype=float)
        if (grid.ndim != 1) or (grid.shape != values.shape):
            raise LengthMismatch("grid and CDF values must be 1-d arrays of equal length")
        if len(grid) < 2:
            raise ClawError("a tabulated CDF needs at least two grid points")
        if not (numpy.all(numpy.isfinite(grid)) and numpy.all(numpy.isfinite(values))):
            raise NonFiniteValue("tabulated CDF contains non-finite values")
        if numpy.any(numpy.diff(grid) <= 0):
            raise ClawError("tabulated CDF grid must be strictly increasing")
        if numpy.any(numpy.diff(values) < 0) or (values[0] < 0) or (values[-1] > 1):
            raise ClawError("tabulated CDF values must be nondecreasing in [0, 1]")
        self.grid = grid
        self.values = values
        self._density = numpy.maximum(numpy.gradient(values, grid), 0.0)
        self.source = source

    @classmethod
    def from_csv(cls, stream):
        """Read a table with a header row naming the
        columns ``t`` and ``cdf``."""
        with as_stream(stream, mode="r", newline="") as f:
            reader = csv.reader(f)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise ParseError("empty CDF table", line=1)
            for name in ("t", "cdf"):
                if name not in header:
                    raise MissingColumn("CDF table has no %r column" % (name))
            it, ic = header.index("t"), header.index("cdf")
            t, cdf = [], []
            for lineno, row in enumerate(reader, 2):
                if len(row) == 0:
                    continue
                if len(row) != len(header):
                    raise ParseError(
                        "expected %d fields, got %d" % (len(header), len(row)), line=lineno
                    )
                try:
                    t.append(float(row[it]))
                    cdf.append(float(row[ic]))
                except ValueError:
                    raise ParseError("non-numeric entry", line=lineno)
        source = stream if isinstance(stream, six.string_types) else None
        return cls(t, cdf, source=source)

    def cdf(self, t):
        return numpy.interp(t, self.grid, self.values, left=0.0, right=1.0)

    def sf(self, t):
        return 1.0 - self.cdf(t)

    def pdf(self, t):
        return numpy.interp(t, self.grid, self._density, left=0.0, right=0.0)

    def describe(self):
        return {"table": self.source}


def claw_run(data, f0, cfg=None):
    """Run the classical procedure: build the weights,
    compute p-values, form the conformalized estimators and
    the scores of every test and calibration statistic,
    and apply the mirror rule.

    Parameters
    ----------
    data : :class:`Dataset <pyclawfdr.model.Dataset>`
        The data. Every unit needs a calibration
        statistic.
    f0 : object
        The null distribution, with ``pdf`` and ``cdf``
        methods (for example :class:`StandardNormalNull`).
    cfg : :class:`ClawConfig <pyclawfdr.model.ClawConfig>`, optional
        The configuration. (default: ClawConfig())

    Returns
    -------
    :class:`ClawRun <pyclawfdr.results.ClawRun>`
    """
    start = time.time()
    if cfg is None:
        cfg = ClawConfig()
    data = validate_dataset(data, cfg)
    if data.t_cal is None:
        raise EmptyCalibration(
            "the classical procedure needs a calibration statistic for every unit"
        )
    W = build_weights(data, cfg)
    score = ConformalClfdrScore(data.t, data.t_cal, W, f0, cfg)
    u, u_cal = score.score_pairs()
    decision = decide(u, u_cal, cfg.alpha)
    run = ClawRun(
        cfg,
        W,
        score.state,
        decision,
        score_function=score,
        wall_time=time.time() - start,
    )
    logger.debug("claw run: m=%d, %d rejection(s)", data.m, decision.n_rejected)
    return run


class MixtureTruth(object):
    """The generating model of a simulation: unit i is
    non-null with probability ``pi[i]`` and its non-null
    statistic is N(``alt_mean[i]``, ``alt_sd[i]**2``).

    Attributes
    ----------
    pi : numpy.ndarray
    alt_mean : numpy.ndarray
    alt_sd : numpy.ndarray
    null : object
        The null distribution. (default:
        :class:`StandardNormalNull`)
    """

    __slots__ = ("pi", "alt_mean", "alt_sd", "null")

    def __init__(self, pi, alt_mean, alt_sd, null=None):
        self.pi = numpy.asarray(pi, dtype=float)
        self.alt_mean = numpy.broadcast_to(
            numpy.asarray(alt_mean, dtype=float), self.pi.shape
        ).copy()
        self.alt_sd = numpy.broadcast_to(
            numpy.asarray(alt_sd, dtype=float), self.pi.shape
        ).copy()
        assert numpy.all(self.alt_sd > 0)
        self.null = StandardNormalNull() if null is None else null

    def alt_pdf(self, t):
        return scipy.stats.norm.pdf(t, loc=self.alt_mean, scale=self.alt_sd)

    def ratio(self, t):
        """R(t, S_i) = (1 - pi_i) f0(t) / (pi_i f1_i(t)),
        elementwise over units, +inf where the denominator
        vanishes."""
        t = numpy.asarray(t, dtype=float)
        num = (1.0 - self.pi) * self.null.pdf(t)
        den = self.pi * self.alt_pdf(t)
        out = numpy.full(len(t), numpy.inf)
        ok = den > 0
        out[ok] = num[ok] / den[ok]
        return out


def oracle_scores(data, true_model=None):
    # type: (Any, Optional[MixtureTruth]) -> Tuple[numpy.ndarray, numpy.ndarray]
    """Returns the oracle score pairs (R(T_i, S_i),
    R(T_cal_i, S_i)) under the known generating model. The
    model defaults to the one attached to the dataset."""
    data = validate_dataset(data)
    if true_model is None:
        true_model = data.truth_model
    if true_model is None:
        raise ClawError("no generating model is available for oracle scores")
    if len(true_model.pi) != data.m:
        raise LengthMismatch("generating model describes %d units, dataset has %d"
                             % (len(true_model.pi), data.m))
    if data.t_cal is None:
        raise EmptyCalibration("oracle scores need calibration statistics")
    return true_model.ratio(data.t), true_model.ratio(data.t_cal)
