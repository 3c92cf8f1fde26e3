"""
Locally adaptive density and proportion estimators, the
conditional local FDR score and its monotone transform.

The conformalized estimators pool each test statistic
with its calibration partner. Every sum over units adds
the symmetric pair term first (for example
K(t - T_j) + K(t - T_cal_j)) and only then accumulates, so
exchanging T_j and T_cal_j leaves every output
bit-for-bit unchanged.

Copyright by the pyclawfdr developers.
"""
from typing import Any, Tuple, Union
import logging

import numpy
import scipy.stats

from pyclawfdr.common import (
    EstimatorKind,
    Sidedness,
    ClawNumericError,
    DegenerateSample,
    LengthMismatch,
    ZeroWeightRow,
)
from pyclawfdr.configuration import config

logger = logging.getLogger("pyclawfdr")

ArrayLike = Union[float, numpy.ndarray]


def gaussian_kernel(x, h):
    # type: (ArrayLike, float) -> ArrayLike
    """K_h(x) = phi(x / h) / h"""
    return scipy.stats.norm.pdf(numpy.divide(x, h)) / h


def silverman_bandwidth(values):
    """Silverman's rule of thumb,
    h = 0.9 min(sd, IQR / 1.34) n^(-1/5).

    The sample is sorted first, so the result does not
    depend on the order of `values`. The standard
    deviation uses n - 1 degrees of freedom and the
    quartiles use linear interpolation between order
    statistics. When only one of the two spread measures
    is zero, the other one is used.

    Parameters
    ----------
    values : array_like
        The pooled sample, typically the m test statistics
        followed by the m calibration statistics.

    Raises
    ------
    DegenerateSample
        If fewer than two distinct values are given.
    """
    x = numpy.sort(numpy.asarray(values, dtype=float).ravel())
    n = len(x)
    if (n < 2) or (x[0] == x[-1]):
        raise DegenerateSample(
            "Silverman's rule needs at least two distinct values; "
            "configure a fixed bandwidth instead"
        )
    sd = numpy.std(x, ddof=1)
    q75, q25 = numpy.percentile(x, [75, 25])
    spread = (q75 - q25) / 1.34
    if spread > 0:
        a = min(sd, spread)
    else:
        a = sd
    assert a > 0
    return 0.9 * a * n ** (-0.2)


def pvalue_from_null(t, null, sidedness="two_sided"):
    """Compute p-values from a null distribution.

    Parameters
    ----------
    t : float or array_like
        The statistics.
    null : object or callable
        Either an object with ``cdf`` (and optionally
        ``sf``) methods or a plain CDF callable.
    sidedness : {"two_sided", "left", "right"}, optional
        The alternative. (default: "two_sided")

    Example
    -------

    >>> import scipy.stats
    >>> float(pvalue_from_null(0.0, scipy.stats.norm))
    1.0

    """
    sidedness = Sidedness(sidedness)
    t = numpy.asarray(t, dtype=float)
    if hasattr(null, "cdf"):
        lower = numpy.asarray(null.cdf(t), dtype=float)
        if hasattr(null, "sf"):
            upper = numpy.asarray(null.sf(t), dtype=float)
        else:
            upper = 1.0 - lower
    else:
        lower = numpy.asarray(null(t), dtype=float)
        upper = 1.0 - lower
    if sidedness == Sidedness.two_sided:
        p = 2.0 * numpy.minimum(lower, upper)
    elif sidedness == Sidedness.left:
        p = lower
    else:
        p = upper
    return numpy.clip(p, 0.0, 1.0)


#
# density estimators
#


def _check_row(W, i):
    if not (W.row_sum(i) > 0):  # pragma:nocover
        raise ZeroWeightRow("unit %d has zero total weight" % (i))


def conformal_density(i, t, data, W, h):
    # type: (int, float, Any, Any, float) -> float
    """The conformalized local density estimate for unit i
    at t,

        sum_j w_ij [K_h(t - T_j) + K_h(t - T_cal_j)] / (2 sum_j w_ij).

    Parameters
    ----------
    i : int
        The unit whose weight row is used.
    t : float
        The evaluation point.
    data : :class:`Dataset <pyclawfdr.model.Dataset>`
        A validated dataset with calibration statistics.
    W : :class:`WeightMatrix <pyclawfdr.weights.WeightMatrix>`
        The locality weights.
    h : float
        The kernel bandwidth.
    """
    _check_row(W, i)
    pair = gaussian_kernel(t - data.t, h) + gaussian_kernel(t - data.t_cal, h)
    return float((W.row(i) * pair).sum() / (2.0 * W.row_sum(i)))


def plain_density(i, t, data, W, h):
    # type: (int, float, Any, Any, float) -> float
    """The locality-weighted kernel density of the test
    statistics alone,
    sum_j w_ij K_h(t - T_j) / sum_j w_ij."""
    _check_row(W, i)
    return float((W.row(i) * gaussian_kernel(t - data.t, h)).sum() / W.row_sum(i))


def _weighted_kernel_sums(points, centers, W, h):
    """For each k, sum_j W[k, j] * (sum over center arrays
    c of K_h(points[k] - c[j])). Evaluated in row blocks of
    config.CHUNK_SIZE."""
    m = len(points)
    out = numpy.empty(m, dtype=float)
    step = max(1, int(config.CHUNK_SIZE))
    for start in range(0, m, step):
        stop = min(m, start + step)
        pts = points[start:stop, None]
        pair = gaussian_kernel(pts - centers[0][None, :], h)
        for c in centers[1:]:
            pair = pair + gaussian_kernel(pts - c[None, :], h)
        out[start:stop] = (W.entries[start:stop] * pair).sum(axis=1)
    return out


def conformal_density_all(points, T, T_cal, W, h):
    """Evaluate the conformalized density of every unit k
    at ``points[k]``."""
    points = numpy.asarray(points, dtype=float)
    if not (len(points) == len(T) == len(T_cal) == W.m):
        raise LengthMismatch("points, statistics and weights disagree in length")
    return _weighted_kernel_sums(points, (T, T_cal), W, h) / (2.0 * W.row_sums)


def plain_density_all(points, T, W, h):
    """Evaluate the plain density of every unit k at
    ``points[k]``."""
    points = numpy.asarray(points, dtype=float)
    if not (len(points) == len(T) == W.m):
        raise LengthMismatch("points, statistics and weights disagree in length")
    return _weighted_kernel_sums(points, (T,), W, h) / W.row_sums


def kernel_density(x, sample, h=None):
    """A Gaussian kernel density estimate of `sample`
    evaluated at the points `x`. The sample is sorted
    before summation, so the result depends only on the
    multiset of sample values. When `h` is None,
    :func:`silverman_bandwidth` is used."""
    sample = numpy.sort(numpy.asarray(sample, dtype=float).ravel())
    if len(sample) == 0:
        raise DegenerateSample("cannot estimate a density from an empty sample")
    if h is None:
        h = silverman_bandwidth(sample)
    x = numpy.atleast_1d(numpy.asarray(x, dtype=float))
    out = numpy.empty(len(x), dtype=float)
    step = max(1, int(config.CHUNK_SIZE))
    for start in range(0, len(x), step):
        stop = min(len(x), start + step)
        out[start:stop] = gaussian_kernel(
            x[start:stop, None] - sample[None, :], h
        ).mean(axis=1)
    return out


#
# proportion estimators
#


def _screen_counts(p_test, p_cal, lam):
    p_test = numpy.asarray(p_test, dtype=float)
    p_cal = numpy.asarray(p_cal, dtype=float)
    if len(p_test) != len(p_cal):
        raise LengthMismatch("%d test and %d calibration p-values" % (len(p_test), len(p_cal)))
    # integer pair counts, exactly symmetric in the two
    # arguments
    return (p_test > lam).astype(numpy.int64) + (p_cal > lam).astype(numpy.int64)


def conformal_proportion(i, p_test, p_cal, W, lam):
    # type: (int, Any, Any, Any, float) -> float
    """The conformalized local non-null proportion for unit
    i,

        1 - sum_j w_ij [I(p_j > lam) + I(p_cal_j > lam)] / (2 (1 - lam) sum_j w_ij).

    The raw value may fall outside [0, 1/2]; see
    :func:`clamp_proportion`.

    Example
    -------

    >>> import numpy
    >>> from pyclawfdr.weights import WeightMatrix
    >>> W = WeightMatrix(numpy.ones((2, 2)))
    >>> conformal_proportion(0, [0.01, 0.8], [0.6, 0.9], W, 0.5)
    -0.5

    """
    _check_row(W, i)
    counts = _screen_counts(p_test, p_cal, lam)
    return float(1.0 - (W.row(i) * counts).sum() / (2.0 * (1.0 - lam) * W.row_sum(i)))


def plain_proportion(i, p_test, W, lam):
    # type: (int, Any, Any, float) -> float
    """The locality-weighted Storey-type non-null
    proportion of the test p-values alone."""
    _check_row(W, i)
    counts = (numpy.asarray(p_test, dtype=float) > lam).astype(numpy.int64)
    return float(1.0 - (W.row(i) * counts).sum() / ((1.0 - lam) * W.row_sum(i)))


def _weighted_count_sums(counts, W):
    m = W.m
    out = numpy.empty(m, dtype=float)
    step = max(1, int(config.CHUNK_SIZE))
    for start in range(0, m, step):
        stop = min(m, start + step)
        out[start:stop] = (W.entries[start:stop] * counts[None, :]).sum(axis=1)
    return out


def conformal_proportion_all(p_test, p_cal, W, lam):
    """Raw conformalized proportions for every unit."""
    counts = _screen_counts(p_test, p_cal, lam)
    return 1.0 - _weighted_count_sums(counts, W) / (2.0 * (1.0 - lam) * W.row_sums)


def plain_proportion_all(p_test, W, lam):
    """Raw plain proportions for every unit."""
    counts = (numpy.asarray(p_test, dtype=float) > lam).astype(numpy.int64)
    return 1.0 - _weighted_count_sums(counts, W) / ((1.0 - lam) * W.row_sums)


def clamp_proportion(raw, epsilon):
    """Map a raw proportion into [epsilon, 1/2]: epsilon
    if raw <= 0, 1/2 - epsilon if raw > 1/2 and raw
    otherwise. Works elementwise on arrays.

    Example
    -------

    >>> clamp_proportion(-0.5, 0.001)
    0.001
    >>> clamp_proportion(0.7, 0.001)
    0.499

    """
    assert 0 < epsilon < 0.5
    out = numpy.where(
        raw <= 0, epsilon, numpy.where(numpy.greater(raw, 0.5), 0.5 - epsilon, raw)
    )
    if numpy.ndim(out) == 0:
        return float(out)
    return out


#
# scores
#


def clfdr_score(f0_at_t, pi_tilde, f_hat, cap, floor):
    """The capped conditional local FDR estimate,
    min((1 - pi) f0(t) / max(f_hat, floor), cap).
    Works elementwise on arrays."""
    out = numpy.minimum(
        (1.0 - numpy.asarray(pi_tilde)) * numpy.asarray(f0_at_t) / numpy.maximum(f_hat, floor),
        cap,
    )
    if numpy.ndim(out) == 0:
        return float(out)
    return out


def r_transform(clfdr, pi_tilde):
    """The strictly increasing transform of the capped
    conditional local FDR into the ranking score,
    ((1/2 - pi) / (1 - pi)) (clfdr / (1 - clfdr)).

    Example
    -------

    >>> r_transform(0.5, 0.25)  # doctest: +ELLIPSIS
    0.333333333333...

    """
    clfdr = numpy.asarray(clfdr, dtype=float)
    pi_tilde = numpy.asarray(pi_tilde, dtype=float)
    out = ((0.5 - pi_tilde) / (1.0 - pi_tilde)) * (clfdr / (1.0 - clfdr))
    if numpy.ndim(out) == 0:
        return float(out)
    return out


class EstimatorState(object):
    """Intermediate quantities of a score computation.

    Attributes
    ----------
    bandwidth : float
        The kernel bandwidth h.
    pi_raw : numpy.ndarray
        The raw proportion estimate of each unit.
    pi_clamped : numpy.ndarray
        The clamped proportions, in [epsilon, 1/2].
    row_sums : numpy.ndarray
        The total weight of each unit's row.
    """

    __slots__ = ("bandwidth", "pi_raw", "pi_clamped", "row_sums")

    def __init__(self, bandwidth, pi_raw, pi_clamped, row_sums):
        assert bandwidth > 0
        self.bandwidth = float(bandwidth)
        self.pi_raw = numpy.asarray(pi_raw, dtype=float)
        self.pi_clamped = numpy.asarray(pi_clamped, dtype=float)
        self.row_sums = numpy.asarray(row_sums, dtype=float)
        for a in (self.pi_raw, self.pi_clamped, self.row_sums):
            a.setflags(write=False)
        assert numpy.all(self.pi_clamped > 0) and numpy.all(self.pi_clamped <= 0.5)


class ScoreFunction(object):
    """The abstract base class for conformity score
    functions. A score function is built from the data of
    a run and maps (unit index, statistic) to a score, with
    lower scores indicating stronger evidence against the
    null.

    Implementations must return bit-identical scores when
    test and calibration statistics are exchanged on any
    subset of units."""

    __slots__ = ()

    def evaluate(self, i, t):  # pragma:nocover
        """Returns the score of unit `i` at statistic
        `t`.

        Note
        ----
        This method is abstract and must be defined by the
        user.
        """
        raise NotImplementedError()

    def score_pairs(self):
        # type: () -> Tuple[numpy.ndarray, numpy.ndarray]
        """Returns the test and calibration score arrays.
        The base class implementation evaluates each unit
        separately; subclasses may override it with a
        vectorized version."""
        T, T_cal = self.statistics()
        u = numpy.array([self.evaluate(i, T[i]) for i in range(len(T))])
        u_cal = numpy.array([self.evaluate(i, T_cal[i]) for i in range(len(T))])
        return u, u_cal

    def statistics(self):  # pragma:nocover
        """Returns the test and calibration statistic
        arrays the function was built from.

        Note
        ----
        This method is abstract and must be defined by the
        user.
        """
        raise NotImplementedError()


class ConformalClfdrScore(ScoreFunction):
    """The score R(t, S_i) obtained by transforming the
    capped conditional local FDR estimate built from
    locally weighted kernel estimators.

    Parameters
    ----------
    T : array_like
        The test statistics.
    T_cal : array_like
        The calibration statistics.
    W : :class:`WeightMatrix <pyclawfdr.weights.WeightMatrix>`
        The locality weights.
    null : object
        The null distribution, with ``pdf`` and ``cdf``
        methods.
    cfg : :class:`ClawConfig <pyclawfdr.model.ClawConfig>`
        The run configuration.
    """

    __slots__ = ("T", "T_cal", "W", "null", "cfg", "p_test", "p_cal", "state")

    def __init__(self, T, T_cal, W, null, cfg):
        self.T = numpy.asarray(T, dtype=float)
        self.T_cal = numpy.asarray(T_cal, dtype=float)
        if not (len(self.T) == len(self.T_cal) == W.m):
            raise LengthMismatch("statistics and weight matrix disagree in length")
        self.W = W
        self.null = null
        self.cfg = cfg
        self.p_test = pvalue_from_null(self.T, null, cfg.sidedness)
        self.p_cal = pvalue_from_null(self.T_cal, null, cfg.sidedness)

        if cfg.fixed_bandwidth is not None:
            h = cfg.fixed_bandwidth
        elif cfg.estimator == EstimatorKind.conformal:
            h = silverman_bandwidth(numpy.concatenate([self.T, self.T_cal]))
        else:
            h = silverman_bandwidth(self.T)
        if cfg.estimator == EstimatorKind.conformal:
            pi_raw = conformal_proportion_all(self.p_test, self.p_cal, W, cfg.lam)
        else:
            pi_raw = plain_proportion_all(self.p_test, W, cfg.lam)
        pi_clamped = clamp_proportion(pi_raw, cfg.epsilon)
        self.state = EstimatorState(h, pi_raw, numpy.atleast_1d(pi_clamped), W.row_sums)
        logger.debug(
            "score function: h=%.6g, mean raw proportion=%.6g", h, float(numpy.mean(pi_raw))
        )

    def statistics(self):
        return self.T, self.T_cal

    def density(self, i, t):
        # type: (int, float) -> float
        """The (unfloored) density estimate of unit i at
        t."""
        if self.cfg.estimator == EstimatorKind.conformal:
            pair = gaussian_kernel(t - self.T, self.state.bandwidth) + gaussian_kernel(
                t - self.T_cal, self.state.bandwidth
            )
            return float((self.W.row(i) * pair).sum() / (2.0 * self.W.row_sum(i)))
        return float(
            (self.W.row(i) * gaussian_kernel(t - self.T, self.state.bandwidth)).sum()
            / self.W.row_sum(i)
        )

    def clfdr(self, i, t):
        # type: (int, float) -> float
        return clfdr_score(
            float(self.null.pdf(t)),
            self.state.pi_clamped[i],
            self.density(i, t),
            self.cfg.clfdr_cap,
            self.cfg.density_floor,
        )

    def evaluate(self, i, t):
        # type: (int, float) -> float
        return r_transform(self.clfdr(i, t), self.state.pi_clamped[i])

    def _scores_at(self, points):
        h = self.state.bandwidth
        if self.cfg.estimator == EstimatorKind.conformal:
            f_hat = conformal_density_all(points, self.T, self.T_cal, self.W, h)
        else:
            f_hat = plain_density_all(points, self.T, self.W, h)
        pi = self.state.pi_clamped
        c = clfdr_score(
            numpy.asarray(self.null.pdf(points), dtype=float),
            pi,
            f_hat,
            self.cfg.clfdr_cap,
            self.cfg.density_floor,
        )
        return r_transform(c, pi)

    def score_pairs(self):
        u = numpy.atleast_1d(self._scores_at(self.T))
        u_cal = numpy.atleast_1d(self._scores_at(self.T_cal))
        if not (numpy.all(numpy.isfinite(u)) and numpy.all(numpy.isfinite(u_cal))):
            raise ClawNumericError("non-finite conformity score")
        return u, u_cal
