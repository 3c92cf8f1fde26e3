"""
Reference multiple testing procedures: BH, Storey's
estimator and Storey-BH, conformal p-values and conformal
BH in its counting form, and the pooled and separate
analysis drivers used to compare against grouped
procedures.

Copyright by the pyclawfdr developers.
"""
from typing import Any, Tuple
import logging

import numpy
import sortedcontainers

from pyclawfdr.common import (
    NEG_INFINITY,
    CovariateKind,
    EmptyCalibration,
    LengthMismatch,
    ClawError,
    leq,
)
from pyclawfdr.estimators import kernel_density, pvalue_from_null
from pyclawfdr.weights import label_codes

logger = logging.getLogger("pyclawfdr")

_EMPTY = numpy.zeros(0, dtype=numpy.int64)


def _pvalues(p):
    p = numpy.asarray(p, dtype=float)
    if p.ndim != 1:
        raise LengthMismatch("p-values must be one-dimensional")
    if numpy.any(~((p >= 0) & (p <= 1))):
        raise ClawError("p-values must lie in [0, 1]")
    return p


def bh(p, alpha):
    """The Benjamini-Hochberg step-up procedure.

    Returns
    -------
    numpy.ndarray
        The sorted indices of the rejected p-values.

    Example
    -------

    >>> bh([0.01, 0.02, 0.5], 0.05).tolist()
    [0, 1]

    """
    if not (0 < alpha <= 1):
        raise ValueError("alpha must lie in (0, 1], got %r" % (alpha,))
    p = _pvalues(p)
    m = len(p)
    if m == 0:
        return _EMPTY
    p_sorted = numpy.sort(p, kind="mergesort")
    k = numpy.arange(1, m + 1)
    ok = numpy.flatnonzero(leq(p_sorted, k * alpha / m))
    if len(ok) == 0:
        return _EMPTY
    return numpy.flatnonzero(p <= p_sorted[ok[-1]]).astype(numpy.int64)


def storey_pi(p, lam=0.5):
    # type: (Any, float) -> float
    """Storey's estimate of the non-null proportion,
    1 - #{p > lam} / ((1 - lam) m), clamped into [0, 1 -
    1/m].

    Example
    -------

    >>> storey_pi([0.1, 0.6, 0.7, 0.9], 0.5)
    0.0

    """
    if not (0 < lam < 1):
        raise ValueError("lam must lie in (0, 1), got %r" % (lam,))
    p = _pvalues(p)
    m = len(p)
    if m == 0:
        raise ClawError("no p-values given")
    raw = 1.0 - numpy.count_nonzero(p > lam) / ((1.0 - lam) * m)
    ceiling = 1.0 - 1.0 / m
    if raw > ceiling:
        logger.warning(
            "Storey's estimate %.6g exceeds its ceiling and is set to %.6g", raw, ceiling
        )
        return ceiling
    return max(0.0, raw)


def storey_bh(p, alpha, lam=0.5):
    """BH at the adjusted level min(1, alpha / (1 -
    pi)), with pi from :func:`storey_pi`."""
    pi = storey_pi(p, lam)
    return bh(p, min(1.0, alpha / (1.0 - pi)))


def conformal_pvalues(test_scores, cal_scores):
    """Conformal p-values,
    (1 + #{k : cal_k <= test_i}) / (1 + |cal|).

    Example
    -------

    >>> conformal_pvalues([0.3, 0.0, 1.0], [0.1, 0.5, 0.9]).tolist()
    [0.5, 0.25, 1.0]

    """
    cal = sortedcontainers.SortedList(numpy.asarray(cal_scores, dtype=float).tolist())
    if len(cal) == 0:
        raise EmptyCalibration("no calibration scores")
    test = numpy.atleast_1d(numpy.asarray(test_scores, dtype=float))
    counts = numpy.array([cal.bisect_right(x) for x in test.tolist()], dtype=float)
    return (1.0 + counts) / (1.0 + len(cal))


def cbh_threshold(test_scores, cal_scores, alpha):
    # type: (Any, Any, float) -> Tuple[float, numpy.ndarray]
    """Conformal BH in its counting form. The threshold is
    the largest test score t with

        Q(t) = [(1 + #{cal <= t}) / (1 + |cal|)] / [#{test <= t} / m] <= alpha,

    and every test score at or below it is rejected.

    Returns
    -------
    t : float
        The threshold, or NEG_INFINITY.
    rejected : numpy.ndarray
        The sorted indices of the rejected test scores.

    Example
    -------

    >>> t, r = cbh_threshold([0.05, 0.5], [0.3, 0.6, 0.9, 0.95], 0.5)
    >>> t, r.tolist()
    (0.5, [0, 1])

    """
    if not (0 < alpha <= 1):
        raise ValueError("alpha must lie in (0, 1], got %r" % (alpha,))
    test = numpy.atleast_1d(numpy.asarray(test_scores, dtype=float))
    m = len(test)
    if m == 0:
        return NEG_INFINITY, _EMPTY
    # the numerator of Q is the conformal p-value of t
    p = conformal_pvalues(test, cal_scores)
    j = numpy.searchsorted(numpy.sort(test), test, side="right")
    # Q(t) <= alpha, written in the step-up form
    # p(t) <= #{test <= t} alpha / m
    ok = leq(p, j * alpha / m)
    if not numpy.any(ok):
        return NEG_INFINITY, _EMPTY
    t_hat = float(numpy.max(test[ok]))
    return t_hat, numpy.flatnonzero(test <= t_hat).astype(numpy.int64)


def storey_cbh(test_scores, cal_scores, alpha, lam=0.5):
    """Conformal BH with Storey's correction: Storey-BH
    applied to the conformal p-values."""
    return storey_bh(conformal_pvalues(test_scores, cal_scores), alpha, lam)


def kde_ratio_scores(T, T_cal, f0, floor=1e-12):
    """Scores f0(x) / max(KDE(T, T_cal)(x), floor) of the
    test and calibration statistics, using a single
    kernel density of the pooled statistics."""
    T = numpy.asarray(T, dtype=float)
    T_cal = numpy.asarray(T_cal, dtype=float)
    pooled = numpy.sort(numpy.concatenate([T, T_cal]))

    def score(x):
        return numpy.asarray(f0.pdf(x), dtype=float) / numpy.maximum(
            kernel_density(x, pooled), floor
        )

    return score(T), score(T_cal)


_ANALYSES = ("bh", "storey_bh", "cbh", "storey_cbh")


def _analyze(T, T_cal, f0, alpha, method, lam, sidedness, floor):
    if method in ("bh", "storey_bh"):
        p = pvalue_from_null(T, f0, sidedness)
        if method == "bh":
            return bh(p, alpha)
        return storey_bh(p, alpha, lam)
    if T_cal is None:
        raise EmptyCalibration("conformal BH needs calibration statistics")
    test_scores, cal_scores = kde_ratio_scores(T, T_cal, f0, floor)
    if method == "cbh":
        return cbh_threshold(test_scores, cal_scores, alpha)[1]
    return storey_cbh(test_scores, cal_scores, alpha, lam)


def pooled_analysis(data, f0, alpha=0.05, method="cbh", lam=0.5,
                    sidedness="two_sided", floor=1e-12):
    """Apply a baseline to all units at once, ignoring
    the covariates.

    Parameters
    ----------
    data : :class:`Dataset <pyclawfdr.model.Dataset>`
        A validated dataset.
    f0 : object
        The null distribution.
    alpha : float, optional
        The target level. (default: 0.05)
    method : {"bh", "storey_bh", "cbh", "storey_cbh"}, optional
        The baseline. (default: "cbh")
    lam : float, optional
        Storey's screening threshold. (default: 0.5)
    sidedness : str, optional
        The p-value alternative. (default: "two_sided")
    floor : float, optional
        The density floor of the kernel scores.
        (default: 1e-12)
    """
    if method not in _ANALYSES:
        raise ClawError("unknown baseline %r" % (method,))
    return _analyze(data.t, data.t_cal, f0, alpha, method, lam, sidedness, floor)


def separate_analysis(data, f0, alpha=0.05, method="cbh", lam=0.5,
                      sidedness="two_sided", floor=1e-12):
    """Apply a baseline within each covariate group at
    level alpha and return the union of the rejections.
    The arguments are those of :func:`pooled_analysis`;
    the covariates must be categorical."""
    if method not in _ANALYSES:
        raise ClawError("unknown baseline %r" % (method,))
    if data.covariate_kind != CovariateKind.categorical:
        raise ClawError("separate analysis needs categorical covariates")
    groups, codes = label_codes(data.covariates)
    rejected = []
    for code in range(len(groups)):
        idx = numpy.flatnonzero(codes == code)
        T_cal = None if data.t_cal is None else data.t_cal[idx]
        r = _analyze(data.t[idx], T_cal, f0, alpha, method, lam, sidedness, floor)
        rejected.append(idx[r])
    return numpy.sort(numpy.concatenate(rejected)).astype(numpy.int64)
