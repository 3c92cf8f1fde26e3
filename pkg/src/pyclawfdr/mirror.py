"""
The mirror decision rule.

Given paired scores (u_i, u_cal_i), where lower scores are
stronger evidence against the null, the FDP estimate

    Q(t) = (1 + #{u_cal_i <= min(t, u_i)}) / max(1, #{u_i <= min(t, u_cal_i)})

is evaluated on the candidate grid {min(u_i, u_cal_i)} and
the threshold is the largest candidate with Q(t) <= alpha.
Units whose two scores are equal are excluded from both
counts and are never rejected.

Copyright by the pyclawfdr developers.
"""
from typing import Tuple
import logging

import numpy

from pyclawfdr.common import (
    NEG_INFINITY,
    EmptyInput,
    LengthMismatch,
    NonFiniteValue,
    leq,
    geq,
)
from pyclawfdr.model import DecisionResult

logger = logging.getLogger("pyclawfdr")


def _as_pairs(u, u_cal):
    u = numpy.asarray(u, dtype=float)
    u_cal = numpy.asarray(u_cal, dtype=float)
    if (u.ndim != 1) or (u_cal.ndim != 1) or (len(u) != len(u_cal)):
        raise LengthMismatch(
            "score arrays must be one-dimensional and of equal length, "
            "got shapes %s and %s" % (u.shape, u_cal.shape)
        )
    if len(u) == 0:
        raise EmptyInput("no scores given")
    if numpy.any(numpy.isnan(u)) or numpy.any(numpy.isnan(u_cal)):
        raise NonFiniteValue("scores must not be NaN")
    return u, u_cal


def _check_alpha(alpha):
    if not (0 < alpha <= 1):
        raise ValueError("alpha must lie in (0, 1], got %r" % (alpha,))


class MirrorDiagnostics(object):
    """Per-unit quantities of the mirror process.

    Attributes
    ----------
    nu : numpy.ndarray
        The pair minima, min(u_i, u_cal_i).
    eta : numpy.ndarray
        The indicator I(u_i < u_cal_i), as int8.
    ties : numpy.ndarray
        Sorted indices of units with u_i == u_cal_i.
    """

    __slots__ = ("nu", "eta", "ties")

    def __init__(self, nu, eta, ties):
        self.nu = nu
        self.eta = eta
        self.ties = ties
        for a in (nu, eta, ties):
            a.setflags(write=False)

    @property
    def m(self):
        # type: () -> int
        return len(self.nu)


def mirror_diagnostics(u, u_cal):
    # type: (numpy.ndarray, numpy.ndarray) -> MirrorDiagnostics
    """Compute the pair minima, the sign indicators and the
    tied units of a pair of score arrays.

    Example
    -------

    >>> d = mirror_diagnostics([0.1, 0.5], [0.8, 0.2])
    >>> d.nu.tolist(), d.eta.tolist(), d.ties.tolist()
    ([0.1, 0.2], [1, 0], [])

    """
    u, u_cal = _as_pairs(u, u_cal)
    nu = numpy.minimum(u, u_cal)
    eta = (u < u_cal).astype(numpy.int8)
    ties = numpy.flatnonzero(u == u_cal)
    return MirrorDiagnostics(nu, eta, ties)


def _sweep(u, u_cal):
    """Returns the distinct candidate values in increasing
    order together with the numerator and denominator
    counts of Q at each of them."""
    nu = numpy.minimum(u, u_cal)
    below = u < u_cal
    above = u_cal < u
    n_ties = len(u) - int(below.sum()) - int(above.sum())
    if n_ties:
        logger.warning(
            "%d unit(s) have equal test and calibration scores; "
            "they are excluded from the mirror counts and cannot be rejected",
            n_ties,
        )
    order = numpy.argsort(nu, kind="mergesort")
    nu_sorted = nu[order]
    num = numpy.cumsum(above[order])
    den = numpy.cumsum(below[order])
    # the last position of each run of equal values
    last = numpy.flatnonzero(numpy.append(nu_sorted[1:] != nu_sorted[:-1], True))
    return nu_sorted[last], num[last], den[last]


def mirror_process(u, u_cal):
    # type: (numpy.ndarray, numpy.ndarray) -> Tuple[numpy.ndarray, numpy.ndarray]
    """Evaluate the FDP estimate Q on the candidate grid.

    Returns
    -------
    grid : numpy.ndarray
        The distinct pair minima in increasing order.
    Q : numpy.ndarray
        The value of Q at each grid point, counting every
        unit whose pair minimum equals that point.
    """
    u, u_cal = _as_pairs(u, u_cal)
    grid, num, den = _sweep(u, u_cal)
    return grid, (1.0 + num) / numpy.maximum(1, den)


def _threshold(u, u_cal, alpha):
    grid, num, den = _sweep(u, u_cal)
    Q = (1.0 + num) / numpy.maximum(1, den)
    admissible = numpy.flatnonzero(leq(Q, alpha))
    if len(admissible) == 0:
        return NEG_INFINITY, None
    k = admissible[-1]
    return float(grid[k]), float(Q[k])


def mirror_threshold(u, u_cal, alpha):
    # type: (numpy.ndarray, numpy.ndarray, float) -> float
    """Returns the largest pair minimum t with Q(t) <=
    alpha, or NEG_INFINITY when there is none.

    Parameters
    ----------
    u : array_like
        The test scores.
    u_cal : array_like
        The calibration scores.
    alpha : float
        The target level, in (0, 1].

    Example
    -------

    >>> mirror_threshold([0.5], [0.1], 0.1)
    -inf
    >>> mirror_threshold([0.1, 0.15, 0.9], [0.8, 0.7, 0.95], 0.5)
    0.9

    Only pair minima are scanned. Scanning every score
    instead would return 0.95 on the second example;
    both thresholds reject the same units and give the
    same e-values.

    """
    _check_alpha(alpha)
    u, u_cal = _as_pairs(u, u_cal)
    return _threshold(u, u_cal, alpha)[0]


def reject_set(u, u_cal, tau):
    # type: (numpy.ndarray, numpy.ndarray, float) -> numpy.ndarray
    """Returns the sorted indices i with u_i <= tau and
    u_i < u_cal_i."""
    u, u_cal = _as_pairs(u, u_cal)
    if tau == NEG_INFINITY:
        return numpy.zeros(0, dtype=numpy.int64)
    return numpy.flatnonzero((u <= tau) & (u < u_cal)).astype(numpy.int64)


def _mirror_count(u, u_cal, tau):
    if tau == NEG_INFINITY:
        return 0
    return int(numpy.count_nonzero((u_cal <= tau) & (u_cal < u)))


def evalues(u, u_cal, tau):
    # type: (numpy.ndarray, numpy.ndarray, float) -> numpy.ndarray
    """Generalized e-values,

        e_j = m I(j rejected) / (1 + #{u_cal_i <= min(tau, u_i)}).

    Example
    -------

    >>> evalues([0.1, 0.15, 0.9], [0.8, 0.7, 0.95], 0.9).tolist()
    [3.0, 3.0, 3.0]

    """
    u, u_cal = _as_pairs(u, u_cal)
    m = len(u)
    e = numpy.zeros(m, dtype=float)
    if tau == NEG_INFINITY:
        return e
    e[reject_set(u, u_cal, tau)] = m / (1.0 + _mirror_count(u, u_cal, tau))
    return e


def ebh(e, alpha):
    # type: (numpy.ndarray, float) -> numpy.ndarray
    """The e-BH procedure. With e sorted in decreasing
    order, k is the largest i with i e_(i) / m >= 1 /
    alpha, and every unit with e_j >= e_(k) is rejected.

    Returns
    -------
    numpy.ndarray
        The sorted indices of the rejected units.

    Example
    -------

    >>> ebh([3.0, 1.0], 2.0 / 3.0).tolist()
    [0]

    """
    _check_alpha(alpha)
    e = numpy.asarray(e, dtype=float)
    if e.ndim != 1:
        raise LengthMismatch("e-values must be one-dimensional")
    m = len(e)
    if m == 0:
        return numpy.zeros(0, dtype=numpy.int64)
    if numpy.any(~numpy.isfinite(e)) or numpy.any(e < 0):
        raise NonFiniteValue("e-values must be finite and nonnegative")
    e_sorted = -numpy.sort(-e, kind="mergesort")
    i = numpy.arange(1, m + 1)
    ok = numpy.flatnonzero(geq(i * e_sorted / m, 1.0 / alpha))
    if len(ok) == 0:
        return numpy.zeros(0, dtype=numpy.int64)
    cutoff = e_sorted[ok[-1]]
    return numpy.flatnonzero(e >= cutoff).astype(numpy.int64)


def decide(u, u_cal, alpha):
    # type: (numpy.ndarray, numpy.ndarray, float) -> DecisionResult
    """Apply the mirror rule at level `alpha` and bundle the
    threshold, the rejections, the e-values and the
    diagnostics into a :class:`DecisionResult
    <pyclawfdr.model.DecisionResult>`."""
    _check_alpha(alpha)
    u, u_cal = _as_pairs(u, u_cal)
    tau, fdp = _threshold(u, u_cal, alpha)
    rejected = reject_set(u, u_cal, tau)
    e = evalues(u, u_cal, tau)
    logger.debug(
        "mirror rule at alpha=%g: tau=%r, %d rejection(s)", alpha, tau, len(rejected)
    )
    return DecisionResult(
        rejected,
        tau,
        e,
        u,
        u_cal,
        fdp_estimate=fdp,
        mirror_count=_mirror_count(u, u_cal, tau),
        diagnostics=mirror_diagnostics(u, u_cal),
    )
