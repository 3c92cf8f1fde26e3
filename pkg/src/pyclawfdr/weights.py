"""
Covariate-driven locality weights.

Copyright by the pyclawfdr developers.
"""
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import numpy
import scipy.spatial.distance
import scipy.stats

from pyclawfdr.common import (
    CovariateKind,
    DistanceNorm,
    WeightKind,
    ConfigError,
    EmptyInput,
    NonFiniteValue,
    NonPositiveScale,
    ZeroWeightRow,
    DimensionMismatch,
)
from pyclawfdr.configuration import config

logger = logging.getLogger("pyclawfdr")


class WeightMatrix(object):
    """A dense m x m matrix of nonnegative locality weights
    with a positive diagonal.

    Parameters
    ----------
    entries : array_like
        The weights. The array is made read-only.
    symmetric : bool, optional
        Records whether the builder guarantees exact
        symmetry. (default: False)
    """

    __slots__ = ("entries", "symmetric", "_row_sums")

    def __init__(self, entries, symmetric=False):
        entries = numpy.asarray(entries, dtype=float)
        if (entries.ndim != 2) or (entries.shape[0] != entries.shape[1]):
            raise DimensionMismatch(
                "weight matrix must be square, got shape %s" % (entries.shape,)
            )
        if entries.shape[0] == 0:
            raise EmptyInput("weight matrix is empty")
        if not numpy.all(numpy.isfinite(entries)):
            raise NonFiniteValue("weight matrix has non-finite entries")
        if numpy.any(entries < 0):
            raise ValueError("weight matrix has negative entries")
        diagonal = numpy.diagonal(entries)
        if numpy.any(diagonal <= 0):
            raise ZeroWeightRow(
                "unit %d has a zero self weight" % (numpy.flatnonzero(diagonal <= 0)[0])
            )
        if entries.flags.writeable:
            entries = entries.copy()
            entries.setflags(write=False)
        self.entries = entries
        self.symmetric = bool(symmetric)
        self._row_sums = entries.sum(axis=1)
        # the positive diagonal already implies this
        assert numpy.all(self._row_sums > 0)

    @property
    def m(self):
        # type: () -> int
        return self.entries.shape[0]

    def row(self, i):
        # type: (int) -> numpy.ndarray
        return self.entries[i]

    def row_sum(self, i):
        # type: (int) -> float
        return self._row_sums[i]

    @property
    def row_sums(self):
        # type: () -> numpy.ndarray
        return self._row_sums


def label_codes(S):
    # type: (Sequence[Any]) -> Tuple[List[Any], numpy.ndarray]
    """Integer codes of categorical labels. Equal labels
    share a code; labels of different types never do, so
    the integer 1 and the string "1" are distinct groups.
    Returns one representative label per code and the
    code of every unit.

    Example
    -------

    >>> labels, codes = label_codes([1, "1", 1])
    >>> codes.tolist()
    [0, 1, 0]

    """
    values = [x.item() if isinstance(x, numpy.generic) else x for x in S]
    if len(set(type(x) for x in values)) <= 1:
        labels = numpy.empty(len(values), dtype=object)
        for i, x in enumerate(values):
            labels[i] = x
        unique, codes = numpy.unique(labels, return_inverse=True)
        return list(unique), numpy.asarray(codes).ravel()
    index = {}  # type: Dict[Tuple[type, Any], int]
    codes = numpy.array(
        [index.setdefault((type(x), x), len(index)) for x in values], dtype=numpy.intp
    )
    representatives = [None] * len(index)  # type: List[Any]
    for (_, x), code in index.items():
        representatives[code] = x
    return representatives, codes


def group_weights(S):
    # type: (Sequence[Any]) -> WeightMatrix
    """Indicator weights, w_ij = 1 if S_i == S_j and 0
    otherwise.

    Example
    -------

    >>> group_weights(["a", "a", "b"]).entries
    array([[1., 1., 0.],
           [1., 1., 0.],
           [0., 0., 1.]])

    """
    if len(S) == 0:
        raise EmptyInput("no covariates given")
    _, codes = label_codes(S)
    entries = (codes[:, None] == codes[None, :]).astype(float)
    return WeightMatrix(entries, symmetric=True)


def kernel_weights(S, scale, norm=None):
    # type: (Any, float, Optional[str]) -> WeightMatrix
    """Gaussian kernel weights w_ij = phi(d(S_i, S_j) /
    scale), where phi is the standard normal density.

    Parameters
    ----------
    S : array_like
        A length-m vector or an (m, d) array of real
        covariates.
    scale : float
        The distance scale. Must be positive.
    norm : {"abs", "euclidean"}, optional
        The distance. When None, "abs" is used for d = 1
        and "euclidean" otherwise. The two coincide when
        d = 1. (default: None)
    """
    if not (scale > 0):
        raise NonPositiveScale("weight scale must be positive, got %r" % (scale,))
    S = numpy.asarray(S, dtype=float)
    if S.ndim == 1:
        S = S[:, None]
    m, d = S.shape
    if m == 0:
        raise EmptyInput("no covariates given")
    if norm is None:
        norm = DistanceNorm.abs if d == 1 else DistanceNorm.euclidean
    norm = DistanceNorm(norm)
    if (norm == DistanceNorm.abs) and (d != 1):
        raise DimensionMismatch(
            "the absolute-value distance needs one-dimensional covariates, got d=%d" % (d)
        )
    if m == 1:
        return WeightMatrix([[scipy.stats.norm.pdf(0.0)]], symmetric=True)
    # pdist visits every unordered pair exactly once, so the
    # square form is exactly symmetric
    if norm == DistanceNorm.abs:
        dist = scipy.spatial.distance.pdist(S, metric="cityblock")
    else:
        dist = scipy.spatial.distance.pdist(S, metric="euclidean")
    entries = scipy.spatial.distance.squareform(scipy.stats.norm.pdf(dist / scale))
    numpy.fill_diagonal(entries, scipy.stats.norm.pdf(0.0))

    if config.WEIGHT_TRUNCATION > 0:
        entries[entries < config.WEIGHT_TRUNCATION] = 0.0
        numpy.fill_diagonal(entries, scipy.stats.norm.pdf(0.0))
    return WeightMatrix(entries, symmetric=True)


def build_weights(data, cfg):
    """Build the weight matrix selected by a
    :class:`ClawConfig <pyclawfdr.model.ClawConfig>` for a
    validated dataset."""
    kind = cfg.weights
    if kind == WeightKind.group:
        if data.covariate_kind != CovariateKind.categorical:
            logger.debug("group weights over real covariates use exact equality")
            labels = [tuple(row) for row in data.covariates]
            return group_weights([repr(x) for x in labels])
        return group_weights(list(data.covariates))
    elif kind == WeightKind.gaussian:
        if data.covariate_kind != CovariateKind.real:
            raise ConfigError("weights", "gaussian weights need real covariates")
        return kernel_weights(data.covariates, cfg.weight_scale, cfg.weight_norm)
    else:
        assert kind == WeightKind.custom
        entries = cfg.custom_weights(data.covariates)
        entries = numpy.asarray(entries, dtype=float)
        if entries.shape != (data.m, data.m):
            raise DimensionMismatch(
                "custom weights returned shape %s for m=%d" % (entries.shape, data.m)
            )
        return WeightMatrix(entries, symmetric=bool(numpy.array_equal(entries, entries.T)))
