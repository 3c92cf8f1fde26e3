"""
The semi-supervised procedure, for use when the null
distribution is unknown but a pool of labeled null
samples is available.

The null pool is split into m calibration statistics
(paired one-to-one with the test units) and two training
halves. The first half is the reference sample of the
conformal p-values, and the full training set feeds a
kernel density ratio that replaces f0 / f in the local FDR
score.

Copyright by the pyclawfdr developers.
"""
from typing import Any
import logging
import time

import numpy

from pyclawfdr.common import (
    CovariateKind,
    EmptyGroup,
    EmptyTraining,
    EmptyTrainingHalf,
    InsufficientNulls,
    LengthMismatch,
    ClawNumericError,
    DegenerateSample,
)
from pyclawfdr.model import validate_dataset
from pyclawfdr.weights import build_weights, label_codes
from pyclawfdr.estimators import (
    ScoreFunction,
    kernel_density,
    gaussian_kernel,
    silverman_bandwidth,
    conformal_proportion,
    conformal_proportion_all,
    clamp_proportion,
    r_transform,
)
from pyclawfdr.baselines import conformal_pvalues
from pyclawfdr.mirror import decide
from pyclawfdr.results import ClawRun
from pyclawfdr.configuration import config
from pyclawfdr.misc import make_rng

logger = logging.getLogger("pyclawfdr")

# stream identifiers mixed into the run seed
_SPLIT_STREAM = 1
_PAIRING_STREAM = 2


class NullSplit(object):
    """A partition of the null pool.

    Attributes
    ----------
    calibration : numpy.ndarray
        The m calibration statistics, in unit order.
    train1 : numpy.ndarray
        The reference sample of the conformal p-values.
    train2 : numpy.ndarray
        The sample that fits the conformity score.
    calibration_index, train1_index, train2_index : numpy.ndarray
        The positions of the three parts in the pool.
    """

    __slots__ = (
        "calibration",
        "train1",
        "train2",
        "calibration_index",
        "train1_index",
        "train2_index",
    )

    def __init__(self, pool, calibration_index, train1_index, train2_index):
        self.calibration_index = numpy.asarray(calibration_index, dtype=numpy.int64)
        self.train1_index = numpy.asarray(train1_index, dtype=numpy.int64)
        self.train2_index = numpy.asarray(train2_index, dtype=numpy.int64)
        self.calibration = pool[self.calibration_index]
        self.train1 = pool[self.train1_index]
        self.train2 = pool[self.train2_index]
        for a in (
            self.calibration,
            self.train1,
            self.train2,
            self.calibration_index,
            self.train1_index,
            self.train2_index,
        ):
            a.setflags(write=False)

    @property
    def training(self):
        # type: () -> numpy.ndarray
        """Both training halves."""
        return numpy.concatenate([self.train1, self.train2])

    def to_dict(self):
        return {
            "calibration_index": self.calibration_index.tolist(),
            "train1_index": self.train1_index.tolist(),
            "train2_index": self.train2_index.tolist(),
        }


def split_nulls(null_pool, m, seed=0, train_fraction=0.5):
    # type: (Any, int, int, float) -> NullSplit
    """Randomly split the null pool into m calibration
    statistics and two training halves.

    Parameters
    ----------
    null_pool : array_like
        The labeled null samples. At least m + 2 are
        needed.
    m : int
        The number of test units.
    seed : int, optional
        The seed of the split. (default: 0)
    train_fraction : float, optional
        The share of the remaining samples assigned to the
        first training half. Each half keeps at least one
        sample. (default: 0.5)

    Example
    -------

    >>> s = split_nulls(range(10), 4, seed=1)
    >>> len(s.calibration), len(s.train1), len(s.train2)
    (4, 3, 3)

    """
    pool = numpy.asarray(null_pool, dtype=float)
    n = len(pool)
    if n < m + 2:
        raise InsufficientNulls(
            "the null pool holds %d samples but %d are needed "
            "(m calibration samples and two nonempty training halves)" % (n, m + 2)
        )
    assert 0 < train_fraction < 1
    perm = make_rng(seed, _SPLIT_STREAM).permutation(n)
    rest = perm[m:]
    n1 = int(numpy.floor(train_fraction * len(rest) + 0.5))
    n1 = min(max(n1, 1), len(rest) - 1)
    return NullSplit(pool, perm[:m], rest[:n1], rest[n1:])


class KernelRatioConformity(object):
    """The default conformity score of the conformal
    p-values,

        s(x) = KDE(train2)(x) / max(KDE(T, T_cal, train1)(x), floor).

    The denominator pools the test, calibration and first
    training statistics, so the score is unchanged by any
    permutation of that pooled set.
    """

    __slots__ = ("reference", "pooled", "h_reference", "h_pooled", "floor")

    def __init__(self, T, T_cal, split, floor=1e-12):
        if len(split.train2) == 0:
            raise EmptyTrainingHalf("the second training half is empty")
        self.reference = numpy.sort(split.train2)
        self.pooled = numpy.sort(numpy.concatenate([T, T_cal, split.train1]))
        self.h_reference = _bandwidth_or_pooled(self.reference, self.pooled)
        self.h_pooled = silverman_bandwidth(self.pooled)
        self.floor = floor

    def __call__(self, x):
        num = kernel_density(x, self.reference, self.h_reference)
        den = kernel_density(x, self.pooled, self.h_pooled)
        return num / numpy.maximum(den, self.floor)


def _bandwidth_or_pooled(sample, pooled):
    # a training half with a single (or constant) sample
    # borrows the bandwidth of the pooled data
    try:
        return silverman_bandwidth(sample)
    except DegenerateSample:
        return silverman_bandwidth(pooled)


def semisup_conformal_pvalues(T, T_cal, split, score_fn=None, floor=1e-12):
    """Conformal p-values of the test and calibration
    statistics against the first training half,

        p(x) = (1 + #{k in train1 : s(T0_k) <= s(x)}) / (1 + |train1|).

    Parameters
    ----------
    T : array_like
        The test statistics.
    T_cal : array_like
        The calibration statistics.
    split : :class:`NullSplit`
        The split of the null pool.
    score_fn : callable, optional
        A vectorized conformity score. It must be invariant
        under permutations of the pooled test, calibration
        and first training statistics. (default:
        :class:`KernelRatioConformity`)
    floor : float, optional
        The density floor of the default score. (default:
        1e-12)

    Returns
    -------
    p_test, p_cal : numpy.ndarray
    """
    T = numpy.asarray(T, dtype=float)
    T_cal = numpy.asarray(T_cal, dtype=float)
    if len(T) != len(T_cal):
        raise LengthMismatch("%d test and %d calibration statistics" % (len(T), len(T_cal)))
    if len(split.train1) == 0:
        raise EmptyTrainingHalf("the first training half is empty")
    if score_fn is None:
        score_fn = KernelRatioConformity(T, T_cal, split, floor=floor)
    reference = numpy.asarray(score_fn(split.train1), dtype=float)
    p_test = conformal_pvalues(numpy.asarray(score_fn(T), dtype=float), reference)
    p_cal = conformal_pvalues(numpy.asarray(score_fn(T_cal), dtype=float), reference)
    return p_test, p_cal


def semisup_proportion(i, p_test, p_cal, W, lam, epsilon=0.001):
    # type: (int, Any, Any, Any, float, float) -> float
    """The clamped conformalized proportion of unit i,
    computed from conformal p-values."""
    return clamp_proportion(conformal_proportion(i, p_test, p_cal, W, lam), epsilon)


class GroupDensityRatio(object):
    """The ratio evaluator r(t, k) = KDE(train)(t) /
    max(KDE_k(t), floor), where KDE_k pools the test and
    calibration statistics of group k."""

    __slots__ = ("training", "h_training", "groups", "floor")

    def __init__(self, training, h_training, groups, floor):
        self.training = training
        self.h_training = h_training
        self.groups = groups
        self.floor = floor

    def ratio(self, t, k):
        # type: (Any, Any) -> numpy.ndarray
        """Evaluate the ratio at the points `t` for the
        group `k`."""
        try:
            pooled, h = self.groups[_group_key(k)]
        except KeyError:
            raise EmptyGroup("group %r has no test units" % (k,))
        num = kernel_density(t, self.training, self.h_training)
        den = kernel_density(t, pooled, h)
        return num / numpy.maximum(den, self.floor)

    def __call__(self, t, labels):
        """Evaluate r(t[j], labels[j]) for every j."""
        t = numpy.atleast_1d(numpy.asarray(t, dtype=float))
        representatives, codes = label_codes(labels)
        out = numpy.empty(len(t), dtype=float)
        for code, k in enumerate(representatives):
            idx = numpy.flatnonzero(codes == code)
            out[idx] = self.ratio(t[idx], k)
        return out


def _group_key(label):
    # 1 and "1" (or 1 and True) are different groups
    if isinstance(label, numpy.generic):
        label = label.item()
    return (type(label), label)


def group_density_ratio(T, T_cal, T_tr, groups, bandwidth=None, floor=1e-12):
    """Build the grouped density ratio evaluator.

    Parameters
    ----------
    T, T_cal : array_like
        The test and calibration statistics.
    T_tr : array_like
        The training nulls.
    groups : sequence
        The group label of each unit.
    bandwidth : float, optional
        A fixed bandwidth for every density. When None,
        each density uses Silverman's rule on its own
        sample. (default: None)
    floor : float, optional
        The denominator floor. (default: 1e-12)
    """
    T = numpy.asarray(T, dtype=float)
    T_cal = numpy.asarray(T_cal, dtype=float)
    T_tr = numpy.sort(numpy.asarray(T_tr, dtype=float))
    if not (len(T) == len(T_cal) == len(groups)):
        raise LengthMismatch("statistics and group labels disagree in length")
    if len(T_tr) == 0:
        raise EmptyTraining("no training nulls")
    h_tr = bandwidth if bandwidth is not None else silverman_bandwidth(T_tr)
    representatives, codes = label_codes(groups)
    densities = {}
    for code, k in enumerate(representatives):
        idx = numpy.flatnonzero(codes == code)
        pooled = numpy.sort(numpy.concatenate([T[idx], T_cal[idx]]))
        h = bandwidth if bandwidth is not None else silverman_bandwidth(pooled)
        densities[_group_key(k)] = (pooled, h)
    return GroupDensityRatio(T_tr, h_tr, densities, floor)


def _lexsorted(points):
    return points[numpy.lexsort(points.T[::-1])]


class AugmentedDensityRatio(object):
    """The ratio evaluator r(t, s) of product Gaussian
    kernel densities on augmented points (t, s), training
    points over pooled test and calibration points."""

    __slots__ = ("training", "pooled", "bandwidths", "floor")

    def __init__(self, training, pooled, bandwidths, floor):
        self.training = training
        self.pooled = pooled
        self.bandwidths = bandwidths
        self.floor = floor

    def _density(self, queries, sample):
        out = numpy.empty(len(queries), dtype=float)
        step = max(1, int(config.CHUNK_SIZE))
        for start in range(0, len(queries), step):
            stop = min(len(queries), start + step)
            q = queries[start:stop]
            prod = gaussian_kernel(q[:, 0, None] - sample[None, :, 0], self.bandwidths[0])
            for c in range(1, sample.shape[1]):
                prod *= gaussian_kernel(
                    q[:, c, None] - sample[None, :, c], self.bandwidths[c]
                )
            out[start:stop] = prod.mean(axis=1)
        return out

    def __call__(self, t, s):
        """Evaluate r(t[j], s[j]) for every j. `s` is a
        length-n vector or an (n, d) array."""
        t = numpy.atleast_1d(numpy.asarray(t, dtype=float))
        s = numpy.asarray(s, dtype=float).reshape(len(t), -1)
        queries = numpy.column_stack([t, s])
        num = self._density(queries, self.training)
        den = self._density(queries, self.pooled)
        return num / numpy.maximum(den, self.floor)


def augment_density_ratio(T, T_cal, S, T_tr, seed=0, floor=1e-12):
    """Build the augmented density ratio evaluator for
    real-valued covariates.

    Each unit's covariate is attached to its test
    statistic, its calibration statistic and one training
    null drawn for it (without replacement when there are
    at least m training nulls, with replacement
    otherwise). The per-coordinate Silverman bandwidths
    are computed on the pooled 2m test and calibration
    points and shared by both densities; a constant
    coordinate uses bandwidth 1.
    """
    T = numpy.asarray(T, dtype=float)
    T_cal = numpy.asarray(T_cal, dtype=float)
    T_tr = numpy.asarray(T_tr, dtype=float)
    m = len(T)
    S = numpy.asarray(S, dtype=float).reshape(m, -1)
    if len(T_cal) != m:
        raise LengthMismatch("%d test and %d calibration statistics" % (m, len(T_cal)))
    if len(T_tr) == 0:
        raise EmptyTraining("no training nulls")
    rng = make_rng(seed, _PAIRING_STREAM)
    # draw from the sorted training nulls so the pairing
    # does not depend on their order
    draw = rng.choice(numpy.sort(T_tr), size=m, replace=len(T_tr) < m)
    training = _lexsorted(numpy.column_stack([draw, S]))
    pooled = _lexsorted(
        numpy.vstack([numpy.column_stack([T, S]), numpy.column_stack([T_cal, S])])
    )
    bandwidths = numpy.ones(pooled.shape[1])
    for c in range(pooled.shape[1]):
        column = pooled[:, c]
        if numpy.all(column == column[0]):
            logger.warning(
                "augmented coordinate %d is constant; using bandwidth 1", c
            )
            continue
        bandwidths[c] = silverman_bandwidth(column)
    return AugmentedDensityRatio(training, pooled, bandwidths, floor)


class SemisupState(object):
    """Intermediate quantities of a semi-supervised score
    computation."""

    __slots__ = ("pi_raw", "pi_clamped", "row_sums", "p_test", "p_cal", "bandwidth")

    def __init__(self, pi_raw, pi_clamped, row_sums, p_test, p_cal):
        self.pi_raw = numpy.asarray(pi_raw, dtype=float)
        self.pi_clamped = numpy.asarray(pi_clamped, dtype=float)
        self.row_sums = numpy.asarray(row_sums, dtype=float)
        self.p_test = numpy.asarray(p_test, dtype=float)
        self.p_cal = numpy.asarray(p_cal, dtype=float)
        self.bandwidth = None


class DensityRatioScore(ScoreFunction):
    """The score ((1/2 - pi) / (1 - pi)) (c / (1 - c)) with
    c = min((1 - pi) r(t, S_i), cap), where r is a density
    ratio evaluator.

    Parameters
    ----------
    T, T_cal : array_like
        The test and calibration statistics.
    covariates : array_like
        The covariates passed to the ratio evaluator.
    ratio : callable
        Called as ``ratio(t, covariates)`` with arrays.
    pi_clamped : array_like
        The clamped proportion of each unit.
    cap : float
        The cap of the local FDR estimate.
    """

    __slots__ = ("T", "T_cal", "covariates", "ratio", "pi_clamped", "cap")

    def __init__(self, T, T_cal, covariates, ratio, pi_clamped, cap):
        self.T = numpy.asarray(T, dtype=float)
        self.T_cal = numpy.asarray(T_cal, dtype=float)
        self.covariates = covariates
        self.ratio = ratio
        self.pi_clamped = numpy.asarray(pi_clamped, dtype=float)
        self.cap = cap

    def statistics(self):
        return self.T, self.T_cal

    def evaluate(self, i, t):
        r = self.ratio(numpy.array([t]), self.covariates[i : i + 1])[0]
        pi = self.pi_clamped[i]
        return r_transform(min((1.0 - pi) * r, self.cap), pi)

    def _scores_at(self, points):
        r = self.ratio(points, self.covariates)
        c = numpy.minimum((1.0 - self.pi_clamped) * r, self.cap)
        return r_transform(c, self.pi_clamped)

    def score_pairs(self):
        u = numpy.atleast_1d(self._scores_at(self.T))
        u_cal = numpy.atleast_1d(self._scores_at(self.T_cal))
        if not (numpy.all(numpy.isfinite(u)) and numpy.all(numpy.isfinite(u_cal))):
            raise ClawNumericError("non-finite conformity score")
        return u, u_cal


def semisup_claw_run(data, cfg=None):
    """Run the semi-supervised procedure.

    The null pool of `data` is split with the run seed;
    its calibration part replaces any calibration
    statistics already present on the units. Categorical
    covariates use :func:`group_density_ratio` and real
    covariates use :func:`augment_density_ratio`.

    Parameters
    ----------
    data : :class:`Dataset <pyclawfdr.model.Dataset>`
        The data, with a null pool.
    cfg : :class:`ClawConfig <pyclawfdr.model.ClawConfig>`, optional
        The configuration. (default: ClawConfig())

    Returns
    -------
    :class:`ClawRun <pyclawfdr.results.ClawRun>`
    """
    from pyclawfdr.model import ClawConfig

    start = time.time()
    if cfg is None:
        cfg = ClawConfig()
    data = validate_dataset(data, cfg)
    if data.null_pool is None:
        raise InsufficientNulls("the semi-supervised procedure needs a null pool")
    split = split_nulls(data.null_pool, data.m, cfg.seed, cfg.train_fraction)
    data = validate_dataset(data.with_calibration(split.calibration), cfg)
    W = build_weights(data, cfg)
    T, T_cal = data.t, data.t_cal
    p_test, p_cal = semisup_conformal_pvalues(T, T_cal, split, floor=cfg.density_floor)
    pi_raw = conformal_proportion_all(p_test, p_cal, W, cfg.lam)
    pi_clamped = numpy.atleast_1d(clamp_proportion(pi_raw, cfg.epsilon))
    if data.covariate_kind == CovariateKind.categorical:
        ratio = group_density_ratio(
            T,
            T_cal,
            split.training,
            data.covariates,
            bandwidth=cfg.fixed_bandwidth,
            floor=cfg.density_floor,
        )
    else:
        ratio = augment_density_ratio(
            T, T_cal, data.covariates, split.training, seed=cfg.seed, floor=cfg.density_floor
        )
    score = DensityRatioScore(T, T_cal, data.covariates, ratio, pi_clamped, cfg.clfdr_cap)
    u, u_cal = score.score_pairs()
    decision = decide(u, u_cal, cfg.alpha)
    state = SemisupState(pi_raw, pi_clamped, W.row_sums, p_test, p_cal)
    logger.debug(
        "semi-supervised run: m=%d, |train1|=%d, |train2|=%d, %d rejection(s)",
        data.m,
        len(split.train1),
        len(split.train2),
        decision.n_rejected,
    )
    return ClawRun(
        cfg,
        W,
        state,
        decision,
        score_function=score,
        null_split=split,
        wall_time=time.time() - start,
    )
