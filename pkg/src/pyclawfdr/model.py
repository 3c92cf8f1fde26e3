"""
Shared domain types, the per-run configuration object and
dataset validation.
"""
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union
from collections.abc import Mapping as _MappingABC
import numbers

import numpy
import six

from pyclawfdr.common import (
    NEG_INFINITY,
    CovariateKind,
    DistanceNorm,
    EstimatorKind,
    Sidedness,
    WeightKind,
    ConfigError,
    EmptyDataset,
    LengthMismatch,
    MixedCovariateKinds,
    NonFiniteValue,
)

Covariate = Union[str, float, Tuple[float, ...]]


def _covariate_kind(s):
    # type: (Any) -> Tuple[CovariateKind, int]
    """Classify a single covariate value. Strings are group
    labels; a real number or a sequence of reals is a
    real vector."""
    if isinstance(s, six.string_types):
        return CovariateKind.categorical, 0
    if isinstance(s, (bool, numpy.bool_)):
        raise MixedCovariateKinds("boolean covariates are not supported")
    if isinstance(s, numbers.Real):
        return CovariateKind.real, 1
    try:
        items = tuple(s)
    except TypeError:
        raise MixedCovariateKinds(
            "covariate of type %s is neither a label nor a real vector"
            % (type(s).__name__)
        )
    if len(items) == 0:
        raise MixedCovariateKinds("empty covariate vector")
    for x in items:
        if isinstance(x, six.string_types) or not isinstance(x, numbers.Real):
            raise MixedCovariateKinds(
                "covariate vector %r mixes labels and reals" % (items,)
            )
    return CovariateKind.real, len(items)


class TestUnit(object):
    """One hypothesis: the test statistic `t`, the
    covariate `s` (a string label or a real vector) and
    the calibration statistic `t_cal` (None until a null
    sample has been paired with the unit)."""

    # keep pytest from collecting this class
    __test__ = False

    __slots__ = ("t", "s", "t_cal")

    def __init__(self, t, s, t_cal=None):
        # type: (float, Covariate, Optional[float]) -> None
        self.t = float(t)
        self.s = s
        self.t_cal = None if t_cal is None else float(t_cal)

    def __eq__(self, other):
        if not isinstance(other, TestUnit):
            return NotImplemented
        return (self.t, self.s, self.t_cal) == (other.t, other.s, other.t_cal)

    def __ne__(self, other):
        return not (self == other)

    def __repr__(self):
        return "TestUnit(t=%r, s=%r, t_cal=%r)" % (self.t, self.s, self.t_cal)


def _frozen(a):
    a = numpy.array(a)
    a.setflags(write=False)
    return a


class Dataset(object):
    """A collection of test units with an optional pool
    of labeled null samples and optional ground truth.

    Parameters
    ----------
    units : sequence of :class:`TestUnit`
        The test units.
    null_pool : sequence of float, optional
        Labeled null samples for the semi-supervised
        procedure. (default: None)
    truth : sequence of {0, 1}, optional
        The indicator of a non-null unit (simulation
        only). (default: None)
    truth_model : object, optional
        The generating model (simulation only). Passed on
        to :func:`oracle_scores
        <pyclawfdr.pipeline.oracle_scores>`.
        (default: None)

    Array views of the units are available through
    :attr:`t`, :attr:`t_cal` and :attr:`covariates` once
    the dataset has been validated.
    """

    __slots__ = (
        "_units",
        "null_pool",
        "truth",
        "truth_model",
        "_t",
        "_t_cal",
        "_covariates",
        "_kind",
        "_validated",
    )

    def __init__(self, units, null_pool=None, truth=None, truth_model=None):
        # type: (Iterable[TestUnit], Optional[Sequence[float]], Optional[Sequence[int]], Any) -> None
        self._units = tuple(units)
        self.null_pool = None if null_pool is None else _frozen(numpy.asarray(null_pool, dtype=float))
        self.truth = None if truth is None else _frozen(numpy.asarray(truth))
        self.truth_model = truth_model
        self._t = None
        self._t_cal = None
        self._covariates = None
        self._kind = None
        self._validated = False

    @classmethod
    def from_arrays(cls, t, s, t_cal=None, null_pool=None, truth=None, truth_model=None):
        """Build a dataset from parallel arrays. `s` is
        either a sequence of labels, a length-m array of
        reals or an (m, d) array of reals."""
        t = numpy.asarray(t, dtype=float)
        m = len(t)
        if len(s) != m:
            raise LengthMismatch("%d covariates for %d statistics" % (len(s), m))
        if (t_cal is not None) and (len(t_cal) != m):
            raise LengthMismatch(
                "%d calibration statistics for %d statistics" % (len(t_cal), m)
            )
        s_arr = numpy.asarray(s)
        if s_arr.dtype.kind in "fiu":
            if s_arr.ndim == 1:
                cov = [float(x) for x in s_arr]
            else:
                cov = [tuple(float(x) for x in row) for row in s_arr]
        else:
            cov = list(s)
        units = [
            TestUnit(t[i], cov[i], None if t_cal is None else t_cal[i]) for i in range(m)
        ]
        return cls(units, null_pool=null_pool, truth=truth, truth_model=truth_model)

    @property
    def units(self):
        # type: () -> Tuple[TestUnit, ...]
        return self._units

    @property
    def m(self):
        # type: () -> int
        return len(self._units)

    def _require_validated(self):
        if not self._validated:
            raise RuntimeError("dataset has not been validated")

    @property
    def t(self):
        # type: () -> numpy.ndarray
        self._require_validated()
        return self._t

    @property
    def t_cal(self):
        # type: () -> Optional[numpy.ndarray]
        self._require_validated()
        return self._t_cal

    @property
    def covariates(self):
        # type: () -> numpy.ndarray
        """A length-m object array of labels, or an (m, d)
        float array of real covariates."""
        self._require_validated()
        return self._covariates

    @property
    def covariate_kind(self):
        # type: () -> CovariateKind
        self._require_validated()
        return self._kind

    @property
    def covariate_dimension(self):
        # type: () -> int
        self._require_validated()
        if self._kind == CovariateKind.categorical:
            return 0
        return self._covariates.shape[1]

    def with_calibration(self, t_cal):
        # type: (Sequence[float]) -> Dataset
        """Return a copy whose units are paired with the
        given calibration statistics."""
        if len(t_cal) != self.m:
            raise LengthMismatch(
                "%d calibration statistics for %d units" % (len(t_cal), self.m)
            )
        units = [TestUnit(u.t, u.s, t_cal[i]) for i, u in enumerate(self._units)]
        return Dataset(
            units, null_pool=self.null_pool, truth=self.truth, truth_model=self.truth_model
        )

    def swapped(self, indices):
        # type: (Iterable[int]) -> Dataset
        """Return a copy with the test and calibration
        statistics exchanged on the given units."""
        indices = set(int(i) for i in indices)
        units = []
        for i, u in enumerate(self._units):
            if i in indices:
                units.append(TestUnit(u.t_cal, u.s, u.t))
            else:
                units.append(u)
        return Dataset(
            units, null_pool=self.null_pool, truth=self.truth, truth_model=self.truth_model
        )


def validate_dataset(d, cfg=None):
    # type: (Dataset, Optional[ClawConfig]) -> Dataset
    """Check every dataset invariant and return the same
    dataset object with its array views populated.

    Parameters
    ----------
    d : :class:`Dataset`
        The dataset to check.
    cfg : :class:`ClawConfig`, optional
        Accepted for symmetry with the other entry points;
        the checks do not depend on it. (default: None)

    Raises
    ------
    EmptyDataset
        If there are no units.
    NonFiniteValue
        If a statistic, a real covariate or a null pool
        entry is NaN or infinite.
    MixedCovariateKinds
        If units disagree on the covariate kind or
        dimension.
    LengthMismatch
        If the truth vector does not have one entry per
        unit.
    """
    if d._validated:
        return d
    m = d.m
    if m == 0:
        raise EmptyDataset("a dataset requires at least one unit")

    t = numpy.array([u.t for u in d.units], dtype=float)
    bad = numpy.flatnonzero(~numpy.isfinite(t))
    if len(bad):
        raise NonFiniteValue("non-finite test statistic at unit %d" % (bad[0]))

    have_cal = [u.t_cal is not None for u in d.units]
    if any(have_cal) and not all(have_cal):
        raise NonFiniteValue(
            "missing calibration statistic at unit %d" % (have_cal.index(False))
        )
    t_cal = None
    if all(have_cal):
        t_cal = numpy.array([u.t_cal for u in d.units], dtype=float)
        bad = numpy.flatnonzero(~numpy.isfinite(t_cal))
        if len(bad):
            raise NonFiniteValue("non-finite calibration statistic at unit %d" % (bad[0]))

    kind, dim = _covariate_kind(d.units[0].s)
    for i, u in enumerate(d.units):
        kind_i, dim_i = _covariate_kind(u.s)
        if kind_i != kind:
            raise MixedCovariateKinds(
                "unit %d has a %s covariate but unit 0 has a %s covariate"
                % (i, kind_i.value, kind.value)
            )
        if dim_i != dim:
            raise MixedCovariateKinds(
                "unit %d has covariate dimension %d but unit 0 has %d" % (i, dim_i, dim)
            )
    if kind == CovariateKind.categorical:
        covariates = numpy.empty(m, dtype=object)
        covariates[:] = [u.s for u in d.units]
    else:
        covariates = numpy.array(
            [[u.s] if dim == 1 and isinstance(u.s, numbers.Real) else list(u.s) for u in d.units],
            dtype=float,
        ).reshape(m, dim)
        bad = numpy.flatnonzero(~numpy.all(numpy.isfinite(covariates), axis=1))
        if len(bad):
            raise NonFiniteValue("non-finite covariate at unit %d" % (bad[0]))

    if d.null_pool is not None:
        bad = numpy.flatnonzero(~numpy.isfinite(d.null_pool))
        if len(bad):
            raise NonFiniteValue("non-finite null pool entry at index %d" % (bad[0]))
    if d.truth is not None:
        if len(d.truth) != m:
            raise LengthMismatch("%d truth labels for %d units" % (len(d.truth), m))
        if not numpy.all((d.truth == 0) | (d.truth == 1)):
            raise NonFiniteValue("truth labels must be 0 or 1")

    d._t = _frozen(t)
    d._t_cal = None if t_cal is None else _frozen(t_cal)
    covariates.setflags(write=False)
    d._covariates = covariates
    d._kind = kind
    d._validated = True
    return d


#
# Run configuration
#

_CONFIG_FIELDS = (
    "alpha",
    "lam",
    "epsilon",
    "clfdr_cap",
    "density_floor",
    "bandwidth",
    "weights",
    "weight_scale",
    "weight_norm",
    "custom_weights",
    "sidedness",
    "seed",
    "train_fraction",
    "estimator",
)


def _real(field, value):
    if isinstance(value, (bool, numpy.bool_)) or not isinstance(value, numbers.Real):
        raise ConfigError(field, "expected a number, got %r" % (value,))
    value = float(value)
    if not numpy.isfinite(value):
        raise ConfigError(field, "must be finite")
    return value


def _enum(field, enum_type, value):
    try:
        return enum_type(value)
    except ValueError:
        raise ConfigError(
            field,
            "invalid choice %r (choose from %s)"
            % (value, ", ".join(repr(v.value) for v in enum_type)),
        )


class ClawConfig(object):
    """Immutable settings for a single run. Use
    :func:`replace` to derive a modified copy.

    Parameters
    ----------
    alpha : float, optional
        The target FDR level, in (0, 1). (default: 0.05)
    lam : float, optional
        The p-value screening threshold used by the
        proportion estimator, in (0, 1). (default: 0.5)
    epsilon : float, optional
        The proportion clamp, in (0, 1/2). (default: 0.001)
    clfdr_cap : float, optional
        The cap applied to the estimated conditional local
        false discovery rate, in (0, 1). (default: 0.999)
    density_floor : float, optional
        The lower bound applied to density estimates when
        they appear in a denominator. (default: 1e-12)
    bandwidth : "silverman" or float, optional
        The kernel bandwidth rule, or a fixed positive
        bandwidth. (default: "silverman")
    weights : {"group", "gaussian", "custom"}, optional
        How the locality weight matrix is built.
        (default: "group")
    weight_scale : float, optional
        The distance scale of Gaussian weights. Required
        when `weights` is "gaussian". (default: None)
    weight_norm : {"abs", "euclidean"}, optional
        The covariate distance. When None, "abs" is used
        for one-dimensional covariates and "euclidean"
        otherwise. (default: None)
    custom_weights : callable, optional
        A function mapping the covariate array to an m x m
        array of weights. Required when `weights` is
        "custom". (default: None)
    sidedness : {"two_sided", "left", "right"}, optional
        How p-values are computed from the null CDF.
        (default: "two_sided")
    seed : int, optional
        A seed in [0, 2**64) used by every randomized step.
        (default: 0)
    train_fraction : float, optional
        The fraction of the training nulls assigned to the
        rank-reference half in the semi-supervised
        procedure. (default: 0.5)
    estimator : {"conformal", "plain"}, optional
        Which estimators feed the score function.
        (default: "conformal")
    """

    __slots__ = _CONFIG_FIELDS + ("_frozen",)

    def __init__(
        self,
        alpha=0.05,
        lam=0.5,
        epsilon=0.001,
        clfdr_cap=0.999,
        density_floor=1e-12,
        bandwidth="silverman",
        weights="group",
        weight_scale=None,
        weight_norm=None,
        custom_weights=None,
        sidedness="two_sided",
        seed=0,
        train_fraction=0.5,
        estimator="conformal",
    ):
        set_ = super(ClawConfig, self).__setattr__
        set_("_frozen", False)

        alpha = _real("alpha", alpha)
        if not (0 < alpha < 1):
            raise ConfigError("alpha", "must lie in (0, 1)")
        lam = _real("lam", lam)
        if not (0 < lam < 1):
            raise ConfigError("lam", "must lie in (0, 1)")
        epsilon = _real("epsilon", epsilon)
        if not (0 < epsilon < 0.5):
            raise ConfigError("epsilon", "must lie in (0, 1/2)")
        clfdr_cap = _real("clfdr_cap", clfdr_cap)
        if not (0 < clfdr_cap < 1):
            raise ConfigError("clfdr_cap", "must lie in (0, 1)")
        density_floor = _real("density_floor", density_floor)
        if not (density_floor > 0):
            raise ConfigError("density_floor", "must be positive")
        if isinstance(bandwidth, six.string_types):
            if bandwidth != "silverman":
                raise ConfigError("bandwidth", "expected 'silverman' or a positive number")
        else:
            bandwidth = _real("bandwidth", bandwidth)
            if not (bandwidth > 0):
                raise ConfigError("bandwidth", "a fixed bandwidth must be positive")
        weights = _enum("weights", WeightKind, weights)
        if weight_scale is not None:
            weight_scale = _real("weight_scale", weight_scale)
            if not (weight_scale > 0):
                raise ConfigError("weight_scale", "must be positive")
        if (weights == WeightKind.gaussian) and (weight_scale is None):
            raise ConfigError("weight_scale", "required for gaussian weights")
        if weight_norm is not None:
            weight_norm = _enum("weight_norm", DistanceNorm, weight_norm)
        if (weights == WeightKind.custom) and (custom_weights is None):
            raise ConfigError("custom_weights", "required for custom weights")
        if (custom_weights is not None) and (not callable(custom_weights)):
            raise ConfigError("custom_weights", "must be callable")
        sidedness = _enum("sidedness", Sidedness, sidedness)
        if isinstance(seed, (bool, numpy.bool_)) or not isinstance(seed, numbers.Integral):
            raise ConfigError("seed", "expected an integer, got %r" % (seed,))
        seed = int(seed)
        if not (0 <= seed < 2 ** 64):
            raise ConfigError("seed", "must lie in [0, 2**64)")
        train_fraction = _real("train_fraction", train_fraction)
        if not (0 < train_fraction < 1):
            raise ConfigError("train_fraction", "must lie in (0, 1)")
        estimator = _enum("estimator", EstimatorKind, estimator)

        for name, value in (
            ("alpha", alpha),
            ("lam", lam),
            ("epsilon", epsilon),
            ("clfdr_cap", clfdr_cap),
            ("density_floor", density_floor),
            ("bandwidth", bandwidth),
            ("weights", weights),
            ("weight_scale", weight_scale),
            ("weight_norm", weight_norm),
            ("custom_weights", custom_weights),
            ("sidedness", sidedness),
            ("seed", seed),
            ("train_fraction", train_fraction),
            ("estimator", estimator),
        ):
            set_(name, value)
        set_("_frozen", True)

    def __setattr__(self, name, value):
        raise AttributeError("ClawConfig is immutable; use replace()")

    def __delattr__(self, name):
        raise AttributeError("ClawConfig is immutable")

    def _kwds(self):
        # type: () -> Dict[str, Any]
        return dict((name, getattr(self, name)) for name in _CONFIG_FIELDS)

    def __reduce__(self):
        return (_config_from_kwds, (self._kwds(),))

    def __eq__(self, other):
        if not isinstance(other, ClawConfig):
            return NotImplemented
        return self._kwds() == other._kwds()

    def __ne__(self, other):
        return not (self == other)

    def __hash__(self):
        return hash(tuple(sorted(self.to_dict().items(), key=lambda kv: kv[0])))

    def __repr__(self):
        return "ClawConfig(%s)" % (
            ", ".join("%s=%r" % (k, v) for k, v in sorted(self.to_dict().items()))
        )

    @property
    def fixed_bandwidth(self):
        # type: () -> Optional[float]
        """The fixed bandwidth, or None when Silverman's
        rule is selected."""
        if self.bandwidth == "silverman":
            return None
        return self.bandwidth

    def replace(self, **kwds):
        # type: (Any) -> ClawConfig
        """Return a copy with the given fields replaced."""
        values = self._kwds()
        for key in kwds:
            if key not in values:
                raise ConfigError(key, "unknown field")
        values.update(kwds)
        return ClawConfig(**values)

    def to_dict(self):
        # type: () -> Dict[str, Any]
        """A JSON-compatible dictionary of every field
        except `custom_weights`, which is reported as a
        boolean flag."""
        out = {}  # type: Dict[str, Any]
        for name in _CONFIG_FIELDS:
            value = getattr(self, name)
            if name == "custom_weights":
                out["custom_weights"] = value is not None
                continue
            if hasattr(value, "value"):
                value = value.value
            out[name] = value
        return out

    @classmethod
    def from_dict(cls, data, path="config"):
        # type: (Mapping[str, Any], str) -> ClawConfig
        """Build a configuration from a mapping (typically
        parsed JSON). Errors name the offending entry as
        ``<path>.<field>``."""
        if not isinstance(data, _MappingABC):
            raise ConfigError(path, "expected an object")
        kwds = {}
        for key, value in data.items():
            if key == "custom_weights":
                if value not in (None, False):
                    raise ConfigError(
                        "%s.%s" % (path, key), "cannot be set from a file"
                    )
                continue
            if key not in _CONFIG_FIELDS:
                raise ConfigError("%s.%s" % (path, key), "unknown field")
            kwds[key] = value
        try:
            return cls(**kwds)
        except ConfigError as e:
            raise ConfigError("%s.%s" % (path, e.field), e.detail)


def _config_from_kwds(kwds):
    return ClawConfig(**kwds)


class DecisionResult(object):
    """The outcome of the mirror decision rule.

    Attributes
    ----------
    rejected : numpy.ndarray
        Sorted indices of the rejected units.
    tau : float
        The threshold, or NEG_INFINITY when nothing is
        rejected.
    evalues : numpy.ndarray
        The generalized e-values, one per unit.
    u : numpy.ndarray
        Scores of the test statistics.
    u_cal : numpy.ndarray
        Scores of the calibration statistics.
    fdp_estimate : float or None
        The value of the mirror FDP estimate at `tau`
        (None when `tau` is NEG_INFINITY).
    mirror_count : int
        The number of calibration scores counted by the
        FDP estimate at `tau`.
    diagnostics : :class:`MirrorDiagnostics <pyclawfdr.mirror.MirrorDiagnostics>`
        Minimum, sign and tie information for the score
        pairs.
    """

    __slots__ = (
        "rejected",
        "tau",
        "evalues",
        "u",
        "u_cal",
        "fdp_estimate",
        "mirror_count",
        "diagnostics",
    )

    def __init__(self, rejected, tau, evalues, u, u_cal, fdp_estimate=None, mirror_count=0, diagnostics=None):
        self.rejected = _frozen(numpy.asarray(rejected, dtype=numpy.int64))
        self.tau = float(tau)
        self.evalues = _frozen(numpy.asarray(evalues, dtype=float))
        self.u = _frozen(numpy.asarray(u, dtype=float))
        self.u_cal = _frozen(numpy.asarray(u_cal, dtype=float))
        self.fdp_estimate = fdp_estimate
        self.mirror_count = int(mirror_count)
        self.diagnostics = diagnostics
        assert (self.tau != NEG_INFINITY) or (len(self.rejected) == 0)

    @property
    def scores(self):
        # type: () -> numpy.ndarray
        """An (m, 2) array of (u_i, u_cal_i) pairs."""
        return numpy.column_stack([self.u, self.u_cal])

    @property
    def n_rejected(self):
        # type: () -> int
        return len(self.rejected)
