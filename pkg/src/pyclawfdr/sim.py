"""
Simulation designs, error metrics and a seeded
replication engine.

Three families of designs are available. In every one a
unit is non-null with a covariate-dependent probability
pi(s), its statistic is N(0, 1) under the null and drawn
from a covariate-dependent normal alternative otherwise,
and the calibration statistics are iid N(0, 1).

grouped
    Two groups labeled "1" and "2".
ordinal
    m = 3000 units with covariate s = 1, ..., 3000.
spatial2d
    A 100 x 100 lattice with covariate s = (x, y).

All random draws come from Philox streams keyed by
(seed, replication, stream), and normal variates are
obtained by inverting the normal CDF of uniform draws, so
a dataset depends only on its seed and replication index.

Copyright by the pyclawfdr developers.
"""
from typing import Any, Callable, Dict, List, Sequence, Tuple
import csv
import json
import logging
import math
import multiprocessing
import sys
import time

import numpy
import scipy.special
import six

from pyclawfdr.common import (
    ClawError,
    IndexOutOfRange,
    ReplicationError,
    UnknownSetting,
)
from pyclawfdr.model import ClawConfig, Dataset, validate_dataset
from pyclawfdr.pipeline import MixtureTruth, StandardNormalNull, claw_run, oracle_scores
from pyclawfdr.semisup import semisup_claw_run
from pyclawfdr.mirror import decide
from pyclawfdr.estimators import pvalue_from_null
from pyclawfdr.baselines import bh, storey_bh, pooled_analysis, separate_analysis
from pyclawfdr.misc import as_stream, format_float, make_rng, time_format
from pyclawfdr import mpi_utils

logger = logging.getLogger("pyclawfdr")

FAMILIES = ("grouped", "ordinal", "spatial2d")

# (parameter name, default value) of each setting
_PARAMETERS = {
    "grouped": {1: ("mu", 3.0), 2: ("pi", 0.1), 3: ("m2", 1500), 4: ("pi", 0.1)},
    "ordinal": {1: ("mu", 3.0), 2: ("pi", 0.1), 3: ("mu", 3.0)},
    "spatial2d": {1: ("mu", 3.0), 2: ("pi", 0.75), 3: ("R", 20.0)},
}

_ROMAN = {"I": 1, "II": 2, "III": 3}

# stream identifiers
_THETA, _STAT, _CAL, _POOL = 0, 1, 2, 3

BACKGROUND_PI = 0.02


def _check_parameter(family, setting, name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UnknownSetting("parameter %s must be a number, got %r" % (name, value))
    if not math.isfinite(value):
        raise UnknownSetting("parameter %s must be finite" % (name))
    if name == "pi":
        upper = 0.5 if family == "ordinal" else 1.0
        if not (0 <= value <= upper):
            raise UnknownSetting("parameter pi must lie in [0, %g], got %r" % (upper, value))
    elif name == "m2":
        if (int(value) != value) or (value < 1):
            raise UnknownSetting("parameter m2 must be a positive integer, got %r" % (value,))
    elif name == "R":
        if not (value > 0):
            raise UnknownSetting("parameter R must be positive, got %r" % (value,))


class GeneratorSpec(object):
    """A simulation design.

    Parameters
    ----------
    family : {"grouped", "ordinal", "spatial2d"}
        The design family.
    setting : int or str
        The setting number (1-4 for grouped, 1-3
        otherwise; "I", "II" and "III" are accepted).
    params : dict, optional
        The swept parameter of the setting, for example
        ``{"mu": 3}``. Missing parameters take their
        defaults. (default: None)
    sizes : tuple of int, optional
        Group sizes of a grouped design. (default: None)
    full_null : bool, optional
        Set every non-null probability to zero.
        (default: False)
    null_pool_factor : float, optional
        Attach a pool of round(factor * m) labeled null
        samples. (default: 0)
    """

    __slots__ = ("family", "setting", "params", "sizes", "full_null", "null_pool_factor")

    def __init__(self, family, setting, params=None, sizes=None, full_null=False,
                 null_pool_factor=0):
        if family not in FAMILIES:
            raise UnknownSetting(
                "unknown family %r (choose from %s)" % (family, ", ".join(FAMILIES))
            )
        if isinstance(setting, six.string_types):
            setting = _ROMAN.get(setting.strip().upper(), setting)
            try:
                setting = int(setting)
            except ValueError:
                raise UnknownSetting("unknown setting %r" % (setting,))
        if setting not in _PARAMETERS[family]:
            raise UnknownSetting("family %s has no setting %r" % (family, setting))
        name, default = _PARAMETERS[family][setting]
        params = dict(params or {})
        for key in params:
            if key != name:
                raise UnknownSetting(
                    "%s setting %d has no parameter %r (expected %r)"
                    % (family, setting, key, name)
                )
        value = params.get(name, default)
        _check_parameter(family, setting, name, value)
        if sizes is not None:
            if family != "grouped":
                raise UnknownSetting("group sizes apply to grouped designs only")
            sizes = tuple(int(k) for k in sizes)
            if (len(sizes) != 2) or min(sizes) < 1:
                raise UnknownSetting("expected two positive group sizes, got %r" % (sizes,))
        if not (null_pool_factor >= 0):
            raise UnknownSetting("null_pool_factor must be nonnegative")
        self.family = family
        self.setting = setting
        self.params = {name: value}
        self.sizes = sizes
        self.full_null = bool(full_null)
        self.null_pool_factor = null_pool_factor

    @property
    def parameter(self):
        # type: () -> Tuple[str, Any]
        """The (name, value) of the swept parameter."""
        return list(self.params.items())[0]

    def describe_parameter(self):
        # type: () -> str
        name, value = self.parameter
        return "%s=%s" % (name, value)

    def default_config(self, alpha=0.05):
        # type: (float) -> ClawConfig
        """The configuration used for this family: group
        weights, Gaussian weights of scale 150 along the
        ordinal covariate and Gaussian weights of scale 15
        on the lattice."""
        if self.family == "grouped":
            return ClawConfig(alpha=alpha, weights="group")
        elif self.family == "ordinal":
            return ClawConfig(alpha=alpha, weights="gaussian", weight_scale=150.0,
                              weight_norm="abs")
        return ClawConfig(alpha=alpha, weights="gaussian", weight_scale=15.0,
                          weight_norm="euclidean")

    def __repr__(self):
        return "GeneratorSpec(%r, %r, %r)" % (self.family, self.setting, self.params)


#
# random draws
#


def _uniform_open(rng, n):
    """Uniform draws in the open interval (0, 1)."""
    k = rng.integers(0, 2 ** 53, size=n, dtype=numpy.int64)
    return (k.astype(float) + 0.5) / float(2 ** 53)


def standard_normal(rng, n):
    """N(0, 1) variates by inversion of the normal CDF."""
    return scipy.special.ndtri(_uniform_open(rng, n))


def _draw(model, covariates, seed, replication, null_pool_factor):
    """Draw a dataset from a mixture model."""
    m = len(model.pi)
    theta = make_rng(seed, replication, _THETA).random(m) < model.pi
    z = standard_normal(make_rng(seed, replication, _STAT), m)
    t = numpy.where(theta, model.alt_mean + model.alt_sd * z, z)
    t_cal = standard_normal(make_rng(seed, replication, _CAL), m)
    pool = None
    if null_pool_factor > 0:
        n_pool = int(round(null_pool_factor * m))
        pool = standard_normal(make_rng(seed, replication, _POOL), n_pool)
    return validate_dataset(
        Dataset.from_arrays(
            t, covariates, t_cal=t_cal, null_pool=pool, truth=theta.astype(numpy.int8),
            truth_model=model,
        )
    )


def _swept(family, setting, value):
    if value is None:
        return None
    if isinstance(setting, six.string_types):
        setting = _ROMAN.get(setting.strip().upper(), setting)
    try:
        name = _PARAMETERS[family][int(setting)][0]
    except (KeyError, ValueError):
        raise UnknownSetting("family %s has no setting %r" % (family, setting))
    return {name: value}


def gen_grouped(setting, value=None, seed=0, replication=0, sizes=None,
                full_null=False, null_pool_factor=0):
    """Draw a grouped design.

    Setting 1
        group 1: 3000 units, pi = 0.2, N(mu, 1);
        group 2: 1500 units, pi = 0.1, N(-2, 0.5^2).
    Setting 2
        group 1: 3000 units, pi = 0.2, N(2, 1);
        group 2: 1500 units, pi = swept, N(-4, 1).
    Setting 3
        group 1: 3000 units, pi = 0.2, N(2, 0.5^2);
        group 2: m2 units, pi = 0.1, N(-4, 1).
    Setting 4
        group 1: 3000 units, pi = swept, N(3.6, 1.5^2);
        group 2: 1500 units, pi = 0.1, N(-2.5, 1).
    """
    spec = GeneratorSpec(
        "grouped",
        setting,
        _swept("grouped", setting, value),
        sizes=sizes,
        full_null=full_null,
        null_pool_factor=null_pool_factor,
    )
    return generate(spec, seed, replication)


def _grouped_model(spec):
    _, v = spec.parameter
    m1, m2 = spec.sizes if spec.sizes is not None else (3000, 1500)
    if spec.setting == 1:
        groups = ((0.2, v, 1.0), (0.1, -2.0, 0.5))
    elif spec.setting == 2:
        groups = ((0.2, 2.0, 1.0), (v, -4.0, 1.0))
    elif spec.setting == 3:
        m2 = int(v)
        groups = ((0.2, 2.0, 0.5), (0.1, -4.0, 1.0))
    else:
        groups = ((v, 3.6, 1.5), (0.1, -2.5, 1.0))
    counts = (m1, m2)
    pi = numpy.concatenate([numpy.full(n, g[0]) for n, g in zip(counts, groups)])
    mean = numpy.concatenate([numpy.full(n, g[1]) for n, g in zip(counts, groups)])
    sd = numpy.concatenate([numpy.full(n, g[2]) for n, g in zip(counts, groups)])
    labels = ["1"] * m1 + ["2"] * m2
    return pi, mean, sd, labels


def _in_blocks(s, blocks):
    out = numpy.zeros(len(s), dtype=bool)
    for lo, hi in blocks:
        out |= (s >= lo) & (s <= hi)
    return out


def _ordinal_model(spec):
    _, v = spec.parameter
    s = numpy.arange(1, 3001, dtype=float)
    pi = numpy.full(len(s), BACKGROUND_PI)
    sd = numpy.ones(len(s))
    if spec.setting == 1:
        pi[_in_blocks(s, ((201, 350), (1501, 1650)))] = 0.6
        pi[_in_blocks(s, ((801, 1000), (2101, 2300)))] = 0.3
        mean = numpy.full(len(s), v)
    elif spec.setting == 2:
        pi[_in_blocks(s, ((201, 350), (1501, 1650)))] = 2 * v
        pi[_in_blocks(s, ((801, 1000), (2101, 2300)))] = v
        mean = numpy.where(s <= 1500, -2.5, 3.6)
        sd = numpy.where(s <= 1500, 1.0, 1.5)
    else:
        block = _in_blocks(s, ((201, 500), (801, 1100), (1501, 1800), (2101, 2400)))
        pi[block] = 0.4 * (1.0 + numpy.sin(0.02 * s[block]))
        mean = v + 0.15 * numpy.sin(0.6 * s)
    return pi, mean, sd, s


def lattice_region(setting, R=20.0):
    """The cells of the 100 x 100 lattice with an elevated
    non-null probability, as an (x, y) coordinate array
    and a boolean mask."""
    x, y = numpy.meshgrid(numpy.arange(1, 101), numpy.arange(1, 101), indexing="ij")
    x = x.ravel().astype(float)
    y = y.ravel().astype(float)
    d2 = (x - 30.0) ** 2 + (y - 70.0) ** 2
    if setting == 3:
        ring = (R / 2.0 <= d2) & (d2 <= R)
    else:
        ring = (10.0 <= d2) & (d2 <= 20.0)
    square = (62 <= x) & (x <= 90) & (10 <= y) & (y <= 38)
    return numpy.column_stack([x, y]), ring | square


def _spatial_model(spec):
    _, v = spec.parameter
    S, region = lattice_region(spec.setting, R=v if spec.setting == 3 else 20.0)
    pi = numpy.where(region, 0.75, BACKGROUND_PI)
    if spec.setting == 1:
        mean = numpy.full(len(pi), v)
    elif spec.setting == 2:
        pi = numpy.where(region, v, BACKGROUND_PI)
        mean = numpy.full(len(pi), 2.8)
    else:
        mean = numpy.full(len(pi), 2.5)
    return pi, mean, numpy.ones(len(pi)), S


def gen_ordinal(setting, value=None, seed=0, replication=0, full_null=False,
                null_pool_factor=0):
    """Draw an ordinal design with covariate s = 1, ...,
    3000. Intervals are closed.

    Setting 1
        pi = 0.6 on [201, 350] and [1501, 1650], 0.3 on
        [801, 1000] and [2101, 2300]; N(mu, 1).
    Setting 2
        pi = 2 * swept on the first blocks and swept on
        the second; N(-2.5, 1) for s <= 1500 and
        N(3.6, 1.5^2) after.
    Setting 3
        pi = 0.4 (1 + sin(0.02 s)) on [201, 500], [801,
        1100], [1501, 1800] and [2101, 2400];
        N(mu + 0.15 sin(0.6 s), 1).

    Elsewhere pi = 0.02.
    """
    spec = GeneratorSpec(
        "ordinal",
        setting,
        _swept("ordinal", setting, value),
        full_null=full_null,
        null_pool_factor=null_pool_factor,
    )
    return generate(spec, seed, replication)


def gen_spatial2d(setting, value=None, seed=0, replication=0, full_null=False,
                  null_pool_factor=0):
    """Draw a lattice design. The elevated region is the
    ring 10 <= (x - 30)^2 + (y - 70)^2 <= 20 (R/2 <= ... <=
    R in setting 3) together with the square 62 <= x <= 90,
    10 <= y <= 38.

    Setting 1
        pi = 0.75 in the region; N(mu, 1).
    Setting 2
        pi = swept in the region; N(2.8, 1).
    Setting 3
        pi = 0.75 in the region; N(2.5, 1).

    Elsewhere pi = 0.02.
    """
    spec = GeneratorSpec(
        "spatial2d",
        setting,
        _swept("spatial2d", setting, value),
        full_null=full_null,
        null_pool_factor=null_pool_factor,
    )
    return generate(spec, seed, replication)


def generate(spec, seed=0, replication=0):
    # type: (GeneratorSpec, int, int) -> Dataset
    """Draw the dataset of a design. The result is a
    validated dataset with the truth and the generating
    model attached."""
    if spec.family == "grouped":
        pi, mean, sd, covariates = _grouped_model(spec)
    elif spec.family == "ordinal":
        pi, mean, sd, covariates = _ordinal_model(spec)
    else:
        pi, mean, sd, covariates = _spatial_model(spec)
    if spec.full_null:
        pi = numpy.zeros(len(pi))
    model = MixtureTruth(pi, mean, sd, null=StandardNormalNull())
    return _draw(model, covariates, seed, replication, spec.null_pool_factor)


#
# metrics
#


def fdp_tdp(rejected, truth):
    # type: (Sequence[int], Sequence[int]) -> Tuple[float, float]
    """The false and true discovery proportions of a
    rejection set.

    Example
    -------

    >>> fdp_tdp([0, 1, 2], [1, 0, 1])
    (0.3333333333333333, 1.0)

    """
    rejected = numpy.asarray(rejected, dtype=numpy.int64)
    truth = numpy.asarray(truth).astype(bool)
    if len(rejected) and ((rejected.min() < 0) or (rejected.max() >= len(truth))):
        raise IndexOutOfRange(
            "rejected index out of range for %d hypotheses" % (len(truth))
        )
    rejected = numpy.unique(rejected)
    false = int(numpy.count_nonzero(~truth[rejected]))
    true = len(rejected) - false
    fdp = false / max(len(rejected), 1)
    tdp = true / max(int(truth.sum()), 1)
    return fdp, tdp


#
# methods
#


def _pvalues(data, cfg):
    return pvalue_from_null(data.t, StandardNormalNull(), cfg.sidedness)


def _claw(data, cfg):
    return claw_run(data, StandardNormalNull(), cfg).rejected


def _plain_claw(data, cfg):
    return claw_run(data, StandardNormalNull(), cfg.replace(estimator="plain")).rejected


def _oracle_claw(data, cfg):
    u, u_cal = oracle_scores(data)
    return decide(u, u_cal, cfg.alpha).rejected


def _semisup_claw(data, cfg):
    if data.null_pool is None:
        raise ClawError("semisup_claw needs a design with a null pool")
    return semisup_claw_run(data, cfg).rejected


def _bh(data, cfg):
    return bh(_pvalues(data, cfg), cfg.alpha)


def _storey_bh(data, cfg):
    return storey_bh(_pvalues(data, cfg), cfg.alpha, cfg.lam)


def _baseline(method, separate):
    def run(data, cfg):
        analysis = separate_analysis if separate else pooled_analysis
        return analysis(
            data,
            StandardNormalNull(),
            alpha=cfg.alpha,
            method=method,
            lam=cfg.lam,
            sidedness=cfg.sidedness,
            floor=cfg.density_floor,
        )

    return run


METHODS = {
    "claw": _claw,
    "plain_claw": _plain_claw,
    "oracle_claw": _oracle_claw,
    "semisup_claw": _semisup_claw,
    "bh": _bh,
    "storey_bh": _storey_bh,
    "separate_bh": _baseline("bh", True),
    "cbh": _baseline("cbh", False),
    "storey_cbh": _baseline("storey_cbh", False),
    "separate_cbh": _baseline("cbh", True),
}  # type: Dict[str, Callable[[Dataset, ClawConfig], numpy.ndarray]]


def _check_methods(methods):
    methods = list(methods)
    if len(methods) == 0:
        raise ClawError("no methods given")
    for name in methods:
        if name not in METHODS:
            raise ClawError(
                "unknown method %r (choose from %s)" % (name, ", ".join(sorted(METHODS)))
            )
    if len(set(methods)) != len(methods):
        raise ClawError("duplicate methods in %r" % (methods,))
    return methods


#
# replication
#


def replication_seed(master_seed, replication):
    # type: (int, int) -> int
    """The seed of a replication, a 64-bit mix of the
    master seed and the replication index."""
    state = numpy.random.SeedSequence([int(master_seed), int(replication)]).generate_state(
        1, dtype=numpy.uint64
    )
    return int(state[0])


def _replicate_one(task):
    """Run every method on the dataset of one replication.
    Returns a (K, 4) array of false discovery proportion,
    true discovery proportion, false rejections and
    rejections."""
    spec, methods, cfg, master_seed, r = task
    seed = replication_seed(master_seed, r)
    try:
        data = generate(spec, seed)
        run_cfg = cfg.replace(seed=seed)
        out = numpy.zeros((len(methods), 4))
        for k, name in enumerate(methods):
            rejected = METHODS[name](data, run_cfg)
            fdp, tdp = fdp_tdp(rejected, data.truth)
            n_false = int(numpy.count_nonzero(data.truth[rejected] == 0))
            out[k] = (fdp, tdp, n_false, len(rejected))
    except Exception as e:
        return ReplicationError(r, seed, e)
    return out


def replicate(spec, methods, n_reps, master_seed=0, workers=1, comm=None,
              alpha=0.05, config=None):
    """Run independent replications of a design and
    summarize the error rates of each method.

    Parameters
    ----------
    spec : :class:`GeneratorSpec`
        The design.
    methods : sequence of str
        Names from :data:`METHODS`.
    n_reps : int
        The number of replications. Must be positive.
    master_seed : int, optional
        The seed from which every replication seed is
        derived. (default: 0)
    workers : int, optional
        The number of worker processes. (default: 1)
    comm : :class:`mpi4py.MPI.Comm`, optional
        Distribute the replications over an MPI
        communicator instead. (default: None)
    alpha : float, optional
        The target level, used when `config` is None.
        (default: 0.05)
    config : :class:`ClawConfig <pyclawfdr.model.ClawConfig>`, optional
        The configuration of every method. (default:
        ``spec.default_config(alpha)``)

    Returns
    -------
    :class:`ReplicationSummary`

    Raises
    ------
    ReplicationError
        When a replication fails; the first failure in
        replication order is reported.
    """
    start = time.time()
    methods = _check_methods(methods)
    if (int(n_reps) != n_reps) or (n_reps < 1):
        raise ClawError("n_reps must be a positive integer, got %r" % (n_reps,))
    n_reps = int(n_reps)
    if config is None:
        config = spec.default_config(alpha)
    tasks = [(spec, methods, config, master_seed, r) for r in range(n_reps)]
    if comm is not None:
        local = {}
        for task in mpi_utils.dispatched_partition(comm, tasks):
            local[task[-1]] = _replicate_one(task)
        results = mpi_utils.ordered_gather(comm, local, n_reps)
    elif (workers > 1) and (n_reps > 1):
        with multiprocessing.Pool(processes=min(int(workers), n_reps)) as pool:
            results = list(pool.imap(_replicate_one, tasks))
    else:
        results = [_replicate_one(task) for task in tasks]
    for result in results:
        if isinstance(result, ReplicationError):
            raise result
    stacked = numpy.stack(results)  # (n_reps, K, 4)
    summary = ReplicationSummary(
        methods,
        fdp=stacked[:, :, 0],
        tdp=stacked[:, :, 1],
        false=stacked[:, :, 2],
        rejected=stacked[:, :, 3],
        spec=spec,
        alpha=config.alpha,
        master_seed=master_seed,
        wall_time=time.time() - start,
    )
    if mpi_utils.world_rank(comm) == 0:
        logger.debug("%d replication(s) of %r in %s", n_reps, spec,
                     time_format(summary.wall_time))
    return summary


def _mean_se(x):
    n = len(x)
    mean = float(numpy.mean(x))
    if n < 2:
        return mean, 0.0
    return mean, float(numpy.std(x, ddof=1) / math.sqrt(n))


class ReplicationSummary(object):
    """Per-method Monte Carlo estimates.

    Attributes
    ----------
    methods : list of str
    fdr, fdr_se : numpy.ndarray
        Mean false discovery proportion and its standard
        error, per method.
    ap, ap_se : numpy.ndarray
        Mean true discovery proportion (average power) and
        its standard error.
    mfdr : numpy.ndarray
        Mean false rejections over mean rejections (0 when
        nothing is ever rejected).
    n_reps : int
    se_undefined : bool
        True when a single replication was run; the
        standard errors are then reported as 0.
    wall_time : float or None
        Not part of the written payloads.
    """

    def __init__(self, methods, fdp, tdp, false, rejected, spec=None, alpha=None,
                 master_seed=None, wall_time=None):
        self.methods = list(methods)
        self.fdp = numpy.asarray(fdp, dtype=float)
        self.tdp = numpy.asarray(tdp, dtype=float)
        self.false = numpy.asarray(false, dtype=float)
        self.rejected = numpy.asarray(rejected, dtype=float)
        assert self.fdp.shape == (self.fdp.shape[0], len(self.methods))
        self.n_reps = self.fdp.shape[0]
        self.se_undefined = self.n_reps < 2
        self.spec = spec
        self.alpha = alpha
        self.master_seed = master_seed
        self.wall_time = wall_time
        K = len(self.methods)
        self.fdr = numpy.zeros(K)
        self.fdr_se = numpy.zeros(K)
        self.ap = numpy.zeros(K)
        self.ap_se = numpy.zeros(K)
        self.mfdr = numpy.zeros(K)
        for k in range(K):
            self.fdr[k], self.fdr_se[k] = _mean_se(self.fdp[:, k])
            self.ap[k], self.ap_se[k] = _mean_se(self.tdp[:, k])
            mean_rejected = self.rejected[:, k].mean()
            if mean_rejected > 0:
                self.mfdr[k] = self.false[:, k].mean() / mean_rejected

    def _index(self, method):
        try:
            return self.methods.index(method)
        except ValueError:
            raise ClawError("method %r is not part of this summary" % (method,))

    def paired_difference(self, a, b, metric="ap"):
        # type: (str, str, str) -> Tuple[float, float]
        """The mean and standard error of the per-replication
        difference a - b of a metric ("ap" or "fdr")."""
        if metric not in ("ap", "fdr"):
            raise ClawError("metric must be 'ap' or 'fdr', got %r" % (metric,))
        values = self.tdp if metric == "ap" else self.fdp
        return _mean_se(values[:, self._index(a)] - values[:, self._index(b)])

    def rows(self):
        # type: () -> List[Dict[str, Any]]
        """One dictionary per method with the CSV
        columns."""
        setting = param = None
        family = None
        if self.spec is not None:
            family = self.spec.family
            setting = self.spec.setting
            param = self.spec.describe_parameter()
        out = []
        for k, name in enumerate(self.methods):
            out.append(
                {
                    "method": name,
                    "family": family,
                    "setting": setting,
                    "param": param,
                    "fdr": float(self.fdr[k]),
                    "fdr_se": float(self.fdr_se[k]),
                    "ap": float(self.ap[k]),
                    "ap_se": float(self.ap_se[k]),
                    "mfdr": float(self.mfdr[k]),
                    "n_reps": self.n_reps,
                }
            )
        return out

    CSV_COLUMNS = ("method", "setting", "param", "fdr", "fdr_se", "ap", "ap_se", "mfdr",
                   "n_reps")

    def write_csv(self, stream):
        """Write one row per method."""
        with as_stream(stream, mode="w", newline="") as out:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(self.CSV_COLUMNS)
            for row in self.rows():
                writer.writerow(
                    [
                        format_float(row[c]) if isinstance(row[c], float) else row[c]
                        for c in self.CSV_COLUMNS
                    ]
                )

    def to_dict(self):
        # type: () -> Dict[str, Any]
        return {
            "alpha": self.alpha,
            "master_seed": self.master_seed,
            "n_reps": self.n_reps,
            "se_undefined": self.se_undefined,
            "methods": self.rows(),
        }

    def write_json(self, stream):
        with as_stream(stream) as out:
            json.dump(self.to_dict(), out, sort_keys=True, indent=2)
            out.write("\n")

    def pprint(self, stream=sys.stdout):
        """Print a one-line digest per method."""
        with as_stream(stream) as out:
            for row in self.rows():
                out.write(
                    "%-13s FDR=%.4f (se %.4f)  AP=%.4f (se %.4f)  mFDR=%.4f\n"
                    % (row["method"], row["fdr"], row["fdr_se"], row["ap"], row["ap_se"],
                       row["mfdr"])
                )
            if self.se_undefined:
                out.write("(single replication: standard errors are undefined)\n")
