"""
Integration of generalized e-values from several runs,
for multiple covariate sources or for derandomizing over
calibration draws. The weighted average of the e-values is
passed to e-BH.

Copyright by the pyclawfdr developers.
"""
from typing import Any, List, Optional, Sequence
import csv
import logging
import multiprocessing

import numpy

from pyclawfdr.common import (
    DimensionMismatch,
    EmptyInput,
    NonFiniteValue,
    NonPositiveWeight,
    ParseError,
)
from pyclawfdr.model import ClawConfig, Dataset
from pyclawfdr.mirror import ebh
from pyclawfdr.misc import as_stream

logger = logging.getLogger("pyclawfdr")


class EvaluePanel(object):
    """A K x m panel of e-values with one positive weight
    per row.

    Parameters
    ----------
    matrix : array_like
        The e-values; row k holds the e-values of run k.
    weights : array_like, optional
        The row weights. (default: all ones)
    names : sequence of str, optional
        Row names, for reporting. (default: None)
    """

    __slots__ = ("matrix", "weights", "names")

    def __init__(self, matrix, weights=None, names=None):
        matrix = numpy.array(matrix, dtype=float, ndmin=2)
        if matrix.ndim != 2:
            raise DimensionMismatch("an e-value panel must be two-dimensional")
        K, m = matrix.shape
        if (K == 0) or (m == 0):
            raise EmptyInput("an e-value panel needs at least one run and one unit")
        if not numpy.all(numpy.isfinite(matrix)) or numpy.any(matrix < 0):
            raise NonFiniteValue("e-values must be finite and nonnegative")
        if weights is None:
            weights = numpy.ones(K)
        weights = numpy.array(weights, dtype=float).ravel()
        if len(weights) != K:
            raise DimensionMismatch("%d weights for %d runs" % (len(weights), K))
        if not numpy.all(numpy.isfinite(weights)) or numpy.any(weights <= 0):
            raise NonPositiveWeight("run weights must be finite and positive")
        matrix.setflags(write=False)
        weights.setflags(write=False)
        self.matrix = matrix
        self.weights = weights
        self.names = None if names is None else list(names)

    @property
    def K(self):
        # type: () -> int
        return self.matrix.shape[0]

    @property
    def m(self):
        # type: () -> int
        return self.matrix.shape[1]


def aggregate_evalues(panel):
    # type: (EvaluePanel) -> numpy.ndarray
    """The weighted average sum_k v_k e_k / sum_k v_k.

    Example
    -------

    >>> aggregate_evalues(EvaluePanel([[4.0, 0.0], [2.0, 2.0]])).tolist()
    [3.0, 1.0]

    """
    return panel.weights.dot(panel.matrix) / panel.weights.sum()


def _run_evalues(task):
    """Compute the e-values of one source. Module level so
    that it can be sent to pool workers."""
    source, f0, cfg = task
    if not isinstance(source, Dataset):
        return numpy.asarray(source, dtype=float)
    if (source.null_pool is not None) and (f0 is None):
        from pyclawfdr.semisup import semisup_claw_run

        return numpy.array(semisup_claw_run(source, cfg).evalues)
    from pyclawfdr.pipeline import claw_run, StandardNormalNull

    if f0 is None:
        f0 = StandardNormalNull()
    return numpy.array(claw_run(source, f0, cfg).evalues)


def build_panel(runs, alphas=None, weights=None, f0=None, cfg=None, workers=1):
    """Compute the e-values of every source and collect
    them into an :class:`EvaluePanel`.

    Parameters
    ----------
    runs : sequence
        Each entry is an array of precomputed e-values or
        a :class:`Dataset <pyclawfdr.model.Dataset>`.
        Datasets with a null pool are analyzed with the
        semi-supervised procedure when `f0` is None and
        with the classical procedure otherwise.
    alphas : sequence of float, optional
        The level of each run. (default: ``cfg.alpha``
        for every run)
    weights : sequence of float, optional
        The run weights. (default: all ones)
    f0 : object, optional
        The null distribution of the classical procedure.
        (default: None)
    cfg : :class:`ClawConfig <pyclawfdr.model.ClawConfig>`, optional
        The base configuration; run k uses its seed plus
        k. (default: ClawConfig())
    workers : int, optional
        The number of processes used to analyze the
        datasets. (default: 1)
    """
    if cfg is None:
        cfg = ClawConfig()
    K = len(runs)
    if K == 0:
        raise EmptyInput("no runs given")
    if alphas is None:
        alphas = [cfg.alpha] * K
    if len(alphas) != K:
        raise DimensionMismatch("%d levels for %d runs" % (len(alphas), K))
    tasks = [
        (source, f0, cfg.replace(alpha=alphas[k], seed=(cfg.seed + k) % (2 ** 64)))
        for k, source in enumerate(runs)
    ]
    n_datasets = sum(isinstance(s, Dataset) for s in runs)
    if (workers > 1) and (n_datasets > 1):
        logger.debug("analyzing %d sources with %d workers", K, workers)
        with multiprocessing.Pool(processes=min(workers, K)) as pool:
            rows = pool.map(_run_evalues, tasks)
    else:
        rows = [_run_evalues(task) for task in tasks]
    lengths = set(len(r) for r in rows)
    if len(lengths) != 1:
        raise DimensionMismatch("runs disagree on the number of units: %s" % (sorted(lengths)))
    return EvaluePanel(numpy.vstack(rows), weights=weights)


def integrative_claw(runs, alphas=None, weights=None, alpha=0.05, f0=None,
                     cfg=None, workers=1):
    """Aggregate the e-values of several runs and apply
    e-BH at level `alpha`. The remaining arguments are
    those of :func:`build_panel`.

    Returns
    -------
    numpy.ndarray
        The sorted indices of the rejected units.

    Example
    -------

    >>> integrative_claw([[3.0, 1.0]], alpha=2.0 / 3.0).tolist()
    [0]

    """
    panel = build_panel(runs, alphas=alphas, weights=weights, f0=f0, cfg=cfg,
                        workers=workers)
    return ebh(aggregate_evalues(panel), alpha)


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_panel_csv(stream, weights=None):
    # type: (Any, Optional[Sequence[float]]) -> EvaluePanel
    """Read an e-value panel with one row per unit and one
    column per source. A first row that is entirely
    non-numeric is taken as the source names."""
    names = None  # type: Optional[List[str]]
    rows = []  # type: List[List[float]]
    width = None
    with as_stream(stream, mode="r", newline="") as f:
        for lineno, row in enumerate(csv.reader(f), 1):
            row = [cell.strip() for cell in row]
            if (len(row) == 0) or (row == [""]):
                continue
            if (lineno == 1) and not any(_is_number(c) for c in row):
                names = row
                width = len(row)
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError("expected %d columns, got %d" % (width, len(row)), line=lineno)
            try:
                rows.append([float(c) for c in row])
            except ValueError:
                raise ParseError("non-numeric e-value", line=lineno)
    if len(rows) == 0:
        raise EmptyInput("the e-value panel has no rows")
    return EvaluePanel(numpy.array(rows).T, weights=weights, names=names)
