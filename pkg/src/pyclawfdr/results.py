"""
The results object of a single run.

Copyright by the pyclawfdr developers.
"""

# recognized by the pytest-doctestplus plugin,
# not the standard doctest
__doctest_requires__ = {"ClawRun.write": ["yaml"]}

from typing import Union, IO, Optional, Any
import sys

import six

from pyclawfdr.common import NEG_INFINITY
from pyclawfdr.misc import time_format, as_stream


def _yaml_scalar(val):
    # type: (Any) -> str
    """Spell a scalar the way YAML reads it back."""
    if val is None:
        return "null"
    if isinstance(val, bool):
        return "true" if val else "false"
    if isinstance(val, float):
        val_ = "%r" % (val)
        if val_ == "inf":
            return ".inf"
        elif val_ == "-inf":
            return "-.inf"
        elif val_ == "nan":
            return ".nan"
        return val_
    if isinstance(val, six.string_types):
        return "'%s'" % (val.replace("'", "''"))
    return "%r" % (val)


class ClawRun(object):
    """Stores the outcome of a run of the classical or
    semi-supervised procedure.

    Attributes
    ----------
    config : :class:`ClawConfig <pyclawfdr.model.ClawConfig>`
        The configuration of the run.
    weight_matrix : :class:`WeightMatrix <pyclawfdr.weights.WeightMatrix>`
        The locality weights.
    estimator_state : object
        The intermediate estimator quantities. An
        :class:`EstimatorState
        <pyclawfdr.estimators.EstimatorState>` for the
        classical procedure.
    decision : :class:`DecisionResult <pyclawfdr.model.DecisionResult>`
        The scores, threshold, rejections and e-values.
    score_function : object
        The score function that produced the scores.
    null_split : :class:`NullSplit <pyclawfdr.semisup.NullSplit>` or None
        The split of the null pool (semi-supervised runs
        only).
    wall_time : float or None
        The wall time of the run (seconds).
    """

    __slots__ = (
        "config",
        "weight_matrix",
        "estimator_state",
        "decision",
        "score_function",
        "null_split",
        "wall_time",
    )

    def __init__(
        self,
        config,
        weight_matrix,
        estimator_state,
        decision,
        score_function=None,
        null_split=None,
        wall_time=None,
    ):
        self.config = config
        self.weight_matrix = weight_matrix
        self.estimator_state = estimator_state
        self.decision = decision
        self.score_function = score_function
        self.null_split = null_split
        self.wall_time = wall_time  # type: Optional[float]

    @property
    def m(self):
        # type: () -> int
        return len(self.decision.u)

    @property
    def rejected(self):
        return self.decision.rejected

    @property
    def tau(self):
        # type: () -> float
        return self.decision.tau

    @property
    def evalues(self):
        return self.decision.evalues

    def summary(self):
        """Returns the scalar summary written by
        :func:`write` as a dictionary."""
        d = self.decision
        data = dict()
        data["m"] = self.m
        data["alpha"] = self.config.alpha
        data["n_rejected"] = d.n_rejected
        data["tau"] = d.tau
        data["tau_is_neg_infinity"] = d.tau == NEG_INFINITY
        data["fdp_estimate"] = d.fdp_estimate
        data["mirror_count"] = d.mirror_count
        data["n_ties"] = 0 if d.diagnostics is None else len(d.diagnostics.ties)
        bandwidth = getattr(self.estimator_state, "bandwidth", None)
        data["bandwidth"] = None if bandwidth is None else float(bandwidth)
        data["estimator"] = self.config.estimator.value
        data["weights"] = self.config.weights.value
        data["wall_time"] = self.wall_time
        return data

    def pprint(self, stream=sys.stdout):
        # type: (Union[IO, str]) -> None
        """Prints a nicely formatted representation of the
        results.

        Parameters
        ----------
        stream : file-like object or string, optional
            A file-like object or a filename where results
            should be written to. (default: ``sys.stdout``)
        """
        with as_stream(stream) as out:
            out.write("claw results:\n")
            self.write(out, prefix=" - ", pretty=True)

    def write(self, stream, prefix="", pretty=False):
        # type: (Union[IO, str], str, bool) -> None
        """Writes the scalar summary in YAML format to a
        stream or file. Changing the parameter values from
        their defaults may result in the output becoming
        non-compatible with the YAML format.

        Parameters
        ----------
        stream : file-like object or string
            A file-like object or a filename where results
            should be written to.
        prefix : string, optional
            A string to use as a prefix for each line that
            is written. (default: '')
        pretty : bool, optional
            Indicates whether or not certain recognized
            attributes should be formatted for more
            human-readable output. (default: False)

        Example
        -------

        >>> import six
        >>> import pyclawfdr
        >>> run = pyclawfdr.claw_run(
        ...     pyclawfdr.Dataset.from_arrays([-3.0, 0.2, 0.5], ["a", "a", "a"],
        ...                                   t_cal=[0.1, -0.4, 1.2]),
        ...     pyclawfdr.StandardNormalNull(),
        ...     pyclawfdr.ClawConfig(alpha=0.5))
        >>> out = six.StringIO()
        >>> run.write(out)
        >>> import yaml
        >>> results_dict = yaml.safe_load(out.getvalue())
        >>> assert results_dict['m'] == 3

        """
        data = self.summary()
        with as_stream(stream) as out:
            for name in sorted(data):
                val = data[name]
                if pretty:
                    if name == "wall_time":
                        val = time_format(val, digits=2)
                    elif isinstance(val, float):
                        val = "%.7g" % (val)
                    elif val is None:
                        val = "None"
                else:
                    val = _yaml_scalar(val)
                out.write(prefix + "%s: %s\n" % (name, val))

    def __str__(self):
        # type: () -> str
        """Represents the results as a string."""
        tmp = six.StringIO()
        self.pprint(stream=tmp)
        return tmp.getvalue()
