# configure a very basic logger for the module
def _configLogging():
    import logging

    logger = logging.getLogger("pyclawfdr")
    logger.setLevel(logging.WARNING)
    formatter = logging.Formatter("%(levelname)s(%(name)s): %(message)s")
    handler = logging.StreamHandler()
    handler.setFormatter(formatter)
    logger.addHandler(handler)


_configLogging()
del _configLogging

from pyclawfdr.__about__ import __version__
from pyclawfdr.configuration import config
from pyclawfdr.common import (
    inf,
    nan,
    NEG_INFINITY,
    Sidedness,
    WeightKind,
    EstimatorKind,
    ClawError,
    ClawNumericError,
)
from pyclawfdr.model import TestUnit, Dataset, ClawConfig, DecisionResult, validate_dataset
from pyclawfdr.weights import WeightMatrix, group_weights, kernel_weights
from pyclawfdr.mirror import (
    mirror_threshold,
    reject_set,
    evalues,
    ebh,
    mirror_diagnostics,
    decide,
)
from pyclawfdr.pipeline import StandardNormalNull, TabulatedNull, claw_run, oracle_scores
from pyclawfdr.results import ClawRun
from pyclawfdr.semisup import split_nulls, semisup_claw_run
from pyclawfdr.aggregate import EvaluePanel, aggregate_evalues, integrative_claw
from pyclawfdr.baselines import bh, storey_pi, storey_bh, conformal_pvalues, cbh_threshold
