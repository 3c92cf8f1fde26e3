__title__ = "pyclawfdr"
__summary__ = (
    "Conformalized locally adaptive weighting for "
    "false discovery rate control with side information"
)
__uri__ = ""
__version__ = "0.1.dev0"
__author__ = "The pyclawfdr developers"
__email__ = ""
__license__ = "MIT"
__copyright__ = "Copyright {0}".format(__author__)
