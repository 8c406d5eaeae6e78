"""Computational laboratory for Frobenius traces, GL2 trace fibers and
fractional parts of prime powers."""
import warnings

warnings.filterwarnings("ignore", message="The TBB threading layer")

__version__ = "0.1.0"
