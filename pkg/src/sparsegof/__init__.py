"""Goodness-of-fit statistics for sparse multinomial vectors and contingency tables.

Pearson's Q, the likelihood-ratio G and the power-divergence family, plus
zero-cell corrected versions of Q and G that stay usable when many cells are
empty, and a Monte Carlo harness for their type I risk and power.
"""

from .correction import (
    CorrectedEstimator,
    CorrectionParams,
    EmptyInterval,
    MismatchError,
    UniformNonzero,
    corrected_g,
    corrected_q,
    fit_correction,
)
from .distributions import RandomStream, chi_square_cdf, chi_square_quantile, chi_square_sf, sample_multinomial
from .simulation import SimConfig, run_simulation, table1_distribution
from .statistics import kullback_g, ku_corrected_g, pearson_q, read_cressie
from .tables import ContingencyTable, TestReport, run_gof_test, run_independence_test

__version__ = "0.1.0"
