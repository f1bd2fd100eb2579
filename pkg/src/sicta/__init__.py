"""Tree random-access algorithms with successive interference cancellation.

Random splitting trees, exact and simulated CRI lengths, and throughput
estimates for fair and biased d-ary splitting under gated access.
"""

__version__ = "0.1.0"

from .policy import SplitPolicy, biased, custom, fair, sample_split
from .tree import SplitTree, TreeDepthError, generate, parse_tree
from .evaluators import (
    CriBreakdown,
    corrected_length,
    d_min,
    slot_level_cri,
    standard_ta_length,
    yg_length,
)
from .analytic import (
    ExpectedCriTable,
    check_yg_relation,
    expected_cri_table,
    multinomial_pmf,
    throughput_estimate,
    yg_closed_form_mst,
)
from .montecarlo import ExperimentConfig, RunSummary, run_experiment, sweep
