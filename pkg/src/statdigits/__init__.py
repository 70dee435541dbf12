"""Random variables whose base-q digits form a stationary sequence.

Exact rational tooling for base-q expansions and cycles, digit processes,
CDF catalogs with the stationarity functional equation, characteristic
functions, and the uniform / atomic / singular decomposition.
"""

from .baseq import (
    BaseQExpansion,
    Cycle,
    DigitWord,
    ResourceBoundError,
    base_q_fraction_order,
    base_q_fractions,
    enumerate_cycles,
    expand,
    necklace_count,
    purely_repeating_value,
    shift,
)
from .cdf import (
    Cdf,
    FromProcess,
    NotOnGridError,
    cantor,
    cdf_from_process_grid,
    cycle_atomic,
    de_rham_takacs,
    envelope,
    from_process,
    heaviside,
    minkowski,
    mixture,
    process_from_cdf,
    uniform,
)
from .charfn import charfn_eval, limit_scan, periodicity_defect, rajchman_probe
from .decompose import AtomScanConfig, decompose, detect_atoms, reconstruct_check, uniform_weight
from .process import (
    IID,
    CycleProcess,
    DigitProcess,
    MarkovChain,
    Mixture,
    finite_dim,
    is_stationary,
    sample,
    sample_many,
)
from .statcheck import (
    GridFunction,
    self_similarity_scan,
    stationarity_residual,
    transfer_apply,
    transfer_convergence_report,
    verify_stationarity,
)

__version__ = "0.1.0"
