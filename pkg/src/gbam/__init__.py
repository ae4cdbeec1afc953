"""Generalized bandwidth allocation model (G-BAM) for single-link admission control."""
from .allocator import (
    Decision,
    FeasibilityResult,
    Link,
    LinkSnapshot,
    LspRequest,
    Packing,
    admissible,
    feasible,
    headroom,
    new_link,
)
from .model import (
    BamConfig,
    ClassConfig,
    Direction,
    InvalidConfig,
    alloctc_config,
    dynamic_bound,
    grdm_config,
    loanable,
    mam_config,
    private_bandwidth,
    rdm_config,
    static_max_allocation,
    validate_config,
)
from .oracles import OracleState, replay

__version__ = "0.1.0"
