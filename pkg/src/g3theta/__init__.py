"""Theta functions, the degree-three second-order theta function, and
Arakelov-type invariants of genus-three period matrices."""

from .chars import (
    Characteristic,
    FundamentalSystem,
    HalfIntVector,
    add,
    build_fundamental_system,
    decompose_for,
    difference_representation_count,
    double_pair_sign,
    enumerate_by_parity,
    is_fundamental_system,
    pair_sign,
    parity_sign,
    pencil_representatives,
    pencil_statistics,
    triple_sign,
)
from .frobenius import (
    FrobeniusContext,
    LogComplex,
    build_frobenius_context,
    f_a_value,
    find_vanishing_even_null,
    frobenius_phi,
    locate_hyperelliptic,
    norm_phi,
    norm_xi_log,
    psi_log,
    reduced_value,
    xi_log,
)
from .integrate import (
    IntegrationResult,
    LogAbsFa,
    LogNormPhi,
    LogNormTheta,
    NormThetaSquared,
    QmcPlan,
    integrate_torus,
    log_H,
    log_K,
    mean_log_fa,
)
from .invariants import (
    InvariantReport,
    ceresa_height,
    hyperelliptic_cross_check,
    invariants_report,
)
from .theta import (
    PeriodMatrix,
    SymplecticMatrix,
    Tolerance,
    e_factor,
    eta_factor,
    norm_theta,
    p_norm,
    random_symplectic,
    reduce_point,
    symplectic_apply,
    theta_char,
    theta_null_table,
)

__version__ = "0.1.0"
