"""Minimax-regret treatment choice under partial identification."""

from .breakdown import (
    OvbInputs,
    breakdown_curve,
    decision_breakdown,
    dsb_k,
    naive_breakdown,
    ovb_rule,
)
from .identified_set import (
    StudySet,
    WelfareBounds,
    estimated_bounds,
    k_bar,
    k_lower,
    membership_in_M,
    nontrivial_pi,
    project_to_M,
    welfare_bounds,
)
from .late import LateInputs, late_bounds, late_nontrivial, late_welfare_contrast
from .mmr import (
    MmrSolution,
    Regime,
    best_response,
    classify_regime,
    maximin,
    sigma_tilde,
    solve,
    solve_m0_star,
    solve_rho_star,
    threshold_worst_case,
    verify_mmr,
)
from .numerics import (
    Tolerance,
    find_root,
    integrate,
    maximize_scalar,
    std_normal_cdf,
    std_normal_pdf,
)
from .regret import (
    ConstantCost,
    Dominance,
    LinearCost,
    QmcConfig,
    QuadraticCost,
    RegretCurve,
    aversion_threshold,
    dominance_check,
    expected_cost,
    expected_regret,
    net_of_cost_profiled_regret,
    plugin_mean_action,
    plugin_regret_curve,
    profiled_regret,
    prop5_case,
    prop5_gamma_lower,
    regret_curve,
    worst_case_regret,
)
from .rules import (
    CoinFlip,
    DecisionRule,
    Interval,
    Linear,
    Mixture,
    NoData,
    PlugIn,
    RtSmooth,
    Threshold,
    adoption_probability,
    evaluate,
    evaluate_on_data,
    randomization_region,
    rule_from_json,
    rule_label,
    rule_to_json,
    study_from_json,
    study_to_json,
)

__version__ = "0.1.0"
