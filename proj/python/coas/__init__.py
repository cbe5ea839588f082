"""Co-active subspace analysis of model pairs."""

from ._core import (
    ConstantFunctionError,
    DimensionError,
    FormatError,
    InputPrior,
    MarsSurrogate,
    __version__,
    activity_scores,
    cmat,
    concordance,
    cotrace,
    decompose,
    discordance,
    expected_gradient,
    fit,
    fit_ensemble,
    lhs_design,
    mc_cmat,
    mds_embed,
    model_centers,
    piston,
    poincare_bound,
    poly,
    select_dim,
    symmetrize,
)

__all__ = [
    "ConstantFunctionError",
    "DimensionError",
    "FormatError",
    "InputPrior",
    "MarsSurrogate",
    "__version__",
    "activity_scores",
    "cmat",
    "concordance",
    "cotrace",
    "decompose",
    "discordance",
    "expected_gradient",
    "fit",
    "fit_ensemble",
    "lhs_design",
    "mc_cmat",
    "mds_embed",
    "model_centers",
    "piston",
    "poincare_bound",
    "poly",
    "select_dim",
    "symmetrize",
]
