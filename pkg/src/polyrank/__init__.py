"""Low-rank approximation and variable-concentration analysis of homogeneous
polynomials: Bombieri/sphere/subspace norms, greedy rank-one deflation with
its floor(1/eps^2) step bound, and the constructive concentration pipeline
with a numerically verifiable inequality chain."""

from .concentration import (
    AlphaDecomposition,
    ChainCheck,
    ChainValues,
    ConcentrationReport,
    alpha_decompose,
    concentrate,
    concentration_defect,
    frame_budget,
    monomial_count_below,
    reassemble,
    verify_chain,
)
from .frames import (
    Frame,
    complete_orthogonal,
    coordinate_frame,
    gram_schmidt,
    random_frame,
    random_orthogonal,
)
from .generators import bombieri_gaussian, planted_lowrank, sparse_gaussian
from .lowrank import (
    LowRankApprox,
    greedy_approximate,
    hard_family,
    reconstruct,
    step_bound,
)
from .poly import (
    HomPoly,
    apply_orthogonal,
    bombieri_inner,
    bombieri_norm,
    dense_tensor,
    evaluate,
    gradient,
    hessian,
    iter_exponents,
    max_coeff_norm,
    multinomial,
    poly_from_dense,
    pow_linear,
    project_subspace,
    quadratic_matrix,
    quadratic_poly,
    restrict_zero,
    zero_poly,
)
from .sphere import (
    FrameMax,
    OptimizerConfig,
    Rank1Term,
    SphereMax,
    best_rank1,
    norm_ratio_probe,
    operator_norm,
    operator_norm_oracle,
    subspace_norm,
)

__version__ = "0.1.0"
