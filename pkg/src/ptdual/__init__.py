"""Dual bases, signatures and the charge operator of PT-symmetric Hamiltonians."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BrokenPhase,
    IllConditioned,
    IncompleteBasis,
    ModelError,
    NearDegenerate,
    NotProportional,
    NotPTInvariant,
    PTDualError,
    SignatureMismatch,
    UnpairedComplexEigenvalue,
    ZeroCoefficient,
)
from .model import (  # noqa: E402
    GridSpec,
    OperatorTriple,
    build_explicit,
    build_grid_hamiltonian,
    build_matrix_model,
    check_pseudo_hermiticity,
    check_pt_symmetry,
)
from .ptcore import (  # noqa: E402
    COperator,
    PTBasis,
    build_c_operator,
    build_pt_basis,
    compute_c_coefficients,
    fix_pt_phase,
    rescale_dual_pairs,
    signature,
)
from .spectral import (  # noqa: E402
    BiorthogonalSystem,
    classify_eigenvalues,
    classify_reality,
    dual_completeness_residual,
    eigendecompose,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances  # noqa: E402
from .verify import (  # noqa: E402
    cpt_completeness_residual,
    cpt_inner_product,
    dual_completeness_residual_signed,
    full_report,
    pt_inner_product,
    signed_completeness_residual,
)
