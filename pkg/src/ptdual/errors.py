"""Exception hierarchy.

Every numerical refusal names the stage that refused, so the CLI can report
it and pick the right exit code.
"""


class PTDualError(Exception):
    """Base class for all errors raised by ptdual."""

    stage = "ptdual"


class ModelError(PTDualError, ValueError):
    """Invalid model input (bad grid, bad parity matrix, bad parameters)."""

    stage = "model"


class SpectralError(PTDualError):
    stage = "eigendecompose"


class NearDegenerate(SpectralError):
    pass


class IllConditioned(SpectralError):
    pass


class UnpairedComplexEigenvalue(SpectralError):
    stage = "classify_reality"


class PTCoreError(PTDualError):
    stage = "ptcore"


class BrokenPhase(PTCoreError):
    """Raised when the chain is asked to process complex eigenvalues."""

    stage = "fix_pt_phase"


class NotPTInvariant(PTCoreError):
    stage = "fix_pt_phase"


class NotProportional(PTCoreError):
    stage = "compute_c_coefficients"


class ZeroCoefficient(PTCoreError):
    stage = "rescale_dual_pairs"


class SignatureMismatch(PTCoreError):
    stage = "signature"


class IncompleteBasis(PTCoreError):
    stage = "build_c_operator"
