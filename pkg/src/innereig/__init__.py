"""Restarted shift-invert subspace eigensolvers for interior eigenvalues.

Six methods: standard, harmonic and refined-harmonic extraction, each
expanded either by the shift-invert residual system or by the projected
correction equation, with ILUT-preconditioned GMRES inner solves whose
accuracy follows an adaptive rule.
"""

from .driver import (METHOD_NAMES, MethodSpec, OuterRecord, SolveConfig,
                     SolveReport, convergence_check, restart_basis, solve)
from .extraction import (Extraction, SubspaceState, extract_harmonic,
                         extract_refined_harmonic, extract_standard)
from .governor import ToleranceGovernor, compute_c_prime
from .ilu import IlutFactors, JdProjectedPreconditioner, ilut_factorize
from .krylov import (GmresOutcome, LinearOperator, gmres, make_jd_operator,
                     make_sira_operator)
from .sparse import (MatrixMarketError, SparseMatrix, load_matrix_market,
                     write_matrix_market)

__version__ = "0.1.0"

__all__ = [
    "METHOD_NAMES", "MethodSpec", "OuterRecord", "SolveConfig", "SolveReport",
    "convergence_check", "restart_basis", "solve",
    "Extraction", "SubspaceState", "extract_harmonic",
    "extract_refined_harmonic", "extract_standard",
    "ToleranceGovernor", "compute_c_prime",
    "IlutFactors", "JdProjectedPreconditioner", "ilut_factorize",
    "GmresOutcome", "LinearOperator", "gmres", "make_jd_operator",
    "make_sira_operator",
    "MatrixMarketError", "SparseMatrix", "load_matrix_market",
    "write_matrix_market",
    "__version__",
]
