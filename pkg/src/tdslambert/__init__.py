"""Lambert W analysis and eigenvalue assignment for linear time-delay systems.

Systems of the form ``x'(t) = A x(t) + A_d x(t - h)`` are put into common
canonical (CC) form, their characteristic roots are attributed to Lambert W
branches, delayed state feedback is designed by assigning ``n`` roots, and
the result is checked with a Nyquist test and by simulation.
"""

__version__ = "0.1.0"

from .controller import Design, InputDelayPlant, assign_eigenvalues
from .errors import (
    BudgetExhaustedError,
    ConvergenceError,
    DomainError,
    SingularMatrixError,
    TDSError,
    UncontrollableError,
)
from .lambertw import w_ccmatrix, w_complex, w_real
from .linalg import eigenvalues, mat_exp, pseudo_inverse, solve_linear
from .nyquist import certify_rightmost, stability_verdict, sweep
from .rootfinder import LocatedRoot, SearchRegion, find_roots, rightmost_root
from .simulate import HistorySegment, Trajectory, decay_rate, integrate
from .spectrum import (
    BranchedRootSet,
    SolutionTriple,
    attribute_branch,
    companion_from_roots,
    min_norm_P,
    recover_P,
    solve_branch_equation,
    spectrum_scan,
    verify_solution,
)
from .systems import (
    CCFormSystem,
    Quasipolynomial,
    RankOneDelaySystem,
    TimeDelaySystem,
    Transformation,
    characteristic_function,
    controllability_matrix,
    is_cc_form,
    to_cc_form,
)
