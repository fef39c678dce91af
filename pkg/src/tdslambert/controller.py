"""Delayed state-feedback design by eigenvalue assignment.

For ``x'(t) = A x(t) + B u(t - h)`` with ``u = K x`` the closed loop has the
delayed matrix ``B K`` (plus any delayed term the plant already carries).
Choosing ``n`` target roots fixes a companion ``S``; the Lambert W relations
then fix ``M_k`` and ``P_k = e^{-S h} e^{h (S - A)}``, and ``K`` follows from
the last row of ``M_k = h B K P_k``.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError, UncontrollableError
from .linalg import COND_LIMIT, solve_linear
from .spectrum import SolutionTriple, attribute_branch, companion_from_roots, recover_P
from .systems import (
    CCFormSystem,
    Quasipolynomial,
    TimeDelaySystem,
    Transformation,
    characteristic_function,
    companion_pair,
    controllability_matrix,
    controllability_rank,
    is_cc_form,
)

log = logging.getLogger(__name__)

ASSIGN_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class InputDelayPlant:
    A: np.ndarray
    B: np.ndarray
    h: float

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.shape[0] != A.shape[1] or B.shape[0] != A.shape[0]:
            raise ValueError(f"incompatible shapes A {A.shape}, B {B.shape}")
        if not self.h > 0:
            raise ValueError(f"delay must be positive, got {self.h}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "h", float(self.h))

    @property
    def n(self):
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class Design:
    """Result of an eigenvalue-assignment design.

    ``solution`` lives in the companion coordinates ``z = T^{-1} x``; ``K``
    acts on the original state ``x``.
    """

    K: np.ndarray
    k: int
    w_row: np.ndarray
    solution: SolutionTriple
    transformation: Transformation
    closed_loop: TimeDelaySystem
    desired: np.ndarray
    root_residuals: np.ndarray
    verified: bool


def _to_companion(A, b):
    """Similarity ``x = T z`` putting ``(A, b)`` into controllable companion form."""
    n = A.shape[0]
    ok, _ = is_cc_form(TimeDelaySystem(A, np.zeros_like(A), 1.0))
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    if ok and np.allclose(b, e_n, rtol=0, atol=1e-14):
        return Transformation(np.eye(n), np.eye(n))
    U = controllability_matrix(A, b)
    rank = controllability_rank(U)
    if rank < n:
        raise UncontrollableError(rank, n)
    A_bar, b_bar = companion_pair(A)
    U_c = controllability_matrix(A_bar, b_bar)
    T = solve_linear(U_c.T, U.T).T
    return Transformation(T, solve_linear(T, np.eye(n)))


def assign_eigenvalues(plant, desired, existing_Ad=None, tol=ASSIGN_TOL):
    """Gain placing `desired` among the closed-loop characteristic roots.

    Parameters
    ----------
    plant : InputDelayPlant
        Single input.  If ``(A, B)`` is not already in companion form it is
        transformed first and the gain mapped back.
    desired : sequence of complex
        ``n`` target roots, closed under conjugation.
    existing_Ad : ndarray, optional
        Delayed matrix already present in the plant; the closed loop uses
        ``existing_Ad + B K``.  Must be zero except for its last row in
        companion coordinates.

    Returns
    -------
    Design

    Raises
    ------
    SingularMatrixError
        If ``P_k`` is singular to tolerance.
    """
    if plant.B.shape[1] != 1:
        raise ValueError("only single-input plants are supported")
    n = plant.n
    desired = np.asarray(desired, dtype=complex).reshape(-1)
    if desired.size != n:
        raise ValueError(f"need {n} desired roots, got {desired.size}")
    b = plant.B[:, 0]
    tr = _to_companion(plant.A, b)
    T, Ti = tr.T, tr.T_inv
    A_bar = Ti @ plant.A @ T
    ad_bar = np.zeros(n)
    if existing_Ad is not None:
        Ad_bar = Ti @ np.asarray(existing_Ad, dtype=float) @ T
        if np.any(np.abs(Ad_bar[:-1]) > 1e-9 * max(1.0, np.abs(Ad_bar).max())):
            raise ValueError("existing delayed matrix is not in CC shape in companion coordinates")
        ad_bar = Ad_bar[-1]
    cc = CCFormSystem(A_bar[-1], ad_bar, plant.h)
    S = companion_from_roots(desired)
    att = attribute_branch(cc, S)
    P = recover_P(S, cc.A, plant.h)
    cond = np.linalg.cond(P)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError("P_k is singular; gain cannot be extracted", cond)
    # last row of M_k = h * (row of the delayed closed-loop matrix) * P_k
    total_row = solve_linear(P.T, att.m_row / plant.h)
    K_bar = total_row - ad_bar
    K = (K_bar @ Ti).reshape(1, n)
    Ad_cl = plant.B @ K
    if existing_Ad is not None:
        Ad_cl = Ad_cl + np.asarray(existing_Ad, dtype=float)
    closed = TimeDelaySystem(plant.A, Ad_cl, plant.h)
    sol = SolutionTriple(S, att.m_row, P, att.k)
    residuals = root_residuals(closed, desired)
    ok = bool(np.all(residuals <= tol))
    if not ok:
        log.warning("assigned roots miss the closed-loop characteristic equation: %s", residuals)
    return Design(K, att.k, att.w_row, sol, tr, closed, desired, residuals, ok)


def root_residuals(sys, roots):
    """``|det(lam I - A - A_d e^{-lam h})|`` scaled by the term magnitude at each root."""
    qp = Quasipolynomial.from_system(sys)
    return np.array([abs(characteristic_function(sys, lam)) / max(1.0, qp.scale(lam)) for lam in roots])
