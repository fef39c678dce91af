"""Dense matrix helpers.

Thin, validated wrappers around LAPACK-backed numpy/scipy routines.  The
wrappers exist so the rest of the package sees a single error vocabulary and a
deterministic eigenvalue ordering.
"""

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, SingularMatrixError

#: Condition number beyond which a matrix is treated as singular.
COND_LIMIT = 1e12


def as_square(M, name="matrix"):
    M = np.atleast_2d(np.asarray(M))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def mat_exp(M):
    """Matrix exponential by scaling and squaring with a degree-13 Pade approximant."""
    M = as_square(M)
    E = scipy.linalg.expm(M)
    if np.isrealobj(M):
        return np.real(E)
    return E


def solve_linear(A, B, cond_limit=COND_LIMIT):
    """Solve ``A X = B``.

    Raises
    ------
    SingularMatrixError
        If the 2-norm condition number of `A` exceeds `cond_limit`.
    """
    A = as_square(A, "A")
    B = np.asarray(B)
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"B has {B.shape[0]} rows, A has order {A.shape[0]}")
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularMatrixError("linear system is singular to tolerance", cond)
    return scipy.linalg.solve(A, B)


def sort_spectrum(values):
    """Sort by descending real part, then descending imaginary part."""
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((-values.imag, -values.real))
    return values[order]


def eigenvalues(M):
    """Eigenvalues of a square matrix in deterministic order.

    For real input the conjugate pairs are made exactly symmetric, so that
    ``conj(λ)`` of every returned value is also returned bit for bit.
    """
    M = as_square(M)
    try:
        lam = scipy.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    lam = np.asarray(lam, dtype=complex)
    if np.isrealobj(M):
        lam = _pair_conjugates(lam)
    return sort_spectrum(lam)


def _pair_conjugates(lam):
    out = []
    upper = sorted((z for z in lam if z.imag > 0), key=lambda z: (-z.real, -z.imag))
    lower = [z for z in lam if z.imag < 0]
    for z in upper:
        # match with the closest lower-half partner
        j = int(np.argmin([abs(w - z.conjugate()) for w in lower]))
        w = lower.pop(j)
        re = 0.5 * (z.real + w.real)
        im = 0.5 * (z.imag - w.imag)
        out += [complex(re, im), complex(re, -im)]
    out += [complex(z.real, 0.0) for z in lam if z.imag == 0]
    out += [complex(w.real, 0.0) for w in lower]
    return np.array(out, dtype=complex)


def pseudo_inverse(M):
    """Moore-Penrose pseudoinverse."""
    M = np.atleast_2d(np.asarray(M))
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return np.linalg.pinv(M)


def companion(last_row):
    """Companion matrix with ones on the superdiagonal and `last_row` at the bottom."""
    last_row = np.asarray(last_row)
    n = last_row.size
    C = np.zeros((n, n), dtype=last_row.dtype if last_row.dtype.kind == "c" else float)
    C[:-1, 1:] = np.eye(n - 1)
    C[-1] = last_row
    return C
