"""Lambert W function.

Scalar evaluation on every integer branch, a real-valued fast path for the
two real branches ``k = 0`` and ``k = -1``, and the closed-form matrix
Lambert W of matrices whose only nonzero row is the last one.

Initial guesses follow Corless, Gonnet, Hare, Jeffrey and Knuth, "On the
Lambert W Function" (1996): a series about the branch point ``-1/e``, a short
Taylor series about the origin, and the two-term asymptotic expansion
elsewhere.  All guesses are refined with Halley's method.
"""

import cmath
import math

import numpy as np

from .errors import ConvergenceError, DomainError

EXP_M1 = math.exp(-1.0)
#: Below this ``|1 + e z|`` the branch-point series is used without iteration.
BRANCH_POINT_SWITCH = 1e-6
#: ``|m_n|`` below this is treated as zero (removable singularity of W(m)/m).
ZERO_LIMIT = 1e-12
MAX_ITER = 100
TINY_Z = 1e-250  # below this, e^w of a k != 0 branch value nears underflow


def _branch_series(p):
    # W = -1 + p - p^2/3 + 11/72 p^3 - 43/540 p^4 + 769/17280 p^5, p = sqrt(2(ez + 1))
    return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0 + p * 769.0 / 17280.0))))


def _halley(w, z, tol=4e-16):
    best, best_f = w, math.inf
    for _ in range(MAX_ITER):
        ew = cmath.exp(w) if isinstance(w, complex) else math.exp(w)
        f = w * ew - z
        if abs(f) < best_f:
            best, best_f = w, abs(f)
        # rounding floor of the residual; the step test stalls near the branch point
        if best_f <= 4e-16 * abs(z):
            return best
        wp1 = w + 1.0
        if wp1 == 0:
            return w
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w = w - dw
        if abs(dw) <= tol * (1.0 + abs(w)):
            return w
    if best_f <= 1e-13 * max(1.0, abs(z)):
        return best
    raise ConvergenceError(f"Halley iteration for W({z}) did not converge")


def w_real(k, x):
    """Real branches of Lambert W.

    Parameters
    ----------
    k : {0, -1}
        Branch index.  ``W_0`` maps ``[-1/e, inf)`` onto ``[-1, inf)``;
        ``W_{-1}`` maps ``[-1/e, 0)`` onto ``(-inf, -1]``.
    x : float

    Returns
    -------
    float
    """
    x = float(x)
    if k not in (0, -1):
        raise DomainError(f"real Lambert W exists only for k in {{0, -1}}, got k={k}")
    if not math.isfinite(x):
        raise DomainError(f"argument must be finite, got {x}")
    q = 1.0 + math.e * x
    if q < -1e-15:
        raise DomainError(f"x = {x} < -1/e has no real Lambert W value")
    if k == -1 and x >= 0:
        raise DomainError(f"W_-1 is real only on [-1/e, 0), got x = {x}")
    q = max(q, 0.0)
    p = math.sqrt(2.0 * q)
    if k == 0:
        if x == 0:
            return 0.0
        if q < BRANCH_POINT_SWITCH:
            return _branch_series(p)
        if q < 0.3:
            w = _branch_series(p)
        elif x < 3.0:
            w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
        else:
            L1 = math.log(x)
            L2 = math.log(L1)
            w = L1 - L2 + L2 / L1
        w = _halley(w, x)
        return max(w, -1.0)
    if q < BRANCH_POINT_SWITCH:
        return _branch_series(-p)
    if q < 0.3:
        w = _branch_series(-p)
    else:
        L1 = math.log(-x)
        L2 = math.log(-L1)
        w = L1 - L2 + L2 / L1
    if -x < TINY_Z:
        return _log_newton(w, L1, lambda v: math.log(-v))
    w = _halley(w, x)
    return min(w, -1.0)


def w_complex(k, z):
    """Lambert W on branch `k` of a complex argument.

    Branch ``k`` takes values with imaginary part roughly in
    ``((2k-1)pi, (2k+1)pi]``, with the usual counter-clockwise continuity on
    the cuts: values on the negative real axis are limits from above.

    Raises
    ------
    DomainError
        For ``z = 0`` with ``k != 0`` (logarithmic singularity).
    """
    k = int(k)
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"argument must be finite, got {z}")
    if z == 0:
        if k == 0:
            return 0j
        raise DomainError(f"W_{k}(0) is singular")
    # Pin the sign of a zero imaginary part: points on the cut belong to the upper side.
    z = complex(z.real, z.imag if z.imag != 0 else 0.0)
    q = 1.0 + math.e * z
    upper = z.imag >= 0
    near_bp = abs(q) < 0.3
    if k == 0:
        near_bp = abs(q) < 1.0
        if near_bp:
            p = cmath.sqrt(2.0 * q)
            if abs(q) < BRANCH_POINT_SWITCH:
                return _branch_series(p)
            w = _branch_series(p)
        elif abs(z) < 0.3:
            w = z * (1.0 + z * (-1.0 + z * (1.5 + z * (-8.0 / 3.0))))
        elif abs(z) < 20.0 and z.real > -0.7:
            L = cmath.log(1.0 + z)
            w = L * (1.0 - cmath.log(1.0 + L) / (2.0 + L))
        else:
            w = _asymptotic(z, 0)
    elif (k == -1 and upper) or (k == 1 and not upper):
        if near_bp:
            p = cmath.sqrt(2.0 * q)
            if abs(q) < BRANCH_POINT_SWITCH:
                return _branch_series(-p)
            w = _branch_series(-p)
        else:
            w = _asymptotic(z, k)
    else:
        w = _asymptotic(z, k)
    if k != 0 and abs(z) < TINY_Z:
        if k == -1 and z.imag == 0 and z.real < 0:
            # real on the cut, where log w jumps and the log form fails
            return complex(w_real(-1, z.real))
        return _log_newton(complex(w), cmath.log(z) + 2j * math.pi * k)
    return _halley(complex(w), z)


def _log_newton(w, target, log=cmath.log):
    # solves w + log(w) = target, used where w e^w underflows
    for _ in range(MAX_ITER):
        dw = (w + log(w) - target) / (1.0 + 1.0 / w)
        w -= dw
        if abs(dw) <= 4e-16 * abs(w):
            break
    return w


def _asymptotic(z, k):
    L1 = cmath.log(z) + 2j * math.pi * k
    L2 = cmath.log(L1)
    return L1 - L2 + L2 / L1


def w_scaled(k, m):
    """``W_k(m) / m`` for real `m`, continuous through ``m = 0`` where it equals 1."""
    if abs(m) < ZERO_LIMIT:
        return 1.0
    return w_real(k, m) / m


def w_ccmatrix(k, last_row):
    """Matrix Lambert W of a matrix that is zero except for its last row.

    Such a matrix ``M`` satisfies ``M^j = m_n^{j-1} M``, so its Lambert W is
    the scalar multiple ``W_k(m_n)/m_n * M``, and ``M`` itself when ``m_n``
    vanishes.

    Parameters
    ----------
    k : {0, -1}
    last_row : array_like, shape (n,)
        Entries ``m_1 ... m_n``.

    Returns
    -------
    ndarray, shape (n,)
        Last row of ``W_k(M)``.
    """
    m = np.asarray(last_row, dtype=float)
    if k not in (0, -1):
        raise DomainError(f"matrix Lambert W is defined here only for k in {{0, -1}}, got {k}")
    if abs(m[-1]) < ZERO_LIMIT:
        return m.copy()
    return m * w_scaled(k, float(m[-1]))


def cc_full(last_row):
    """Materialize the n x n matrix whose only nonzero row is `last_row`."""
    row = np.asarray(last_row)
    M = np.zeros((row.size, row.size), dtype=row.dtype)
    M[-1] = row
    return M
