"""Plant descriptions for single-delay linear systems.

``x'(t) = A x(t) + A_d x(t - h)``

The common canonical (CC) form has a companion ``A`` and an ``A_d`` that is
zero except for its last row.  Rank-one delayed terms ``A_d = b c^T`` with a
controllable pair ``(A, b)`` can be brought to that form by the similarity
``T = U U_c^{-1}`` built from two controllability matrices.
"""

from dataclasses import dataclass

import numpy as np

from .errors import UncontrollableError
from .linalg import as_square, companion, solve_linear

#: Relative singular-value floor used for the controllability rank test.
RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TimeDelaySystem:
    A: np.ndarray
    A_d: np.ndarray
    h: float

    def __post_init__(self):
        A = as_square(np.asarray(self.A, dtype=float), "A")
        A_d = as_square(np.asarray(self.A_d, dtype=float), "A_d")
        if A.shape != A_d.shape:
            raise ValueError(f"A {A.shape} and A_d {A_d.shape} differ in order")
        if not self.h > 0:
            raise ValueError(f"delay must be positive, got {self.h}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "A_d", A_d)
        object.__setattr__(self, "h", float(self.h))

    @property
    def n(self):
        return self.A.shape[0]


@dataclass(frozen=True, eq=False)
class RankOneDelaySystem:
    """``A_d = b c^T``."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    h: float

    def __post_init__(self):
        A = as_square(np.asarray(self.A, dtype=float), "A")
        b = np.asarray(self.b, dtype=float).reshape(-1)
        c = np.asarray(self.c, dtype=float).reshape(-1)
        if b.size != A.shape[0] or c.size != A.shape[0]:
            raise ValueError("b and c must have length equal to the order of A")
        if not self.h > 0:
            raise ValueError(f"delay must be positive, got {self.h}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "h", float(self.h))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def A_d(self):
        return np.outer(self.b, self.c)

    def to_tds(self):
        return TimeDelaySystem(self.A, self.A_d, self.h)


@dataclass(frozen=True, eq=False)
class CCFormSystem:
    """A system in common canonical form, stored by its two defining rows.

    Attributes
    ----------
    a : ndarray, shape (n,)
        Last row ``a_1 ... a_n`` of the companion matrix ``A``.
    a_d : ndarray, shape (n,)
        Last row ``a_d1 ... a_dn`` of ``A_d``.
    h : float
    """

    a: np.ndarray
    a_d: np.ndarray
    h: float

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float).reshape(-1)
        a_d = np.asarray(self.a_d, dtype=float).reshape(-1)
        if a.size != a_d.size or a.size == 0:
            raise ValueError("a and a_d must be non-empty and of equal length")
        if not self.h > 0:
            raise ValueError(f"delay must be positive, got {self.h}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "a_d", a_d)
        object.__setattr__(self, "h", float(self.h))

    @property
    def n(self):
        return self.a.size

    @property
    def A(self):
        return companion(self.a)

    @property
    def A_d(self):
        M = np.zeros((self.n, self.n))
        M[-1] = self.a_d
        return M

    def to_tds(self):
        return TimeDelaySystem(self.A, self.A_d, self.h)


@dataclass(frozen=True, eq=False)
class Transformation:
    """State change ``x = T z``."""

    T: np.ndarray
    T_inv: np.ndarray


def is_cc_form(sys, tol=1e-12):
    """Check for the common canonical form.

    Returns
    -------
    (bool, CCFormSystem or None)
    """
    if isinstance(sys, CCFormSystem):
        return True, sys
    A, A_d = sys.A, sys.A_d
    n = A.shape[0]
    pattern = companion(np.zeros(n))
    if np.any(np.abs(A[:-1] - pattern[:-1]) > tol):
        return False, None
    if np.any(np.abs(A_d[:-1]) > tol):
        return False, None
    return True, CCFormSystem(A[-1].copy(), A_d[-1].copy(), sys.h)


def controllability_matrix(A, b):
    """``[b, A b, ..., A^{n-1} b]``."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    n = A.shape[0]
    cols = [b]
    for _ in range(n - 1):
        cols.append(A @ cols[-1])
    return np.column_stack(cols)


def controllability_rank(U, tol=RANK_TOL):
    s = np.linalg.svd(U, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def char_poly(A):
    """Monic characteristic polynomial coefficients of `A`, highest power first.

    Faddeev-LeVerrier recursion; exact for integer matrices of small order,
    unlike the eigenvalue route.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    I = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * I
        coeffs.append(-np.trace(A @ M) / k)
    return np.array(coeffs)


def companion_pair(A):
    """Controllable companion form ``(A_bar, b_bar)`` sharing the spectrum of `A`."""
    coeffs = char_poly(A)
    A_bar = companion(-coeffs[1:][::-1])
    b_bar = np.zeros(A.shape[0])
    b_bar[-1] = 1.0
    return A_bar, b_bar


def to_cc_form(sys):
    """Transform a rank-one delay system to CC form.

    Parameters
    ----------
    sys : RankOneDelaySystem

    Returns
    -------
    Transformation, CCFormSystem

    Raises
    ------
    UncontrollableError
        When ``(A, b)`` has a rank-deficient controllability matrix.
    """
    n = sys.n
    U = controllability_matrix(sys.A, sys.b)
    rank = controllability_rank(U)
    if rank < n:
        raise UncontrollableError(rank, n)
    A_bar, b_bar = companion_pair(sys.A)
    U_c = controllability_matrix(A_bar, b_bar)
    # T = U U_c^{-1}  <=>  U_c^T T^T = U^T
    T = solve_linear(U_c.T, U.T).T
    T_inv = solve_linear(T, np.eye(n))
    c_bar = sys.c @ T
    cc = CCFormSystem(A_bar[-1].copy(), c_bar, sys.h)
    return Transformation(T, T_inv), cc


def rank_one_factor(A_d, tol=RANK_TOL):
    """Split `A_d` as ``b c^T``.

    Raises
    ------
    ValueError
        If `A_d` has numerical rank other than one.
    """
    A_d = np.asarray(A_d, dtype=float)
    u, s, vt = np.linalg.svd(A_d)
    if s[0] == 0:
        raise ValueError("A_d is zero; there is no rank-one factor")
    rank = int(np.sum(s > tol * s[0]))
    if rank != 1:
        raise ValueError(f"A_d has rank {rank}; only rank-one delayed terms can be transformed")
    return u[:, 0] * s[0], vt[0]


def to_rank_one(sys):
    """Recast a TimeDelaySystem with rank-one ``A_d`` as a RankOneDelaySystem."""
    b, c = rank_one_factor(sys.A_d)
    return RankOneDelaySystem(sys.A, b, c, sys.h)


def characteristic_function(sys, lam):
    """Evaluate the characteristic function ``det(lam I - A - A_d e^{-lam h})``.

    CC-form systems use the closed-form quasipolynomial
    ``lam^n - sum a_i lam^{i-1} - e^{-lam h} sum a_di lam^{i-1}``; other
    systems use an LU determinant.
    """
    lam = complex(lam)
    if isinstance(sys, CCFormSystem):
        powers = lam ** np.arange(sys.n)
        return lam**sys.n - powers @ sys.a - np.exp(-lam * sys.h) * (powers @ sys.a_d)
    n = sys.n
    return complex(np.linalg.det(lam * np.eye(n) - sys.A - sys.A_d * np.exp(-lam * sys.h)))


class Quasipolynomial:
    """``p(s) = sum_j sum_i c[j, i] s^i e^{-j h s}``.

    Row ``j`` of `coeffs` holds ascending polynomial coefficients multiplying
    ``e^{-j h s}``.  Instances are callable on scalars or arrays.
    """

    def __init__(self, coeffs, h):
        c = np.atleast_2d(np.asarray(coeffs))
        if np.isrealobj(c) or np.all(c.imag == 0):
            c = np.real(c).astype(float)
        self.coeffs = c
        self.h = float(h)
        self._powers = np.arange(c.shape[1])
        self._dcoeffs = c[:, 1:] * self._powers[1:]

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    @property
    def real_coefficients(self):
        return np.isrealobj(self.coeffs)

    @classmethod
    def from_polynomial(cls, ascending):
        return cls([ascending], 0.0)

    @classmethod
    def from_cc(cls, cc):
        c = np.zeros((2, cc.n + 1))
        c[0, :-1] = -cc.a
        c[0, -1] = 1.0
        c[1, :-1] = -cc.a_d
        return cls(c, cc.h)

    @classmethod
    def from_system(cls, sys):
        """Recover the coefficients of ``det(s I - A - z A_d)`` by 2-D interpolation."""
        ok, cc = is_cc_form(sys)
        if ok:
            return cls.from_cc(cc)
        n = sys.n
        N = n + 1
        r = max(1.0, np.linalg.norm(sys.A, 2) + np.linalg.norm(sys.A_d, 2))
        roots = np.exp(2j * np.pi * np.arange(N) / N)
        vals = np.empty((N, N), dtype=complex)
        for p, zeta in enumerate(roots):
            for q, eta in enumerate(roots):
                vals[q, p] = np.linalg.det(r * zeta * np.eye(n) - sys.A - eta * sys.A_d)
        # vals[q, p] = sum_{j,i} C[j, i] r^i zeta_p^i eta_q^j
        C = np.fft.fft2(vals) / N**2 / r ** np.arange(N)[None, :]
        if np.isrealobj(sys.A) and np.isrealobj(sys.A_d):
            C = C.real
        C[np.abs(C) < 1e-13 * np.max(np.abs(C))] = 0.0
        # trim trailing all-zero delay rows
        last = max((j for j in range(N) if np.any(C[j] != 0)), default=0)
        return cls(C[: last + 1], sys.h)

    def _exps(self, s):
        return np.exp(-self.h * np.multiply.outer(np.arange(self.coeffs.shape[0]), s))

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        polys = np.stack([np.polynomial.polynomial.polyval(s, row) for row in self.coeffs])
        out = np.sum(polys * self._exps(s), axis=0)
        return out if out.ndim else complex(out)

    def derivative(self, s):
        s = np.asarray(s, dtype=complex)
        J = self.coeffs.shape[0]
        E = self._exps(s)
        total = 0
        for j in range(J):
            poly = np.polynomial.polynomial.polyval(s, self.coeffs[j])
            dpoly = np.polynomial.polynomial.polyval(s, self._dcoeffs[j]) if self._dcoeffs.shape[1] else 0
            total = total + (dpoly - j * self.h * poly) * E[j]
        out = np.asarray(total, dtype=complex)
        return out if out.ndim else complex(out)

    def scale(self, s):
        """Sum of term magnitudes at `s`; the natural yardstick for ``|p(s)|``."""
        s = np.asarray(s, dtype=complex)
        mags = np.stack([np.polynomial.polynomial.polyval(np.abs(s), np.abs(row)) for row in self.coeffs])
        out = np.sum(mags * np.abs(self._exps(s)), axis=0)
        return out if out.ndim else float(out)

    def shifted(self, shift):
        """The function ``s -> p(s + shift)`` as a new quasipolynomial."""
        shift = complex(shift)
        J, N = self.coeffs.shape
        out = np.zeros((J, N), dtype=complex)
        for j in range(J):
            # Taylor shift of the polynomial part, times the constant e^{-j h shift}
            row = np.polynomial.polynomial.Polynomial(self.coeffs[j])
            shifted = row(np.polynomial.polynomial.Polynomial([shift, 1.0])).coef
            out[j, : shifted.size] = shifted * np.exp(-j * self.h * shift)
        if shift.imag == 0 and self.real_coefficients:
            out = out.real
        return Quasipolynomial(out, self.h)
