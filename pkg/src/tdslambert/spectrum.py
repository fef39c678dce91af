"""Lambert W eigenspectrum of systems in common canonical form.

Forward direction: for branch ``k`` solve

    W_k(M) exp(W_k(M) + A h) = A_d h

for the last row of ``M``, then ``S = W_k(M)/h + A`` and its eigenvalues are
characteristic roots.

Reverse direction: pick ``n`` roots closed under conjugation, build the real
companion ``S`` with that spectrum and read off ``W = h (S - A)``.  Because
``W`` is zero except for its last row, ``m_n = w_n e^{w_n}`` is real and the
branch is ``0`` when ``w_n >= -1`` and ``-1`` otherwise.
"""

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, SingularMatrixError
from .lambertw import EXP_M1, cc_full, w_ccmatrix
from .linalg import companion, eigenvalues, mat_exp, pseudo_inverse, solve_linear, sort_spectrum
from .rootfinder import SearchRegion, find_roots
from .systems import CCFormSystem, Quasipolynomial

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-9
EQ20_TOL = 1e-6
MAX_NEWTON = 100
FD_STEP = 1e-7
MAX_HALVINGS = 20


@dataclass(frozen=True, eq=False)
class Attribution:
    """Outcome of reverse engineering a root set.

    ``w_row`` is the last row of ``W_k(M_k) = h (S - A)`` and ``m_row`` the last
    row of ``M_k``.
    """

    k: int
    w_row: np.ndarray
    m_row: np.ndarray


@dataclass(frozen=True, eq=False)
class SolutionTriple:
    S: np.ndarray
    m_row: np.ndarray
    P: np.ndarray
    k: int
    iterations: int = 0
    residual: float = 0.0

    @property
    def M(self):
        return cc_full(self.m_row)

    @property
    def roots(self):
        return eigenvalues(self.S)


@dataclass(frozen=True, eq=False)
class BranchedRootSet:
    roots: np.ndarray
    k: int
    solution: SolutionTriple = None
    residual: float = float("nan")


@dataclass(eq=False)
class ScanResult:
    sets: list
    roots: list
    uncovered: list = field(default_factory=list)


def is_conjugate_closed(roots, tol=1e-9):
    roots = list(np.asarray(roots, dtype=complex))
    while roots:
        z = roots.pop(0)
        if abs(z.imag) <= tol * (1 + abs(z)):
            continue
        dist = [abs(w - z.conjugate()) for w in roots]
        if not dist or min(dist) > tol * (1 + abs(z)):
            return False
        roots.pop(int(np.argmin(dist)))
    return True


def companion_from_roots(roots):
    """Real companion matrix whose eigenvalues are `roots`.

    The last row holds minus the characteristic-polynomial coefficients in
    ascending order, i.e. signed elementary symmetric functions of the roots.
    """
    roots = np.asarray(roots, dtype=complex).reshape(-1)
    if roots.size == 0:
        raise ValueError("need at least one root")
    if not is_conjugate_closed(roots):
        raise ValueError(f"root set is not closed under conjugation: {roots}")
    coeffs = np.real(np.poly(roots))
    return companion(-coeffs[1:][::-1])


def attribute_branch(cc, S):
    """Branch index and ``M_k`` row that produce the companion `S`.

    Parameters
    ----------
    cc : CCFormSystem
    S : ndarray, shape (n, n)
        Real companion matrix of the same order.

    Returns
    -------
    Attribution
    """
    S = np.asarray(S, dtype=float)
    if S.shape != (cc.n, cc.n):
        raise ValueError(f"S has shape {S.shape}, system order is {cc.n}")
    w_row = cc.h * (S[-1] - cc.a)
    w_n = float(w_row[-1])
    # m_i = w_i m_n / w_n = w_i e^{w_n}; at w_n = 0 this is the limiting case M = W
    m_row = w_row * np.exp(w_n)
    k = 0 if w_n >= -1.0 else -1
    return Attribution(k, w_row, m_row)


def recover_P(S, A, h):
    """Auxiliary matrix ``P = e^{-S h} e^{h (S - A)}``."""
    S = np.asarray(S, dtype=float)
    A = np.asarray(A, dtype=float)
    return mat_exp(-S * h) @ mat_exp(h * (S - A))


def min_norm_P(A_d, m_row, h, homogeneous=None, tol=1e-8):
    """Minimum-norm ``P`` with ``h A_d P = M``.

    Parameters
    ----------
    homogeneous : ndarray, optional
        Added after projection onto the null space of `A_d`; leaves the
        product unchanged.

    Raises
    ------
    ValueError
        If ``M`` is not reachable as ``h A_d P`` for any ``P``.
    """
    A_d = np.asarray(A_d, dtype=float)
    M = cc_full(np.asarray(m_row, dtype=float))
    pinv = pseudo_inverse(A_d)
    P = pinv @ M / h
    if homogeneous is not None:
        P = P + (np.eye(A_d.shape[1]) - pinv @ A_d) @ np.asarray(homogeneous, dtype=float)
    miss = np.linalg.norm(h * A_d @ P - M)
    if miss > tol * max(1.0, np.linalg.norm(M)):
        raise ValueError(f"M is outside the range of A_d (mismatch {miss:.3e})")
    return P


def branch_residual(cc, k, m_row):
    """Last row of ``W_k(M) e^{W_k(M) + A h} - A_d h`` (other rows vanish identically)."""
    w_row = w_ccmatrix(k, m_row)
    E = mat_exp(cc_full(w_row) + cc.A * cc.h)
    return w_row @ E - cc.h * cc.a_d


def _in_domain(k, m_n):
    if k == 0:
        return m_n >= -EXP_M1
    return -EXP_M1 <= m_n < 0


def solve_branch_equation(cc, k, m_init, tol=RESIDUAL_TOL, max_iter=MAX_NEWTON):
    """Newton iteration on the branch-``k`` matrix equation.

    The unknowns are the ``n`` entries of the last row of ``M``.  The Jacobian
    is formed by central differences and steps are halved until the residual
    norm decreases.

    Returns
    -------
    SolutionTriple

    Raises
    ------
    ConvergenceError
        No convergence within `max_iter` iterations, or the line search fails.
    DomainError
        The starting point is outside the real domain of branch `k`.
    SingularMatrixError
        The Jacobian is singular to tolerance.
    """
    if k not in (0, -1):
        raise DomainError(f"branch must be 0 or -1, got {k}")
    m = np.asarray(m_init, dtype=float).reshape(-1).copy()
    if m.size != cc.n:
        raise ValueError(f"M row has {m.size} entries, system order is {cc.n}")
    if not _in_domain(k, m[-1]):
        raise DomainError(f"m_n = {m[-1]} is outside the domain of branch {k}")
    target = tol * max(1.0, np.linalg.norm(cc.h * cc.a_d))
    R = branch_residual(cc, k, m)
    r = np.linalg.norm(R)
    it = 0
    while r > target:
        if it >= max_iter:
            raise ConvergenceError(f"branch equation: residual {r:.3e} after {it} iterations")
        it += 1
        J = _jacobian(cc, k, m)
        dm = solve_linear(J, -R)
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = m + lam * dm
            if _in_domain(k, trial[-1]):
                R_trial = branch_residual(cc, k, trial)
                r_trial = np.linalg.norm(R_trial)
                if r_trial < r:
                    break
            lam *= 0.5
        else:
            raise ConvergenceError(f"line search failed at residual {r:.3e}")
        m, R, r = trial, R_trial, r_trial
    w_row = w_ccmatrix(k, m)
    S = cc.A + cc_full(w_row) / cc.h
    P = recover_P(S, cc.A, cc.h)
    return SolutionTriple(S, m, P, k, it, float(r))


def _jacobian(cc, k, m):
    n = m.size
    J = np.empty((n, n))
    for i in range(n):
        d = FD_STEP * max(1.0, abs(m[i]))
        up, dn = m.copy(), m.copy()
        up[i] += d
        dn[i] -= d
        if i == n - 1 and not _in_domain(k, dn[i]):
            J[:, i] = (branch_residual(cc, k, up) - branch_residual(cc, k, m)) / d
        elif i == n - 1 and not _in_domain(k, up[i]):
            J[:, i] = (branch_residual(cc, k, m) - branch_residual(cc, k, dn)) / d
        else:
            J[:, i] = (branch_residual(cc, k, up) - branch_residual(cc, k, dn)) / (2 * d)
    return J


def verify_solution(sys, S):
    """Frobenius norm of ``S - A - A_d e^{-S h}``."""
    S = np.asarray(S)
    return float(np.linalg.norm(S - sys.A - sys.A_d @ mat_exp(-S * sys.h)))


def solution_from_roots(cc, roots, refine=True):
    """Reverse-engineer a SolutionTriple from `roots`, optionally refined by Newton."""
    S = companion_from_roots(roots)
    att = attribute_branch(cc, S)
    if refine:
        try:
            return solve_branch_equation(cc, att.k, att.m_row)
        except (ConvergenceError, SingularMatrixError, DomainError) as exc:
            log.warning("refinement of %s failed (%s); keeping reverse-engineered matrices", roots, exc)
    return SolutionTriple(S, att.m_row, recover_P(S, cc.A, cc.h), att.k, 0,
                          float(np.linalg.norm(branch_residual(cc, att.k, att.m_row))))


def _units(values):
    """Split a sorted root list into real roots and conjugate pairs (upper member kept)."""
    units = []
    for z in values:
        if z.imag > 0:
            units.append((complex(z), 2))
        elif z.imag == 0:
            units.append((complex(z), 1))
    return units


def _expand(units):
    out = []
    for z, size in units:
        out += [z, z.conjugate()] if size == 2 else [z]
    return np.array(out, dtype=complex)


def group_roots(values, n):
    """Conjugate-closed n-sets covering the roots.

    Each real root or conjugate pair, taken in order of descending real part,
    is completed with the most dominant other roots that still fit.  Returns
    the distinct sets and the roots that fit in no set.
    """
    units = _units(sort_spectrum(values))
    sets, keys, uncovered = [], set(), []
    for i, (z, size) in enumerate(units):
        if size > n:
            uncovered += [z, z.conjugate()]
            continue
        chosen, need = [i], n - size
        for j, (_, s) in enumerate(units):
            if need == 0:
                break
            if j != i and s <= need:
                chosen.append(j)
                need -= s
        if need:
            uncovered += list(_expand([units[i]]))
            continue
        key = tuple(sorted(chosen))
        if key not in keys:
            keys.add(key)
            sets.append(sort_spectrum(_expand([units[j] for j in key])))
    return sets, uncovered


def spectrum_scan(cc, region=None, roots=None, refine=True):
    """Branch-labelled eigenspectrum of a CC-form system.

    Parameters
    ----------
    cc : CCFormSystem
    region : SearchRegion, optional
    roots : sequence of complex, optional
        Explicit roots; skips the root search and the grouping heuristic is
        applied to these values instead.
    refine : bool
        Polish each reverse-engineered solution with Newton on the branch equation.

    Returns
    -------
    ScanResult
    """
    qp = Quasipolynomial.from_cc(cc)
    if roots is None:
        located = find_roots(qp, region or SearchRegion())
        values = [r.value for r in located]
    else:
        values = list(np.asarray(roots, dtype=complex))
    if len(values) < cc.n:
        raise ValueError(f"found {len(values)} roots, fewer than the system order {cc.n}")
    groups, uncovered = group_roots(values, cc.n)
    sys = cc.to_tds()
    sets = []
    for g in groups:
        sol = solution_from_roots(cc, g, refine=refine)
        sets.append(BranchedRootSet(sol.roots, sol.k, sol, verify_solution(sys, sol.S)))
    return ScanResult(sets, values, uncovered)


def spectrum_rows(result, cc):
    """Rows ``(real, imag, k, residual)``; residual is ``|p(lam)| / scale``."""
    qp = Quasipolynomial.from_cc(cc)
    rows = []
    for s in result.sets:
        for lam in s.roots:
            rows.append((lam.real, lam.imag, s.k, abs(qp(lam)) / max(1.0, qp.scale(lam))))
    return rows


def write_spectrum_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["real", "imag", "branch_k", "residual"])
        for re, im, k, res in rows:
            w.writerow([repr(float(re)), repr(float(im)), int(k), repr(float(res))])
