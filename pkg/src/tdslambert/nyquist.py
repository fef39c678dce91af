"""Nyquist tests for retarded quasipolynomials.

``F(w) = p(j w + shift) / (1 + j w)^n`` tends to 1 at both ends of the
frequency axis when ``p`` is monic of degree ``n`` and its delay terms have
lower degree.  The winding of ``F`` about the origin as ``w`` runs over the
real line then counts (with negative sign) the zeros of ``p`` to the right of
``Re s = shift``; a curve through the origin means a zero sits on that line.
"""

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .rootfinder import SearchRegion, find_roots
from .systems import CCFormSystem, Quasipolynomial, TimeDelaySystem

log = logging.getLogger(__name__)

ARG_JUMP = math.pi / 8
MAX_POINTS = 400_000
OMEGA_CAP = 1e6
TAIL_TOL = 0.1
ORIGIN_TOL = 1e-4
ROOT_TOL = 1e-6
DEFAULT_MU = 0.1


@dataclass(frozen=True, eq=False)
class NyquistCurve:
    omega: np.ndarray
    values: np.ndarray
    shift: complex
    winding_number: int
    min_distance: float
    omega_at_min: float
    winding_raw: float
    resolved: bool
    half_sweep_ok: bool = True

    @property
    def scale(self):
        return float(np.median(np.abs(self.values)))

    @property
    def indeterminate(self):
        return not self.resolved or abs(self.winding_raw - self.winding_number) >= 0.1


@dataclass(frozen=True, eq=False)
class Certificate:
    verdict: str
    passes_origin: bool
    no_encirclement: bool
    tolerance: float
    curve_on: NyquistCurve
    curve_shifted: NyquistCurve
    root_residual: float
    message: str = ""

    def report(self):
        lines = [
            f"verdict: {self.verdict}",
            f"  root residual |p(lam*)|/scale = {self.root_residual:.3e}",
            f"  condition 1 (curve through origin, shift {self.curve_on.shift.real:+.6g}): "
            f"{'pass' if self.passes_origin else 'fail'}; min |F| = {self.curve_on.min_distance:.3e} "
            f"at w = {self.curve_on.omega_at_min:.6g}, tolerance {self.tolerance * self.curve_on.scale:.3e}",
            f"  condition 2 (no encirclement, shift {self.curve_shifted.shift.real:+.6g}): "
            f"{'pass' if self.no_encirclement else 'fail'}; winding {self.curve_shifted.winding_number} "
            f"(raw {self.curve_shifted.winding_raw:+.4f}), min |F| = {self.curve_shifted.min_distance:.3e}",
        ]
        if self.message:
            lines.append(f"  note: {self.message}")
        return "\n".join(lines)


def as_quasipolynomial(p):
    if isinstance(p, Quasipolynomial):
        return p
    if isinstance(p, CCFormSystem):
        return Quasipolynomial.from_cc(p)
    if isinstance(p, TimeDelaySystem):
        return Quasipolynomial.from_system(p)
    raise TypeError(f"cannot build a quasipolynomial from {type(p).__name__}")


def _F(qp, n, shift):
    def F(w):
        w = np.asarray(w, dtype=float)
        return qp(1j * w + shift) / (1.0 + 1j * w) ** n
    return F


def _grid(omega_max, samples, extra):
    # uniform in asinh(w) so low frequencies, where the curve lives, are sampled densely
    a = math.asinh(omega_max)
    t = np.linspace(-a, a, samples)
    w = np.sinh(t)
    w = np.concatenate([w, [0.0], np.asarray(extra, dtype=float)])
    w = w[np.abs(w) <= omega_max]
    return np.unique(w)


def sweep(p, n, shift=0.0, omega_max=50.0, samples=4001, extra_omegas=()):
    """Sample ``F(w) = p(j w + shift)/(1 + j w)^n`` on ``[-omega_max, omega_max]``.

    The grid is refined wherever consecutive phases differ by more than
    ``pi/8``.  `omega_max` is doubled (up to a cap) until both end values lie
    within 0.1 of 1.

    Returns
    -------
    NyquistCurve
    """
    qp = as_quasipolynomial(p)
    shift = complex(shift)
    F = _F(qp, n, shift)
    while omega_max < OMEGA_CAP:
        ends = F(np.array([-omega_max, omega_max]))
        if np.all(np.abs(ends - 1.0) <= TAIL_TOL):
            break
        omega_max *= 2.0
    else:
        log.warning("Nyquist tail does not settle near 1 below |w| = %g", OMEGA_CAP)

    w = _grid(omega_max, samples, extra_omegas)
    vals = F(w)
    resolved = True
    while True:
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.angle(vals[1:] / vals[:-1])
        bad = np.nonzero(~(np.abs(d) <= ARG_JUMP))[0]
        if bad.size == 0:
            break
        gaps = w[bad + 1] - w[bad]
        bad = bad[gaps > 1e-12 * (1 + np.abs(w[bad]))]
        if bad.size == 0 or w.size + bad.size > MAX_POINTS:
            # an origin crossing, or a zero too close to the sweep line to resolve
            resolved = False
            break
        mids = 0.5 * (w[bad] + w[bad + 1])
        w = np.concatenate([w, mids])
        vals = np.concatenate([vals, F(mids)])
        order = np.argsort(w)
        w, vals = w[order], vals[order]

    with np.errstate(invalid="ignore", divide="ignore"):
        d = np.angle(vals[1:] / vals[:-1])
        closing = np.angle(vals[0] / vals[-1])
    raw = float((np.nansum(d) + closing) / (2 * math.pi))
    winding = int(round(raw))

    dist, w_min = _min_distance(F, w, vals)

    half_ok = True
    if shift.imag == 0 and qp.real_coefficients:
        pos = w >= 0
        with np.errstate(invalid="ignore", divide="ignore"):
            half = np.nansum(np.angle(vals[pos][1:] / vals[pos][:-1]))
        half_ok = abs(2 * half + closing - 2 * math.pi * raw) < 0.2 * math.pi
        if not half_ok:
            log.warning("Nyquist half-sweep symmetry check failed at shift %s", shift)

    return NyquistCurve(w, vals, shift, winding, dist, w_min, raw, resolved and half_ok, half_ok)


def _min_distance(F, w, vals):
    mags = np.abs(vals)
    best_d, best_w = float(mags.min()), float(w[np.argmin(mags)])
    # polish the few deepest local minima
    interior = np.nonzero((mags[1:-1] <= mags[:-2]) & (mags[1:-1] <= mags[2:]))[0] + 1
    for i in interior[np.argsort(mags[interior])][:4]:
        res = minimize_scalar(lambda x: abs(complex(F(x))), bounds=(w[i - 1], w[i + 1]),
                              method="bounded", options={"xatol": 1e-13 * (1 + abs(w[i]))})
        if res.fun < best_d:
            best_d, best_w = float(res.fun), float(res.x)
    return best_d, best_w


def default_omega_max(lam_star=0.0):
    return max(50.0, 10.0 * (1.0 + abs(complex(lam_star).imag)))


def certify_rightmost(p, n, lam_star, mu=DEFAULT_MU, omega_max=None, tol=ORIGIN_TOL):
    """Check that `lam_star` is a rightmost characteristic root.

    Condition 1: the sweep along ``Re s = Re lam_star`` passes through the
    origin (the curve comes within ``tol`` times its median modulus).
    Condition 2: the sweep along ``Re s = Re lam_star + mu`` does not wind
    around the origin and stays clear of it by ten times that tolerance.

    Returns
    -------
    Certificate
        ``verdict`` is ``"certified"``, ``"refuted"`` or ``"indeterminate"``.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    qp = as_quasipolynomial(p)
    lam_star = complex(lam_star)
    if omega_max is None:
        omega_max = default_omega_max(lam_star)
    root_res = abs(qp(lam_star)) / max(1.0, qp.scale(lam_star))
    extra = [lam_star.imag, -lam_star.imag]
    on = sweep(qp, n, lam_star.real, omega_max, extra_omegas=extra)
    shifted = sweep(qp, n, lam_star.real + mu, omega_max)
    cond1 = on.min_distance <= tol * on.scale
    clear = shifted.min_distance > 10 * tol * shifted.scale
    cond2 = shifted.winding_number == 0 and clear and not shifted.indeterminate
    message = ""
    if root_res > ROOT_TOL:
        message = f"lam* is not a characteristic root (residual {root_res:.3e})"
        verdict = "refuted"
    elif cond1 and cond2:
        verdict = "certified"
    elif shifted.indeterminate or (shifted.winding_number == 0 and not clear):
        verdict = "indeterminate"
        message = "the shifted curve passes too close to the origin to decide"
    else:
        verdict = "refuted"
        if not cond1:
            message = "the sweep line through lam* misses the origin"
        else:
            message = f"{-shifted.winding_number} root(s) lie to the right of Re s = Re lam* + mu"
    return Certificate(verdict, bool(cond1), bool(cond2), tol, on, shifted, float(root_res), message)


def stability_verdict(sys, omega_max=50.0, tol=ORIGIN_TOL, cross_check=False, region=None):
    """``"stable"``, ``"unstable"`` or ``"indeterminate"`` from the unshifted sweep.

    With `cross_check`, the verdict is compared with the sign of the real part
    of the rightmost root found in `region`; disagreement yields
    ``"indeterminate"``.
    """
    qp = as_quasipolynomial(sys)
    n = qp.degree
    curve = sweep(qp, n, 0.0, omega_max)
    if curve.indeterminate or curve.min_distance <= tol * curve.scale:
        verdict = "indeterminate"
    elif curve.winding_number == 0:
        verdict = "stable"
    else:
        verdict = "unstable"
    if cross_check and verdict != "indeterminate":
        roots = find_roots(qp, region or SearchRegion())
        if roots:
            by_roots = "stable" if roots[0].value.real < 0 else "unstable"
            if by_roots != verdict:
                log.warning("Nyquist says %s but rightmost root %s says %s", verdict, roots[0].value, by_roots)
                verdict = "indeterminate"
    return verdict


def curve_to_csv(curve, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "re", "im"])
        for om, v in zip(curve.omega, curve.values):
            w.writerow([repr(float(om)), repr(float(v.real)), repr(float(v.imag))])
