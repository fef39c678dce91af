"""Zeros of quasipolynomials in a rectangle by the argument principle.

The rectangle is covered with a grid.  The change of ``arg p`` along every
grid edge is accumulated from samples, refined wherever two consecutive
samples differ in phase by more than a quarter turn.  Cells whose boundary
winding number is nonzero are split into quadrants until they are smaller
than ``min_cell``, and each surviving cell seeds a complex Newton polish.
"""

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExhaustedError
from .systems import Quasipolynomial

log = logging.getLogger(__name__)

PHASE_JUMP = math.pi / 2
MAX_EDGE_SAMPLES = 1 << 14


@dataclass(frozen=True)
class SearchRegion:
    re_min: float = -10.0
    re_max: float = 2.0
    im_min: float = -50.0
    im_max: float = 50.0
    grid_step: float = 0.25

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(f"empty search region {self}")
        if not self.grid_step > 0:
            raise ValueError("grid_step must be positive")
        if not all(map(math.isfinite, (self.re_min, self.re_max, self.im_min, self.im_max))):
            raise ValueError("search region must be finite")

    def contains(self, z, slack=0.0):
        return (self.re_min - slack <= z.real <= self.re_max + slack
                and self.im_min - slack <= z.imag <= self.im_max + slack)


@dataclass(frozen=True)
class LocatedRoot:
    value: complex
    residual: float
    multiplicity_hint: int = 1


class _Target:
    """Uniform view of a quasipolynomial or a bare callable."""

    def __init__(self, p):
        self.p = p
        self.is_qp = isinstance(p, Quasipolynomial)
        self.real = self.is_qp and p.real_coefficients

    def __call__(self, s):
        if self.is_qp:
            return self.p(s)
        return np.vectorize(lambda z: complex(self.p(z)), otypes=[complex])(s)

    def derivative(self, s):
        if self.is_qp:
            return self.p.derivative(s)
        step = 1e-6 * (1.0 + abs(s))
        return (complex(self.p(s + step)) - complex(self.p(s - step))) / (2 * step)

    def scale(self, s):
        if self.is_qp:
            return max(1.0, self.p.scale(s))
        return 1.0


def _edge_phase(f, z0, z1, m):
    """Total change of ``arg f`` along the segment, with adaptive resampling."""
    while True:
        t = np.linspace(0.0, 1.0, m)
        vals = f(z0 + (z1 - z0) * t)
        d = np.angle(vals[1:] / vals[:-1])
        if np.all(np.abs(d) <= PHASE_JUMP) and np.all(vals != 0):
            return float(np.sum(d)), True
        if m >= MAX_EDGE_SAMPLES:
            return float(np.nansum(d)), False
        m = 2 * m - 1


def _edges_bulk(f, starts, ends, m):
    """Phase changes for many edges of equal sampling; unresolved edges are redone one by one."""
    t = np.linspace(0.0, 1.0, m)
    pts = starts[:, None] + (ends - starts)[:, None] * t[None, :]
    vals = f(pts)
    d = np.angle(vals[:, 1:] / vals[:, :-1])
    total = np.sum(d, axis=1)
    bad = np.where(np.any(~(np.abs(d) <= PHASE_JUMP), axis=1) | np.any(vals == 0, axis=1))[0]
    ok = np.ones(len(starts), dtype=bool)
    for i in bad:
        total[i], ok[i] = _edge_phase(f, starts[i], ends[i], 2 * m - 1)
    return total, ok


def _samples_for(length, grid_step):
    return int(max(16, math.ceil(length / grid_step * 4)))


def winding_number(f, re0, re1, im0, im1, grid_step):
    """Winding number of ``f`` around the counter-clockwise rectangle boundary.

    Returns
    -------
    (int, float, bool)
        Rounded winding, its fractional deviation, and whether every edge resolved.
    """
    corners = [complex(re0, im0), complex(re1, im0), complex(re1, im1), complex(re0, im1)]
    total = 0.0
    clean = True
    for a, b in zip(corners, corners[1:] + corners[:1]):
        ph, ok = _edge_phase(f, a, b, _samples_for(abs(b - a), grid_step))
        total += ph
        clean &= ok
    w = total / (2 * math.pi)
    r = int(round(w))
    return r, abs(w - r), clean


class _Search:
    def __init__(self, target, min_cell, tol, max_cells, grid_step):
        self.f = target
        self.min_cell = min_cell
        self.tol = tol
        self.max_cells = max_cells
        self.grid_step = grid_step
        self.cells = 0
        self.leaves = []

    def subdivide(self, re0, re1, im0, im1, w):
        stack = [(re0, re1, im0, im1, w)]
        while stack:
            re0, re1, im0, im1, w = stack.pop()
            diam = math.hypot(re1 - re0, im1 - im0)
            if diam < self.min_cell:
                self.leaves.append((complex(0.5 * (re0 + re1), 0.5 * (im0 + im1)), w, diam))
                continue
            children = None
            # split off-centre when a zero sits on the midlines
            for frac in (0.5, 0.4871, 0.5313, 0.4417):
                rm = re0 + frac * (re1 - re0)
                im_ = im0 + frac * (im1 - im0)
                quads = [(re0, rm, im0, im_), (rm, re1, im0, im_), (re0, rm, im_, im1), (rm, re1, im_, im1)]
                ws = []
                good = True
                for q in quads:
                    self.cells += 1
                    if self.cells > self.max_cells:
                        raise BudgetExhaustedError(f"root search exceeded {self.max_cells} cell evaluations")
                    r, dev, ok = winding_number(self.f, *q, self.grid_step)
                    good &= ok and dev < 0.1 and r >= 0
                    ws.append(r)
                if good and sum(ws) == w:
                    children = [(q, r) for q, r in zip(quads, ws) if r > 0]
                    break
            if children is None:
                # give up refining; Newton from the centre decides
                log.warning("inconsistent winding near %s; polishing from cell centre",
                            complex(0.5 * (re0 + re1), 0.5 * (im0 + im1)))
                self.leaves.append((complex(0.5 * (re0 + re1), 0.5 * (im0 + im1)), w, diam))
                continue
            for q, r in children:
                stack.append((*q, r))


def newton_polish(f, z, tol=1e-9, max_iter=60):
    """Complex Newton iteration; returns ``(z, |p(z)|, converged)``.

    Iterates past the tolerance until the step stalls, so converged roots
    carry residuals near rounding level rather than just under `tol`.
    """
    best_z, best_r = z, abs(f(z))
    for _ in range(max_iter):
        val = f(z)
        d = f.derivative(z)
        if d == 0:
            break
        step = val / d
        z = z - step
        r = abs(f(z))
        if r < best_r:
            best_z, best_r = z, r
        elif best_r <= tol * f.scale(best_z):
            break
        if abs(step) <= 1e-15 * (1 + abs(z)):
            break
    return best_z, best_r, best_r <= tol * f.scale(best_z)


def find_roots(p, region=None, *, min_cell=1e-3, tol=1e-9, max_cells=200_000, mirror=None):
    """Locate every zero of `p` inside `region`.

    Parameters
    ----------
    p : Quasipolynomial or callable
        Analytic function of one complex variable.
    region : SearchRegion, optional
        Defaults to ``re in [-10, 2]``, ``im in [-50, 50]``; for real
        coefficients only the upper half is searched and conjugates mirrored.
    min_cell : float
        Diameter below which cells stop being split.
    tol : float
        Newton stopping rule, ``|p| <= tol * scale``.
    mirror : bool, optional
        Search only the upper half plane and reflect.  Defaults to True for
        real-coefficient quasipolynomials.

    Returns
    -------
    list of LocatedRoot
        Sorted by descending real part, then descending imaginary part.
    """
    if region is None:
        region = SearchRegion()
    f = _Target(p)
    if mirror is None:
        mirror = f.real
    im_lo, im_hi = region.im_min, region.im_max
    if mirror:
        im_hi = max(abs(region.im_min), abs(region.im_max))
        im_lo = 0.0 if region.im_min <= 0 <= region.im_max else min(abs(region.im_min), abs(region.im_max))
    step = region.grid_step
    # pad by an irregular margin so zeros on the region boundary (e.g. real roots) fall inside a cell
    pad = 0.0137 * step
    re0, re1 = region.re_min - pad, region.re_max + pad
    im0, im1 = im_lo - pad, im_hi + pad
    nx = max(1, math.ceil((re1 - re0) / step))
    ny = max(1, math.ceil((im1 - im0) / step))
    xs = np.linspace(re0, re1, nx + 1)
    ys = np.linspace(im0, im1, ny + 1)
    m = _samples_for(max(xs[1] - xs[0], ys[1] - ys[0]), step)

    X, Y = np.meshgrid(xs, ys)  # shape (ny+1, nx+1)
    nodes = X + 1j * Y
    h_start, h_end = nodes[:, :-1].ravel(), nodes[:, 1:].ravel()
    v_start, v_end = nodes[:-1, :].ravel(), nodes[1:, :].ravel()
    h_ph, h_ok = _edges_bulk(f, h_start, h_end, m)
    v_ph, v_ok = _edges_bulk(f, v_start, v_end, m)
    h_ph, h_ok = h_ph.reshape(ny + 1, nx), h_ok.reshape(ny + 1, nx)
    v_ph, v_ok = v_ph.reshape(ny, nx + 1), v_ok.reshape(ny, nx + 1)
    total = h_ph[:-1, :] + v_ph[:, 1:] - h_ph[1:, :] - v_ph[:, :-1]
    clean = h_ok[:-1, :] & v_ok[:, 1:] & h_ok[1:, :] & v_ok[:, :-1]
    wind = total / (2 * math.pi)
    wr = np.rint(wind).astype(int)

    search = _Search(f, min_cell, tol, max_cells, step)
    for j, i in zip(*np.nonzero((wr != 0) | ~clean | (np.abs(wind - wr) >= 0.1))):
        cell = (xs[i], xs[i + 1], ys[j], ys[j + 1])
        w = wr[j, i]
        if not clean[j, i] or abs(wind[j, i] - w) >= 0.1:
            # zero on or next to a grid line: widen the cell and recount
            grow = 0.1 * step
            cell = (cell[0] - grow, cell[1] + grow, cell[2] - grow, cell[3] + grow)
            w, dev, ok = winding_number(f, *cell, step)
            if not ok or dev >= 0.1:
                log.warning("unresolved winding in cell %s", cell)
        if w < 0:
            log.warning("negative winding %d in cell %s ignored", w, cell)
            continue
        if w > 0:
            search.subdivide(*cell, w)

    found = []
    for centre, w, diam in search.leaves:
        z, res, ok = newton_polish(f, complex(centre), tol)
        if not ok:
            log.warning("Newton polish from %s stalled at |p| = %.3e", centre, res)
        if abs(z - centre) > max(10 * diam, 1e-2):
            log.warning("Newton escaped from %s to %s; candidate discarded", centre, z)
            continue
        found.append(LocatedRoot(complex(z), float(res), int(w)))

    if mirror:
        snapped = []
        for r in found:
            z = r.value
            if abs(z.imag) <= 1e-9 * (1 + abs(z)):
                z = complex(z.real, 0.0)
            if z.imag < 0:
                continue
            snapped.append(LocatedRoot(z, r.residual, r.multiplicity_hint))
        found = snapped + [LocatedRoot(r.value.conjugate(), r.residual, r.multiplicity_hint)
                           for r in snapped if r.value.imag > 0]

    slack = 1e-9 * (1 + max(abs(region.re_min), abs(region.re_max), abs(region.im_min), abs(region.im_max)))
    found = [r for r in found if region.contains(r.value, slack)]
    return _dedupe(found)


def _dedupe(roots):
    roots = sorted(roots, key=lambda r: (-r.value.real, -r.value.imag))
    out = []
    for r in roots:
        if any(abs(r.value - q.value) <= 1e-7 * (1 + abs(q.value)) for q in out):
            continue
        out.append(r)
    return out


def rightmost_root(p, region=None, **kwargs):
    """The located root of largest real part (ties: largest imaginary part)."""
    roots = find_roots(p, region, **kwargs)
    if not roots:
        raise ValueError("no roots in the search region")
    return roots[0]


def roots_to_csv(roots, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["real", "imag", "residual"])
        for r in roots:
            w.writerow([repr(r.value.real), repr(r.value.imag), repr(r.residual)])
