"""Command-line front end.

Exit codes: 0 success (or certified), 1 unreadable input, 2 uncontrollable
pair, 3 singular ``P_k``, 4 not certified, 5 numerical failure.
"""

import argparse
import logging
import os
import re
import sys

import numpy as np

from . import __version__
from .controller import InputDelayPlant, assign_eigenvalues
from .descriptor import DescriptorError, load
from .errors import SingularMatrixError, TDSError, UncontrollableError
from .nyquist import DEFAULT_MU, ORIGIN_TOL, certify_rightmost, curve_to_csv, stability_verdict
from .plotting import norm_svg, nyquist_svg, spectrum_svg
from .rootfinder import SearchRegion, find_roots, roots_to_csv
from .simulate import decay_rate, integrate, trajectory_to_csv
from .spectrum import spectrum_rows, spectrum_scan, write_spectrum_csv
from .systems import (
    CCFormSystem,
    Quasipolynomial,
    TimeDelaySystem,
    companion_pair,
    is_cc_form,
    to_cc_form,
    to_rank_one,
)

log = logging.getLogger("tdslambert")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_UNCONTROLLABLE = 2
EXIT_SINGULAR = 3
EXIT_UNCERTIFIED = 4
EXIT_NUMERICAL = 5


class InputError(Exception):
    """Bad command-line values or an unsupported system; exits with code 1."""


def fmt(M, precision=6):
    return np.array2string(np.asarray(M), precision=precision, suppress_small=True, max_line_width=120)


def parse_complex_list(text):
    """``"-1+2i, -1-2i"`` -> array of complex; ``i`` and ``j`` both accepted."""
    items = [s for s in re.split(r"[,\s;]+", text.strip()) if s]
    if not items:
        raise InputError("empty root list")
    try:
        return np.array([complex(s.replace("i", "j")) for s in items])
    except ValueError as exc:
        raise InputError(f"cannot parse root list {text!r}: {exc}") from None


def parse_real_list(text):
    items = [s for s in re.split(r"[,\s;]+", text.strip().strip("[]")) if s]
    try:
        return np.array([float(s) for s in items])
    except ValueError as exc:
        raise InputError(f"cannot parse {text!r}: {exc}") from None


def _region(args):
    if args.region is None:
        return SearchRegion(grid_step=args.grid_step)
    re_min, re_max, im_max = args.region
    return SearchRegion(re_min, re_max, -abs(im_max), abs(im_max), args.grid_step)


def _out(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _cc_of(desc):
    """CC form of the descriptor's system and the transformation used (or None)."""
    sys_ = desc.system()
    ok, cc = is_cc_form(sys_)
    if ok:
        return cc, None
    if not np.any(desc.delayed):
        # delay-free: only the characteristic polynomial of A matters
        A_bar, _ = companion_pair(desc.A)
        return CCFormSystem(A_bar[-1], np.zeros(desc.order), desc.h), None
    try:
        r1 = desc.rank_one() if desc.b is not None else to_rank_one(sys_)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    tr, cc = to_cc_form(r1)
    return cc, tr


def _closed_loop(desc, gain):
    if gain is None:
        return desc.system()
    if desc.B is None:
        raise InputError("--gain needs an input matrix B in the descriptor")
    K = parse_real_list(gain).reshape(1, -1)
    if K.shape[1] != desc.order or desc.B.shape[1] != 1:
        raise InputError(f"gain must have {desc.order} entries for a single-input B")
    return TimeDelaySystem(desc.A, desc.delayed + desc.B @ K, desc.h)


def cmd_transform(args):
    desc = load(args.file)
    sys_ = desc.system()
    ok, cc = is_cc_form(sys_)
    if ok and (desc.b is None or np.allclose(desc.b, np.eye(desc.order)[-1])):
        T = np.eye(desc.order)
        T_inv = T
        print("system is already in CC form")
    else:
        try:
            r1 = desc.rank_one() if desc.b is not None else to_rank_one(sys_)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        tr, cc = to_cc_form(r1)
        T, T_inv = tr.T, tr.T_inv
    print(f"T =\n{fmt(T)}")
    print(f"T^-1 =\n{fmt(T_inv)}")
    print(f"A_bar =\n{fmt(cc.A)}")
    print(f"A_d_bar =\n{fmt(cc.A_d)}")
    print(f"a   = {fmt(cc.a)}")
    print(f"a_d = {fmt(cc.a_d)}")
    return EXIT_OK


def cmd_spectrum(args):
    desc = load(args.file)
    cc, _ = _cc_of(desc)
    roots = parse_complex_list(args.roots) if args.roots else None
    region = _region(args)
    if roots is None:
        located = find_roots(Quasipolynomial.from_cc(cc), region, tol=args.tol)
        roots_to_csv(located, _out(args, "roots.csv"))
        roots = [r.value for r in located]
    result = spectrum_scan(cc, region, roots=roots)
    rows = spectrum_rows(result, cc)
    write_spectrum_csv(rows, _out(args, "spectrum.csv"))
    spectrum_svg(rows, _out(args, "spectrum.svg"), title=desc.name or "characteristic roots")
    print(f"{'real':>14} {'imag':>14} {'k':>3} {'residual':>10}")
    start = 0
    for i, s in enumerate(result.sets):
        print(f"set {i + 1}: k = {s.k}, |S - A - A_d e^(-Sh)| = {s.residual:.2e}")
        for re_, im_, k, res in rows[start : start + len(s.roots)]:
            print(f"{re_:14.6f} {im_:14.6f} {k:3d} {res:10.2e}")
        start += len(s.roots)
    if result.uncovered:
        print("roots not in any conjugate-closed set of size n: "
              + ", ".join(f"{z:.6g}" for z in result.uncovered))
    return EXIT_OK


def _rightmost(values):
    values = np.asarray(values, dtype=complex)
    return complex(values[np.lexsort((-values.imag, -values.real))[0]])


def _certify(qp, n, lam_star, args, tag):
    cert = certify_rightmost(qp, n, lam_star, mu=args.mu, tol=args.tol)
    print(cert.report())
    curve_to_csv(cert.curve_on, _out(args, f"{tag}_on.csv"))
    curve_to_csv(cert.curve_shifted, _out(args, f"{tag}_shifted.csv"))
    nyquist_svg(cert.curve_on, _out(args, f"{tag}_on.svg"))
    nyquist_svg(cert.curve_shifted, _out(args, f"{tag}_shifted.svg"))
    return EXIT_OK if cert.verdict == "certified" else EXIT_UNCERTIFIED


def cmd_design(args):
    desc = load(args.file)
    if desc.B is None:
        raise InputError("design needs an input matrix B in the descriptor")
    if not args.roots:
        raise InputError("design needs --roots")
    desired = parse_complex_list(args.roots)
    plant = InputDelayPlant(desc.A, desc.B, desc.h)
    existing = desc.delayed if np.any(desc.delayed) else None
    d = assign_eigenvalues(plant, desired, existing_Ad=existing)
    print(f"K = {fmt(d.K.ravel())}")
    print(f"branch k = {d.k}")
    print(f"W_k(M_k) last row = {fmt(d.w_row)}")
    print(f"M_k last row = {fmt(d.solution.m_row)}")
    print(f"P_k =\n{fmt(d.solution.P)}")
    for lam, r in zip(d.desired, d.root_residuals):
        print(f"  residual at {lam:.6g}: {r:.2e}")
    if not d.verified:
        print("warning: desired roots are not closed-loop roots to tolerance")
    with open(_out(args, "gain.csv"), "w", encoding="utf-8") as fh:
        fh.write(",".join(f"K{i + 1}" for i in range(desc.order)) + "\n")
        fh.write(",".join(repr(float(v)) for v in d.K.ravel()) + "\n")
    lam_star = _rightmost(desired)
    print(f"certifying lam* = {lam_star:.6g} as rightmost (mu = {args.mu})")
    qp = Quasipolynomial.from_system(d.closed_loop)
    return _certify(qp, desc.order, lam_star, args, "nyquist")


def cmd_verify(args):
    desc = load(args.file)
    sys_ = _closed_loop(desc, args.gain)
    qp = Quasipolynomial.from_system(sys_)
    if args.lam is None:
        verdict = stability_verdict(sys_, cross_check=True, region=_region(args))
        roots = find_roots(qp, _region(args))
        if not roots:
            raise InputError("no roots in the search region; pass --lambda")
        lam_star = roots[0].value
        print(f"stability (unshifted sweep): {verdict}")
        print(f"rightmost root found: {lam_star:.8g}")
    else:
        lam_star = parse_complex_list(args.lam)[0]
    return _certify(qp, desc.order, lam_star, args, "nyquist")


def cmd_simulate(args):
    desc = load(args.file)
    sys_ = _closed_loop(desc, args.gain)
    history = parse_real_list(args.history) if args.history else None
    dt = args.dt if args.dt is not None else sys_.h / 20.0
    traj = integrate(sys_, history, args.t_end, dt)
    trajectory_to_csv(traj, _out(args, "trajectory.csv"))
    norm_svg(traj, _out(args, "norm.svg"), title=desc.name or "state norm")
    t_end = traj.times[-1]
    if traj.diverged:
        print(f"diverged at t = {t_end:.6g}")
        return EXIT_NUMERICAL
    t0 = min(3 * sys_.h, 0.5 * t_end)
    if t_end - t0 > 0:
        print(f"log-norm slope on [{t0:.4g}, {t_end:.4g}]: {decay_rate(traj, (t0, t_end)):+.6f}")
    print(f"|x({t_end:.4g})| = {np.linalg.norm(traj.states[-1]):.6e}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; argparse would exit with 2 (uncontrollable)
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(
        prog="tdslambert",
        description="Lambert W eigenvalue analysis and assignment for linear time-delay systems. "
                    "Complex values are written like -1+2i or -1+2j; pass lists that begin with a "
                    "minus sign as --roots=-1+2i,-1-2i.",
    )
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true", help="log warnings and progress")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("file", help="system descriptor")
        sp.add_argument("--out", default=".", help="directory for CSV and SVG output (default: .)")

    def region(sp):
        sp.add_argument("--region", nargs=3, type=float, metavar=("RE_MIN", "RE_MAX", "IM_MAX"),
                        help="search rectangle, imaginary part in [-IM_MAX, IM_MAX] "
                             "(default: -10 2 50)")
        sp.add_argument("--grid-step", type=float, default=0.25, help="root-search grid step (default: 0.25)")

    def nyq(sp):
        sp.add_argument("--mu", type=float, default=DEFAULT_MU, help=f"shift of the second sweep (default: {DEFAULT_MU})")
        sp.add_argument("--tol", type=float, default=ORIGIN_TOL,
                        help=f"origin tolerance relative to the median |F| (default: {ORIGIN_TOL:g})")

    sp = sub.add_parser("transform", help="bring a rank-one delay system to CC form")
    common(sp)
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("spectrum", help="branch-labelled characteristic roots")
    common(sp)
    region(sp)
    sp.add_argument("--roots", help="explicit roots instead of a search, e.g. --roots=-0.1211,0.2744+1.5588i,0.2744-1.5588i")
    sp.add_argument("--tol", type=float, default=1e-9, help="root polishing tolerance |p| <= tol*scale (default: 1e-9)")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("design", help="delayed state feedback by eigenvalue assignment")
    common(sp)
    sp.add_argument("--roots", help="n desired roots, closed under conjugation")
    nyq(sp)
    sp.set_defaults(func=cmd_design)

    sp = sub.add_parser("verify", help="Nyquist certificate that lam* is a rightmost root")
    common(sp)
    region(sp)
    sp.add_argument("--lambda", dest="lam", help="claimed rightmost root (default: rightmost root found)")
    sp.add_argument("--gain", help="close the loop with u(t - h) = K x(t - h), e.g. --gain=-1.98,-1.89")
    nyq(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="method-of-steps simulation")
    common(sp)
    sp.add_argument("--t-end", type=float, default=15.0, help="final time (default: 15)")
    sp.add_argument("--dt", type=float, help="step, at most h/10 (default: h/20)")
    sp.add_argument("--gain", help="close the loop with K, as for verify")
    sp.add_argument("--history", help="constant initial state (default: all ones)")
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DescriptorError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UncontrollableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNCONTROLLABLE
    except SingularMatrixError as exc:
        if args.command == "design":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SINGULAR
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (TDSError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
