"""Static SVG figures.

Text is rendered as paths so the files carry no font or image references.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_RC = {"svg.fonttype": "path", "figure.figsize": (5.5, 4.2), "axes.grid": True, "grid.alpha": 0.3}
_BRANCH_STYLE = {0: ("o", "tab:blue"), -1: ("s", "tab:red")}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def nyquist_svg(curve, path, title=None):
    """The curve ``F(w)`` with the origin marked."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        v = curve.values
        ax.plot(v.real, v.imag, lw=1.0, color="tab:blue")
        ax.plot([0], [0], "r+", ms=12, mew=2, label="origin")
        ax.plot([1], [0], "k.", ms=4)
        ax.set_xlabel("Re F")
        ax.set_ylabel("Im F")
        shift = curve.shift.real
        ax.set_title(title or f"shift {shift:+g}, winding {curve.winding_number}")
        ax.axis("equal")
        ax.legend(loc="best", fontsize=8)
        _save(fig, path)


def spectrum_svg(rows, path, title="characteristic roots"):
    """Scatter of ``(real, imag, k, residual)`` rows, marked by branch."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        rows = list(rows)
        for k in sorted({int(r[2]) for r in rows}, reverse=True):
            pts = np.array([(r[0], r[1]) for r in rows if int(r[2]) == k])
            marker, color = _BRANCH_STYLE.get(k, ("x", "tab:gray"))
            ax.scatter(pts[:, 0], pts[:, 1], marker=marker, facecolors="none", edgecolors=color,
                       label=f"k = {k}")
        ax.axvline(0.0, color="k", lw=0.6)
        ax.set_xlabel("Re")
        ax.set_ylabel("Im")
        ax.set_title(title)
        if rows:
            ax.legend(loc="best", fontsize=8)
        _save(fig, path)


def norm_svg(traj, path, title="state norm"):
    """``||x(t)||`` on a logarithmic axis."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        r = traj.norms()
        ok = r > 0
        ax.semilogy(traj.times[ok], r[ok], lw=1.0)
        ax.set_xlabel("t")
        ax.set_ylabel("||x(t)||")
        ax.set_title(title)
        _save(fig, path)
