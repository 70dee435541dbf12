"""Figure rendering for the CLI report path.

Figures are written straight to files with the Agg backend; the CSV/JSON on
stdout stays the primary artifact and the plot is a companion view of it.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.75),
    "figure.dpi": 100,
    "axes.linewidth": 0.6,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.0,
    "legend.fontsize": 8,
    "savefig.dpi": 150,
    # fixed metadata keeps repeated renders byte-stable
    "svg.hashsalt": "statdigits",
}


def _save(fig, path):
    meta = {"Software": None} if str(path).endswith(".png") else None
    fig.savefig(path, metadata=meta)
    plt.close(fig)


def plot_example7(rows, path, m: int | None = None) -> None:
    """Piecewise plot of the non-integrable fixed point, one line per piece.

    ``rows`` are (x, f(x), piece) triples as produced by ``example7_data``.
    """
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        pieces: dict = {}
        for x, y, n in rows:
            pieces.setdefault(n, []).append((float(x), float(y)))
        for n, pts in sorted(pieces.items()):
            xs, ys = zip(*pts)
            ax.plot(xs, ys, color="C0")
            # open circle at the right end of each piece marks the jump
            if n + 1 in pieces:
                ax.plot(xs[-1], ys[-1], "o", mfc="none", color="C0", ms=3)
        ax.axhline(0, color="0.6", lw=0.5)
        ax.set_xlabel("x")
        ax.set_ylabel("f(x)")
        if m is not None:
            ax.set_xlim(0, 1 - 2.0**-m)
        fig.tight_layout()
        _save(fig, path)


def plot_cdf(xs, ys, path, lower=None, upper=None, label: str = "F") -> None:
    """Step-style CDF plot, with an optional envelope band."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        xs = [float(v) for v in xs]
        if lower is not None and upper is not None:
            ax.fill_between(xs, [float(v) for v in lower], [float(v) for v in upper],
                            step="post", color="C0", alpha=0.25, lw=0, label="envelope")
        ax.step(xs, [float(v) for v in ys], where="post", color="C0", label=label)
        ax.set_xlim(0, 1)
        ax.set_ylim(-0.02, 1.02)
        ax.set_xlabel("x")
        ax.set_ylabel("F(x)")
        ax.legend(loc="upper left", frameon=False)
        fig.tight_layout()
        _save(fig, path)


def plot_transfer(distances, path) -> None:
    """Semilog plot of the L1 distance of T^i f from its mean."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ys = [max(float(d), 1e-300) for d in distances]
        ax.semilogy(range(len(ys)), ys, "o-", ms=3)
        ax.set_xlabel("iteration i")
        ax.set_ylabel("L1 distance to mean")
        fig.tight_layout()
        _save(fig, path)
