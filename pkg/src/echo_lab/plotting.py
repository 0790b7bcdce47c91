"""Static SVG decay plots."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import read_csv  # noqa: E402

REFERENCE_SLOPES = (1.61, 1.1)


def plot_csv(csv_path, svg_path, columns=None, x=None):
    """Log-y plot of the positive columns of a CSV file, with reference decays exp(-r t).

    The first column is the abscissa unless ``x`` names another one. Columns
    whose values are all non-positive or non-finite are skipped.
    """
    header, data = read_csv(csv_path)
    x = x or header[0]
    t = data[x]
    cols = columns or [h for h in header if h != x]
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    ymin = 1.0
    for name in cols:
        if name not in data:
            raise KeyError(f"column {name!r} not in {csv_path}")
        y = data[name]
        if name == "re" and "im" in data:
            # complex correlator: plot its squared modulus
            y = data["re"] ** 2 + data["im"] ** 2
            name = "|re + i im|^2"
        ok = np.isfinite(y) & (y > 0)
        if not ok.any():
            continue
        ax.semilogy(t[ok], y[ok], marker=".", ms=3, lw=1, label=name)
        ymin = min(ymin, float(np.min(y[ok])))
    tt = np.linspace(float(t.min()), float(t.max()), 200)
    for r in REFERENCE_SLOPES:
        ref = np.exp(-r * tt)
        keep = ref >= ymin * 0.5
        ax.semilogy(tt[keep], ref[keep], ls="--", lw=0.8, color="gray")
        if keep.any():
            i = int(np.flatnonzero(keep)[-1])
            ax.annotate(f"exp(-{r:g} t)", (tt[i], ref[i]), fontsize=7, color="gray")
    ax.set_xlabel(x)
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(svg_path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return svg_path
