import os
import os.path as osp

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_profile(columns, rows, fname, title=None, x=0, ys=None, logy=False):
    """
    Plots tabulated columns against the first one and saves the figure.

    Args:
        columns (list): Column names of the table.
        rows (list): Table rows.
        fname (str): Output path; the format follows the file extension.
        title (str): Figure title.
        x (int): Index of the abscissa column.
        ys (list): Indices of the plotted columns (defaults to all others).
        logy (bool): Logarithmic y axis on |values|.
    """
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or not len(data):
        raise ValueError("Nothing to plot.")
    if ys is None:
        ys = [i for i in range(len(columns)) if i != x]
    fig, ax = plt.subplots(1, 1, figsize=(6, 4), dpi=100)
    for i in ys:
        values = np.abs(data[:, i]) if logy else data[:, i]
        ax.plot(data[:, x], values, label=columns[i])
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(columns[x])
    ax.legend()
    if title:
        ax.set_title(title)
    directory = osp.dirname(fname)
    if directory:
        os.makedirs(directory, exist_ok=True)
    fig.savefig(fname, bbox_inches="tight")
    plt.close(fig)
    return fname
