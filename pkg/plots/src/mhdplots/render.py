"""Figure rendering: work-precision diagrams and 2D field maps."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import records, snapfile

# fixed marker cycle so repeated renders of the same data are identical
_MARKERS = "osD^v<>p"


def plot_work_precision(csv_paths, out_path):
    """Log-log error vs wall seconds, one line per method per file."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    seen_fail_label = False
    series_count = 0
    for path in csv_paths:
        meta, series_list = records.read(path)
        suffix = ""
        if len(csv_paths) > 1:
            suffix = " ({})".format(meta.get("problem", path))
        for series in series_list:
            marker = _MARKERS[series_count % len(_MARKERS)]
            series_count += 1
            if series.seconds:
                order = np.argsort(series.seconds)
                ax.loglog(np.asarray(series.seconds)[order],
                          np.asarray(series.errors)[order],
                          marker=marker, label=series.label + suffix)
            if series.failures:
                label = None if seen_fail_label else "failed"
                seen_fail_label = True
                ax.plot(series.failures, [1.0] * len(series.failures), "rx",
                        markersize=9, clip_on=False, label=label)
    ax.set_xlabel("wall time [s]")
    ax.set_ylabel("max component error (grid l2)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_snapshot(snap_path, field_name, out_path, cmap="RdBu_r"):
    """2D colormap of one snapshot field in domain coordinates."""
    snap = snapfile.read(snap_path)
    values = snapfile.field(snap, field_name)
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    extent = (snap.x_lo, snap.x_hi, snap.y_lo, snap.y_hi)
    vmax = float(np.max(np.abs(values)))
    symmetric = field_name in ("J_z", "divB", "v_x", "v_y", "v_z",
                               "Bx", "By", "mx", "my", "mz")
    kwargs = {"vmin": -vmax, "vmax": vmax} if symmetric and vmax > 0 else {}
    im = ax.imshow(values.T, origin="lower", extent=extent, cmap=cmap,
                   aspect="auto", interpolation="nearest", **kwargs)
    fig.colorbar(im, ax=ax, label=field_name)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"{field_name} at t = {snap.time:g}  "
                 f"(mu={snap.mu:g}, eta={snap.eta:g}, kappa={snap.kappa:g})")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
