"""CSV and SVG writers used by the command line runner."""
import math

import numpy as np

__all__ = ["write_csv", "read_csv_comment", "svg_line_plot"]


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return repr(float(v))


def write_csv(path, columns, rows, comments=()):
    """Write rows with ``#`` comment lines first, then a column header.

    Floats use ``repr`` so that identical inputs give byte-identical files.
    """
    with open(path, "w") as fh:
        for c in comments:
            fh.write("# %s\n" % c)
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_csv_comment(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    out[k] = v
    return out


_COLORS = ("#1f4e99", "#c0392b", "#27824a", "#7d3c98")


def svg_line_plot(path, x, curves, band=None, title="", xlabel="", ylabel="",
                  width=640, height=420):
    """Minimal SVG line chart.

    Parameters
    ----------
    curves : list of (y, label)
    band : (lo, hi), optional
        Shaded error band drawn under the first curve.
    """
    x = np.asarray(x, dtype=float)
    ys = [np.asarray(y, dtype=float) for y, _ in curves]
    allv = np.concatenate(ys + ([np.asarray(band[0]), np.asarray(band[1])] if band else []))
    allv = allv[np.isfinite(allv)]
    y0, y1 = (float(allv.min()), float(allv.max())) if allv.size else (0.0, 1.0)
    if y1 - y0 < 1e-12:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad
    x0, x1 = float(x.min()), float(x.max())
    if x1 - x0 < 1e-12:
        x1 = x0 + 1.0
    L, R, T, B = 60, 20, 30, 45
    pw, ph = width - L - R, height - T - B

    def px(v):
        return L + (v - x0) / (x1 - x0) * pw

    def py(v):
        return T + (1 - (v - y0) / (y1 - y0)) * ph

    def poly(xv, yv):
        return " ".join("%.2f,%.2f" % (px(a), py(b)) for a, b in zip(xv, yv)
                        if math.isfinite(b))

    parts = ['<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
             'font-family="sans-serif" font-size="12">' % (width, height),
             '<rect width="100%" height="100%" fill="white"/>']
    if band is not None:
        lo, hi = np.asarray(band[0], float), np.asarray(band[1], float)
        pts = poly(x, hi) + " " + poly(x[::-1], lo[::-1])
        parts.append('<polygon points="%s" fill="%s" fill-opacity="0.2" stroke="none"/>'
                     % (pts, _COLORS[0]))
    # axes and ticks
    parts.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (L, T + ph, L + pw, T + ph))
    parts.append('<line x1="%d" y1="%d" x2="%d" y2="%d" stroke="black"/>' % (L, T, L, T + ph))
    for i in range(6):
        xv = x0 + i * (x1 - x0) / 5
        yv = y0 + i * (y1 - y0) / 5
        parts.append('<text x="%.1f" y="%d" text-anchor="middle">%.3g</text>' % (px(xv), T + ph + 16, xv))
        parts.append('<text x="%d" y="%.1f" text-anchor="end">%.3g</text>' % (L - 6, py(yv) + 4, yv))
    for k, (y, label) in enumerate(zip(ys, [c[1] for c in curves])):
        col = _COLORS[k % len(_COLORS)]
        parts.append('<polyline points="%s" fill="none" stroke="%s" stroke-width="1.6"/>'
                     % (poly(x, y), col))
        parts.append('<text x="%d" y="%d" fill="%s">%s</text>' % (L + pw - 150, T + 16 + 16 * k, col, _esc(label)))
    parts.append('<text x="%d" y="18" text-anchor="middle">%s</text>' % (width // 2, _esc(title)))
    parts.append('<text x="%d" y="%d" text-anchor="middle">%s</text>' % (L + pw // 2, height - 8, _esc(xlabel)))
    parts.append('<text x="14" y="%d" transform="rotate(-90 14 %d)" text-anchor="middle">%s</text>'
                 % (T + ph // 2, T + ph // 2, _esc(ylabel)))
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _esc(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
