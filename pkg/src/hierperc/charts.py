"""Minimal standalone SVG polyline charts for CSV series.

Charts are derived artifacts rendered from already-written tables; they are
never read back.  Output is deterministic (no timestamps, fixed geometry).
"""

WIDTH, HEIGHT = 640, 480
MARGIN = 56


def _scale(values, lo_px, hi_px):
    vmin = min(values)
    vmax = max(values)
    if vmax == vmin:
        vmax = vmin + 1.0
    span = vmax - vmin
    return [lo_px + (v - vmin) / span * (hi_px - lo_px) for v in values], vmin, vmax


def polyline_chart(path, xs, ys, title="", xlabel="", ylabel=""):
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    if len(xs) != len(ys) or not xs:
        raise ValueError("need equal-length nonempty series")
    px, xmin, xmax = _scale(xs, MARGIN, WIDTH - MARGIN)
    py, ymin, ymax = _scale(ys, HEIGHT - MARGIN, MARGIN)
    points = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(px, py))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<polyline points="{points}" fill="none" stroke="steelblue" '
        'stroke-width="1.5"/>',
        f'<text x="{WIDTH // 2}" y="20" text-anchor="middle" '
        f'font-size="14">{title}</text>',
        f'<text x="{WIDTH // 2}" y="{HEIGHT - 12}" text-anchor="middle" '
        f'font-size="12">{xlabel}</text>',
        f'<text x="14" y="{HEIGHT // 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {HEIGHT // 2})">{ylabel}</text>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 16}" font-size="10">'
        f"{xmin:g}</text>",
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 16}" '
        f'text-anchor="end" font-size="10">{xmax:g}</text>',
        f'<text x="{MARGIN - 4}" y="{HEIGHT - MARGIN}" text-anchor="end" '
        f'font-size="10">{ymin:g}</text>',
        f'<text x="{MARGIN - 4}" y="{MARGIN + 4}" text-anchor="end" '
        f'font-size="10">{ymax:g}</text>',
        "</svg>",
    ]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def chart_from_csv(csv_path, svg_path, x_col=0, y_col=1):
    """Render column y against column x of a CSV written by tables.write_csv."""
    from .tables import read_csv

    header, rows = read_csv(csv_path)
    xs, ys = [], []
    for row in rows:
        try:
            x, y = float(row[x_col]), float(row[y_col])
        except (ValueError, IndexError):
            continue
        xs.append(x)
        ys.append(y)
    if not xs:
        return False
    polyline_chart(svg_path, xs, ys, title=str(csv_path).rsplit("/", 1)[-1],
                   xlabel=header[x_col] if header else "",
                   ylabel=header[y_col] if len(header) > y_col else "")
    return True
