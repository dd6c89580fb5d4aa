"""Deterministic SVG rendering of structured text documents."""

from __future__ import annotations

from .textio import Document

WIDTH = 800
MARGIN = 30


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _bounds(doc: Document):
    if doc.domain is not None:
        return doc.domain.bounding_box()
    ts, xs = [], []
    for poly in doc.lines + [p[3] for p in doc.paths] + [a[2] for a in doc.attractors]:
        ts.extend(t for t, _ in poly)
        xs.extend(x for _, x in poly)
    ts.extend(t for t, _ in doc.points)
    xs.extend(x for _, x in doc.points)
    ts.extend(doc.axis)
    if not ts:
        return 0.0, 1.0, -0.5, 0.5
    t0, t1, x0, x1 = min(ts), max(ts), min(xs + [0.0]), max(xs + [0.0])
    if t1 == t0:
        t1 = t0 + 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    return t0, t1, x0, x1


def render_svg(doc: Document) -> str:
    """SVG with time running left to right and ``x`` upwards."""
    t0, t1, x0, x1 = _bounds(doc)
    scale = (WIDTH - 2 * MARGIN) / (t1 - t0)
    height = int(round((x1 - x0) * scale)) + 2 * MARGIN

    def pt(t, x):
        return f"{_fmt(MARGIN + (t - t0) * scale)},{_fmt(MARGIN + (x1 - x) * scale)}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>\n',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" '
        f'viewBox="0 0 {WIDTH} {height}">\n',
        '<rect width="100%" height="100%" fill="white"/>\n',
    ]
    out.append('<g id="attractors" fill="#999999" fill-opacity="0.35" stroke="none">\n')
    for idx, _, poly in doc.attractors:
        if len(poly) >= 3:
            out.append(f'<polygon data-index="{idx}" points="{" ".join(pt(t, x) for t, x in poly)}"/>\n')
    out.append("</g>\n")
    out.append('<g id="axes" stroke="#444444" stroke-width="1">\n')
    if doc.domain is not None:
        verts = doc.domain.vertices()
        out.append(f'<polygon fill="none" points="{" ".join(pt(t, x) for t, x in verts)}"/>\n')
    if x0 <= 0.0 <= x1:
        out.append(f'<line x1="{pt(t0, 0.0).split(",")[0]}" y1="{pt(t0, 0.0).split(",")[1]}" '
                   f'x2="{pt(t1, 0.0).split(",")[0]}" y2="{pt(t1, 0.0).split(",")[1]}" stroke-dasharray="2,3"/>\n')
    out.append("</g>\n")
    out.append('<g id="lines" fill="none" stroke="black" stroke-width="1.2">\n')
    for poly in doc.lines:
        out.append(f'<polyline points="{" ".join(pt(t, x) for t, x in poly)}"/>\n')
    out.append("</g>\n")
    out.append('<g id="paths" fill="none" stroke-width="2">\n')
    for idx, sign, kind, poly in doc.paths:
        style = 'stroke="#c0392b"' if sign > 0 else 'stroke="#2471a3" stroke-dasharray="6,3"'
        out.append(f'<polyline data-index="{idx}" data-end="{kind}" {style} '
                   f'points="{" ".join(pt(t, x) for t, x in poly)}"/>\n')
    out.append("</g>\n")
    out.append('<g id="points" fill="black">\n')
    for t, x in doc.points:
        p = pt(t, x).split(",")
        out.append(f'<circle cx="{p[0]}" cy="{p[1]}" r="2"/>\n')
    for t in doc.axis:
        p = pt(t, 0.0).split(",")
        out.append(f'<circle cx="{p[0]}" cy="{p[1]}" r="3.5" fill="#c0392b"/>\n')
    out.append("</g>\n</svg>\n")
    return "".join(out)
