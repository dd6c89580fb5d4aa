"""Structured text records shared by line sets, influence paths and attractors.

One record per line::

    DOMAIN triangle(10)
    POINT t x
    AXIS t
    LINE id t x t x ...
    PATH index +|- end_kind t x t x ...
    ATTRACTOR index t_hat t x t x ...
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import Domain


class FormatError(ValueError):
    pass


@dataclass
class Document:
    domain: Domain | None = None
    points: list[tuple[float, float]] = field(default_factory=list)
    axis: list[float] = field(default_factory=list)
    lines: list[list[tuple[float, float]]] = field(default_factory=list)
    paths: list[tuple[int, int, str, list[tuple[float, float]]]] = field(default_factory=list)
    attractors: list[tuple[int, float, list[tuple[float, float]]]] = field(default_factory=list)


def _pairs(vals: list[str], lineno: int) -> list[tuple[float, float]]:
    if len(vals) % 2:
        raise FormatError(f"line {lineno}: odd number of coordinates")
    try:
        nums = [float(s) for s in vals]
    except ValueError as exc:
        raise FormatError(f"line {lineno}: {exc}") from None
    return [(nums[i], nums[i + 1]) for i in range(0, len(nums), 2)]


def parse_document(text: str) -> Document:
    doc = Document()
    for lineno, raw in enumerate(text.splitlines(), 1):
        fields = raw.split()
        if not fields or fields[0].startswith("#"):
            continue
        tag, rest = fields[0], fields[1:]
        try:
            if tag == "DOMAIN":
                if len(rest) != 1:
                    raise FormatError(f"line {lineno}: DOMAIN takes one argument")
                doc.domain = Domain.parse(rest[0])
            elif tag == "POINT":
                pts = _pairs(rest, lineno)
                if len(pts) != 1:
                    raise FormatError(f"line {lineno}: POINT takes two numbers")
                doc.points.append(pts[0])
            elif tag == "AXIS":
                if len(rest) != 1:
                    raise FormatError(f"line {lineno}: AXIS takes one number")
                doc.axis.append(float(rest[0]))
            elif tag == "LINE":
                doc.lines.append(_pairs(rest[1:], lineno))
            elif tag == "PATH":
                if len(rest) < 3 or rest[1] not in "+-":
                    raise FormatError(f"line {lineno}: malformed PATH record")
                doc.paths.append((int(rest[0]), 1 if rest[1] == "+" else -1, rest[2], _pairs(rest[3:], lineno)))
            elif tag == "ATTRACTOR":
                if len(rest) < 2:
                    raise FormatError(f"line {lineno}: malformed ATTRACTOR record")
                doc.attractors.append((int(rest[0]), float(rest[1]), _pairs(rest[2:], lineno)))
            else:
                raise FormatError(f"line {lineno}: unknown record {tag!r}")
        except FormatError:
            raise
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    return doc


def write_document(domain=None, config=None, axis=None, lineset=None, paths=None, attractors=None) -> str:
    from .influence import attractors_to_text, paths_to_text

    out = []
    if domain is not None:
        out.append(f"DOMAIN {domain.describe()}\n")
    if config is not None:
        out.extend(f"POINT {p.t:.17g} {p.x:.17g}\n" for p in config)
    if axis is not None:
        out.extend(f"AXIS {t:.17g}\n" for t in axis.times.tolist())
    if lineset is not None:
        for i, line in enumerate(lineset.lines):
            coords = " ".join(f"{p.t:.17g} {p.x:.17g}" for p in line.vertices)
            out.append(f"LINE {i} {coords}\n")
    if paths is not None:
        out.append(paths_to_text(paths))
    if attractors is not None:
        out.append(attractors_to_text(attractors))
    return "".join(out)
