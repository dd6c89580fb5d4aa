"""Frozen reference artifacts: a rendered scenery and a crossed pair annihilation."""

from __future__ import annotations

import os

import numpy as np

from .geometry import AxisPoints, Domain, PlanarConfig, Point2, RandomSource, sample_poisson_in_domain
from .influence import augment_with_axis_points, build_attractors, classify_pair_annihilation
from .lines import build_broken_lines
from .render import render_svg
from .textio import parse_document, write_document

SCENERY_FILE = "scenery50.txt"
SVG_FILE = "scenery50.svg"
CROSSED_FILE = "crossed_pair.txt"


def _uniform_points(d: Domain, k: int, gen: np.random.Generator) -> PlanarConfig:
    t_lo, t_hi, x_lo, x_hi = d.bounding_box()
    ts, xs = [], []
    while len(ts) < k:
        t, x = gen.uniform(t_lo, t_hi), gen.uniform(x_lo, x_hi)
        if d.contains(Point2(t, x)):
            ts.append(t)
            xs.append(x)
    return PlanarConfig.from_arrays(ts, xs)


def scenery_document(seed: int = 2024) -> str:
    """50 uniform points in Triangle(10) with 3 axis points, lines, paths and attractors."""
    d = Domain.triangle(10.0)
    src = RandomSource(seed, "golden")
    cfg = _uniform_points(d, 50, src.child("scenery").generator())
    axis = AxisPoints(src.child("axis").generator().uniform(0.5, 9.5, 3))
    ls = build_broken_lines(cfg, (), d)
    aug = augment_with_axis_points(ls, cfg, axis, mode="sequential")
    return write_document(domain=d, config=cfg, axis=axis, lineset=aug.lineset, paths=aug.paths,
                          attractors=build_attractors(aug))


def find_crossed_instance(max_seeds: int = 5000):
    """First seed whose scenery and two axis points give a crossed annihilation.

    Returns ``(domain, config, earlier, later)``.
    """
    for seed in range(max_seeds):
        gen = np.random.default_rng(seed)
        n = float(gen.choice([4.0, 6.0, 10.0]))
        d = Domain.triangle(n)
        cfg = sample_poisson_in_domain(d, float(gen.choice([0.5, 1.0, 2.0])), gen)
        t = np.sort(gen.uniform(0.0, n, 2))
        x, y = Point2(float(t[0]), 0.0), Point2(float(t[1]), 0.0)
        if x in cfg or y in cfg or x == y:
            continue
        if classify_pair_annihilation(cfg, x, y, d).pair_class == "crossed":
            return d, cfg, x, y
    raise LookupError("no crossed instance found")


def crossed_document() -> str:
    d, cfg, x, y = find_crossed_instance()
    return write_document(domain=d, config=cfg, axis=AxisPoints([x.t, y.t]))


def write_goldens(directory: str) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    scenery = scenery_document()
    files = {
        SCENERY_FILE: scenery,
        SVG_FILE: render_svg(parse_document(scenery)),
        CROSSED_FILE: crossed_document(),
    }
    written = []
    for name, text in files.items():
        path = os.path.join(directory, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)
    return written
