"""Regenerate the shipped synthetic dictionary from mirrored half outlines."""

import json
import sys
from pathlib import Path

import numpy as np

from splinetrack.geometry import BARYCENTRIC, ShapeVector, barycenter_area, contour_length, validate
from splinetrack.metrics import inner_radius, outer_radius

# upper half outlines, nose first (on the +x axis), tail last; y > 0 except axis points
# target outer radius per class after recentring [m]
RADIUS = {"delta_wing": 14.0, "swept_wing": 14.0, "rect_fuselage": 13.0, "cross": 12.5, "arrow": 13.0}

HALVES = {
    "delta_wing": [
        (13.0, 0.0), (8.0, 1.0), (5.0, 1.3), (2.5, 4.2), (1.5, 4.2), (1.5, 1.5), (-8.0, 10.0),
        (-9.5, 10.0), (-8.5, 3.5), (-11.5, 5.0), (-12.5, 5.0), (-10.5, 1.6), (-11.5, 0.9),
    ],
    "swept_wing": [
        (14.0, 0.0), (9.0, 1.1), (3.0, 1.5), (-3.5, 7.5), (-5.5, 7.5), (-4.5, 1.6),
        (-8.5, 1.5), (-11.5, 4.0), (-12.8, 4.0), (-12.0, 0.9),
    ],
    "rect_fuselage": [(13.0, 0.0), (10.5, 2.2), (-12.0, 2.2), (-12.5, 1.2)],
    "cross": [
        (12.5, 0.0), (11.0, 1.6), (1.6, 1.6), (1.6, 10.5), (-1.6, 10.5), (-1.6, 1.6), (-11.0, 1.6),
    ],
    "arrow": [(13.5, 0.0), (3.0, 8.0), (3.0, 2.0), (-12.0, 2.0), (-12.8, 0.8)],
}


def mirror(half):
    """Full CCW outline: upper half nose-to-tail then the lower half tail-to-nose."""
    tail_on_axis = half[-1][1] == 0.0
    lower = [(x, -y) for x, y in reversed(half[1:]) if y != 0.0]
    pts = [half[0]] + [p for p in half[1:] if p[1] != 0.0]
    if tail_on_axis:
        pts.append(half[-1])
    return np.array(pts + lower)


def build():
    records = []
    for name, half in HALVES.items():
        v = mirror(half)
        g, _ = barycenter_area(ShapeVector(v, BARYCENTRIC))
        v = v - g
        v = v * RADIUS[name] / np.linalg.norm(v, axis=1).max()
        v[np.abs(v) < 1e-12] = 0.0
        shape = ShapeVector(np.round(v, 9), BARYCENTRIC).oriented()
        rep = validate(shape)
        _, area = barycenter_area(shape)
        print(
            f"{name:14s} n={shape.n:2d} len={contour_length(shape):6.2f} area={area:7.2f} "
            f"rho_max={outer_radius(shape):5.2f} rho_min={inner_radius(shape):4.2f} valid={rep.describe()}",
            file=sys.stderr,
        )
        records.append({"name": name, "vertices": shape.vertices.tolist(), "reflectivity": 1.0})
    return records


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else None
    recs = build()
    if out:
        body = ",\n".join("  " + json.dumps(r) for r in recs)
        out.write_text("[\n" + body + "\n]\n")
