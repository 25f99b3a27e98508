#!/usr/bin/env python3
"""Generate the committed cylinder-channel and Y-junction meshes.

Points: a triangular lattice in the interior plus equispaced boundary
nodes (graded rings around the cylinder), Delaunay-triangulated with
scipy and clipped to the domain.  Output is the simple_tri format
read by `Mesh::from_str_format`.

    python3 tools/gen_meshes.py            # writes crates/core/assets/
"""
import math
import pathlib
import sys

import numpy as np
from scipy.spatial import Delaunay
from shapely.geometry import LineString, Point, Polygon
from shapely.prepared import prep

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "assets"

CYL_CENTER = (4.5, 0.275)
CYL_RADIUS = 0.08
CYL_SIDES = 20

Y_JUNCTION = [
    (-20.0, -1.0), (0.0, -1.0), (20.0, -12.5), (22.0, -11.5), (2.0, 0.0),
    (22.0, 11.5), (20.0, 12.5), (0.0, 1.0), (-20.0, 1.0),
]


def lattice(xmin, xmax, ymin, ymax, h):
    dy = h * math.sqrt(3.0) / 2.0
    pts = []
    j = 0
    y = ymin
    while y <= ymax + 1e-12:
        off = 0.5 * h if j % 2 else 0.0
        x = xmin + off
        while x <= xmax + 1e-12:
            pts.append((x, y))
            x += h
        y += dy
        j += 1
    return pts


def polyline_nodes(corners, h, closed=True):
    pts = []
    n = len(corners)
    for i in range(n if closed else n - 1):
        a, b = np.array(corners[i]), np.array(corners[(i + 1) % n])
        m = max(1, int(math.ceil(np.linalg.norm(b - a) / h)))
        for k in range(m):
            pts.append(tuple(a + (b - a) * k / m))
    return pts


def triangulate(points, domain):
    pts = np.array(points)
    tri = Delaunay(pts)
    dom = prep(domain)
    keep = []
    for s in tri.simplices:
        p = pts[s]
        area = 0.5 * ((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1]))
        if abs(area) < 1e-12:
            continue
        if not dom.contains(Point(p.mean(axis=0))):
            continue
        keep.append(s if area > 0 else s[[0, 2, 1]])
    used = sorted({int(v) for s in keep for v in s})
    remap = {v: i for i, v in enumerate(used)}
    tris = [[remap[int(v)] for v in s] for s in keep]
    return pts[used], tris


def boundary_edges(tris):
    count = {}
    for t in tris:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    return [e for e, c in count.items() if c == 1]


def check(pts, tris, domain, name):
    area = sum(
        0.5 * abs((pts[b, 0] - pts[a, 0]) * (pts[c, 1] - pts[a, 1]) - (pts[c, 0] - pts[a, 0]) * (pts[b, 1] - pts[a, 1]))
        for a, b, c in tris
    )
    rel = abs(area - domain.area) / domain.area
    if rel > 1e-10:
        sys.exit(f"{name}: triangulated area {area} differs from polygon area {domain.area}")
    ring = domain.boundary
    for a, b in boundary_edges(tris):
        mid = Point((pts[a] + pts[b]) / 2)
        if ring.distance(mid) > 1e-9:
            sys.exit(f"{name}: interior edge {a}-{b} left on the boundary")
    lens = [np.linalg.norm(pts[t[i]] - pts[t[(i + 1) % 3]]) for t in tris for i in range(3)]
    print(f"{name}: {len(pts)} vertices, {len(tris)} triangles, h in [{min(lens):.4f}, {max(lens):.4f}]")


def write(path, pts, tris):
    edges = boundary_edges(tris)
    with open(path, "w") as f:
        f.write(f"{len(pts)} {len(tris)} {len(edges)}\n")
        for x, y in pts:
            f.write(f"{x:.12g} {y:.12g}\n")
        for t in tris:
            f.write(f"{t[0]} {t[1]} {t[2]}\n")
        for a, b in edges:
            f.write(f"{a} {b}\n")


def cylinder(h):
    cx, cy = CYL_CENTER
    icosagon = [
        (cx + CYL_RADIUS * math.cos(2 * math.pi * k / CYL_SIDES), cy + CYL_RADIUS * math.sin(2 * math.pi * k / CYL_SIDES))
        for k in range(CYL_SIDES)
    ]
    outer = [(-4.0, 0.0), (20.0, 0.0), (20.0, 0.55), (-4.0, 0.55)]
    domain = Polygon(outer, [icosagon])
    pts = polyline_nodes(outer, h) + list(icosagon)
    # Graded rings from the icosagon out to the lattice spacing.
    side = 2 * CYL_RADIUS * math.sin(math.pi / CYL_SIDES)
    r, s = CYL_RADIUS, side
    rings_end = CYL_RADIUS
    while s < h:
        r += s * math.sqrt(3.0) / 2.0
        s = min(h, s * 1.15)
        n = max(CYL_SIDES, int(round(2 * math.pi * r / s)))
        for k in range(n):
            ang = 2 * math.pi * (k + 0.5 * (len(pts) % 2)) / n
            q = (cx + r * math.cos(ang), cy + r * math.sin(ang))
            if domain.buffer(-0.4 * s).contains(Point(q)):
                pts.append(q)
        rings_end = r
    inner = domain.buffer(-0.6 * h)
    disc = Point(cx, cy).buffer(rings_end + 0.6 * h)
    prep_inner = prep(inner)
    for q in lattice(-4.0, 20.0, 0.0, 0.55, h):
        p = Point(q)
        if prep_inner.contains(p) and not disc.contains(p):
            pts.append(q)
    return triangulate(pts, domain), domain


def y_junction(h):
    domain = Polygon(Y_JUNCTION)
    pts = polyline_nodes(Y_JUNCTION, h)
    inner = prep(domain.buffer(-0.6 * h))
    for q in lattice(-20.0, 22.0, -12.5, 12.5, h):
        if inner.contains(Point(q)):
            pts.append(q)
    return triangulate(pts, domain), domain


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, builder, h in [
        ("cylinder_desk", cylinder, 0.08),
        ("cylinder_paper", cylinder, 0.04),
        ("y_junction_desk", y_junction, 0.3),
        ("y_junction_paper", y_junction, 0.12),
    ]:
        (pts, tris), domain = builder(h)
        check(pts, tris, domain, name)
        write(OUT / f"{name}.tri", pts, tris)


if __name__ == "__main__":
    main()
