"""Map construction by clustering track points on position and heading.

Cluster centers are seeded at fixed arc-length spacing along the tracks,
refined k-means style with a heading gate, merged when they duplicate each
other, and finally linked in the order tracks visit them.
"""

import numpy as np
from scipy.spatial import cKDTree

from ..errors import InvalidInputError
from ..geometry import PolyLine, angle_difference, bearings
from ..graph import GraphBuilder

MAX_ITERATIONS = 50


def _points_with_heading(line, pitch):
    """Arc-length samples of ``line`` and the heading of the segment each lies on."""
    pts = line.sample(pitch, include_vertices=False)
    d = np.linspace(0.0, line.length, len(pts))
    seg = np.clip(np.searchsorted(line.cumulative, d, side="right") - 1, 0, len(line) - 2)
    return pts, bearings(line.points)[seg]


def _circular_mean(deg, weights=None):
    r = np.radians(deg)
    s = np.average(np.sin(r), weights=weights)
    c = np.average(np.cos(r), weights=weights)
    return float(np.degrees(np.arctan2(s, c)) % 360.0)


def seed_centers(lines, spacing, bearing_tol):
    """Greedy seeding every ``spacing`` meters, skipping near duplicates."""
    centers, headings = [], []
    for line in lines:
        pts, hd = _points_with_heading(line, spacing)
        for p, h in zip(pts, hd):
            if centers:
                c = np.asarray(centers)
                d = np.hypot(*(c - p).T)
                near = (d < spacing / 2.0) & (angle_difference(np.asarray(headings), h) <= bearing_tol)
                if near.any():
                    continue
            centers.append(p)
            headings.append(h)
    return np.array(centers).reshape(-1, 2), np.array(headings)


def assign(points, point_heading, centers, center_heading, radius, bearing_tol, k=12):
    """Index of the nearest heading-compatible center within ``radius`` (or -1)."""
    out = np.full(len(points), -1)
    if len(centers) == 0:
        return out
    k = min(k, len(centers))
    d, idx = cKDTree(centers).query(points, k=k, distance_upper_bound=radius)
    d = d.reshape(len(points), k)
    idx = idx.reshape(len(points), k)
    valid = np.isfinite(d)
    safe = np.where(valid, idx, 0)
    ok = valid & (angle_difference(center_heading[safe], point_heading[:, None]) <= bearing_tol)
    has = ok.any(axis=1)
    first = np.argmax(ok, axis=1)
    out[has] = idx[has, first[has]]
    return out


def _sequences(labels, bounds):
    """Per-track ordered lists of visited cluster labels, consecutive repeats collapsed."""
    seqs = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        seq = []
        for lab in labels[a:b]:
            if lab < 0:
                if seq and seq[-1] is not None:
                    seq.append(None)
                continue
            if not seq or seq[-1] != lab:
                seq.append(int(lab))
        seqs.append(seq)
    return seqs


def _links(seqs):
    out = set()
    for seq in seqs:
        for a, b in zip(seq[:-1], seq[1:]):
            if a is not None and b is not None and a != b:
                out.add((min(a, b), max(a, b)))
    return out


def construct_kmeans(tracks, seed_spacing=50.0, bearing=45.0, merge_proximity=50.0):
    """Cluster track points into road centers and link consecutive clusters."""
    if not seed_spacing > 0:
        raise InvalidInputError("seed spacing must be positive")
    lines = [PolyLine(getattr(t, "xy", t)) for t in tracks]
    lines = [ln for ln in lines if ln.is_curve()]
    if not lines:
        raise InvalidInputError("no tracks to construct from")
    centers, heading = seed_centers(lines, seed_spacing, bearing)

    samples = [_points_with_heading(ln, seed_spacing / 5.0) for ln in lines]
    pts = np.vstack([s[0] for s in samples])
    phd = np.concatenate([s[1] for s in samples])
    bounds = np.cumsum([0] + [len(s[0]) for s in samples])

    labels = assign(pts, phd, centers, heading, seed_spacing, bearing)
    for _ in range(MAX_ITERATIONS):
        # recenter on the assigned points; clusters left empty disappear
        used, labels = np.unique(labels, return_inverse=True)
        if used[0] < 0:
            labels = labels - 1
            used = used[1:]
        centers = np.array([pts[labels == j].mean(axis=0) for j in range(len(used))]).reshape(-1, 2)
        heading = np.array([_circular_mean(phd[labels == j]) for j in range(len(used))])
        new = assign(pts, phd, centers, heading, seed_spacing, bearing)
        if np.array_equal(new, labels):
            break
        labels = new

    # merge duplicate centers: close, same heading, and never visited back to back
    links = _links(_sequences(labels, bounds))
    parent = list(range(len(centers)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    members = {j: {j} for j in range(len(centers))}
    linked = {j: set() for j in range(len(centers))}
    for a, b in links:
        linked[a].add(b)
        linked[b].add(a)
    if len(centers) > 1:
        pairs = cKDTree(centers).query_pairs(merge_proximity, output_type="ndarray")
        if len(pairs):
            d = np.hypot(*(centers[pairs[:, 0]] - centers[pairs[:, 1]]).T)
            order = np.lexsort((pairs[:, 1], pairs[:, 0], d))
            for i, j in pairs[order]:
                ri, rj = find(int(i)), find(int(j))
                if ri == rj or angle_difference(heading[i], heading[j]) > bearing:
                    continue
                if any(find(x) == rj for m in members[ri] for x in linked[m]):
                    continue
                parent[rj] = ri
                members[ri] |= members.pop(rj)
    roots = sorted({find(j) for j in range(len(centers))})
    root_index = {r: k for k, r in enumerate(roots)}
    final = np.array([root_index[find(j)] if j >= 0 else -1 for j in range(len(centers))])
    labels = np.where(labels >= 0, final[np.maximum(labels, 0)], -1)
    counts = np.bincount(labels[labels >= 0], minlength=len(roots))
    position = np.array([pts[labels == k].mean(axis=0) for k in range(len(roots))]).reshape(-1, 2)

    b = GraphBuilder()
    vid = {}
    for k in range(len(roots)):
        if counts[k]:
            vid[k] = b.add_vertex(position[k])
    for a, c in sorted(_links(_sequences(labels, bounds))):
        if a in vid and c in vid:
            b.add_edge(vid[a], vid[c])
    # clusters that never link to another one would be isolated vertices
    return b.freeze().subgraph(b.edges)


def cluster_seeds(tracks, seed_spacing=50.0, bearing=45.0):
    """Initial centers and headings, before any refinement."""
    lines = [PolyLine(getattr(t, "xy", t)) for t in tracks]
    return seed_centers([ln for ln in lines if ln.is_curve()], seed_spacing, bearing)
