"""qhull helpers for H-polytopes that contain the origin in their interior."""

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection, QhullError

# above this dimension qhull gets slow and fragile on degenerate inputs
QHULL_MAX_DIM = 6


def _dedupe(points, tol=1e-10):
    keys = np.round(points / tol).astype(np.int64)
    _, idx = np.unique(keys, axis=0, return_index=True)
    return points[np.sort(idx)]


def drop_trivial(A, b, tol=1e-14):
    """Remove rows whose normal vanished (always satisfied since b > 0)."""
    keep = np.linalg.norm(A, axis=1) > tol
    return A[keep], b[keep]


def vertices(A, b):
    """Vertices of {x : Ax <= b}, or None if qhull is not applicable."""
    d = A.shape[1]
    if d == 1:
        a = A[:, 0]
        hi = np.min(b[a > 0] / a[a > 0])
        lo = np.max(b[a < 0] / a[a < 0])
        return np.array([[lo], [hi]])
    if d > QHULL_MAX_DIM:
        return None
    halfspaces = np.hstack([A, -b[:, None]])
    try:
        hs = HalfspaceIntersection(halfspaces, np.zeros(d))
    except (QhullError, ValueError):
        return None
    pts = hs.intersections
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    return _dedupe(pts)


def volume(A, b):
    """Volume of {x : Ax <= b}, or None if qhull is not applicable."""
    d = A.shape[1]
    V = vertices(A, b)
    if V is None:
        return None
    if d == 1:
        return float(V[1, 0] - V[0, 0])
    try:
        return float(ConvexHull(V).volume)
    except (QhullError, ValueError):
        return None
