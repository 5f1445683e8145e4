"""Array-level MAC stencils shared by the field norms and the operators.

Conventions: a cell array has ``grid.cells`` shape; a face array for axis
``a`` has one extra entry along ``a`` and its two outermost slabs are the
boundary faces.
"""
import numpy as np


def sl(dim, axis, s):
    """Index tuple selecting slice ``s`` along ``axis``."""
    idx = [slice(None)] * dim
    idx[axis] = s
    return tuple(idx)


def face_gradient(f, axis, h):
    """Zero-flux face gradient of a cell array; boundary faces are zero."""
    shape = list(f.shape)
    shape[axis] += 1
    g = np.zeros(shape)
    g[sl(f.ndim, axis, slice(1, -1))] = np.diff(f, axis=axis) / h
    return g


def divergence(faces, spacing):
    out = np.diff(faces[0], axis=0) / spacing[0]
    for a in range(1, len(faces)):
        out = out + np.diff(faces[a], axis=a) / spacing[a]
    return out


def face_mean(f, axis):
    """Arithmetic mean of the two cells adjacent to each face (boundary faces zero)."""
    shape = list(f.shape)
    shape[axis] += 1
    m = np.zeros(shape)
    m[sl(f.ndim, axis, slice(1, -1))] = 0.5 * (f[sl(f.ndim, axis, slice(1, None))] + f[sl(f.ndim, axis, slice(None, -1))])
    return m


def faces_to_centers(ua, axis):
    d = ua.ndim
    return 0.5 * (ua[sl(d, axis, slice(1, None))] + ua[sl(d, axis, slice(None, -1))])


def pad_antireflect(ua, axis):
    """Pad a face array with one no-slip ghost layer on each side of a transverse ``axis``."""
    d = ua.ndim
    lo = -ua[sl(d, axis, slice(0, 1))]
    hi = -ua[sl(d, axis, slice(-1, None))]
    return np.concatenate([lo, ua, hi], axis=axis)


def velocity_gradient_samples(comps, spacing):
    """All first differences of a no-slip MAC velocity with their quadrature weights.

    Returns a list of ``(values, weight)`` pairs, one per (component, direction).
    ``weight`` is an array broadcastable against ``values``; wall-adjacent
    transverse differences sit on half control volumes. With p = 2 the
    weighted sum of squares is exactly the discrete Dirichlet form
    ``-<Lap u, u>``.
    """
    dim = len(comps)
    vol = float(np.prod(spacing))
    out = []
    for a, ua in enumerate(comps):
        for b in range(dim):
            if b == a:
                vals = np.diff(ua, axis=a) / spacing[a]
                out.append((vals, np.full((1,) * dim, vol)))
            else:
                # drop boundary faces along a: they are identically zero
                inner = ua[sl(dim, a, slice(1, -1))]
                vals = np.diff(pad_antireflect(inner, b), axis=b) / spacing[b]
                w_shape = [1] * dim
                w_shape[b] = vals.shape[b]
                w = np.full(w_shape, vol)
                w[sl(dim, b, 0)] *= 0.5
                w[sl(dim, b, -1)] *= 0.5
                out.append((vals, w))
    return out
