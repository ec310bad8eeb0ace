"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_kernels.pyx``.
Arrays are float64 and C-contiguous; ``signs`` arrays are int8 holding +-1.
"""

import numpy as np

NAME = "numpy"


def laplace_inverse_array(u):
    u = np.asarray(u, dtype=np.float64)
    lo = u < 0.5
    # both branches are evaluated; clip keeps the unused one finite
    neg = np.log(2.0 * np.where(lo, u, 0.25))
    pos = -np.log(2.0 * (1.0 - np.where(lo, 0.75, u)))
    return np.where(lo, neg, pos)


def softmax_into(z, eta, out):
    # shift before scaling so that z + c gives bit-identical output
    np.subtract(z, z.max(), out=out)
    out *= eta
    np.exp(out, out=out)
    out /= out.sum()
    return out


def ball_clip_into(z, eta, out):
    np.multiply(z, eta, out=out)
    n = np.sqrt(np.dot(out, out))
    if n > 1.0:
        out /= n
    return out


def sign_axpy(z, scale, signs):
    """z <- z - scale * signs, in place."""
    z -= scale * signs
    return z


def signs_of(zeta, out):
    out[:] = np.where(zeta >= 0.0, 1, -1)
    return out


def _project_rows_simplex(v):
    # sort-based Euclidean projection of each row onto the probability simplex
    k, d = v.shape
    u = -np.sort(-v, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(1, d + 1, dtype=np.float64)
    cond = u - css / ind > 0
    rho = d - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(k), rho] / (rho + 1.0)
    return np.maximum(v - theta[:, None], 0.0)


def _dist_l1_l2(x, c, a):
    return np.sqrt(((x - c) ** 2).sum(axis=1)) + np.abs(x - a).sum(axis=1)


def simplex_subgradient_descent(c, a, starts, step, iterations):
    """Projected subgradient descent of ``||x - c||_2 + ||x - a||_1`` on the simplex.

    Runs all rows of ``starts`` together with step ``step / sqrt(k)`` and
    tracks the best iterate of each row. Returns ``(best_values, best_points)``.
    """
    c = np.asarray(c, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    x = _project_rows_simplex(np.array(starts, dtype=np.float64, copy=True))
    best_x = x.copy()
    best_v = _dist_l1_l2(x, c, a)
    for k in range(1, int(iterations) + 1):
        r = x - c
        n = np.sqrt((r * r).sum(axis=1))
        n[n == 0.0] = np.inf
        g = r / n[:, None] + np.where(x - a >= 0.0, 1.0, -1.0)
        x = _project_rows_simplex(x - (step / np.sqrt(k)) * g)
        v = _dist_l1_l2(x, c, a)
        better = v < best_v
        if better.any():
            best_v[better] = v[better]
            best_x[better] = x[better]
    return best_v, best_x
