"""Hot numeric kernels for the Rademacher estimator: L1-ball projection,
norm-ball layer projection, and the projected-gradient-ascent inner loop.

Every kernel is written once in backend-neutral numpy and compiled with numba
in nopython mode when available. The environment variable WNRELU_BACKEND
forces a choice: "numba" (default when importable) or "numpy" (the pure
fallback). The selection happens at import time and is process-wide;
benchmarks/bench_backends.py compares the two by launching one subprocess per
backend.
"""

import os

import numpy as np


def _resolve_backend() -> str:
    choice = os.environ.get("WNRELU_BACKEND", "").strip().lower()
    if choice not in ("", "numba", "numpy"):
        raise ValueError(f"WNRELU_BACKEND must be 'numba' or 'numpy', got {choice!r}")
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve_backend()


def backend_name() -> str:
    return BACKEND


def l1_ball_project(v, radius):
    """Euclidean projection of a vector onto the L1 ball of the given radius,
    by the sort-and-threshold rule; interior points come back unchanged."""
    if radius <= 0.0:
        return np.zeros_like(v)
    a = np.abs(v)
    if np.sum(a) <= radius:
        return v.copy()
    u = np.sort(a)[::-1]
    css = np.cumsum(u)
    theta = 0.0
    for j in range(u.shape[0]):
        t = (css[j] - radius) / (j + 1.0)
        if u[j] > t:
            theta = t
    shrunk = a - theta
    for i in range(shrunk.shape[0]):
        if shrunk[i] < 0.0:
            shrunk[i] = 0.0
    return np.sign(v) * shrunk


def matrix_ball_project(P, p_code, q_is_inf, radius):
    """In-place projection of a layer matrix into the norm ball. p_code 1 with
    q_is_inf projects columns onto L1 balls; p_code 2 caps column L2 norms
    (q_is_inf) or the Frobenius norm (otherwise)."""
    if radius <= 0.0:
        P[:, :] = 0.0
        return
    if p_code == 1:
        for j in range(P.shape[1]):
            if np.sum(np.abs(P[:, j])) > radius:
                P[:, j] = l1_ball_project(P[:, j].copy(), radius)
    elif q_is_inf:
        for j in range(P.shape[1]):
            nrm = np.sqrt(np.sum(P[:, j] ** 2))
            if nrm > radius:
                P[:, j] *= radius / nrm
    else:
        nrm = np.sqrt(np.sum(P ** 2))
        if nrm > radius:
            P *= radius / nrm


def matrix_mixed_norm(P, p_code, q_is_inf):
    """Layer norm under the coded index pair (L1/L2 columns, max or L2 across)."""
    if p_code == 1:
        col = np.sum(np.abs(P), axis=0)
    else:
        col = np.sqrt(np.sum(P ** 2, axis=0))
    if q_is_inf:
        return np.max(col)
    return np.sqrt(np.sum(col ** 2))


def layer_constrain(P, p_code, q_is_inf, target, exact):
    """Feasibility step for one layer: project into the ball of radius
    ``target``; hidden layers (exact=True) are then rescaled up to norm
    exactly ``target``, with a deterministic bias spike if the layer vanished."""
    matrix_ball_project(P, p_code, q_is_inf, target)
    if exact:
        cur = matrix_mixed_norm(P, p_code, q_is_inf)
        if cur > 0.0:
            P *= target / cur
        else:
            P[0, 0] = target


def ascent_maximize(theta, xs, eps, offs, rows, cols, p_code, q_is_inf,
                    c, c_out, steps, step0, decay_every, decay):
    """Projected gradient ascent of sum_i eps_i * f(x_i) over networks whose
    hidden layers sit on the norm-c sphere and whose output layer stays inside
    the norm-c_out ball.

    ``theta`` is the flat parameter vector (modified in place; layer i lives
    at offs[i] with shape rows[i] x cols[i], bias row first). Returns the best
    objective value seen over the feasible iterates (at least 0, the value of
    the zero output layer) and leaves theta at the final iterate.
    """
    n_layers = offs.shape[0]
    n = xs.shape[0]
    aoffs = np.zeros(n_layers + 1, np.int64)
    for i in range(n_layers):
        aoffs[i + 1] = aoffs[i] + n * cols[i]
    zbuf = np.zeros(aoffs[n_layers])
    grad = np.zeros_like(theta)

    for i in range(n_layers):
        P = theta[offs[i]: offs[i] + rows[i] * cols[i]].reshape(rows[i], cols[i])
        if i < n_layers - 1:
            layer_constrain(P, p_code, q_is_inf, c, True)
        else:
            layer_constrain(P, p_code, q_is_inf, c_out, False)

    best = 0.0
    for t in range(steps + 1):
        prev = xs
        for i in range(n_layers):
            P = theta[offs[i]: offs[i] + rows[i] * cols[i]].reshape(rows[i], cols[i])
            z = np.dot(prev, np.ascontiguousarray(P[1:, :])) + P[0, :]
            zbuf[aoffs[i]: aoffs[i + 1]] = z.ravel()
            if i < n_layers - 1:
                prev = np.maximum(z, 0.0)
            else:
                prev = z
        value = 0.0
        for i in range(n):
            value += eps[i] * prev[i, 0]
        if value > best:
            best = value
        if t == steps:
            break

        delta = np.zeros((n, 1))
        for i in range(n):
            delta[i, 0] = eps[i]
        for i in range(n_layers - 1, -1, -1):
            if i == 0:
                a_prev = xs
            else:
                zp = zbuf[aoffs[i - 1]: aoffs[i]].reshape(n, cols[i - 1])
                a_prev = np.maximum(zp, 0.0)
            G = grad[offs[i]: offs[i] + rows[i] * cols[i]].reshape(rows[i], cols[i])
            G[0, :] = np.sum(delta, axis=0)
            G[1:, :] = np.dot(np.ascontiguousarray(a_prev.T), delta)
            if i > 0:
                P = theta[offs[i]: offs[i] + rows[i] * cols[i]].reshape(rows[i], cols[i])
                back = np.dot(delta, np.ascontiguousarray(P[1:, :].T))
                zp = zbuf[aoffs[i - 1]: aoffs[i]].reshape(n, cols[i - 1])
                delta = np.where(zp > 0.0, back, 0.0)

        step = step0 * decay ** (t // decay_every)
        theta += step * grad
        for i in range(n_layers):
            P = theta[offs[i]: offs[i] + rows[i] * cols[i]].reshape(rows[i], cols[i])
            if i < n_layers - 1:
                layer_constrain(P, p_code, q_is_inf, c, True)
            else:
                layer_constrain(P, p_code, q_is_inf, c_out, False)
    return best, theta


if BACKEND == "numba":
    from numba import njit

    l1_ball_project = njit(cache=True)(l1_ball_project)
    matrix_ball_project = njit(cache=True)(matrix_ball_project)
    matrix_mixed_norm = njit(cache=True)(matrix_mixed_norm)
    layer_constrain = njit(cache=True)(layer_constrain)
    ascent_maximize = njit(cache=True)(ascent_maximize)
