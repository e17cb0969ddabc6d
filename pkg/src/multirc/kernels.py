"""Numba inner loops for the fixed-step RK4 integrators.

All kernels take the adjacency in raw CSR form (data, indices, indptr) so
the same code path serves sparse and dense-origin matrices.  The reservoir
state recurrence is inherently sequential; these loops are the hot path of
every experiment and are kept free of Python objects.
"""

import numpy as np
from numba import njit

# Index returned when an integration stays finite and within bounds.
NO_DIVERGENCE = -1


@njit(cache=True, nogil=True)
def _axpy_tanh_rate(mdata, mind, mptr, r, ext, gamma, out):
    # out = gamma * (-r + tanh(M r + ext))
    n = r.shape[0]
    for i in range(n):
        s = 0.0
        for k in range(mptr[i], mptr[i + 1]):
            s += mdata[k] * r[mind[k]]
        out[i] = gamma * (-r[i] + np.tanh(s + ext[i]))


@njit(cache=True, nogil=True)
def _input_term(win, sigma, u, out):
    # out = sigma * win @ u
    n, d = win.shape
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += win[i, j] * u[j]
        out[i] = sigma * s


@njit(cache=True, nogil=True)
def _readout(w1, w2, r, out):
    # out = w1 @ r + w2 @ r^2   (componentwise square)
    d, n = w1.shape
    for a in range(d):
        s = 0.0
        for j in range(n):
            rj = r[j]
            s += w1[a, j] * rj + w2[a, j] * rj * rj
        out[a] = s


@njit(cache=True, nogil=True)
def _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, r, y, ext, out):
    _readout(w1, w2, r, y)
    _input_term(win, sigma, y, ext)
    _axpy_tanh_rate(mdata, mind, mptr, r, ext, gamma, out)


@njit(cache=True, nogil=True)
def open_loop_rk4(mdata, mind, mptr, win, sigma, gamma, tau, u, r0):
    """Drive the reservoir with the sampled input u (shape (T+1, d)).

    The mid-stage input is the average of consecutive samples.  Returns
    the state at every sample time and the index of the first non-finite
    state (NO_DIVERGENCE if none).
    """
    n = r0.shape[0]
    n_steps = u.shape[0] - 1
    states = np.empty((n_steps + 1, n))
    states[0] = r0
    r = r0.copy()
    k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
    tmp = np.empty(n)
    ext_a = np.empty(n); ext_m = np.empty(n); ext_b = np.empty(n)
    u_mid = np.empty(u.shape[1])
    for step in range(n_steps):
        for j in range(u.shape[1]):
            u_mid[j] = 0.5 * (u[step, j] + u[step + 1, j])
        _input_term(win, sigma, u[step], ext_a)
        _input_term(win, sigma, u_mid, ext_m)
        _input_term(win, sigma, u[step + 1], ext_b)

        _axpy_tanh_rate(mdata, mind, mptr, r, ext_a, gamma, k1)
        for i in range(n):
            tmp[i] = r[i] + 0.5 * tau * k1[i]
        _axpy_tanh_rate(mdata, mind, mptr, tmp, ext_m, gamma, k2)
        for i in range(n):
            tmp[i] = r[i] + 0.5 * tau * k2[i]
        _axpy_tanh_rate(mdata, mind, mptr, tmp, ext_m, gamma, k3)
        for i in range(n):
            tmp[i] = r[i] + tau * k3[i]
        _axpy_tanh_rate(mdata, mind, mptr, tmp, ext_b, gamma, k4)

        bad = False
        for i in range(n):
            r[i] = r[i] + (tau / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not np.isfinite(r[i]):
                bad = True
        states[step + 1] = r
        if bad:
            return states[: step + 2], step + 1
    return states, NO_DIVERGENCE


@njit(cache=True, nogil=True)
def closed_loop_rk4(
    mdata, mind, mptr, win, w1, w2, sigma, gamma, tau,
    r0, n_steps, state_stride, bound,
):
    """Autonomous run: readout feeds back as the input.

    Records the projected output at every step, the state every
    `state_stride` steps, and stops early when any component leaves
    [-bound, bound] or becomes non-finite.
    """
    n = r0.shape[0]
    d = w1.shape[0]
    n_rec = n_steps // state_stride + 1
    states = np.empty((n_rec, n))
    proj = np.empty((n_steps + 1, d))
    r = r0.copy()
    states[0] = r
    y = np.empty(d); ext = np.empty(n)
    _readout(w1, w2, r, y)
    proj[0] = y
    k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
    tmp = np.empty(n)
    for step in range(n_steps):
        _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, r, y, ext, k1)
        for i in range(n):
            tmp[i] = r[i] + 0.5 * tau * k1[i]
        _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, tmp, y, ext, k2)
        for i in range(n):
            tmp[i] = r[i] + 0.5 * tau * k2[i]
        _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, tmp, y, ext, k3)
        for i in range(n):
            tmp[i] = r[i] + tau * k3[i]
        _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, tmp, y, ext, k4)

        bad = False
        for i in range(n):
            r[i] = r[i] + (tau / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not (np.isfinite(r[i]) and -bound <= r[i] <= bound):
                bad = True
        _readout(w1, w2, r, y)
        proj[step + 1] = y
        if (step + 1) % state_stride == 0:
            states[(step + 1) // state_stride] = r
        if bad:
            n_done = (step + 1) // state_stride + 1
            return states[:n_done], proj[: step + 2], r, step + 1
    return states, proj, r, NO_DIVERGENCE


@njit(cache=True, nogil=True)
def closed_loop_tail(
    mdata, mind, mptr, win, w1, w2, sigma, gamma, tau,
    r0, n_steps, n_tail, bound,
):
    """Memory-light autonomous run: keep only the last n_tail+1 projections.

    Returns (tail projections, final state, divergence index).  Used for
    basin grids where thousands of runs are classified from their final
    window only.
    """
    n = r0.shape[0]
    d = w1.shape[0]
    tail = np.empty((n_tail + 1, d))
    r = r0.copy()
    y = np.empty(d); ext = np.empty(n)
    k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
    tmp = np.empty(n)
    _readout(w1, w2, r, y)
    if n_steps <= n_tail:
        tail[0] = y
    for step in range(n_steps):
        _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, r, y, ext, k1)
        for i in range(n):
            tmp[i] = r[i] + 0.5 * tau * k1[i]
        _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, tmp, y, ext, k2)
        for i in range(n):
            tmp[i] = r[i] + 0.5 * tau * k2[i]
        _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, tmp, y, ext, k3)
        for i in range(n):
            tmp[i] = r[i] + tau * k3[i]
        _closed_rate(mdata, mind, mptr, win, w1, w2, sigma, gamma, tmp, y, ext, k4)

        bad = False
        for i in range(n):
            r[i] = r[i] + (tau / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if not (np.isfinite(r[i]) and -bound <= r[i] <= bound):
                bad = True
        _readout(w1, w2, r, y)
        idx = step + 1 - (n_steps - n_tail)
        if idx >= 0:
            tail[idx] = y
        if bad:
            return tail, r, step + 1
    return tail, r, NO_DIVERGENCE


@njit(cache=True, nogil=True)
def const_drive_rk4(mdata, mind, mptr, win, sigma, gamma, tau, u_const, r0, n_steps):
    """Drive the open loop with a constant input; return only the final state."""
    n = r0.shape[0]
    r = r0.copy()
    ext = np.empty(n)
    _input_term(win, sigma, u_const, ext)
    k1 = np.empty(n); k2 = np.empty(n); k3 = np.empty(n); k4 = np.empty(n)
    tmp = np.empty(n)
    for _ in range(n_steps):
        _axpy_tanh_rate(mdata, mind, mptr, r, ext, gamma, k1)
        for i in range(n):
            tmp[i] = r[i] + 0.5 * tau * k1[i]
        _axpy_tanh_rate(mdata, mind, mptr, tmp, ext, gamma, k2)
        for i in range(n):
            tmp[i] = r[i] + 0.5 * tau * k2[i]
        _axpy_tanh_rate(mdata, mind, mptr, tmp, ext, gamma, k3)
        for i in range(n):
            tmp[i] = r[i] + tau * k3[i]
        _axpy_tanh_rate(mdata, mind, mptr, tmp, ext, gamma, k4)
        for i in range(n):
            r[i] = r[i] + (tau / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    return r
