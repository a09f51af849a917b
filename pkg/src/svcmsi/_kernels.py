"""Compiled model equations and RK4 integrator.

Everything compiled lives in this one file: numba's on-disk cache only
checks the timestamp of the file that defines a function, so splitting
callees across modules would let stale machine code survive an edit.

State layout (14 floats): x_scc[0:3], v_s[3:6], x_scc_hat[6:9], v_hat[9:12],
m1[12], m2[13]. Input rows (9 floats): a[0:3], omega[3:6], omega_vis[6:9].
Parameter vector order matches ModelParams field order.
"""

import math

import numba
import numpy as np

STATE_SIZE = 14
N_SIGNALS = 8

K_A, K_W, K_WC, K_VC, K_AC, K_WVIS = 0, 1, 2, 3, 4, 5
TAU_D, TAU_V, HILL_B, HILL_N, TAU_L, P_MAX, G = 6, 7, 8, 9, 10, 11, 12


@numba.njit(cache=True)
def hill(h, b, n):
    if h == 0.0:
        return 0.0
    # 1 / (1 + (b/h)^n) == h^n / (h^n + b^n) without overflowing h^n
    r = b / h
    if n == 2.0:
        return 1.0 / (1.0 + r * r)
    return 1.0 / (1.0 + r**n)


@numba.njit(cache=True)
def algebraic(y, u, row, p, out):
    """Fill ``out`` (8 x 3) and return (|d_v|, phi).

    Rows of ``out``: omega_s, omega_hat, omega_s_hat, d_omega, d_omega_vis,
    d_a, f_hat, d_v. Inputs are ``u[row]``.
    """
    k_a = p[K_A]
    k_w = p[K_W]
    k_wc = p[K_WC]
    k_ac = p[K_AC]
    k_wvis = p[K_WVIS]
    g = p[G]
    inv_w_den = 1.0 / (1.0 + k_wc + k_wvis)
    inv_a_den = 1.0 / (1.0 + k_ac)
    dv2 = 0.0
    for i in range(3):
        a_i = u[row, i]
        w_i = u[row, 3 + i]
        wvis_i = u[row, 6 + i]
        f = a_i + (g if i == 2 else 0.0)
        x_scc_hat = y[6 + i]
        v_hat = y[9 + i]
        w_s = w_i - y[i]
        # closed form of the visual/vestibular angular-velocity loop
        w_hat = (k_w * w_i + k_wc * (w_s + x_scc_hat) + k_wvis * wvis_i) * inv_w_den
        w_s_hat = w_hat - x_scc_hat
        # closed form of the acceleration loop
        d_a = (f - v_hat - k_a * a_i) * inv_a_den
        d_v = y[3 + i] - v_hat
        out[0, i] = w_s
        out[1, i] = w_hat
        out[2, i] = w_s_hat
        out[3, i] = w_s - w_s_hat
        out[4, i] = wvis_i - w_hat
        out[5, i] = d_a
        out[6, i] = v_hat + k_a * a_i + k_ac * d_a
        out[7, i] = d_v
        dv2 += d_v * d_v
    dv_norm = math.sqrt(dv2)
    return dv_norm, hill(dv_norm, p[HILL_B], p[HILL_N])


@numba.njit(cache=True)
def derivative(y, u, row, p, sig, dy):
    _, phi = algebraic(y, u, row, p, sig)
    r_d = 1.0 / p[TAU_D]
    r_v = 1.0 / p[TAU_V]
    r_l = 1.0 / p[TAU_L]
    k_vc = p[K_VC]
    g = p[G]
    # rot_* = -(omega x v)
    ws0, ws1, ws2 = sig[0, 0], sig[0, 1], sig[0, 2]
    wh0, wh1, wh2 = sig[2, 0], sig[2, 1], sig[2, 2]
    vs0, vs1, vs2 = y[3], y[4], y[5]
    vh0, vh1, vh2 = y[9], y[10], y[11]
    rot_s0 = ws2 * vs1 - ws1 * vs2
    rot_s1 = ws0 * vs2 - ws2 * vs0
    rot_s2 = ws1 * vs0 - ws0 * vs1
    rot_h0 = wh2 * vh1 - wh1 * vh2
    rot_h1 = wh0 * vh2 - wh2 * vh0
    rot_h2 = wh1 * vh0 - wh0 * vh1
    dy[0] = (u[row, 3] - y[0]) * r_d
    dy[1] = (u[row, 4] - y[1]) * r_d
    dy[2] = (u[row, 5] - y[2]) * r_d
    dy[3] = (u[row, 0] - vs0) * r_v + rot_s0
    dy[4] = (u[row, 1] - vs1) * r_v + rot_s1
    dy[5] = (u[row, 2] + g - vs2) * r_v + rot_s2
    dy[6] = (sig[1, 0] - y[6]) * r_d
    dy[7] = (sig[1, 1] - y[7]) * r_d
    dy[8] = (sig[1, 2] - y[8]) * r_d
    dy[9] = (sig[6, 0] - vh0) * r_v + rot_h0 + k_vc * (vs0 - vh0)
    dy[10] = (sig[6, 1] - vh1) * r_v + rot_h1 + k_vc * (vs1 - vh1)
    dy[11] = (sig[6, 2] - vh2) * r_v + rot_h2 + k_vc * (vs2 - vh2)
    dy[12] = (phi - y[12]) * r_l
    dy[13] = (y[12] - y[13]) * r_l


@numba.njit(cache=True)
def integrate(y0, u, h, p, states):
    """Classic RK4 over the half-step input grid ``u`` of shape (2n+1, 9).

    Step k uses rows 2k, 2k+1, 2k+2. All n+1 states are stored when
    ``states`` has n+1 rows; pass a 0-row array to skip recording.
    Returns (first non-finite step or -1, final state, sum of m2 over the
    n+1 grid points).
    """
    n = (u.shape[0] - 1) // 2
    record = states.shape[0] == n + 1
    sig = np.empty((N_SIGNALS, 3))
    k1 = np.empty(STATE_SIZE)
    k2 = np.empty(STATE_SIZE)
    k3 = np.empty(STATE_SIZE)
    k4 = np.empty(STATE_SIZE)
    tmp = np.empty(STATE_SIZE)
    y = y0.copy()
    if record:
        states[0] = y
    m2_sum = y[13]
    half = 0.5 * h
    sixth = h / 6.0
    for k in range(n):
        r0 = 2 * k
        derivative(y, u, r0, p, sig, k1)
        for i in range(STATE_SIZE):
            tmp[i] = y[i] + half * k1[i]
        derivative(tmp, u, r0 + 1, p, sig, k2)
        for i in range(STATE_SIZE):
            tmp[i] = y[i] + half * k2[i]
        derivative(tmp, u, r0 + 1, p, sig, k3)
        for i in range(STATE_SIZE):
            tmp[i] = y[i] + h * k3[i]
        derivative(tmp, u, r0 + 2, p, sig, k4)
        finite = True
        for i in range(STATE_SIZE):
            tmp[i] = y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            finite &= np.isfinite(tmp[i])
        if not finite:
            return k + 1, y, m2_sum
        for i in range(STATE_SIZE):
            y[i] = tmp[i]
        if record:
            for i in range(STATE_SIZE):
                states[k + 1, i] = y[i]
        m2_sum += y[13]
    return -1, y, m2_sum


@numba.njit(cache=True)
def conflict_series(states, p):
    """(|d_v|, phi) at every stored state; neither depends on the inputs."""
    n = states.shape[0]
    dv = np.empty(n)
    phi = np.empty(n)
    sig = np.empty((N_SIGNALS, 3))
    zero = np.zeros((1, 9))
    for k in range(n):
        dv[k], phi[k] = algebraic(states[k], zero, 0, p, sig)
    return dv, phi
