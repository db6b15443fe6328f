"""Compiled RK4 steppers for the three-level molecule + cavity model.

States are stored block-wise: a ket as ``(3, n)``, a density matrix as
``(3, n, 3, n)`` with ``n = N + 1``.  The Hamiltonian is applied from its
coupling structure (scalar blocks and the bidiagonal ``a``) so one right-hand
side costs O(d^2) instead of a dense O(d^3) product.

Observable rows are ``[t, <X_phi>, P1, P2, P3, <n>, trace]``.
"""

import numpy as np
from numba import njit

N_OBS = 7


@njit(cache=True)
def _coeffs(t, s, k, om, omt, beta, shift, Delta, delta, gc, eff):
    A = om[s, k] * np.exp(1j * Delta * t)
    B = omt[s, k] * np.exp(-1j * delta * t)
    G = gc * np.exp(1j * (Delta + delta) * t)
    if eff:
        return A, B, G, beta[s, k], shift[s, k]
    return A, B, G, 0j, 0.0


@njit(cache=True)
def _apply_h(X, out, A, B, G, bet, eps, sq, eff):
    """``out = H X`` for ``X`` of shape ``(3, n, M)``."""
    n = X.shape[1]
    M = X.shape[2]
    cA = np.conj(A)
    cB = np.conj(B)
    cG = np.conj(G)
    for m in range(n):
        for c in range(M):
            out[0, m, c] = A * X[1, m, c] + B * X[2, m, c]
            out[1, m, c] = cA * X[0, m, c]
            out[2, m, c] = cB * X[0, m, c]
    for m in range(1, n):
        f = cG * sq[m - 1]
        for c in range(M):
            out[1, m, c] += f * X[2, m - 1, c]
    for m in range(n - 1):
        f = G * sq[m]
        for c in range(M):
            out[2, m, c] += f * X[1, m + 1, c]
    if eff:
        cb = np.conj(bet)
        for m in range(n):
            for c in range(M):
                v = eps * m * X[0, m, c]
                if m > 0:
                    v += bet * sq[m - 1] * X[0, m - 1, c]
                if m < n - 1:
                    v += cb * sq[m] * X[0, m + 1, c]
                out[0, m, c] += v


@njit(cache=True)
def _rhs_pure(psi, out, A, B, G, bet, eps, sq, eff):
    n = psi.shape[1]
    _apply_h(psi.reshape(3, n, 1), out.reshape(3, n, 1), A, B, G, bet, eps, sq, eff)
    o = out.reshape(-1)
    for k in range(o.size):
        o[k] = -1j * o[k]


@njit(cache=True)
def _rhs_rho(rho, out, hr, A, B, G, bet, eps, sq, eff, dmol, kappa, gamma):
    n = rho.shape[1]
    d = 3 * n
    _apply_h(rho.reshape(3, n, d), hr.reshape(3, n, d), A, B, G, bet, eps, sq, eff)
    for i in range(3):
        for m in range(n):
            for j in range(3):
                dm = dmol[i, j] - 0.5 * kappa * m
                for mp in range(n):
                    v = -1j * (hr[i, m, j, mp] - np.conj(hr[j, mp, i, m]))
                    v += (dm - 0.5 * kappa * mp) * rho[i, m, j, mp]
                    out[i, m, j, mp] = v
    if kappa > 0.0:
        for i in range(3):
            for m in range(n - 1):
                for j in range(3):
                    f = kappa * sq[m]
                    for mp in range(n - 1):
                        out[i, m, j, mp] += f * sq[mp] * rho[i, m + 1, j, mp + 1]
    if gamma > 0.0:
        for m in range(n):
            for mp in range(n):
                out[0, m, 0, mp] += gamma * (rho[1, m, 1, mp] + rho[2, m, 2, mp])
                out[1, m, 1, mp] += gamma * rho[2, m, 2, mp]


@njit(cache=True)
def observe_pure(psi, t, phi, sq, row):
    n = psi.shape[1]
    a = 0j
    nb = 0.0
    tot = 0.0
    for i in range(3):
        p = 0.0
        for m in range(n):
            w = psi[i, m].real ** 2 + psi[i, m].imag ** 2
            p += w
            nb += m * w
            if m < n - 1:
                a += np.conj(psi[i, m]) * sq[m] * psi[i, m + 1]
        row[2 + i] = p
        tot += p
    row[0] = t
    row[1] = 2.0 * (np.exp(-1j * phi) * a).real
    row[5] = nb
    row[6] = tot


@njit(cache=True)
def observe_rho(rho, t, phi, sq, row):
    n = rho.shape[1]
    a = 0j
    nb = 0.0
    tot = 0.0
    for i in range(3):
        p = 0.0
        for m in range(n):
            w = rho[i, m, i, m].real
            p += w
            nb += m * w
            if m < n - 1:
                a += sq[m] * rho[i, m + 1, i, m]
        row[2 + i] = p
        tot += p
    row[0] = t
    row[1] = 2.0 * (np.exp(-1j * phi) * a).real
    row[5] = nb
    row[6] = tot


@njit(cache=True)
def advance_pure(psi, s0, s1, dt, stride, phi, om, omt, beta, shift, Delta, delta, gc, eff, obs):
    """RK4 from step ``s0`` to ``s1``; records rows at multiples of ``stride``.

    Returns ``(status, renormalizations, max_norm_drift)``; status 1 means the
    norm drifted beyond 1e-6.
    """
    n = psi.shape[1]
    sq = np.sqrt(np.arange(1, n).astype(np.float64))
    k1 = np.empty_like(psi)
    k2 = np.empty_like(psi)
    k3 = np.empty_like(psi)
    k4 = np.empty_like(psi)
    tmp = np.empty_like(psi)
    fp = psi.reshape(-1)
    f1 = k1.reshape(-1)
    f2 = k2.reshape(-1)
    f3 = k3.reshape(-1)
    f4 = k4.reshape(-1)
    ft = tmp.reshape(-1)
    size = fp.size
    renorm = 0
    drift_max = 0.0
    for s in range(s0, s1):
        t = s * dt
        if s % stride == 0:
            observe_pure(psi, t, phi, sq, obs[s // stride])
            nrm = obs[s // stride, 6]
            drift = abs(nrm - 1.0)
            if drift > drift_max:
                drift_max = drift
            if drift > 1e-6:
                return 1, renorm, drift_max
            if drift > 1e-9:
                sc = 1.0 / np.sqrt(nrm)
                for q in range(size):
                    fp[q] *= sc
                renorm += 1
        A, B, G, bet, eps = _coeffs(t, s, 0, om, omt, beta, shift, Delta, delta, gc, eff)
        _rhs_pure(psi, k1, A, B, G, bet, eps, sq, eff)
        for q in range(size):
            ft[q] = fp[q] + 0.5 * dt * f1[q]
        A, B, G, bet, eps = _coeffs(t + 0.5 * dt, s, 1, om, omt, beta, shift, Delta, delta, gc, eff)
        _rhs_pure(tmp, k2, A, B, G, bet, eps, sq, eff)
        for q in range(size):
            ft[q] = fp[q] + 0.5 * dt * f2[q]
        _rhs_pure(tmp, k3, A, B, G, bet, eps, sq, eff)
        for q in range(size):
            ft[q] = fp[q] + dt * f3[q]
        A, B, G, bet, eps = _coeffs(t + dt, s, 2, om, omt, beta, shift, Delta, delta, gc, eff)
        _rhs_pure(tmp, k4, A, B, G, bet, eps, sq, eff)
        for q in range(size):
            fp[q] += dt / 6.0 * (f1[q] + 2.0 * f2[q] + 2.0 * f3[q] + f4[q])
    return 0, renorm, drift_max


@njit(cache=True)
def advance_rho(rho, s0, s1, dt, stride, phi, om, omt, beta, shift, Delta, delta, gc, eff,
                dmol, kappa, gamma, obs):
    """RK4 for the master equation from step ``s0`` to ``s1``.

    The state is re-symmetrized to ``(rho + rho^dag)/2`` after every step; the
    trace is never renormalized.
    """
    n = rho.shape[1]
    sq = np.sqrt(np.arange(1, n).astype(np.float64))
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    tmp = np.empty_like(rho)
    hr = np.empty_like(rho)
    fp = rho.reshape(-1)
    f1 = k1.reshape(-1)
    f2 = k2.reshape(-1)
    f3 = k3.reshape(-1)
    f4 = k4.reshape(-1)
    ft = tmp.reshape(-1)
    size = fp.size
    d = 3 * n
    for s in range(s0, s1):
        t = s * dt
        if s % stride == 0:
            observe_rho(rho, t, phi, sq, obs[s // stride])
        A, B, G, bet, eps = _coeffs(t, s, 0, om, omt, beta, shift, Delta, delta, gc, eff)
        _rhs_rho(rho, k1, hr, A, B, G, bet, eps, sq, eff, dmol, kappa, gamma)
        for q in range(size):
            ft[q] = fp[q] + 0.5 * dt * f1[q]
        A, B, G, bet, eps = _coeffs(t + 0.5 * dt, s, 1, om, omt, beta, shift, Delta, delta, gc, eff)
        _rhs_rho(tmp, k2, hr, A, B, G, bet, eps, sq, eff, dmol, kappa, gamma)
        for q in range(size):
            ft[q] = fp[q] + 0.5 * dt * f2[q]
        _rhs_rho(tmp, k3, hr, A, B, G, bet, eps, sq, eff, dmol, kappa, gamma)
        for q in range(size):
            ft[q] = fp[q] + dt * f3[q]
        A, B, G, bet, eps = _coeffs(t + dt, s, 2, om, omt, beta, shift, Delta, delta, gc, eff)
        _rhs_rho(tmp, k4, hr, A, B, G, bet, eps, sq, eff, dmol, kappa, gamma)
        for q in range(size):
            fp[q] += dt / 6.0 * (f1[q] + 2.0 * f2[q] + 2.0 * f3[q] + f4[q])
        flat = rho.reshape(d, d)
        for r in range(d):
            flat[r, r] = flat[r, r].real
            for c in range(r + 1, d):
                x = 0.5 * (flat[r, c] + np.conj(flat[c, r]))
                flat[r, c] = x
                flat[c, r] = np.conj(x)
    return 0


def dissipator_diagonal(gamma: float, gamma_phi: float) -> np.ndarray:
    """Molecular block factors of the no-jump part of relaxation and dephasing.

    Entry ``(i, j)`` multiplies block ``rho_ij``: relaxation out of level ``k``
    happens through ``k`` pairs (levels 0, 1, 2 -> 0, 1, 2 channels), and each
    pair's ``sigma_z`` damps coherences by ``(z_i - z_j)^2 gamma_phi / 2``.
    """
    channels = np.array([0.0, 1.0, 2.0])
    out = -0.5 * gamma * (channels[:, None] + channels[None, :])
    for lo, hi in ((0, 1), (0, 2), (1, 2)):
        z = np.zeros(3)
        z[lo], z[hi] = -0.5, 0.5
        out -= 0.5 * gamma_phi * (z[:, None] - z[None, :]) ** 2
    return out
