"""numba-compiled density-matrix and recombination kernels.

Mirrors ``_kernels_numpy`` exactly; all kernels update in place and return
the updated array.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def apply_unitary_1q(rho, u, q, n):
    dim = rho.shape[0]
    mask = 1 << (n - 1 - q)
    u00, u01, u10, u11 = u[0, 0], u[0, 1], u[1, 0], u[1, 1]
    for i0 in range(dim):
        if i0 & mask:
            continue
        i1 = i0 | mask
        for j in range(dim):
            a = rho[i0, j]
            b = rho[i1, j]
            rho[i0, j] = u00 * a + u01 * b
            rho[i1, j] = u10 * a + u11 * b
    c00, c01, c10, c11 = np.conj(u00), np.conj(u01), np.conj(u10), np.conj(u11)
    for i in range(dim):
        for j0 in range(dim):
            if j0 & mask:
                continue
            j1 = j0 | mask
            a = rho[i, j0]
            b = rho[i, j1]
            rho[i, j0] = a * c00 + b * c01
            rho[i, j1] = a * c10 + b * c11
    return rho


@njit(cache=True)
def apply_unitary_2q(rho, u, q0, q1, n):
    dim = rho.shape[0]
    m0 = 1 << (n - 1 - q0)
    m1 = 1 << (n - 1 - q1)
    idx = np.empty(4, dtype=np.int64)
    vec = np.empty(4, dtype=np.complex128)
    uc = np.conj(u)
    for base in range(dim):
        if base & m0 or base & m1:
            continue
        idx[0] = base
        idx[1] = base | m1
        idx[2] = base | m0
        idx[3] = base | m0 | m1
        for j in range(dim):
            for a in range(4):
                vec[a] = rho[idx[a], j]
            for a in range(4):
                acc = 0j
                for b in range(4):
                    acc += u[a, b] * vec[b]
                rho[idx[a], j] = acc
    for i in range(dim):
        for base in range(dim):
            if base & m0 or base & m1:
                continue
            idx[0] = base
            idx[1] = base | m1
            idx[2] = base | m0
            idx[3] = base | m0 | m1
            for a in range(4):
                vec[a] = rho[i, idx[a]]
            for a in range(4):
                acc = 0j
                for b in range(4):
                    acc += vec[b] * uc[a, b]
                rho[i, idx[a]] = acc
    return rho


@njit(cache=True)
def depolarize_1q(rho, q, p, n):
    if p == 0.0:
        return rho
    dim = rho.shape[0]
    mask = 1 << (n - 1 - q)
    f = 1.0 - 4.0 * p / 3.0
    g = 2.0 * p / 3.0
    for i0 in range(dim):
        if i0 & mask:
            continue
        i1 = i0 | mask
        for j0 in range(dim):
            if j0 & mask:
                continue
            j1 = j0 | mask
            s = rho[i0, j0] + rho[i1, j1]
            rho[i0, j0] = f * rho[i0, j0] + g * s
            rho[i1, j1] = f * rho[i1, j1] + g * s
            rho[i0, j1] = f * rho[i0, j1]
            rho[i1, j0] = f * rho[i1, j0]
    return rho


@njit(cache=True)
def depolarize_2q(rho, q0, q1, p, n):
    if p == 0.0:
        return rho
    dim = rho.shape[0]
    m0 = 1 << (n - 1 - q0)
    m1 = 1 << (n - 1 - q1)
    f = 1.0 - 16.0 * p / 15.0
    g = 4.0 * p / 15.0
    ii = np.empty(4, dtype=np.int64)
    jj = np.empty(4, dtype=np.int64)
    for bi in range(dim):
        if bi & m0 or bi & m1:
            continue
        ii[0] = bi
        ii[1] = bi | m1
        ii[2] = bi | m0
        ii[3] = bi | m0 | m1
        for bj in range(dim):
            if bj & m0 or bj & m1:
                continue
            jj[0] = bj
            jj[1] = bj | m1
            jj[2] = bj | m0
            jj[3] = bj | m0 | m1
            s = 0j
            for a in range(4):
                s += rho[ii[a], jj[a]]
            for a in range(4):
                for b in range(4):
                    rho[ii[a], jj[b]] = f * rho[ii[a], jj[b]]
                rho[ii[a], jj[a]] += g * s
    return rho


@njit(cache=True)
def pauli_channel_1q(rho, q, px, py, pz, n):
    if px == 0.0 and py == 0.0 and pz == 0.0:
        return rho
    dim = rho.shape[0]
    mask = 1 << (n - 1 - q)
    r = 1.0 - px - py - pz
    for i0 in range(dim):
        if i0 & mask:
            continue
        i1 = i0 | mask
        for j0 in range(dim):
            if j0 & mask:
                continue
            j1 = j0 | mask
            a00 = rho[i0, j0]
            a11 = rho[i1, j1]
            a01 = rho[i0, j1]
            a10 = rho[i1, j0]
            rho[i0, j0] = (r + pz) * a00 + (px + py) * a11
            rho[i1, j1] = (r + pz) * a11 + (px + py) * a00
            rho[i0, j1] = (r - pz) * a01 + (px - py) * a10
            rho[i1, j0] = (r - pz) * a10 + (px - py) * a01
    return rho


@njit(cache=True)
def readout_flip(probs, q, f, n):
    if f == 0.0:
        return probs
    mask = 1 << (n - 1 - q)
    for i0 in range(probs.shape[0]):
        if i0 & mask:
            continue
        i1 = i0 | mask
        a = probs[i0]
        b = probs[i1]
        probs[i0] = (1.0 - f) * a + f * b
        probs[i1] = (1.0 - f) * b + f * a
    return probs


@njit(cache=True)
def bitwise_marginals(probs, bits):
    nk = bits.shape[1]
    w = np.zeros((nk, 2))
    for s in range(probs.shape[0]):
        for k in range(nk):
            w[k, bits[s, k]] += probs[s]
    return w


@njit(cache=True)
def hellinger_dense(p, q):
    bc = 0.0
    for s in range(p.shape[0]):
        bc += np.sqrt(p[s] * q[s])
    d = 1.0 - bc
    if d < 0.0:
        d = 0.0
    return np.sqrt(d)


@njit(cache=True)
def recombine_update(probs, bits, targets, floor):
    nk = bits.shape[1]
    w = bitwise_marginals(probs, bits)
    ratio = np.empty((nk, 2))
    for k in range(nk):
        for j in range(2):
            ratio[k, j] = targets[k, j] / max(w[k, j], floor)
    new = np.empty_like(probs)
    total = 0.0
    for s in range(probs.shape[0]):
        factor = 1.0
        for k in range(nk):
            factor += ratio[k, bits[s, k]]
        new[s] = probs[s] * factor
        total += new[s]
    if not total > 0.0:
        return new, 0.0
    for s in range(probs.shape[0]):
        new[s] /= total
    return new, total


@njit(cache=True)
def recombine_loop(probs, bits, targets, threshold, max_iter, floor):
    nk = bits.shape[1]
    steps = np.zeros(max_iter)
    devs = np.zeros((max_iter, nk))
    cur = probs.copy()
    it = 0
    step = np.inf
    converged = False
    while it < max_iter:
        new, total = recombine_update(cur, bits, targets, floor)
        if not total > 0.0:
            return new, it, step, False, steps[:it], devs[:it], True
        step = hellinger_dense(new, cur)
        w = bitwise_marginals(new, bits)
        for k in range(nk):
            devs[it, k] = abs(w[k, 0] - targets[k, 0])
        steps[it] = step
        cur = new
        it += 1
        if step < threshold:
            converged = True
            break
    return cur, it, step, converged, steps[:it], devs[:it], False
