"""Pure-numpy density-matrix and recombination kernels.

Same signatures and semantics as ``_kernels_numba``. Density matrices are
(2^n, 2^n) complex arrays with qubit 0 on the most significant index bit.
Functions may update ``rho`` in place but callers must use the return value.
"""

import numpy as np


def _blocks(rho, qubits, n):
    """View rho as (..., 2^k, 2^k) blocks over ``qubits`` (row and column)."""
    k = len(qubits)
    t = rho.reshape((2,) * (2 * n))
    src = list(qubits) + [n + q for q in qubits]
    dst = list(range(2 * n - 2 * k, 2 * n))
    t = np.moveaxis(t, src, dst)
    shape = t.shape[: 2 * n - 2 * k]
    return t.reshape(shape + (2**k, 2**k)), src, dst


def _unblocks(b, src, dst, n):
    k = len(src) // 2
    t = b.reshape(b.shape[:-2] + (2,) * (2 * k))
    t = np.moveaxis(t, dst, src)
    return np.ascontiguousarray(t.reshape(2**n, 2**n))


def apply_unitary_1q(rho, u, q, n):
    b, src, dst = _blocks(rho, (q,), n)
    b = u @ b @ u.conj().T
    return _unblocks(b, src, dst, n)


def apply_unitary_2q(rho, u, q0, q1, n):
    b, src, dst = _blocks(rho, (q0, q1), n)
    b = u @ b @ u.conj().T
    return _unblocks(b, src, dst, n)


def depolarize_1q(rho, q, p, n):
    if p == 0.0:
        return rho
    f = 1.0 - 4.0 * p / 3.0
    g = 2.0 * p / 3.0
    b, src, dst = _blocks(rho, (q,), n)
    tr = b[..., 0, 0] + b[..., 1, 1]
    b = f * b + g * tr[..., None, None] * np.eye(2)
    return _unblocks(b, src, dst, n)


def depolarize_2q(rho, q0, q1, p, n):
    if p == 0.0:
        return rho
    f = 1.0 - 16.0 * p / 15.0
    g = 4.0 * p / 15.0
    b, src, dst = _blocks(rho, (q0, q1), n)
    tr = np.trace(b, axis1=-2, axis2=-1)
    b = f * b + g * tr[..., None, None] * np.eye(4)
    return _unblocks(b, src, dst, n)


def pauli_channel_1q(rho, q, px, py, pz, n):
    if px == 0.0 and py == 0.0 and pz == 0.0:
        return rho
    r = 1.0 - px - py - pz
    b, src, dst = _blocks(rho, (q,), n)
    a00 = b[..., 0, 0].copy()
    a11 = b[..., 1, 1].copy()
    a01 = b[..., 0, 1].copy()
    a10 = b[..., 1, 0].copy()
    b[..., 0, 0] = (r + pz) * a00 + (px + py) * a11
    b[..., 1, 1] = (r + pz) * a11 + (px + py) * a00
    b[..., 0, 1] = (r - pz) * a01 + (px - py) * a10
    b[..., 1, 0] = (r - pz) * a10 + (px - py) * a01
    return _unblocks(b, src, dst, n)


def readout_flip(probs, q, f, n):
    """Symmetric classical bit flip on bit ``q`` of a length-2^n probability vector."""
    if f == 0.0:
        return probs
    t = probs.reshape(2**q, 2, 2 ** (n - q - 1))
    out = (1.0 - f) * t + f * t[:, ::-1, :]
    return out.reshape(-1)


def bitwise_marginals(probs, bits):
    """w[k, j] = sum of probs over rows with bits[:, k] == j."""
    b = bits.astype(np.float64)
    w = np.empty((bits.shape[1], 2))
    # sum both sides directly: total - ones cancels badly for tiny marginals
    w[:, 1] = probs @ b
    w[:, 0] = probs @ (1.0 - b)
    return w


def hellinger_dense(p, q):
    bc = np.sum(np.sqrt(p * q))
    return np.sqrt(max(1.0 - bc, 0.0))


def recombine_update(probs, bits, targets, floor):
    w = bitwise_marginals(probs, bits)
    w = np.maximum(w, floor)
    ratio = targets / w  # (n, 2)
    n = bits.shape[1]
    factor = np.ones(probs.shape[0])
    for k in range(n):
        factor += ratio[k, bits[:, k]]
    new = probs * factor
    total = new.sum()
    if not total > 0.0:
        return new, 0.0
    return new / total, total


def recombine_loop(probs, bits, targets, threshold, max_iter, floor):
    """Iterate ``recombine_update`` until the Hellinger step drops below threshold.

    Returns (probs, iterations, last_step, converged, steps, deviations).
    """
    n = bits.shape[1]
    steps = np.zeros(max_iter)
    devs = np.zeros((max_iter, n))
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
        devs[it] = np.abs(w[:, 0] - targets[:, 0])
        steps[it] = step
        cur = new
        it += 1
        if step < threshold:
            converged = True
            break
    return cur, it, step, converged, steps[:it], devs[:it], False
