"""Pure-Python (NumPy) implementations of the hot kernels.

Same signatures and return conventions as the compiled ``_kernels`` module.
"""
import math

import numpy as np

_EPS = np.finfo(float).eps


def evolve_inplace(amps, c, s, l, steps, lo, hi, mode, normalize):
    """Advance ``amps`` by ``steps`` walk steps in place.

    See ``_kernels.evolve_inplace`` for the meaning of ``mode`` and the
    returned ``(norm_log, status, steps_done, lo, hi)`` tuple.
    """
    n = amps.shape[0]
    a = amps[:, 0]
    b = amps[:, 1]
    norm_log = 0.0
    for k in range(steps):
        if mode == 0:
            sl = slice(lo, hi + 1)
        else:
            sl = slice(0, n)
        if mode == 2:
            if c * a[n - 1] + s * b[n - 1] != 0 or l * (s * a[0] - c * b[0]) != 0:
                return norm_log, 1, k, lo, hi
        aa = a[sl]
        bb = b[sl]
        na = c * aa + s * bb
        nb = l * (s * aa - c * bb)
        if mode == 0:
            a[lo + 1:hi + 2] = na
            a[lo] = 0
            b[lo - 1:hi] = nb
            b[hi] = 0
            lo -= 1
            hi += 1
            sl = slice(lo, hi + 1)
        else:
            a[1:] = na[:-1]
            b[:-1] = nb[1:]
            if mode == 1:
                a[0] = na[-1]
                b[-1] = nb[0]
            else:
                a[0] = 0
                b[-1] = 0
        if normalize:
            block = amps[sl]
            nrm2 = float(np.vdot(block, block).real)
            if nrm2 == 0.0:
                return norm_log, 2, k + 1, lo, hi
            nrm = math.sqrt(nrm2)
            block /= nrm
            norm_log += math.log(nrm)
    return norm_log, 0, steps, lo, hi


def hessenberg(H, Q):
    """Householder reduction H <- P^H H P, Q <- Q P (in place)."""
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        vnorm2 = float(np.vdot(v, v).real)
        if vnorm2 == 0.0:
            continue
        tau = 2.0 / vnorm2
        H[k + 1:, k:] -= tau * np.outer(v, v.conj() @ H[k + 1:, k:])
        H[:, k + 1:] -= tau * np.outer(H[:, k + 1:] @ v, v.conj())
        Q[:, k + 1:] -= tau * np.outer(Q[:, k + 1:] @ v, v.conj())
        H[k + 2:, k] = 0


def schur_qr(H, Q, max_iter):
    """Shifted QR iteration on an upper Hessenberg H, to upper triangular form.

    Returns ``(status, index)``; status 1 flags non-convergence at ``index``.
    """
    n = H.shape[0]
    hnorm = np.linalg.norm(H) or 1.0
    hi = n - 1
    it = 0
    rc = np.zeros(max(n, 1), dtype=complex)
    rs = np.zeros(max(n, 1), dtype=complex)
    while hi > 0:
        l = hi
        while l > 0:
            tst = abs(H[l - 1, l - 1]) + abs(H[l, l])
            if tst == 0.0:
                tst = hnorm
            if abs(H[l, l - 1]) <= _EPS * tst:
                H[l, l - 1] = 0
                break
            l -= 1
        if l == hi:
            hi -= 1
            it = 0
            continue
        it += 1
        if it > max_iter:
            return 1, hi
        if it % 11 == 0:
            mu = H[hi, hi] + 0.75 * abs(H[hi, hi - 1])
        else:
            a, b = H[hi - 1, hi - 1], H[hi - 1, hi]
            cc, d = H[hi, hi - 1], H[hi, hi]
            disc = np.sqrt(0.25 * (a - d) ** 2 + b * cc + 0j)
            m1 = 0.5 * (a + d) + disc
            m2 = 0.5 * (a + d) - disc
            mu = m1 if abs(m1 - d) <= abs(m2 - d) else m2
        idx = np.arange(l, hi + 1)
        H[idx, idx] -= mu
        for k in range(l, hi):
            x, y = H[k, k], H[k + 1, k]
            r = math.hypot(abs(x), abs(y))
            gc, gs = (x / r, y / r) if r != 0.0 else (1.0, 0.0)
            rc[k], rs[k] = gc, gs
            t1 = H[k, k:].copy()
            t2 = H[k + 1, k:]
            H[k, k:] = np.conj(gc) * t1 + np.conj(gs) * t2
            H[k + 1, k:] = -gs * t1 + gc * t2
        for k in range(l, hi):
            gc, gs = rc[k], rs[k]
            t1 = H[:k + 2, k].copy()
            t2 = H[:k + 2, k + 1]
            H[:k + 2, k] = gc * t1 + gs * t2
            H[:k + 2, k + 1] = -np.conj(gs) * t1 + np.conj(gc) * t2
            t1 = Q[:, k].copy()
            t2 = Q[:, k + 1]
            Q[:, k] = gc * t1 + gs * t2
            Q[:, k + 1] = -np.conj(gs) * t1 + np.conj(gc) * t2
        H[idx, idx] += mu
    H[np.tril_indices(n, -1)] = 0
    return 0, hi


def schur_vectors(T, Q):
    """Right eigenvectors of A = Q T Q^H by back substitution on T."""
    n = T.shape[0]
    tnorm = np.linalg.norm(np.triu(T)) or 1.0
    small = _EPS * tnorm
    big = 1.0 / (_EPS * _EPS)
    V = np.zeros((n, n), dtype=complex)
    for i in range(n):
        lam = T[i, i]
        y = np.zeros(i + 1, dtype=complex)
        y[i] = 1.0
        for j in range(i - 1, -1, -1):
            acc = T[j, i] + T[j, j + 1:i] @ y[j + 1:i]
            den = T[j, j] - lam
            if abs(den) < small:
                den = small
            y[j] = -acc / den
            if abs(y[j]) > big:
                y[j:] /= abs(y[j])
        v = Q[:, :i + 1] @ y
        vn = np.linalg.norm(v)
        V[:, i] = v / vn if vn > 0 else v
    return V
