# cython: language_level=3
"""Compiled hot loops: walk evolution and the dense complex eigensolver.

Signatures and return conventions mirror ``nhqw._fallback`` exactly; the
backend selector in ``nhqw._backend`` treats the two modules as drop-in
replacements for one another.
"""
from libc.math cimport sqrt, fabs, log, hypot, copysign

import numpy as np

DEF EPS = 2.220446049250313e-16

cdef inline double cabs2(double complex z) nogil:
    return z.real * z.real + z.imag * z.imag

cdef inline double cmod(double complex z) nogil:
    return hypot(z.real, z.imag)

cdef inline double complex csqrt_(double complex z) nogil:
    cdef double x = z.real, y = z.imag, r, t
    r = hypot(x, y)
    if r == 0.0:
        return 0.0
    t = sqrt(0.5 * (r + fabs(x)))
    if x >= 0.0:
        return t + 1j * (y / (2.0 * t))
    return fabs(y) / (2.0 * t) + 1j * copysign(t, y)


def evolve_inplace(double complex[:, ::1] amps, double c, double s, double l,
                   long steps, long lo, long hi, int mode, bint normalize):
    """Advance ``amps`` by ``steps`` walk steps in place.

    mode 0: infinite line, the support window [lo, hi] grows by one site per
    side each step (the buffer must already hold the padding);
    mode 1: periodic ring over the whole buffer;
    mode 2: open chain over the whole buffer, stopping before any amplitude
    would leave it.

    Returns (norm_log, status, steps_done, lo, hi); status 0 ok, 1 boundary
    exit, 2 zero norm.
    """
    # every operation is real-linear, so work on (re_a, im_a, re_b, im_b) rows
    cdef double[:, ::1] A = np.asarray(amps).view(np.float64)
    cdef long n = A.shape[0]
    cdef long k, x, start, stop, done = 0
    cdef double ar, ai, br, bi, wr0, wi0, wr1, wi1
    cdef double nrm2, inv, norm_log = 0.0
    cdef double ls = l * s, lc = l * c
    cdef int status = 0
    with nogil:
        for k in range(steps):
            if mode == 0:
                start = lo
                stop = hi + 1
            else:
                start = 0
                stop = n
            if mode == 2:
                if (c * A[n - 1, 0] + s * A[n - 1, 2] != 0.0
                        or c * A[n - 1, 1] + s * A[n - 1, 3] != 0.0
                        or ls * A[0, 0] - lc * A[0, 2] != 0.0
                        or ls * A[0, 1] - lc * A[0, 3] != 0.0):
                    status = 1
                    break
            # coin then loss, on site
            for x in range(start, stop):
                ar = A[x, 0]
                ai = A[x, 1]
                br = A[x, 2]
                bi = A[x, 3]
                A[x, 0] = c * ar + s * br
                A[x, 1] = c * ai + s * bi
                A[x, 2] = ls * ar - lc * br
                A[x, 3] = ls * ai - lc * bi
            # conditional shift: H -> x+1, V -> x-1
            if mode == 0:
                for x in range(stop, start, -1):
                    A[x, 0] = A[x - 1, 0]
                    A[x, 1] = A[x - 1, 1]
                A[start, 0] = 0.0
                A[start, 1] = 0.0
                for x in range(start - 1, stop - 1):
                    A[x, 2] = A[x + 1, 2]
                    A[x, 3] = A[x + 1, 3]
                A[stop - 1, 2] = 0.0
                A[stop - 1, 3] = 0.0
                lo -= 1
                hi += 1
                start = lo
                stop = hi + 1
            else:
                wr0 = A[n - 1, 0]
                wi0 = A[n - 1, 1]
                wr1 = A[0, 2]
                wi1 = A[0, 3]
                for x in range(n - 1, 0, -1):
                    A[x, 0] = A[x - 1, 0]
                    A[x, 1] = A[x - 1, 1]
                for x in range(0, n - 1):
                    A[x, 2] = A[x + 1, 2]
                    A[x, 3] = A[x + 1, 3]
                if mode == 1:
                    A[0, 0] = wr0
                    A[0, 1] = wi0
                    A[n - 1, 2] = wr1
                    A[n - 1, 3] = wi1
                else:
                    A[0, 0] = 0.0
                    A[0, 1] = 0.0
                    A[n - 1, 2] = 0.0
                    A[n - 1, 3] = 0.0
            done = k + 1
            if normalize:
                nrm2 = 0.0
                for x in range(start, stop):
                    nrm2 += (A[x, 0] * A[x, 0] + A[x, 1] * A[x, 1]
                             + A[x, 2] * A[x, 2] + A[x, 3] * A[x, 3])
                if nrm2 == 0.0:
                    status = 2
                    break
                inv = 1.0 / sqrt(nrm2)
                for x in range(start, stop):
                    A[x, 0] *= inv
                    A[x, 1] *= inv
                    A[x, 2] *= inv
                    A[x, 3] *= inv
                norm_log += 0.5 * log(nrm2)
    return norm_log, status, done, lo, hi


def hessenberg(double complex[:, ::1] H, double complex[:, ::1] Q):
    """Householder reduction H <- P^H H P, Q <- Q P (in place)."""
    cdef long n = H.shape[0]
    cdef long k, i, j
    cdef double alpha, xnorm, vnorm2, tau
    cdef double complex phase, acc
    cdef double complex[::1] v = np.zeros(n, dtype=np.complex128)
    with nogil:
        for k in range(n - 2):
            xnorm = 0.0
            for i in range(k + 1, n):
                xnorm += cabs2(H[i, k])
            alpha = sqrt(xnorm)
            if alpha == 0.0:
                continue
            if cmod(H[k + 1, k]) == 0.0:
                phase = 1.0
            else:
                phase = H[k + 1, k] / cmod(H[k + 1, k])
            for i in range(k + 1, n):
                v[i] = H[i, k]
            v[k + 1] = v[k + 1] + phase * alpha
            vnorm2 = 0.0
            for i in range(k + 1, n):
                vnorm2 += cabs2(v[i])
            if vnorm2 == 0.0:
                continue
            tau = 2.0 / vnorm2
            # left: rows k+1.., columns k..
            for j in range(k, n):
                acc = 0.0
                for i in range(k + 1, n):
                    acc = acc + v[i].conjugate() * H[i, j]
                acc = acc * tau
                for i in range(k + 1, n):
                    H[i, j] = H[i, j] - v[i] * acc
            # right: all rows, columns k+1..
            for i in range(n):
                acc = 0.0
                for j in range(k + 1, n):
                    acc = acc + H[i, j] * v[j]
                acc = acc * tau
                for j in range(k + 1, n):
                    H[i, j] = H[i, j] - acc * v[j].conjugate()
                acc = 0.0
                for j in range(k + 1, n):
                    acc = acc + Q[i, j] * v[j]
                acc = acc * tau
                for j in range(k + 1, n):
                    Q[i, j] = Q[i, j] - acc * v[j].conjugate()
            for i in range(k + 2, n):
                H[i, k] = 0


def schur_qr(double complex[:, ::1] H, double complex[:, ::1] Q, long max_iter):
    """Shifted QR iteration on an upper Hessenberg H, to upper triangular form.

    Returns (status, index): status 0 on success, 1 if the eigenvalue at
    ``index`` did not converge within ``max_iter`` iterations.
    """
    cdef long n = H.shape[0]
    cdef long hi = n - 1, l, k, i, j, it = 0
    cdef double hnorm = 0.0, tst, r
    cdef double complex mu, a, b, cc, d, disc, m1, m2, x, y, gc, gs, t1, t2
    cdef double complex[::1] rc = np.zeros(max(n, 1), dtype=np.complex128)
    cdef double complex[::1] rs = np.zeros(max(n, 1), dtype=np.complex128)
    cdef int status = 0
    with nogil:
        for i in range(n):
            for j in range(n):
                hnorm += cabs2(H[i, j])
        hnorm = sqrt(hnorm)
        if hnorm == 0.0:
            hnorm = 1.0
        while hi > 0:
            l = hi
            while l > 0:
                tst = cmod(H[l - 1, l - 1]) + cmod(H[l, l])
                if tst == 0.0:
                    tst = hnorm
                if cmod(H[l, l - 1]) <= EPS * tst:
                    H[l, l - 1] = 0
                    break
                l -= 1
            if l == hi:
                hi -= 1
                it = 0
                continue
            it += 1
            if it > max_iter:
                status = 1
                break
            if it % 11 == 0:
                # exceptional shift
                mu = H[hi, hi] + 0.75 * cmod(H[hi, hi - 1])
            else:
                a = H[hi - 1, hi - 1]
                b = H[hi - 1, hi]
                cc = H[hi, hi - 1]
                d = H[hi, hi]
                disc = csqrt_(0.25 * (a - d) * (a - d) + b * cc)
                m1 = 0.5 * (a + d) + disc
                m2 = 0.5 * (a + d) - disc
                if cabs2(m1 - d) <= cabs2(m2 - d):
                    mu = m1
                else:
                    mu = m2
            for i in range(l, hi + 1):
                H[i, i] = H[i, i] - mu
            # R = G_{hi-1} ... G_l (H - mu I)
            for k in range(l, hi):
                x = H[k, k]
                y = H[k + 1, k]
                r = sqrt(cabs2(x) + cabs2(y))
                if r == 0.0:
                    gc = 1.0
                    gs = 0.0
                else:
                    gc = x / r
                    gs = y / r
                rc[k] = gc
                rs[k] = gs
                for j in range(k, n):
                    t1 = H[k, j]
                    t2 = H[k + 1, j]
                    H[k, j] = gc.conjugate() * t1 + gs.conjugate() * t2
                    H[k + 1, j] = -gs * t1 + gc * t2
            # H <- R G^H, Q <- Q G^H
            for k in range(l, hi):
                gc = rc[k]
                gs = rs[k]
                for i in range(0, k + 2):
                    t1 = H[i, k]
                    t2 = H[i, k + 1]
                    H[i, k] = gc * t1 + gs * t2
                    H[i, k + 1] = -gs.conjugate() * t1 + gc.conjugate() * t2
                for i in range(n):
                    t1 = Q[i, k]
                    t2 = Q[i, k + 1]
                    Q[i, k] = gc * t1 + gs * t2
                    Q[i, k + 1] = -gs.conjugate() * t1 + gc.conjugate() * t2
            for i in range(l, hi + 1):
                H[i, i] = H[i, i] + mu
        for i in range(1, n):
            for j in range(i):
                H[i, j] = 0
    return status, hi


def schur_vectors(double complex[:, ::1] T, double complex[:, ::1] Q):
    """Right eigenvectors of A = Q T Q^H by back substitution on T.

    Returns an (n, n) array whose columns are unit-norm eigenvectors.
    """
    cdef long n = T.shape[0]
    cdef long i, j, m
    cdef double tnorm = 0.0, small, big, scale, vn
    cdef double complex lam, acc, den
    V = np.zeros((n, n), dtype=np.complex128)
    cdef double complex[:, ::1] Vv = V
    cdef double complex[::1] y = np.zeros(max(n, 1), dtype=np.complex128)
    with nogil:
        for i in range(n):
            for j in range(i, n):
                tnorm += cabs2(T[i, j])
        tnorm = sqrt(tnorm)
        if tnorm == 0.0:
            tnorm = 1.0
        small = EPS * tnorm
        big = 1.0 / (EPS * EPS)
        for i in range(n):
            lam = T[i, i]
            for j in range(n):
                y[j] = 0
            y[i] = 1.0
            for j in range(i - 1, -1, -1):
                acc = T[j, i]
                for m in range(j + 1, i):
                    acc = acc + T[j, m] * y[m]
                den = T[j, j] - lam
                if cmod(den) < small:
                    den = small
                y[j] = -acc / den
                if cmod(y[j]) > big:
                    scale = 1.0 / cmod(y[j])
                    for m in range(j, i + 1):
                        y[m] = y[m] * scale
            vn = 0.0
            for m in range(n):
                acc = 0.0
                for j in range(i + 1):
                    acc = acc + Q[m, j] * y[j]
                Vv[m, i] = acc
                vn += cabs2(acc)
            vn = sqrt(vn)
            if vn > 0.0:
                for m in range(n):
                    Vv[m, i] = Vv[m, i] / vn
    return V
