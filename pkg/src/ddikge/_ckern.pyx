# cython: language_level=3
"""Compiled kernel backend.

Mirrors _pykern.py loop for loop: same accumulation orders, same libm
calls, compiled with fp-contract off, so results are bit-identical to
the pure-Python backend on a given platform. Keep the two in sync.
"""

import numpy as np

from libc.math cimport cos, exp, fabs, log, sin, sqrt

BACKEND_NAME = "compiled"

TRANSE_L1 = 0
TRANSE_L2 = 1
DISTMULT = 2
COMPLEX = 3
SIMPLE = 4
ROTATE = 5

cdef double U_LO = 1e-12
cdef double U_HI = 1.0 - 1e-12


# ---------------------------------------------------------------------------
# linear algebra


def matmul(double[:, ::1] a, double[:, ::1] b):
    """out = a @ b. a (r,k), b (k,c) -> out (r,c). Sum over k ascending."""
    cdef Py_ssize_t r = a.shape[0], k = a.shape[1], c = b.shape[1]
    cdef Py_ssize_t i, j, l
    cdef double acc
    out = np.empty((r, c))
    cdef double[:, ::1] o = out
    for i in range(r):
        for j in range(c):
            acc = 0.0
            for l in range(k):
                acc += a[i, l] * b[l, j]
            o[i, j] = acc
    return out


def matvec(double[:, ::1] w, double[::1] x):
    """out = w @ x. w (r,c), x (c,) -> out (r,). Sum over columns ascending."""
    cdef Py_ssize_t r = w.shape[0], c = w.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc
    out = np.empty(r)
    cdef double[::1] o = out
    for i in range(r):
        acc = 0.0
        for j in range(c):
            acc += w[i, j] * x[j]
        o[i] = acc
    return out


def matvec_t(double[:, ::1] w, double[::1] v):
    """out = w.T @ v. w (r,c), v (r,) -> out (c,). Sum over rows ascending."""
    cdef Py_ssize_t r = w.shape[0], c = w.shape[1]
    cdef Py_ssize_t i, j
    cdef double vi
    out = np.zeros(c)
    cdef double[::1] o = out
    for i in range(r):
        vi = v[i]
        for j in range(c):
            o[j] += w[i, j] * vi
    return out


def sq_diff_sum(a, b):
    """Sum of squared differences, ascending over the flat arrays."""
    cdef double[::1] av = a.ravel()
    cdef double[::1] bv = b.ravel()
    cdef Py_ssize_t i, n = av.shape[0]
    cdef double acc = 0.0, d
    for i in range(n):
        d = av[i] - bv[i]
        acc += d * d
    return acc


# ---------------------------------------------------------------------------
# convolution (valid padding, stride 1)


def conv2d_forward(double[:, ::1] x, double[:, :, ::1] f):
    """Cross-correlate x (rows,cols) with filters f (nf,kh,kw) -> (nf,m,n)."""
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    cdef Py_ssize_t nf = f.shape[0], kh = f.shape[1], kw = f.shape[2]
    cdef Py_ssize_t m = rows - kh + 1, n = cols - kw + 1
    cdef Py_ssize_t q, i, j, u, v
    cdef double acc
    out = np.empty((nf, m, n))
    cdef double[:, :, ::1] o = out
    for q in range(nf):
        for i in range(m):
            for j in range(n):
                acc = 0.0
                for u in range(kh):
                    for v in range(kw):
                        acc += x[i + u, j + v] * f[q, u, v]
                o[q, i, j] = acc
    return out


def conv2d_backward(double[:, ::1] x, double[:, :, ::1] f, double[:, :, ::1] up):
    """Gradients of conv2d_forward wrt x and f given upstream (nf,m,n)."""
    cdef Py_ssize_t rows = x.shape[0], cols = x.shape[1]
    cdef Py_ssize_t nf = f.shape[0], kh = f.shape[1], kw = f.shape[2]
    cdef Py_ssize_t m = rows - kh + 1, n = cols - kw + 1
    cdef Py_ssize_t q, i, j, u, v
    cdef double g
    gx = np.zeros((rows, cols))
    gf = np.zeros((nf, kh, kw))
    cdef double[:, ::1] gxv = gx
    cdef double[:, :, ::1] gfv = gf
    for q in range(nf):
        for i in range(m):
            for j in range(n):
                g = up[q, i, j]
                for u in range(kh):
                    for v in range(kw):
                        gfv[q, u, v] += g * x[i + u, j + v]
                        gxv[i + u, j + v] += g * f[q, u, v]
    return gx, gf


# ---------------------------------------------------------------------------
# softmax with temperature, Gumbel noise


def softmax_temp(double[::1] logits, double tau):
    """softmax(logits / tau) with max-subtraction. tau > 0."""
    cdef Py_ssize_t n = logits.shape[0]
    cdef Py_ssize_t i
    cdef double mx = logits[0]
    for i in range(1, n):
        if logits[i] > mx:
            mx = logits[i]
    out = np.empty(n)
    cdef double[::1] e = out
    cdef double s = 0.0, ei
    for i in range(n):
        ei = exp((logits[i] - mx) / tau)
        e[i] = ei
        s += ei
    for i in range(n):
        e[i] = e[i] / s
    return out


def softmax_temp_backward(double[::1] probs, double[::1] upstream, double tau):
    """grad_logits for y = softmax(logits/tau): p * (u - <u,p>) / tau."""
    cdef Py_ssize_t n = probs.shape[0]
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(n):
        s += upstream[i] * probs[i]
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = probs[i] * (upstream[i] - s) / tau
    return out


def gumbel_from_uniform(double[::1] u):
    """-log(-log(u)) with u clamped to [1e-12, 1 - 1e-12]."""
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    cdef double ui
    out = np.empty(n)
    cdef double[::1] o = out
    for i in range(n):
        ui = u[i]
        if ui < U_LO:
            ui = U_LO
        elif ui > U_HI:
            ui = U_HI
        o[i] = -log(-log(ui))
    return out


# ---------------------------------------------------------------------------
# scorers (see _pykern for layout notes; higher is better)


cdef inline double _score_transe(const double* h, const double* r, const double* t,
                                 Py_ssize_t eh, bint l2) noexcept:
    cdef Py_ssize_t j
    cdef double acc = 0.0, d
    if l2:
        for j in range(eh):
            d = (h[j] + r[j]) - t[j]
            acc += d * d
        return -sqrt(acc)
    for j in range(eh):
        acc += fabs((h[j] + r[j]) - t[j])
    return -acc


cdef inline double _score_distmult(const double* h, const double* r, const double* t,
                                   Py_ssize_t eh) noexcept:
    cdef Py_ssize_t j
    cdef double acc = 0.0
    for j in range(eh):
        acc += r[j] * (h[j] * t[j])
    return acc


cdef inline double _score_complex(const double* h, const double* r, const double* t,
                                  Py_ssize_t eh) noexcept:
    cdef Py_ssize_t d2 = eh // 2
    cdef Py_ssize_t j
    cdef double acc = 0.0, a, b, c, dd, re, im
    for j in range(d2):
        a = h[j]
        b = h[d2 + j]
        c = r[j]
        dd = r[d2 + j]
        re = a * c - b * dd
        im = a * dd + b * c
        acc += re * t[j] + im * t[d2 + j]
    return acc


cdef inline double _score_simple(const double* h, const double* r, const double* t,
                                 Py_ssize_t eh) noexcept:
    cdef Py_ssize_t d2 = eh // 2
    cdef Py_ssize_t j
    cdef double acc1 = 0.0, acc2 = 0.0
    for j in range(d2):
        acc1 += (h[j] * r[j]) * t[d2 + j]
        acc2 += (t[j] * r[d2 + j]) * h[d2 + j]
    return 0.5 * (acc1 + acc2)


cdef inline double _score_rotate(const double* h, const double* r, const double* t,
                                 Py_ssize_t d) noexcept:
    cdef Py_ssize_t j
    cdef double acc = 0.0, cs, sn, u, v, s
    for j in range(d):
        cs = cos(r[j])
        sn = sin(r[j])
        u = (h[j] * cs - h[d + j] * sn) - t[j]
        v = (h[j] * sn + h[d + j] * cs) - t[d + j]
        s = u * u + v * v
        acc += s
    return -sqrt(acc)


cdef inline double _score_ptr(int tag, const double* h, const double* r, const double* t,
                              Py_ssize_t eh, Py_ssize_t rh) noexcept:
    if tag == 0:
        return _score_transe(h, r, t, eh, 0)
    if tag == 1:
        return _score_transe(h, r, t, eh, 1)
    if tag == 2:
        return _score_distmult(h, r, t, eh)
    if tag == 3:
        return _score_complex(h, r, t, eh)
    if tag == 4:
        return _score_simple(h, r, t, eh)
    return _score_rotate(h, r, t, rh)


def score_one(int tag, double[::1] h, double[::1] r, double[::1] t):
    """Score a single (h, r, t) from flat storage rows."""
    if tag < 0 or tag > 5:
        raise ValueError(f"unknown scorer tag {tag}")
    return _score_ptr(tag, &h[0], &r[0], &t[0], h.shape[0], r.shape[0])


def grad_one(int tag, double[::1] h, double[::1] r, double[::1] t):
    """d(score)/d(h, r, t) as three arrays shaped like the inputs."""
    cdef Py_ssize_t eh = h.shape[0], rh = r.shape[0]
    cdef Py_ssize_t j, d2, d
    cdef double dv, s, acc, n, a, b, c, dd, e, f, cs, sn, u, v, g, rotre, rotim
    gh_arr = np.zeros(eh)
    gr_arr = np.zeros(rh)
    gt_arr = np.zeros(eh)
    cdef double[::1] gh = gh_arr
    cdef double[::1] gr = gr_arr
    cdef double[::1] gt = gt_arr
    cdef double[::1] diffs, us, vs

    if tag == 0:
        for j in range(eh):
            dv = (h[j] + r[j]) - t[j]
            s = 1.0 if dv > 0.0 else (-1.0 if dv < 0.0 else 0.0)
            gh[j] = -s
            gr[j] = -s
            gt[j] = s
    elif tag == 1:
        acc = 0.0
        diffs = np.empty(eh)
        for j in range(eh):
            dv = (h[j] + r[j]) - t[j]
            diffs[j] = dv
            acc += dv * dv
        n = sqrt(acc)
        if n != 0.0:
            for j in range(eh):
                g = diffs[j] / n
                gh[j] = -g
                gr[j] = -g
                gt[j] = g
    elif tag == 2:
        for j in range(eh):
            gh[j] = r[j] * t[j]
            gr[j] = h[j] * t[j]
            gt[j] = r[j] * h[j]
    elif tag == 3:
        d2 = eh // 2
        for j in range(d2):
            a = h[j]
            b = h[d2 + j]
            c = r[j]
            dd = r[d2 + j]
            e = t[j]
            f = t[d2 + j]
            gh[j] = c * e + dd * f
            gh[d2 + j] = c * f - dd * e
            gr[j] = a * e + b * f
            gr[d2 + j] = a * f - b * e
            gt[j] = a * c - b * dd
            gt[d2 + j] = a * dd + b * c
    elif tag == 4:
        d2 = eh // 2
        for j in range(d2):
            gh[j] = 0.5 * (r[j] * t[d2 + j])
            gh[d2 + j] = 0.5 * (t[j] * r[d2 + j])
            gr[j] = 0.5 * (h[j] * t[d2 + j])
            gr[d2 + j] = 0.5 * (t[j] * h[d2 + j])
            gt[j] = 0.5 * (r[d2 + j] * h[d2 + j])
            gt[d2 + j] = 0.5 * (h[j] * r[j])
    elif tag == 5:
        d = rh
        acc = 0.0
        us = np.empty(d)
        vs = np.empty(d)
        for j in range(d):
            cs = cos(r[j])
            sn = sin(r[j])
            u = (h[j] * cs - h[d + j] * sn) - t[j]
            v = (h[j] * sn + h[d + j] * cs) - t[d + j]
            us[j] = u
            vs[j] = v
            s = u * u + v * v
            acc += s
        n = sqrt(acc)
        if n != 0.0:
            for j in range(d):
                cs = cos(r[j])
                sn = sin(r[j])
                u = us[j]
                v = vs[j]
                rotre = h[j] * cs - h[d + j] * sn
                rotim = h[j] * sn + h[d + j] * cs
                gh[j] = -(u * cs + v * sn) / n
                gh[d + j] = (u * sn - v * cs) / n
                gr[j] = (u * rotim - v * rotre) / n
                gt[j] = u / n
                gt[d + j] = v / n
    else:
        raise ValueError(f"unknown scorer tag {tag}")
    return gh_arr, gr_arr, gt_arr


def sweep_scores(int tag, double[:, ::1] ent, double[::1] r, double[::1] fixed, int side):
    """Score every entity row as the open slot of a partial triplet.

    side 0: fixed is the head, candidates fill the tail.
    side 1: fixed is the tail, candidates fill the head.
    """
    if tag < 0 or tag > 5:
        raise ValueError(f"unknown scorer tag {tag}")
    cdef Py_ssize_t ne = ent.shape[0], eh = ent.shape[1], rh = r.shape[0]
    cdef Py_ssize_t i
    out = np.empty(ne)
    cdef double[::1] o = out
    if side == 0:
        for i in range(ne):
            o[i] = _score_ptr(tag, &fixed[0], &r[0], &ent[i, 0], eh, rh)
    else:
        for i in range(ne):
            o[i] = _score_ptr(tag, &ent[i, 0], &r[0], &fixed[0], eh, rh)
    return out
