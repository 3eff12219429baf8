"""Pure-Python kernel backend.

Reference implementation of the numeric hot paths. The compiled backend
(_ckern) mirrors every loop and accumulation order here, so both produce
bit-identical float64 results on a given platform. Keep the two in sync:
any change to an arithmetic expression must land in both files.

Conventions: all arrays are C-contiguous float64; reductions run in
ascending index order; transcendentals go through libm (math module here,
libc.math in the compiled twin).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

# Scorer tags shared with the compiled backend.
TRANSE_L1 = 0
TRANSE_L2 = 1
DISTMULT = 2
COMPLEX = 3
SIMPLE = 4
ROTATE = 5

_U_LO = 1e-12
_U_HI = 1.0 - 1e-12


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a, b):
    """out = a @ b. a (r,k), b (k,c) -> out (r,c). Sum over k ascending."""
    r, k = a.shape
    c = b.shape[1]
    al = a.tolist()
    bl = b.tolist()
    out = np.empty((r, c))
    for i in range(r):
        ai = al[i]
        row = out[i]
        for j in range(c):
            acc = 0.0
            for l in range(k):
                acc += ai[l] * bl[l][j]
            row[j] = acc
    return out


def matvec(w, x):
    """out = w @ x. w (r,c), x (c,) -> out (r,). Sum over columns ascending."""
    r, c = w.shape
    wl = w.tolist()
    xl = x.tolist()
    out = np.empty(r)
    for i in range(r):
        wi = wl[i]
        acc = 0.0
        for j in range(c):
            acc += wi[j] * xl[j]
        out[i] = acc
    return out


def matvec_t(w, v):
    """out = w.T @ v. w (r,c), v (r,) -> out (c,). Sum over rows ascending."""
    r, c = w.shape
    wl = w.tolist()
    vl = v.tolist()
    acc = [0.0] * c
    for i in range(r):
        wi = wl[i]
        vi = vl[i]
        for j in range(c):
            acc[j] += wi[j] * vi
    return np.array(acc)


def sq_diff_sum(a, b):
    """Sum of squared differences, ascending over the flat arrays."""
    al = a.ravel().tolist()
    bl = b.ravel().tolist()
    acc = 0.0
    for i in range(len(al)):
        d = al[i] - bl[i]
        acc += d * d
    return acc


# ---------------------------------------------------------------------------
# convolution (valid padding, stride 1)


def conv2d_forward(x, f):
    """Cross-correlate x (rows,cols) with filters f (nf,kh,kw) -> (nf,m,n)."""
    rows, cols = x.shape
    nf, kh, kw = f.shape
    m = rows - kh + 1
    n = cols - kw + 1
    xl = x.tolist()
    fl = f.tolist()
    out = np.empty((nf, m, n))
    for q in range(nf):
        fq = fl[q]
        for i in range(m):
            for j in range(n):
                acc = 0.0
                for u in range(kh):
                    xr = xl[i + u]
                    fr = fq[u]
                    for v in range(kw):
                        acc += xr[j + v] * fr[v]
                out[q, i, j] = acc
    return out


def conv2d_backward(x, f, up):
    """Gradients of conv2d_forward wrt x and f given upstream (nf,m,n)."""
    rows, cols = x.shape
    nf, kh, kw = f.shape
    m = rows - kh + 1
    n = cols - kw + 1
    xl = x.tolist()
    fl = f.tolist()
    ul = up.tolist()
    gx = [[0.0] * cols for _ in range(rows)]
    gf = [[[0.0] * kw for _ in range(kh)] for _ in range(nf)]
    for q in range(nf):
        fq = fl[q]
        gq = gf[q]
        uq = ul[q]
        for i in range(m):
            ui = uq[i]
            for j in range(n):
                g = ui[j]
                for u in range(kh):
                    xr = xl[i + u]
                    fr = fq[u]
                    gr = gq[u]
                    gxr = gx[i + u]
                    for v in range(kw):
                        gr[v] += g * xr[j + v]
                        gxr[j + v] += g * fr[v]
    return np.array(gx), np.array(gf)


# ---------------------------------------------------------------------------
# softmax with temperature, Gumbel noise


def softmax_temp(logits, tau):
    """softmax(logits / tau) with max-subtraction. tau > 0."""
    xl = logits.tolist()
    n = len(xl)
    mx = xl[0]
    for i in range(1, n):
        if xl[i] > mx:
            mx = xl[i]
    e = [0.0] * n
    s = 0.0
    for i in range(n):
        ei = math.exp((xl[i] - mx) / tau)
        e[i] = ei
        s += ei
    for i in range(n):
        e[i] = e[i] / s
    return np.array(e)


def softmax_temp_backward(probs, upstream, tau):
    """grad_logits for y = softmax(logits/tau): p * (u - <u,p>) / tau."""
    pl = probs.tolist()
    ul = upstream.tolist()
    n = len(pl)
    s = 0.0
    for i in range(n):
        s += ul[i] * pl[i]
    out = np.empty(n)
    for i in range(n):
        out[i] = pl[i] * (ul[i] - s) / tau
    return out


def gumbel_from_uniform(u):
    """-log(-log(u)) with u clamped to [1e-12, 1 - 1e-12]."""
    ul = u.tolist()
    out = np.empty(len(ul))
    for i in range(len(ul)):
        ui = ul[i]
        if ui < _U_LO:
            ui = _U_LO
        elif ui > _U_HI:
            ui = _U_HI
        out[i] = -math.log(-math.log(ui))
    return out


# ---------------------------------------------------------------------------
# scorers
#
# All scores are "higher is better"; distance-based scorers return the
# negated distance. Entity/relation vectors arrive as flat storage rows:
#   TRANSE_*  h (d,)   r (d,)   t (d,)
#   DISTMULT  h (d,)   r (d,)   t (d,)
#   COMPLEX   h (2d,)  r (2d,)  t (2d,)   [real | imag]
#   SIMPLE    h (2d,)  r (2d,)  t (2d,)   [head-role | tail-role], [fwd | inv]
#   ROTATE    h (2d,)  r (d,)   t (2d,)   relation holds phase angles


def _score_transe(h, r, t, l2):
    if l2:
        acc = 0.0
        for j in range(len(h)):
            d = (h[j] + r[j]) - t[j]
            acc += d * d
        return -math.sqrt(acc)
    acc = 0.0
    for j in range(len(h)):
        acc += math.fabs((h[j] + r[j]) - t[j])
    return -acc


def _score_distmult(h, r, t):
    # r * (h * t) keeps the product order symmetric in h and t, so
    # score(h,r,t) == score(t,r,h) holds exactly in floats.
    acc = 0.0
    for j in range(len(h)):
        acc += r[j] * (h[j] * t[j])
    return acc


def _score_complex(h, r, t):
    d2 = len(h) // 2
    acc = 0.0
    for j in range(d2):
        a = h[j]
        b = h[d2 + j]
        c = r[j]
        dd = r[d2 + j]
        re = a * c - b * dd
        im = a * dd + b * c
        acc += re * t[j] + im * t[d2 + j]
    return acc


def _score_simple(h, r, t):
    d2 = len(h) // 2
    acc1 = 0.0
    acc2 = 0.0
    for j in range(d2):
        acc1 += (h[j] * r[j]) * t[d2 + j]
        acc2 += (t[j] * r[d2 + j]) * h[d2 + j]
    return 0.5 * (acc1 + acc2)


def _score_rotate(h, r, t):
    d = len(r)
    acc = 0.0
    for j in range(d):
        cs = math.cos(r[j])
        sn = math.sin(r[j])
        u = (h[j] * cs - h[d + j] * sn) - t[j]
        v = (h[j] * sn + h[d + j] * cs) - t[d + j]
        s = u * u + v * v
        acc += s
    return -math.sqrt(acc)


def _score_lists(tag, h, r, t):
    if tag == TRANSE_L1:
        return _score_transe(h, r, t, False)
    if tag == TRANSE_L2:
        return _score_transe(h, r, t, True)
    if tag == DISTMULT:
        return _score_distmult(h, r, t)
    if tag == COMPLEX:
        return _score_complex(h, r, t)
    if tag == SIMPLE:
        return _score_simple(h, r, t)
    if tag == ROTATE:
        return _score_rotate(h, r, t)
    raise ValueError(f"unknown scorer tag {tag}")


def score_one(tag, h, r, t):
    """Score a single (h, r, t) from flat storage rows."""
    return _score_lists(tag, h.tolist(), r.tolist(), t.tolist())


def grad_one(tag, h, r, t):
    """d(score)/d(h, r, t) as three arrays shaped like the inputs."""
    hl = h.tolist()
    rl = r.tolist()
    tl = t.tolist()
    eh = len(hl)
    gh = np.zeros(eh)
    gr = np.zeros(len(rl))
    gt = np.zeros(eh)

    if tag == TRANSE_L1:
        for j in range(eh):
            d = (hl[j] + rl[j]) - tl[j]
            s = 1.0 if d > 0.0 else (-1.0 if d < 0.0 else 0.0)
            gh[j] = -s
            gr[j] = -s
            gt[j] = s
    elif tag == TRANSE_L2:
        acc = 0.0
        diffs = [0.0] * eh
        for j in range(eh):
            d = (hl[j] + rl[j]) - tl[j]
            diffs[j] = d
            acc += d * d
        n = math.sqrt(acc)
        if n != 0.0:
            for j in range(eh):
                g = diffs[j] / n
                gh[j] = -g
                gr[j] = -g
                gt[j] = g
    elif tag == DISTMULT:
        for j in range(eh):
            gh[j] = rl[j] * tl[j]
            gr[j] = hl[j] * tl[j]
            gt[j] = rl[j] * hl[j]
    elif tag == COMPLEX:
        d2 = eh // 2
        for j in range(d2):
            a = hl[j]
            b = hl[d2 + j]
            c = rl[j]
            dd = rl[d2 + j]
            e = tl[j]
            f = tl[d2 + j]
            gh[j] = c * e + dd * f
            gh[d2 + j] = c * f - dd * e
            gr[j] = a * e + b * f
            gr[d2 + j] = a * f - b * e
            gt[j] = a * c - b * dd
            gt[d2 + j] = a * dd + b * c
    elif tag == SIMPLE:
        d2 = eh // 2
        for j in range(d2):
            gh[j] = 0.5 * (rl[j] * tl[d2 + j])
            gh[d2 + j] = 0.5 * (tl[j] * rl[d2 + j])
            gr[j] = 0.5 * (hl[j] * tl[d2 + j])
            gr[d2 + j] = 0.5 * (tl[j] * hl[d2 + j])
            gt[j] = 0.5 * (rl[d2 + j] * hl[d2 + j])
            gt[d2 + j] = 0.5 * (hl[j] * rl[j])
    elif tag == ROTATE:
        d = len(rl)
        acc = 0.0
        us = [0.0] * d
        vs = [0.0] * d
        for j in range(d):
            cs = math.cos(rl[j])
            sn = math.sin(rl[j])
            u = (hl[j] * cs - hl[d + j] * sn) - tl[j]
            v = (hl[j] * sn + hl[d + j] * cs) - tl[d + j]
            us[j] = u
            vs[j] = v
            s = u * u + v * v
            acc += s
        n = math.sqrt(acc)
        if n != 0.0:
            for j in range(d):
                cs = math.cos(rl[j])
                sn = math.sin(rl[j])
                u = us[j]
                v = vs[j]
                rotre = hl[j] * cs - hl[d + j] * sn
                rotim = hl[j] * sn + hl[d + j] * cs
                gh[j] = -(u * cs + v * sn) / n
                gh[d + j] = (u * sn - v * cs) / n
                gr[j] = (u * rotim - v * rotre) / n
                gt[j] = u / n
                gt[d + j] = v / n
    else:
        raise ValueError(f"unknown scorer tag {tag}")
    return gh, gr, gt


def sweep_scores(tag, ent, r, fixed, side):
    """Score every entity row as the open slot of a partial triplet.

    side 0: fixed is the head, candidates fill the tail.
    side 1: fixed is the tail, candidates fill the head.
    Per-candidate arithmetic is identical to score_one, so the sweep is
    bit-equal to scoring each candidate on its own.
    """
    el = ent.tolist()
    rl = r.tolist()
    fl = fixed.tolist()
    ne = len(el)
    out = np.empty(ne)
    if side == 0:
        for i in range(ne):
            out[i] = _score_lists(tag, fl, rl, el[i])
    else:
        for i in range(ne):
            out[i] = _score_lists(tag, el[i], rl, fl)
    return out
