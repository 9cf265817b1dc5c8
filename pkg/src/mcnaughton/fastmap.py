"""Float kernels for long orbits of B_lm (numba).

A PwlMap is flattened into dense arrays: per cell, its half-planes and its
affine piece, plus a uniform bucket grid for point location.  B is applied
as 3l steps of R1 followed by 2m steps of R2^2; both have integer pieces,
so the only roundoff is in the point coordinates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

EPS = 1e-13
KINK = 1e-12  # distance to a cell wall that counts as a non-differentiability hit


@dataclass(frozen=True)
class CellTable:
    hp: np.ndarray       # (ncells, maxe, 3): a*x + b*y + c >= 0, normalized
    nedge: np.ndarray    # (ncells,)
    piece: np.ndarray    # (ncells, 6): a, b, c, d, e, f
    start: np.ndarray    # (n*n + 1,) CSR offsets into cells
    cells: np.ndarray    # bucket contents
    n: int

    def arrays(self):
        return self.hp, self.nedge, self.piece, self.start, self.cells, self.n


def _table(polys, rows, n: int = 32) -> CellTable:
    maxe = max(len(P.vertices) for P in polys)
    hp = np.zeros((len(polys), maxe, 3))
    nedge = np.zeros(len(polys), dtype=np.int64)
    for k, P in enumerate(polys):
        hs = P.halfplanes()
        nedge[k] = len(hs)
        for e, (a, b, c) in enumerate(hs):
            norm = float(abs(a) + abs(b))
            hp[k, e] = (float(a) / norm, float(b) / norm, float(c) / norm)
    piece = np.array(rows, dtype=np.float64)
    buckets: list[list[int]] = [[] for _ in range(n * n)]
    for k, P in enumerate(polys):
        x0, y0, x1, y1 = P.bbox()
        i0, i1 = max(0, int(float(x0) * n - 1e-9)), min(n - 1, int(float(x1) * n + 1e-9))
        j0, j1 = max(0, int(float(y0) * n - 1e-9)), min(n - 1, int(float(y1) * n + 1e-9))
        for i in range(i0, i1 + 1):
            for j in range(j0, j1 + 1):
                buckets[i * n + j].append(k)
    start = np.zeros(n * n + 1, dtype=np.int64)
    for b, lst in enumerate(buckets):
        start[b + 1] = start[b] + len(lst)
    cells = np.array([k for lst in buckets for k in lst], dtype=np.int64)
    return CellTable(hp, nedge, piece, start, cells, n)


def map_table(S, n: int = 32) -> CellTable:
    rows = [[float(t) for t in (P.a, P.b, P.c, P.d, P.e, P.f)] for P in S.pieces]
    return _table(S.cells, rows, n)


def function_table(f, n: int = 32) -> CellTable:
    rows = [[float(a), float(b), float(c), 0.0, 0.0, 0.0] for a, b, c in f.functionals]
    return _table(f.cells, rows, n)


@njit(cache=True)
def _locate(hp, nedge, start, cells, n, x, y):
    """Cell index and its smallest half-plane margin at (x, y)."""
    i = min(max(int(x * n), 0), n - 1)
    j = min(max(int(y * n), 0), n - 1)
    b = i * n + j
    best = -1
    best_margin = -1e300
    for s in range(start[b], start[b + 1]):
        k = cells[s]
        margin = 1e300
        for e in range(nedge[k]):
            v = hp[k, e, 0] * x + hp[k, e, 1] * y + hp[k, e, 2]
            if v < margin:
                margin = v
        if margin >= -EPS:
            return k, margin
        if margin > best_margin:
            best_margin = margin
            best = k
    return best, best_margin


@njit(cache=True)
def _clamp(v):
    return min(max(v, 0.0), 1.0)


@njit(cache=True)
def _b_step(x, y, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac):
    """One application of B; accumulates the Jacobian into jac (2x2).

    Returns the new point and the smallest wall margin seen on the way.
    """
    jac[0, 0] = 1.0
    jac[0, 1] = 0.0
    jac[1, 0] = 0.0
    jac[1, 1] = 1.0
    low = 1e300
    for s in range(nA + nB):
        if s < nA:
            k, margin = _locate(A_hp, A_ne, A_st, A_cl, A_n, x, y)
            p = A_pc[k]
        else:
            k, margin = _locate(B_hp, B_ne, B_st, B_cl, B_n, x, y)
            p = B_pc[k]
        if margin < low:
            low = margin
        nx = p[0] * x + p[1] * y + p[4]
        ny = p[2] * x + p[3] * y + p[5]
        x = _clamp(nx)
        y = _clamp(ny)
        j00 = p[0] * jac[0, 0] + p[1] * jac[1, 0]
        j01 = p[0] * jac[0, 1] + p[1] * jac[1, 1]
        j10 = p[2] * jac[0, 0] + p[3] * jac[1, 0]
        j11 = p[2] * jac[0, 1] + p[3] * jac[1, 1]
        jac[0, 0] = j00
        jac[0, 1] = j01
        jac[1, 0] = j10
        jac[1, 1] = j11
    return x, y, low


@njit(cache=True)
def _fval(F_hp, F_ne, F_pc, F_st, F_cl, F_n, x, y):
    k, _ = _locate(F_hp, F_ne, F_st, F_cl, F_n, x, y)
    return F_pc[k, 0] * x + F_pc[k, 1] * y + F_pc[k, 2]


@njit(cache=True)
def _perturb(x, y):
    x = x + KINK if x < 0.5 else x - KINK
    y = y + KINK if y < 0.5 else y - KINK
    return x, y


@njit(cache=True)
def orbit_kernel(x, y, N, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB):
    out = np.empty((N + 1, 2))
    out[0, 0] = x
    out[0, 1] = y
    jac = np.empty((2, 2))
    for t in range(N):
        x, y, _ = _b_step(x, y, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac)
        out[t + 1, 0] = x
        out[t + 1, 1] = y
    return out


@njit(cache=True)
def birkhoff_kernel(x, y, N, stride, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB,
                    F_hp, F_ne, F_pc, F_st, F_cl, F_n):
    """Running averages of f over the first N points (sampled every stride)."""
    nout = N // stride
    out = np.empty(nout)
    jac = np.empty((2, 2))
    total = 0.0
    kinks = 0
    o = 0
    for t in range(N):
        total += _fval(F_hp, F_ne, F_pc, F_st, F_cl, F_n, x, y)
        if (t + 1) % stride == 0 and o < nout:
            out[o] = total / (t + 1)
            o += 1
        x, y, low = _b_step(x, y, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac)
        if low < KINK:
            kinks += 1
            x, y = _perturb(x, y)
    return out, kinks


@njit(cache=True)
def lyapunov_kernel(x, y, N, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB):
    """Sums of log stretch factors from Gram-Schmidt on J_N ... J_1."""
    jac = np.empty((2, 2))
    q00, q01, q10, q11 = 1.0, 0.0, 0.0, 1.0
    s1 = 0.0
    s2 = 0.0
    kinks = 0
    for t in range(N):
        x, y, low = _b_step(x, y, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac)
        if low < KINK:
            kinks += 1
            x, y = _perturb(x, y)
        m00 = jac[0, 0] * q00 + jac[0, 1] * q10
        m10 = jac[1, 0] * q00 + jac[1, 1] * q10
        m01 = jac[0, 0] * q01 + jac[0, 1] * q11
        m11 = jac[1, 0] * q01 + jac[1, 1] * q11
        r11 = np.hypot(m00, m10)
        q00 = m00 / r11
        q10 = m10 / r11
        r12 = q00 * m01 + q10 * m11
        v0 = m01 - r12 * q00
        v1 = m11 - r12 * q10
        r22 = np.hypot(v0, v1)
        q01 = v0 / r22
        q11 = v1 / r22
        s1 += np.log(r11)
        s2 += np.log(r22)
    return s1, s2, kinks


@njit(cache=True)
def mixing_kernel(xs, ys, w, kmax, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB,
                  F_hp, F_ne, F_pc, F_st, F_cl, F_n):
    """Weighted means of f(B^k p) over the sample cloud, k = 0..kmax."""
    out = np.zeros(kmax + 1)
    jac = np.empty((2, 2))
    for s in range(xs.shape[0]):
        x = xs[s]
        y = ys[s]
        for k in range(kmax + 1):
            out[k] += w[s] * _fval(F_hp, F_ne, F_pc, F_st, F_cl, F_n, x, y)
            if k < kmax:
                x, y, _ = _b_step(x, y, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac)
    return out


@njit(cache=True)
def coverage_kernel(x, y, N, grid, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB):
    """Visit counts of a grid x grid partition and the step at which it filled up."""
    counts = np.zeros((grid, grid), dtype=np.int64)
    seen = 0
    filled_at = -1
    jac = np.empty((2, 2))
    for t in range(N):
        i = min(int(x * grid), grid - 1)
        j = min(int(y * grid), grid - 1)
        if counts[i, j] == 0:
            seen += 1
            if seen == grid * grid and filled_at < 0:
                filled_at = t
        counts[i, j] += 1
        x, y, _ = _b_step(x, y, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac)
    return counts, filled_at


@njit(cache=True)
def separation_kernel(xa, ya, xb, yb, horizon, threshold, A_hp, A_ne, A_pc, A_st, A_cl, A_n,
                      B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB):
    """First step at which each pair is farther apart than threshold (-1 if never)."""
    n = xa.shape[0]
    out = np.full(n, -1, dtype=np.int64)
    jac = np.empty((2, 2))
    for s in range(n):
        x1, y1, x2, y2 = xa[s], ya[s], xb[s], yb[s]
        for t in range(1, horizon + 1):
            x1, y1, _ = _b_step(x1, y1, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac)
            x2, y2, _ = _b_step(x2, y2, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac)
            if np.hypot(x1 - x2, y1 - y2) > threshold:
                out[s] = t
                break
    return out


@njit(cache=True)
def one_step_batch(xs, ys, A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB):
    n = xs.shape[0]
    ox = np.empty(n)
    oy = np.empty(n)
    jac = np.empty((2, 2))
    for s in range(n):
        ox[s], oy[s], _ = _b_step(xs[s], ys[s], A_hp, A_ne, A_pc, A_st, A_cl, A_n, B_hp, B_ne, B_pc, B_st, B_cl, B_n, nA, nB, jac)
    return ox, oy


class FloatFamily:
    """Tables for B_lm, ready to hand to the kernels."""

    def __init__(self, params, n: int = 32):
        from .gens import R2_squared, build_R1

        self.params = params
        self.A = map_table(build_R1(), n)
        self.B = map_table(R2_squared(), n)
        self.nA = 3 * params.l
        self.nB = 2 * params.m

    def maps(self):
        return (*self.A.arrays(), *self.B.arrays(), self.nA, self.nB)
