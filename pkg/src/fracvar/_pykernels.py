"""NumPy implementations of the pair-sum kernels (fallback for _ckernels).

Loops run over offsets rather than over pairs, so each step is a
vectorised array operation.
"""

from __future__ import annotations

import numpy as np


def _pw(d: np.ndarray, p: float) -> np.ndarray:
    return d if p == 1.0 else d**p


def gagliardo_1d(f, P, p):
    f = np.asarray(f, dtype=float)
    N = f.shape[0]
    acc = 0.0
    for k in range(1, N):
        acc += P[k] * _pw(np.abs(f[k:] - f[:-k]), p).sum()
    return 2.0 * acc


def gagliardo_2d(f, P, p):
    f = np.asarray(f, dtype=float)
    Nx, Ny = f.shape
    acc = 0.0
    for dx in range(Nx):
        for dy in range(-(Ny - 1), Ny):
            if dx == 0 and dy <= 0:
                continue
            a = f[: Nx - dx]
            b = f[dx:]
            if dy >= 0:
                d = np.abs(a[:, : Ny - dy] - b[:, dy:])
            else:
                d = np.abs(a[:, -dy:] - b[:, : Ny + dy])
            acc += P[dx, abs(dy)] * _pw(d, p).sum()
    return 2.0 * acc


def nl_sum_1d(f, g, K):
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    N = f.shape[0]
    out = np.zeros(N)
    for m in range(1, N):
        d = (f[m:] - f[: N - m]) * (g[m:] - g[: N - m])
        out[: N - m] += K[m + N - 1] * d
        out[m:] += K[-m + N - 1] * d
    return out


def nl_sum_2d(f, g, K):
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    Nx, Ny = f.shape
    fp = np.zeros((3 * Nx - 2, 3 * Ny - 2))
    gp = np.zeros_like(fp)
    fp[Nx - 1 : 2 * Nx - 1, Ny - 1 : 2 * Ny - 1] = f
    gp[Nx - 1 : 2 * Nx - 1, Ny - 1 : 2 * Ny - 1] = g
    inside = np.zeros_like(fp, dtype=bool)
    inside[Nx - 1 : 2 * Nx - 1, Ny - 1 : 2 * Ny - 1] = True
    out = np.zeros((Nx, Ny))
    for mx in range(-(Nx - 1), Nx):
        for my in range(-(Ny - 1), Ny):
            w = K[mx + Nx - 1, my + Ny - 1]
            if w == 0.0:
                continue
            sl = (slice(Nx - 1 + mx, 2 * Nx - 1 + mx), slice(Ny - 1 + my, 2 * Ny - 1 + my))
            # only neighbours inside the grid count, matching the compiled loop
            mask = inside[sl]
            out += w * np.where(mask, (fp[sl] - f) * (gp[sl] - g), 0.0)
    return out


def apply_at_1d(f, W, idx):
    f = np.asarray(f, dtype=float)
    N = f.shape[0]
    idx = np.asarray(idx)
    rows = W[(np.arange(N)[None, :] - idx[:, None]) + N - 1]
    return rows @ f


def apply_at_2d(f, W, idx):
    f = np.asarray(f, dtype=float)
    Nx, Ny = f.shape
    idx = np.asarray(idx)
    out = np.zeros(len(idx))
    for k, (ix, iy) in enumerate(idx):
        out[k] = np.sum(W[Nx - 1 - ix : 2 * Nx - 1 - ix, Ny - 1 - iy : 2 * Ny - 1 - iy] * f)
    return out
