"""Numba kernel for batched lattice sums.

The kernel evaluates sum_n q_n * exp(2 pi i m_n . z) for a batch of points z.
Because the lattice rows differ by integer steps along each axis, the
exponentials factor as products of per-axis powers u_k^{j} with
u_k = exp(2 pi i z_k); each point builds g small power tables (a handful of
complex exponentials) and every term reduces to g complex multiplies.

Each output element is accumulated independently in a fixed order, so results
are bit-identical regardless of the number of worker threads.
"""

from __future__ import annotations

import math

import numba
import numpy as np

_TWO_PI = 2.0 * math.pi


@numba.njit(parallel=True, cache=True)
def lattice_sum(idx, starts, lens, q, z):
    """sum over rows n of q[n] * exp(2 pi i m[n] . z[b]) for each point b,
    where m[n, k] = starts[k] + idx[n, k].

    idx    : (N, g) int64, table index of each lattice row along each axis.
    starts : (g,) float64, first lattice value along each axis (incl. the
             characteristic offset).
    lens   : (g,) int64, table length along each axis.
    q      : (N,) complex128, z-independent Gaussian weights.
    z      : (B, g) complex128, evaluation points (already reduced).
    """
    n_terms = idx.shape[0]
    g = idx.shape[1]
    n_pts = z.shape[0]
    l_max = 1
    for k in range(g):
        if lens[k] > l_max:
            l_max = lens[k]
    out = np.empty(n_pts, np.complex128)
    for b in numba.prange(n_pts):
        tab = np.empty((g, l_max), np.complex128)
        for k in range(g):
            zr = z[b, k].real
            zi = z[b, k].imag
            mag = math.exp(-_TWO_PI * zi)
            ur = mag * math.cos(_TWO_PI * zr)
            ui = mag * math.sin(_TWO_PI * zr)
            s = starts[k]
            mag0 = math.exp(-_TWO_PI * s * zi)
            tab[k, 0] = complex(
                mag0 * math.cos(_TWO_PI * s * zr),
                mag0 * math.sin(_TWO_PI * s * zr),
            )
            for j in range(1, lens[k]):
                pr = tab[k, j - 1].real
                pi = tab[k, j - 1].imag
                tab[k, j] = complex(pr * ur - pi * ui, pr * ui + pi * ur)
        acc_re = 0.0
        acc_im = 0.0
        for n in range(n_terms):
            wr = tab[0, idx[n, 0]].real
            wi = tab[0, idx[n, 0]].imag
            for k in range(1, g):
                tr = tab[k, idx[n, k]].real
                ti = tab[k, idx[n, k]].imag
                wr, wi = wr * tr - wi * ti, wr * ti + wi * tr
            acc_re += q[n].real * wr - q[n].imag * wi
            acc_im += q[n].real * wi + q[n].imag * wr
        out[b] = complex(acc_re, acc_im)
    return out
