"""JIT-compiled depth-first ellipsoid sweep.

The kernel walks the Fincke-Pohst tree iteratively, keeps running partial
images of the candidate under both place embeddings, and screens leaves with
loose per-place Frobenius and determinant bounds; only screened survivors
are returned for exact verification.  Node accounting matches the pure
Python walk exactly (one node per integer assignment, including every leaf
value)."""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap(args[0]) if args and callable(args[0]) else wrap


STATUS_OK = 0
STATUS_BUDGET = 1
STATUS_OVERFLOW = 2


@njit(cache=True)
def fp_sweep(q, mu, C, V1p, V2p, n1max, n2max, det_tol,
             outer_lo, outer_hi, budget, perm, out):
    """Returns (n_survivors, nodes, status).  Arrays:

    q       (n,)   Cholesky pivots squared, permuted order
    mu      (n,n)  row-normalized Cholesky factor, permuted order
    V1p,V2p (4,n)  place embeddings with permuted columns
    perm    (n,)   permuted index -> original index
    out     (cap, n) int64 survivor buffer in original coordinate order
    """
    n = q.shape[0]
    cap = out.shape[0]
    T = np.zeros(n)
    cvec = np.zeros((n, n))
    E1 = np.zeros((n, 4))
    E2 = np.zeros((n, 4))
    x = np.zeros(n, dtype=np.int64)
    lo = np.zeros(n, dtype=np.int64)
    hi = np.zeros(n, dtype=np.int64)
    nodes = 0
    m = 0

    i = n - 1
    T[i] = C
    half = np.sqrt(max(T[i], 0.0) / q[i])
    lo[i] = np.int64(np.ceil(-half - 1e-12))
    hi[i] = np.int64(np.floor(half + 1e-12))
    if outer_lo > lo[i]:
        lo[i] = outer_lo
    if outer_hi < hi[i]:
        hi[i] = outer_hi
    x[i] = lo[i] - 1

    while True:
        x[i] += 1
        if x[i] > hi[i]:
            i += 1
            if i >= n:
                break
            continue
        nodes += 1
        if nodes > budget:
            return m, nodes, STATUS_BUDGET
        ci = cvec[i, i]
        d = x[i] + ci
        rem = T[i] - q[i] * d * d
        if rem < -1e-12:
            continue
        if i == 1:
            # descend and run the innermost level as a tight loop
            T0 = max(rem, 0.0)
            c0 = cvec[1, 0] + mu[0, 1] * x[1]
            half0 = np.sqrt(T0 / q[0])
            l0 = np.int64(np.ceil(-c0 - half0 - 1e-12))
            h0 = np.int64(np.floor(-c0 + half0 + 1e-12))
            if h0 < l0:
                continue
            span = h0 - l0 + 1
            nodes += span
            if nodes > budget:
                return m, nodes, STATUS_BUDGET
            e10 = E1[1, 0] + V1p[0, 1] * x[1] + V1p[0, 0] * l0
            e11 = E1[1, 1] + V1p[1, 1] * x[1] + V1p[1, 0] * l0
            e12 = E1[1, 2] + V1p[2, 1] * x[1] + V1p[2, 0] * l0
            e13 = E1[1, 3] + V1p[3, 1] * x[1] + V1p[3, 0] * l0
            e20 = E2[1, 0] + V2p[0, 1] * x[1] + V2p[0, 0] * l0
            e21 = E2[1, 1] + V2p[1, 1] * x[1] + V2p[1, 0] * l0
            e22 = E2[1, 2] + V2p[2, 1] * x[1] + V2p[2, 0] * l0
            e23 = E2[1, 3] + V2p[3, 1] * x[1] + V2p[3, 0] * l0
            for xv in range(l0, h0 + 1):
                n1 = e10 * e10 + e11 * e11 + e12 * e12 + e13 * e13
                if n1 <= n1max:
                    n2 = e20 * e20 + e21 * e21 + e22 * e22 + e23 * e23
                    if n2 <= n2max:
                        det1 = e10 * e13 - e11 * e12
                        if abs(det1 - 1.0) <= det_tol:
                            det2 = e20 * e23 - e21 * e22
                            if abs(det2 - 1.0) <= det_tol:
                                if m >= cap:
                                    return m, nodes, STATUS_OVERFLOW
                                x[0] = xv
                                for j in range(n):
                                    out[m, perm[j]] = x[j]
                                m += 1
                e10 += V1p[0, 0]
                e11 += V1p[1, 0]
                e12 += V1p[2, 0]
                e13 += V1p[3, 0]
                e20 += V2p[0, 0]
                e21 += V2p[1, 0]
                e22 += V2p[2, 0]
                e23 += V2p[3, 0]
            continue
        # descend one level
        inew = i - 1
        T[inew] = max(rem, 0.0)
        for j in range(n):
            cvec[inew, j] = cvec[i, j] + mu[j, i] * x[i]
        for j in range(4):
            E1[inew, j] = E1[i, j] + V1p[j, i] * x[i]
            E2[inew, j] = E2[i, j] + V2p[j, i] * x[i]
        ci2 = cvec[inew, inew]
        half2 = np.sqrt(T[inew] / q[inew])
        lo[inew] = np.int64(np.ceil(-ci2 - half2 - 1e-12))
        hi[inew] = np.int64(np.floor(-ci2 + half2 + 1e-12))
        x[inew] = lo[inew] - 1
        i = inew

    return m, nodes, STATUS_OK
