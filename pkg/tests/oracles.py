"""Independent coordinate-expansion oracles for the family functions.

Each oracle is written from the entry-level double sum of its family,
without the trace-term shapes used by the package.
"""
import numpy as np


def so_n(x, a, p):
    n = len(a)
    return sum(p[j] * a[al] * x[j, al] for j in range(n) for al in range(n))


def su_n(z, a, v):
    n = len(a)
    return sum(a[j] * v[al] * z[j, al] for j in range(n) for al in range(n))


def sp_n(q, a, u, v):
    n = len(a)
    z, w = q[:n, :n], q[:n, n:]
    return sum(a[j] * (v[al] * z[j, al] + u[al] * w[j, al]) for j in range(n) for al in range(n))


def su_n_so_n(z, a):
    # trace(z^t A z) with A = a a^t  ->  sum over columns of (a, z_t)^2
    n = len(a)
    return sum(sum(a[j] * z[j, t] for j in range(n)) ** 2 for t in range(n))


def sp_n_u_n(q, a):
    N = len(a)
    return sum(sum(a[j] * q[j, t] for j in range(N)) ** 2 for t in range(N))


def _col(a, x, t):
    return sum(a[k] * x[k, t] for k in range(len(a)))


def so_2n_u_n(x, a, b):
    n = len(a) // 2
    s = 0
    for t in range(n):
        s += _col(a, x, n + t) * _col(b, x, t) - _col(a, x, t) * _col(b, x, n + t)
    return 2 / np.sqrt(2) * s


def su_2n_sp_n(z, a, b):
    # trace(z^t A z J_n), A = (a b^t - b a^t)/sqrt 2, written as a quadruple sum
    N = len(a)
    n = N // 2
    A = [[(a[j] * b[k] - b[j] * a[k]) / np.sqrt(2) for k in range(N)] for j in range(N)]
    Jn = [[0] * N for _ in range(N)]
    for t in range(n):
        Jn[t][n + t] = 1
        Jn[n + t][t] = -1
    s = 0
    for j in range(N):
        for al in range(N):
            if A[j][al] == 0:
                continue
            for k in range(N):
                for l in range(N):
                    if Jn[l][k]:
                        s += z[j, k] * A[j][al] * z[al, l] * Jn[l][k]
    return s


def gr_r(x, a, m):
    N = len(a)
    return sum(a[j] * a[al] * sum(x[j, t] * x[al, t] for t in range(m))
               for j in range(N) for al in range(N))


def gr_c(z, a, b, m):
    # sum_t <z_t, conj a> <b, z_t>
    N = len(a)
    s = 0
    for t in range(m):
        s += sum(z[k, t] * a[k] for k in range(N)) * sum(b[k] * np.conj(z[k, t]) for k in range(N))
    return s


def gr_h(q, a, b, m):
    N = len(a)
    z, w = q[:N, :N], q[:N, N:]
    s = 0
    for j in range(N):
        for al in range(N):
            s += a[j] * b[al] * sum(z[j, t] * np.conj(z[al, t]) + w[j, t] * np.conj(w[al, t])
                                    for t in range(m))
    return s


def value(space_id, x, params, m=None):
    P = {k: np.array(v) for k, v in params.items()}
    if space_id == "so_n":
        return so_n(x, P["a"], P["p"])
    if space_id == "su_n":
        return su_n(x, P["a"], P["v"])
    if space_id == "sp_n":
        return sp_n(x, P["a"], P["u"], P["v"])
    if space_id == "su_n_so_n":
        return su_n_so_n(x, P["a"])
    if space_id == "sp_n_u_n":
        return sp_n_u_n(x, P["a"])
    if space_id == "so_2n_u_n":
        return so_2n_u_n(x, P["a"], P["b"])
    if space_id == "su_2n_sp_n":
        return su_2n_sp_n(x, P["a"], P["b"])
    if space_id == "gr_r":
        return gr_r(x, P["a"], m)
    if space_id == "gr_c":
        return gr_c(x, P["a"], P["b"], m)
    return gr_h(x, P["a"], P["b"], m)
