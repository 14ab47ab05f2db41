import dataclasses
import math

import numpy as np
import scipy.sparse


def _coo(entries, shape):
    # Coordinate assembly; explicit zeros are dropped.
    keys = [k for k, v in entries.items() if v != 0]
    rows = [k[0] for k in keys]
    cols = [k[1] for k in keys]
    vals = [float(entries[k]) for k in keys]
    return scipy.sparse.coo_matrix((vals, (rows, cols)), shape=shape).tocsr()


@dataclasses.dataclass
class laplacian_result:
    L: object
    ret: object


def laplacian(E, n):
    E = {tuple(int(v) for v in t) for t in E}
    n = int(n)
    if n < 0:
        raise ValueError("dimension n must be nonnegative, got %d" % n)
    if any(len(t) != 2 for t in E):
        raise ValueError("E: every tuple must have 2 entries")

    L_entries = {}
    for i, j in sorted(E):
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError("(%d, %d) lies outside the %d×%d matrix L" % (i, j, n, n))
        L_entries[(i - 1, j - 1)] = 1 if (i, j) in E else 0
    L = _coo(L_entries, (n, n))
    for i in range(1, n + 1):
        L_entries[(i - 1, i - 1)] = -sum((L[i - 1, j - 1] for j in range(1, n + 1) if j != i), 0.0)
    L = _coo(L_entries, (n, n))
    return laplacian_result(L=L, ret=L)
