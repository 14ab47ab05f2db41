import dataclasses
import math

import numpy as np
import scipy.sparse


def _dense(entries, shape):
    out = np.zeros(shape)
    for k, v in entries.items():
        out[k] = v
    return out


@dataclasses.dataclass
class matrix_d_result:
    D: object
    ret: object


def matrix_d(M, y):
    M = np.asarray(M, dtype=float)
    y = np.asarray(y, dtype=float)
    n = np.shape(M)[0]
    if np.shape(M) != (n, n):
        raise ValueError("M: expected shape %s, got %s" % ((n, n), np.shape(M)))
    if np.shape(y) != (n,):
        raise ValueError("y: expected shape %s, got %s" % ((n,), np.shape(y)))

    D_entries = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            D_entries[(i - 1, j - 1)] = M[i - 1, j - 1] + 7 * y[i - 1]
    D = _dense(D_entries, (n, n))
    return matrix_d_result(D=D, ret=D)
