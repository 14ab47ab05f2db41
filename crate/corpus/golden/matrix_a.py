import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class matrix_a_result:
    A: object
    ret: object


def matrix_a(M, N):
    M = np.asarray(M, dtype=float)
    N = np.asarray(N, dtype=float)
    n = np.shape(M)[0]
    if np.shape(M) != (n, n):
        raise ValueError("M: expected shape %s, got %s" % ((n, n), np.shape(M)))
    if np.shape(N) != (n, n):
        raise ValueError("N: expected shape %s, got %s" % ((n, n), np.shape(N)))

    A = np.linalg.solve(N, M.T)
    return matrix_a_result(A=A, ret=A)
