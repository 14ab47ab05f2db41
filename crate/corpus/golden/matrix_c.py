import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class matrix_c_result:
    C: object
    ret: object


def matrix_c(M, y, x):
    M = np.asarray(M, dtype=float)
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    n = np.shape(M)[0]
    if np.shape(M) != (n, n):
        raise ValueError("M: expected shape %s, got %s" % ((n, n), np.shape(M)))
    if np.shape(y) != (n,):
        raise ValueError("y: expected shape %s, got %s" % ((n,), np.shape(y)))
    if np.shape(x) != (n,):
        raise ValueError("x: expected shape %s, got %s" % ((n,), np.shape(x)))

    C = np.block([[np.eye(n), M + np.outer(y, x.T)], [M.T, np.zeros((n, n))]])
    return matrix_c_result(C=C, ret=C)
