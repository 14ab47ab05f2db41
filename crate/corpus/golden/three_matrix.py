import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class three_matrix_result:
    D: object
    c: object
    ret: object


def three_matrix(A, B, C, x):
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    C = np.asarray(C, dtype=float)
    x = np.asarray(x, dtype=float)
    n = np.shape(A)[1]
    m = np.shape(B)[1]
    if np.shape(A) != (3, n):
        raise ValueError("A: expected shape %s, got %s" % ((3, n), np.shape(A)))
    if np.shape(B) != (n, m):
        raise ValueError("B: expected shape %s, got %s" % ((n, m), np.shape(B)))
    if np.shape(C) != (m, 2):
        raise ValueError("C: expected shape %s, got %s" % ((m, 2), np.shape(C)))
    if np.shape(x) != (2,):
        raise ValueError("x: expected shape %s, got %s" % ((2,), np.shape(x)))

    D = A @ B @ C
    c = x.T @ D.T @ D @ x
    return three_matrix_result(D=D, c=c, ret=c)
