import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class table1_result:
    S: object
    ret: object


def table1(H, beta, r, V):
    H = np.asarray(H, dtype=float)
    beta = np.asarray(beta, dtype=float)
    r = np.asarray(r, dtype=float)
    V = np.asarray(V, dtype=float)
    p = np.shape(H)[0]
    n = np.shape(H)[1]
    if np.shape(H) != (p, n):
        raise ValueError("H: expected shape %s, got %s" % ((p, n), np.shape(H)))
    if np.shape(beta) != (n,):
        raise ValueError("beta: expected shape %s, got %s" % ((n,), np.shape(beta)))
    if np.shape(r) != (p,):
        raise ValueError("r: expected shape %s, got %s" % ((p,), np.shape(r)))
    if np.shape(V) != (n, n):
        raise ValueError("V: expected shape %s, got %s" % ((n, n), np.shape(V)))

    S = (H @ beta - r).T @ np.linalg.solve(H @ V @ H.T, H @ beta - r)
    return table1_result(S=S, ret=S)
