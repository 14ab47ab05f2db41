import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class fig4i_skinning_result:
    L: object
    ret: object


def fig4i_skinning(x, nu, W):
    x = np.asarray(x, dtype=float)
    nu = np.asarray(nu, dtype=float)
    W = np.asarray(W, dtype=float)
    n = np.shape(x)[0]
    if np.shape(x) != (n,):
        raise ValueError("x: expected shape %s, got %s" % ((n,), np.shape(x)))
    if np.shape(nu) != (n,):
        raise ValueError("nu: expected shape %s, got %s" % ((n,), np.shape(nu)))
    if np.shape(W) != (n, n):
        raise ValueError("W: expected shape %s, got %s" % ((n, n), np.shape(W)))

    L = x.T @ W @ x + sum((nu[i - 1] * (x[i - 1] ** 2 - 1) for i in range(1, n + 1)), 0.0)
    return fig4i_skinning_result(L=L, ret=L)
