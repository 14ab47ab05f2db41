import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class fig4s_remeshing_result:
    r: object
    k: object
    ret: object


def fig4s_remeshing(alpha, C, V):
    alpha = float(alpha)
    C = np.asarray(C, dtype=float)
    V = np.asarray(V, dtype=float)
    if np.shape(C) != (3,):
        raise ValueError("C: expected shape %s, got %s" % ((3,), np.shape(C)))
    if np.shape(V) != (3,):
        raise ValueError("V: expected shape %s, got %s" % ((3,), np.shape(V)))

    r = 1 + alpha
    k = r * (C - V)
    return fig4s_remeshing_result(r=r, k=k, ret=k)
