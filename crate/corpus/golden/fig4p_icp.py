import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class fig4p_icp_result:
    C: object
    ret: object


def fig4p_icp(c, w, R_hat):
    c = np.asarray(c, dtype=float)
    w = np.asarray(w, dtype=float)
    R_hat = np.asarray(R_hat, dtype=float)
    m = np.shape(c)[0]
    k = np.shape(c)[1]
    if np.shape(c) != (m, k):
        raise ValueError("c: expected shape %s, got %s" % ((m, k), np.shape(c)))
    if np.shape(w) != (m, k):
        raise ValueError("w: expected shape %s, got %s" % ((m, k), np.shape(w)))
    if np.shape(R_hat) != (m,):
        raise ValueError("R_hat: expected shape %s, got %s" % ((m,), np.shape(R_hat)))

    C = sum((sum((c[n - 1, i - 1] * w[n - 1, i - 1] * R_hat[n - 1] for i in range(1, k + 1)), 0.0) for n in range(1, m + 1)), 0.0) / sum((sum((w[n - 1, i - 1] * R_hat[n - 1] for i in range(1, k + 1)), 0.0) for n in range(1, m + 1)), 0.0)
    return fig4p_icp_result(C=C, ret=C)
