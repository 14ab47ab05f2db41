import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class fig4q_packing_result:
    kappa_angle: object
    ret: object


def fig4q_packing(v, D_m, J):
    v = float(v)
    D_m = np.asarray(D_m, dtype=float)
    J = np.asarray(J, dtype=float)
    if np.shape(D_m) != (3, 3):
        raise ValueError("D_m: expected shape %s, got %s" % ((3, 3), np.shape(D_m)))
    if np.shape(J) != (3, 3):
        raise ValueError("J: expected shape %s, got %s" % ((3, 3), np.shape(J)))

    kappa_angle = 3 * math.pow(2 * v, 3 / 2) * (1.0 / (1 / 4 * np.linalg.norm(D_m) ** 2 - 1 / 4 * np.trace(J @ D_m.T @ D_m)))
    return fig4q_packing_result(kappa_angle=kappa_angle, ret=kappa_angle)
