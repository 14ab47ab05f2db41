import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class matrix_b_result:
    B: object
    ret: object


def matrix_b(a, k):
    a = float(a)
    k = float(k)

    B = np.block([[np.full((1, 1), 2 * a), np.full((1, 1), 0)], [np.full((1, 1), 3), np.full((1, 1), k + 1)]])
    return matrix_b_result(B=B, ret=B)
