import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class fig4h_eigensystem_result:
    Omega: object
    ret: object


def fig4h_eigensystem(k_1, k_2, e_1, e_2):
    k_1 = float(k_1)
    k_2 = float(k_2)
    e_1 = np.asarray(e_1, dtype=float)
    e_2 = np.asarray(e_2, dtype=float)
    if np.shape(e_1) != (2,):
        raise ValueError("e_1: expected shape %s, got %s" % ((2,), np.shape(e_1)))
    if np.shape(e_2) != (2,):
        raise ValueError("e_2: expected shape %s, got %s" % ((2,), np.shape(e_2)))

    Omega = np.block([[np.reshape(e_1, (-1, 1)), np.reshape(e_2, (-1, 1))]]) @ np.block([[np.full((1, 1), k_1), np.full((1, 1), 0)], [np.full((1, 1), 0), np.full((1, 1), k_2)]]) @ np.block([[np.reshape(e_1.T, (1, -1))], [np.reshape(e_2.T, (1, -1))]])
    return fig4h_eigensystem_result(Omega=Omega, ret=Omega)
