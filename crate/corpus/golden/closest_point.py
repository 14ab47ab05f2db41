import dataclasses
import math

import numpy as np
import scipy.sparse


def _sequence(entries, n):
    for k in range(n):
        if (k,) not in entries:
            raise ValueError("element %d is never defined" % (k + 1))
    return [entries[(k,)] for k in range(n)]


@dataclasses.dataclass
class closest_point_result:
    P: object
    q: object
    ret: object


def closest_point(p, d):
    p = [np.asarray(x, dtype=float) for x in p]
    d = [np.asarray(x, dtype=float) for x in d]
    len_i = len(p)
    for x in p:
        if np.shape(x) != (3,):
            raise ValueError("p: expected shape %s, got %s" % ((3,), np.shape(x)))
    if len(d) != len_i:
        raise ValueError("d: expected %d elements, got %d" % (len_i, len(d)))
    for x_2 in d:
        if np.shape(x_2) != (3,):
            raise ValueError("d: expected shape %s, got %s" % ((3,), np.shape(x_2)))

    P_entries = {}
    for i in range(1, len_i + 1):
        P_entries[(i - 1,)] = np.eye(3) - np.outer(d[i - 1], d[i - 1].T)
    P = _sequence(P_entries, len_i)
    q = np.linalg.solve(sum((P[i - 1] for i in range(1, len_i + 1)), np.zeros((3, 3))), sum((P[i - 1] @ p[i - 1] for i in range(1, len_i + 1)), np.zeros(3)))
    return closest_point_result(P=P, q=q, ret=q)
