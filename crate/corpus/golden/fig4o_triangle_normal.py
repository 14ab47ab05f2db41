import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class fig4o_triangle_normal_result:
    n: object
    ret: object


def fig4o_triangle_normal(a, b, c):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    if np.shape(a) != (3,):
        raise ValueError("a: expected shape %s, got %s" % ((3,), np.shape(a)))
    if np.shape(b) != (3,):
        raise ValueError("b: expected shape %s, got %s" % ((3,), np.shape(b)))
    if np.shape(c) != (3,):
        raise ValueError("c: expected shape %s, got %s" % ((3,), np.shape(c)))

    n = np.cross(b - a, c - a) / np.linalg.norm(np.cross(b - a, c - a))
    return fig4o_triangle_normal_result(n=n, ret=n)
