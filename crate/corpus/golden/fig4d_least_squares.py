import dataclasses
import math

import numpy as np
import scipy.sparse


@dataclasses.dataclass
class fig4d_least_squares_result:
    x_hat: object
    ret: object


def fig4d_least_squares(a, y):
    a = [np.asarray(x, dtype=float) for x in a]
    y = [float(x) for x in y]
    len_i = len(a)
    if len(a) == 0:
        raise ValueError("cannot read dimension n from the empty sequence a")
    n = np.shape(a[0])[0]
    for x in a:
        if np.shape(x) != (n,):
            raise ValueError("a: expected shape %s, got %s" % ((n,), np.shape(x)))
    if len(y) != len_i:
        raise ValueError("y: expected %d elements, got %d" % (len_i, len(y)))

    x_hat = np.linalg.solve(sum((np.outer(a[i - 1], a[i - 1].T) for i in range(1, len_i + 1)), np.zeros((n, n))), sum((y[i - 1] * a[i - 1] for i in range(1, len_i + 1)), np.zeros(n)))
    return fig4d_least_squares_result(x_hat=x_hat, ret=x_hat)
