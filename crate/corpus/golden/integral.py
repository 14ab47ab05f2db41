import dataclasses
import math

import numpy as np
import scipy.sparse


def _simpson(f, a, b):
    # Adaptive Simpson, absolute tolerance 1e-9, at most 40 levels.
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    fa = f(a)
    fb = f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, b, fa, fm, fb, whole, 1e-9, 40)


def _simpson_step(f, a, b, fa, fm, fb, whole, eps, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    floor = 64.0 * 2.220446049250313e-16 * (abs(left) + abs(right))
    if abs(delta) <= 15.0 * max(eps, floor):
        return left + right + delta / 15.0
    if depth == 0 or not math.isfinite(delta):
        raise ArithmeticError("integral did not converge within 40 subdivisions")
    l = _simpson_step(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
    r = _simpson_step(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
    return l + r


@dataclasses.dataclass
class integral_result:
    ret: object


def integral():
    ret = _simpson(lambda y: _simpson(lambda x: x * y, 1, 2), 0, 3)
    return integral_result(ret=ret)
