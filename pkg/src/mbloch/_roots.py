"""Safeguarded Newton/bisection for the saturable-gain implicit relations.

Both the single-pass amplifier relation and the intracavity profile relation
reduce, in the log variable ``s = ln(x / x0)``, to

    F(s) = A*s + B*expm1(p*s) - C = 0,   A > 0, B >= 0, p > 0,

which is strictly increasing and convex, so a unique root exists.
"""
import math

import numpy as np

from ._jit import kernel


@kernel
def log_bracket(A, B, p, C):
    """Interval ``[lo, hi]`` guaranteed to contain the root of ``F``."""
    if C == 0.0:
        return 0.0, 0.0
    if C > 0.0:
        hi = C / A
        if B > 0.0:
            hi = min(hi, math.log1p(C / B) / p)
        return 0.0, hi
    lo = C / A
    if B > 0.0 and C > -B:
        lo = max(lo, math.log1p(C / B) / p)
    return lo, 0.0


@kernel
def solve_log(A, B, p, C, s_guess, xtol):
    """Root of ``F`` refined to ``|ds| <= xtol``. Returns ``(s, iterations)``."""
    lo, hi = log_bracket(A, B, p, C)
    if lo == hi:
        return lo, 0
    s = s_guess
    if not (lo <= s <= hi):
        s = 0.5 * (lo + hi)
    for it in range(1, 200):
        em = math.expm1(p * s)
        f = A * s + B * em - C
        if f == 0.0:
            return s, it
        if f > 0.0:
            hi = s
        else:
            lo = s
        df = A + B * p * (em + 1.0)
        s_new = s - f / df
        if not (lo < s_new < hi):
            s_new = 0.5 * (lo + hi)
        if abs(s_new - s) <= xtol * max(1.0, abs(s_new)) or hi - lo <= xtol * max(1.0, abs(lo)):
            return s_new, it
        s = s_new
    return s, -1


@kernel
def solve_log_many(A, B, p, C, xtol):
    """Vectorised :func:`solve_log` over ``C`` marching from the previous root."""
    n = C.shape[0]
    out = np.empty(n)
    status = 0
    guess = 0.0
    for i in range(n):
        s, it = solve_log(A, B, p, C[i], guess, xtol)
        if it < 0:
            status = -1
        out[i] = s
        guess = s
    return out, status
