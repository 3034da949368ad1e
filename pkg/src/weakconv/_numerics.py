"""Small vectorized root/minimum brackets used throughout the package."""

import numpy as np

_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


def bisect_predicate(pred, lo, hi, iters=64, tol=0.0):
    """Vectorized bisection on a monotone boolean predicate.

    ``pred(lo)`` is assumed False and ``pred(hi)`` True elementwise; returns
    the bracket ``(lo, hi)`` after shrinking.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        ok = pred(mid)
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
        if tol > 0.0 and np.all(hi - lo <= tol):
            break
    return lo, hi


def golden_min(f, lo, hi, iters=70):
    """Vectorized golden-section minimization of ``f`` on ``[lo, hi]``.

    ``f`` maps an array of abscissae to an array of values.  Returns the
    abscissae of the (local) minima.
    """
    a = np.array(lo, dtype=float, copy=True)
    b = np.array(hi, dtype=float, copy=True)
    for _ in range(iters):
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        left = f(c) < f(d)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    return 0.5 * (a + b)
