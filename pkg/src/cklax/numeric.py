"""Floating-point cross-check: adaptive RK4 on dL/dt = [L, R(lam^p L)].

Completely separate from the exact machinery: the state is a numpy array
``L[a, e - lo]`` of lam-coefficients per basis vector, and the bracket is
taken from the structure constants directly.
"""

from __future__ import annotations

import numpy as np

__all__ = ["LaxODE", "rk4_integrate", "relative_error"]


class LaxODE:
    def __init__(self, structure, dim: int, lo: int, hi: int, p: int):
        # structure: iterable of (a, b, c, coeff) with both orders present
        self.dim = dim
        self.lo = lo
        self.hi = hi
        self.p = p
        self.terms = [(a, b, c, float(v)) for a, b, c, v in structure]
        n = hi - lo + 1
        exps = np.arange(lo, hi + 1)
        self.sign = np.where(exps >= 0, 1.0, -1.0)
        self.n = n

    def _m(self, L):
        # M = R(lam^p L), with R = +1 on lam^e for e >= 0 and -1 for e < 0
        M = np.zeros_like(L)
        p = self.p
        if p >= 0:
            M[:, p:] = L[:, : self.n - p] if p else L
        else:
            M[:, : self.n + p] = L[:, -p:]
        return M * self.sign

    def rhs(self, L):
        M = self._m(L)
        out = np.zeros_like(L)
        n = self.n
        for a, b, c, v in self.terms:
            full = np.convolve(L[a], M[b])
            # full[k] sits at exponent 2*lo + k; keep the window
            out[c] += v * full[-self.lo: -self.lo + n]
        return out


def _step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def rk4_integrate(ode: LaxODE, y0, times, tol: float = 1e-12, h0: float = 1e-2):
    """States at each of ``times`` (increasing, starting after 0), step-doubling control."""
    y = np.array(y0, dtype=float)
    t = 0.0
    h = h0
    out = []
    for target in times:
        while t < target - 1e-15:
            h = min(h, target - t)
            big = _step(ode.rhs, y, h)
            half = _step(ode.rhs, _step(ode.rhs, y, h / 2), h / 2)
            err = np.max(np.abs(half - big)) / 15.0
            scale = max(1.0, float(np.max(np.abs(half))))
            if err <= tol * scale:
                y = half + (half - big) / 15.0
                t += h
                if err < tol * scale / 64:
                    h *= 2
            else:
                h /= 2
                if h < 1e-12:
                    raise ArithmeticError("step size underflow in RK4 integration")
        out.append(y.copy())
    return out


def relative_error(exact, approx) -> float:
    exact = np.asarray(exact, dtype=float)
    approx = np.asarray(approx, dtype=float)
    denom = float(np.max(np.abs(exact)))
    diff = float(np.max(np.abs(exact - approx)))
    return diff / denom if denom else diff
