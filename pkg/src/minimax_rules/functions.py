"""Built-in convex scenario cost families on R^n.

Every family exposes ``value``, ``grad`` (a subgradient), ``hess`` and an
exact ``box_minimum`` where one exists in closed form.  ``translated(a, k)``
returns ``x -> self(x - a) + k.x`` in the same family, which is how anchored
families are built without losing closed forms.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def _vec(v, n: int, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} must be finite")
    return arr


class ScenarioFunction:
    dim: int
    strictly_convex: bool = False

    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, x: np.ndarray) -> np.ndarray:
        return np.zeros((self.dim, self.dim))

    def box_minimum(self, lower: np.ndarray, upper: np.ndarray) -> tuple[np.ndarray, float] | None:
        """Exact minimiser over the box, or None when no closed form applies."""
        return None

    def translated(self, anchor, slope) -> "ScenarioFunction":
        raise NotImplementedError(f"{type(self).__name__} cannot be re-anchored")

    def __call__(self, x) -> float:
        return self.value(np.asarray(x, dtype=float))


class Quadratic(ScenarioFunction):
    """``(x - c)^T Q (x - c) + l.x + offset`` with ``Q`` positive semidefinite."""

    def __init__(self, center, Q=None, linear=0.0, offset: float = 0.0):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        n = center.size
        self.dim = n
        self.center = _vec(center, n, "center")
        Q = np.eye(n) if Q is None else np.asarray(Q, dtype=float)
        if Q.ndim == 0:
            Q = Q * np.eye(n)
        if Q.shape != (n, n) or not np.all(np.isfinite(Q)):
            raise ValidationError("Q must be a finite n x n matrix")
        Q = 0.5 * (Q + Q.T)
        eig = np.linalg.eigvalsh(Q)
        if eig.min() < -1e-12 * max(1.0, abs(eig).max()):
            raise ValidationError("Q must be positive semidefinite")
        self.Q = Q
        self.linear = _vec(linear, n, "linear")
        self.offset = float(offset)
        self.strictly_convex = bool(eig.min() > 1e-12 * max(1.0, abs(eig).max()))

    def value(self, x):
        d = x - self.center
        return float(d @ self.Q @ d + self.linear @ x + self.offset)

    def grad(self, x):
        return 2.0 * self.Q @ (x - self.center) + self.linear

    def hess(self, x):
        return 2.0 * self.Q

    def box_minimum(self, lower, upper):
        if self.strictly_convex:
            y = self.center - 0.5 * np.linalg.solve(self.Q, self.linear)
            if np.all(y >= lower) and np.all(y <= upper):
                return y, self.value(y)
        if np.count_nonzero(self.Q - np.diag(np.diag(self.Q))) == 0:
            q = np.diag(self.Q)
            y = np.where(
                q > 0,
                self.center - self.linear / np.where(q > 0, 2.0 * q, 1.0),
                np.where(self.linear > 0, lower, np.where(self.linear < 0, upper, self.center)),
            )
            y = np.clip(y, lower, upper)
            return y, self.value(y)
        return None

    def translated(self, anchor, slope):
        a = _vec(anchor, self.dim, "anchor")
        k = _vec(slope, self.dim, "slope")
        return Quadratic(self.center + a, self.Q, self.linear + k, self.offset - self.linear @ a)

    def __repr__(self) -> str:
        return f"Quadratic(center={self.center.tolist()}, linear={self.linear.tolist()}, offset={self.offset})"


class ExpLinear(ScenarioFunction):
    """Separable ``sum_d b_d exp(-r_d (x_d - a_d)) + k_d x_d + offset``.

    In one dimension this is the risk-plus-investment shape
    ``b exp(-r (x - a)) + k x``.
    """

    def __init__(self, scale, rate, anchor, slope=0.0, offset: float = 0.0, dim: int | None = None):
        n = dim or max(np.size(scale), np.size(rate), np.size(anchor), np.size(slope))
        self.dim = n
        self.scale = _vec(scale, n, "scale")
        self.rate = _vec(rate, n, "rate")
        self.anchor = _vec(anchor, n, "anchor")
        self.slope = _vec(slope, n, "slope")
        self.offset = float(offset)
        if np.any(self.scale < 0) or np.any(self.rate <= 0):
            raise ValidationError("ExpLinear needs scale >= 0 and rate > 0")
        self.strictly_convex = bool(np.all(self.scale > 0))

    def _e(self, x):
        return self.scale * np.exp(-self.rate * (x - self.anchor))

    def value(self, x):
        return float(self._e(x).sum() + self.slope @ x + self.offset)

    def grad(self, x):
        return -self.rate * self._e(x) + self.slope

    def hess(self, x):
        return np.diag(self.rate**2 * self._e(x))

    def stationary_point(self) -> np.ndarray:
        """Coordinate-wise ``a + ln(r b / k) / r``; +inf where the slope is not positive."""
        with np.errstate(divide="ignore", invalid="ignore"):
            s = self.anchor + np.log(self.rate * self.scale / self.slope) / self.rate
        return np.where((self.slope > 0) & (self.scale > 0), s, np.where(self.slope > 0, -np.inf, np.inf))

    def box_minimum(self, lower, upper):
        y = np.clip(self.stationary_point(), lower, upper)
        return y, self.value(y)

    def translated(self, anchor, slope):
        a = _vec(anchor, self.dim, "anchor")
        k = _vec(slope, self.dim, "slope")
        return ExpLinear(self.scale, self.rate, self.anchor + a, self.slope + k,
                         self.offset - self.slope @ a, dim=self.dim)

    def __repr__(self) -> str:
        return (f"ExpLinear(scale={self.scale.tolist()}, rate={self.rate.tolist()}, "
                f"anchor={self.anchor.tolist()}, slope={self.slope.tolist()})")


class PiecewiseLinear(ScenarioFunction):
    """``max_j (s_j . x + c_j)``; convex but never strictly so."""

    def __init__(self, slopes, intercepts):
        S = np.atleast_2d(np.asarray(slopes, dtype=float))
        c = np.atleast_1d(np.asarray(intercepts, dtype=float))
        if S.shape[0] != c.size or not (np.all(np.isfinite(S)) and np.all(np.isfinite(c))):
            raise ValidationError("need one finite intercept per affine piece")
        self.slopes, self.intercepts = S, c
        self.dim = S.shape[1]

    def value(self, x):
        return float((self.slopes @ x + self.intercepts).max())

    def grad(self, x):
        return self.slopes[int(np.argmax(self.slopes @ x + self.intercepts))].copy()

    def box_minimum(self, lower, upper):
        from .simplex import solve_lp

        n = self.dim
        # variables (x, t): min t  s.t.  s_j.x - t <= -c_j
        A = np.hstack([self.slopes, -np.ones((len(self.intercepts), 1))])
        c = np.zeros(n + 1)
        c[-1] = 1.0
        bounds = [(float(lo), float(hi)) for lo, hi in zip(lower, upper)] + [(None, None)]
        sol = solve_lp(c, A, -self.intercepts, bounds=bounds)
        if not sol.optimal:
            return None
        y = np.clip(sol.x[:n], lower, upper)
        return y, self.value(y)

    def translated(self, anchor, slope):
        a = _vec(anchor, self.dim, "anchor")
        k = _vec(slope, self.dim, "slope")
        return PiecewiseLinear(self.slopes + k, self.intercepts - self.slopes @ a)


class Shifted(ScenarioFunction):
    """``base(x) - shift``; used for regret functions."""

    def __init__(self, base: ScenarioFunction, shift: float):
        self.base = base
        self.shift = float(shift)
        self.dim = base.dim
        self.strictly_convex = base.strictly_convex

    def value(self, x):
        return self.base.value(x) - self.shift

    def grad(self, x):
        return self.base.grad(x)

    def hess(self, x):
        return self.base.hess(x)

    def box_minimum(self, lower, upper):
        found = self.base.box_minimum(lower, upper)
        if found is None:
            return None
        return found[0], found[1] - self.shift
