"""Damped nonlinear least squares with finite-difference Jacobians.

The solver is a Levenberg-Marquardt loop: the damping factor grows whenever a
trial step increases the cost and shrinks after an accepted step, so the cost
never increases between accepted iterates.  Box bounds are handled by smooth
reparameterization (log for one-sided, logistic for two-sided) instead of
clipping, which keeps the covariance of bounded parameters meaningful; the
reported sigmas are mapped back through the transform derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateFitError, InvalidInputError

_CBRT_EPS = float(np.cbrt(np.finfo(float).eps))  # central-difference step scale
_EXP_CLIP = 250.0  # keeps squared residuals of runaway trial steps finite


@dataclass
class FitResult:
    """Fitted parameters with uncertainties and convergence diagnostics."""

    model: str
    params: dict
    sigmas: dict
    chi2_reduced: float
    covariance: np.ndarray
    iterations: int
    converged: bool
    flags: list = field(default_factory=list)

    def __getitem__(self, name):
        return self.params[name]

    def sigma(self, name):
        return self.sigmas[name]

    def to_json_obj(self):
        def num(v):
            v = float(v)
            return v if math.isfinite(v) else None

        return {
            "model": self.model,
            "params": {k: num(v) for k, v in self.params.items()},
            "sigmas": {k: num(v) for k, v in self.sigmas.items()},
            "chi2_reduced": num(self.chi2_reduced),
            "converged": bool(self.converged),
            "flags": list(self.flags),
        }


class _Transform:
    """Smooth map between one external (possibly bounded) parameter and an
    unconstrained internal coordinate."""

    def __init__(self, lo, hi):
        self.lo = -math.inf if lo is None else float(lo)
        self.hi = math.inf if hi is None else float(hi)
        if not self.lo < self.hi:
            raise InvalidInputError(f"empty bound interval ({lo}, {hi})")

    def to_internal(self, theta):
        if math.isinf(self.lo) and math.isinf(self.hi):
            return float(theta)
        if math.isinf(self.hi):
            if theta <= self.lo:
                raise InvalidInputError(f"init {theta} not above lower bound {self.lo}")
            return math.log(theta - self.lo)
        if math.isinf(self.lo):
            if theta >= self.hi:
                raise InvalidInputError(f"init {theta} not below upper bound {self.hi}")
            return math.log(self.hi - theta)
        if not self.lo < theta < self.hi:
            raise InvalidInputError(f"init {theta} outside bounds ({self.lo}, {self.hi})")
        frac = (theta - self.lo) / (self.hi - self.lo)
        return math.log(frac / (1.0 - frac))

    def to_external(self, u):
        if math.isinf(self.lo) and math.isinf(self.hi):
            return u
        u = min(max(u, -_EXP_CLIP), _EXP_CLIP)
        if math.isinf(self.hi):
            return self.lo + math.exp(u)
        if math.isinf(self.lo):
            return self.hi - math.exp(u)
        s = 1.0 / (1.0 + math.exp(-u))
        return self.lo + (self.hi - self.lo) * s

    def derivative(self, u):
        """d(external)/d(internal) at internal coordinate u."""
        if math.isinf(self.lo) and math.isinf(self.hi):
            return 1.0
        u = min(max(u, -_EXP_CLIP), _EXP_CLIP)
        if math.isinf(self.hi):
            return math.exp(u)
        if math.isinf(self.lo):
            return -math.exp(u)
        s = 1.0 / (1.0 + math.exp(-u))
        return (self.hi - self.lo) * s * (1.0 - s)


def least_squares(model_fn, x, y, p0, *, bounds=None, sigma=None, fixed=(),
                  model="custom", max_iter=200, tol=1e-10) -> FitResult:
    """Fit ``model_fn(x, params) -> prediction`` to data by damped least squares.

    Parameters
    ----------
    model_fn : callable
        Takes the independent variable and a {name: value} dict, returns the
        model prediction as an array matching ``y``.
    x, y : array_like
        Data.  ``len(y)`` must exceed the number of free parameters.
    p0 : dict
        Initial parameter values, keyed by name (order is kept).
    bounds : dict, optional
        name -> (lo, hi); either side may be None.  Initial values must lie
        strictly inside.
    sigma : array_like, optional
        Per-point standard deviations used as weights; defaults to 1.
    fixed : iterable of str, optional
        Parameter names held at their initial value.
    max_iter : int
        Iteration cap; hitting it yields a flagged, non-converged result
        rather than an exception.
    tol : float
        Relative tolerance on both the cost decrease and the step size.

    Raises
    ------
    DegenerateFitError
        If there are not more points than free parameters, or the normal
        matrix is singular where a covariance is required.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    names = list(p0)
    free = [n for n in names if n not in set(fixed)]
    if y.size <= len(free):
        raise DegenerateFitError(
            f"{y.size} points cannot constrain {len(free)} free parameters"
        )
    bounds = bounds or {}
    transforms = {n: _Transform(*bounds.get(n, (None, None))) for n in free}
    weights = None
    if sigma is not None:
        weights = 1.0 / np.asarray(sigma, dtype=float)
        if weights.shape != y.shape or not np.all(np.isfinite(weights)):
            raise InvalidInputError("sigma must be finite, positive, same shape as y")

    values = dict(p0)

    def residuals(u):
        for n, ui in zip(free, u):
            values[n] = transforms[n].to_external(ui)
        r = model_fn(x, values) - y
        if weights is not None:
            r = r * weights
        if not np.all(np.isfinite(r)):
            return None
        return r

    u = np.array([transforms[n].to_internal(p0[n]) for n in free])
    r = residuals(u)
    if r is None:
        raise InvalidInputError("model is not finite at the initial parameters")
    cost = float(r @ r)

    def jacobian(u, r0):
        J = np.empty((r0.size, u.size))
        for i in range(u.size):
            h = _CBRT_EPS * max(1.0, abs(u[i]))
            up, um = u.copy(), u.copy()
            up[i] += h
            um[i] -= h
            rp, rm = residuals(up), residuals(um)
            if rp is None or rm is None:
                # fall back to a one-sided difference at the domain edge
                rp = rp if rp is not None else r0
                rm = rm if rm is not None else r0
                scale = h if (rp is r0) != (rm is r0) else 2.0 * h
                J[:, i] = (rp - rm) / scale
            else:
                J[:, i] = (rp - rm) / (2.0 * h)
        return J

    lam = 1e-3
    iterations = 0
    converged = cost == 0.0
    flags = []
    J = None
    while not converged and iterations < max_iter:
        J = jacobian(u, r)
        jtj = J.T @ J
        grad = J.T @ r
        diag = np.maximum(np.diag(jtj), 1e-12 * max(np.max(np.diag(jtj)), 1e-300))
        accepted = False
        while lam <= 1e14:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            u_try = u + step
            r_try = residuals(u_try)
            if r_try is not None:
                cost_try = float(r_try @ r_try)
                if cost_try < cost:
                    rel_drop = (cost - cost_try) / max(cost, 1e-300)
                    rel_step = float(np.max(np.abs(step) / np.maximum(np.abs(u), 1.0))) if step.size else 0.0
                    u, r, cost = u_try, r_try, cost_try
                    lam = max(lam / 10.0, 1e-12)
                    accepted = True
                    if rel_drop < tol or rel_step < tol or cost == 0.0:
                        converged = True
                    break
            lam *= 10.0
        iterations += 1
        if not accepted:
            converged = True  # no descent direction left: stationary point
    if iterations >= max_iter and not converged:
        flags.append("max-iterations")

    # covariance from the undamped normal matrix at the solution
    if J is None:
        J = jacobian(u, r) if u.size else np.zeros((r.size, 0))
    dof = y.size - len(free)
    chi2_reduced = cost / dof
    cov_int = np.zeros((len(free), len(free)))
    pinned = np.zeros(len(free), dtype=bool)
    if len(free):
        jtj = J.T @ J
        col_scale = np.sqrt(np.diag(jtj))
        # a parameter stuck at a bound (or with no effect) has a vanishing
        # column; keep it out of the covariance instead of failing the fit
        pinned = col_scale <= 1e-9 * max(float(col_scale.max()), 1e-300)
        active = ~pinned
        if not np.any(active):
            raise DegenerateFitError("no parameter influences the model at the "
                                     "solution")
        sub = jtj[np.ix_(active, active)]
        ill = False
        try:
            inv_sub = np.linalg.inv(sub)
            diag_inv = np.diag(inv_sub)
            tiny = 1e-12 * max(float(np.max(np.abs(diag_inv))), 1e-300)
            ill = not np.all(np.isfinite(inv_sub)) or np.any(diag_inv < -tiny)
        except np.linalg.LinAlgError:
            ill = True
        if ill:
            # collinear parameters (e.g. a decay time running off to
            # infinity): report the minimum-norm covariance and say so
            inv_sub = np.linalg.pinv(sub, hermitian=True, rcond=1e-12)
            flags.append("ill-conditioned-covariance")
        inv_sub = inv_sub.copy()
        np.fill_diagonal(inv_sub, np.maximum(np.diag(inv_sub), 0.0))
        cov_int[np.ix_(active, active)] = inv_sub * chi2_reduced
    deriv = np.array([transforms[n].derivative(ui) for n, ui in zip(free, u)])
    cov_ext = deriv[:, None] * cov_int * deriv[None, :]

    for n, ui in zip(free, u):
        values[n] = transforms[n].to_external(ui)
    params = {n: float(values[n]) for n in names}
    sigmas = {n: 0.0 for n in names}
    covariance = np.zeros((len(names), len(names)))
    idx = {n: i for i, n in enumerate(names)}
    for i, ni in enumerate(free):
        sigmas[ni] = float(np.sqrt(cov_ext[i, i]))
        if pinned[i]:
            sigmas[ni] = float("inf")
            flags.append(f"unconstrained:{ni}")
        for j, nj in enumerate(free):
            covariance[idx[ni], idx[nj]] = cov_ext[i, j]

    return FitResult(
        model=model,
        params=params,
        sigmas=sigmas,
        chi2_reduced=float(chi2_reduced),
        covariance=covariance,
        iterations=iterations,
        converged=bool(converged),
        flags=flags,
    )
