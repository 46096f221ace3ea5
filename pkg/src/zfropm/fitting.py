"""Damped least-squares fits of the ZFR, dispersive and absorption line models.

A small Levenberg-Marquardt loop with analytic Jacobians and Marquardt's
diagonal scaling, so that parameters in tesla and in hertz share one
optimiser without manual rescaling.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .lineshape import DispersiveParams, ZfrParams
from .optics import AbsorptionModelParams
from .vapor import BufferGas, density_from_fwhm

log = logging.getLogger(__name__)

MAX_ITER = 200
FTOL = 1e-12  # relative cost decrease on an accepted step
GTOL = 1e-10  # scaled gradient infinity-norm
LAMBDA0 = 1e-3
LAMBDA_UP = 10.0
LAMBDA_DOWN = 10.0
LAMBDA_MAX = 1e16


class FitError(ValueError):
    pass


@dataclass
class FitResult:
    model: str
    params: dict[str, float]
    stderr: dict[str, float]
    residual_rms: float
    iterations: int
    converged: bool
    rank_deficient: bool = False
    gradient_norm: float = float("nan")
    gradient_tolerance: float = GTOL
    message: str = ""
    init: dict[str, float] = field(default_factory=dict)

    def as_params(self):
        return MODELS[self.model].to_params(self.params)


class _Model:
    name: str
    names: tuple[str, ...]

    def __call__(self, x, p):
        raise NotImplementedError

    def jacobian(self, x, p):
        raise NotImplementedError

    def guess(self, x, y):
        raise NotImplementedError

    def to_params(self, d):
        raise NotImplementedError


def _edge_slice(n, frac=0.1):
    return max(2, int(n * frac))


def _half_max_span(x, y_rel, i_peak):
    """Width of the contiguous region around ``i_peak`` where y_rel >= half its peak."""
    half = y_rel[i_peak] / 2.0
    lo = i_peak
    while lo > 0 and y_rel[lo - 1] >= half:
        lo -= 1
    hi = i_peak
    while hi < len(x) - 1 and y_rel[hi + 1] >= half:
        hi += 1
    span = x[hi] - x[lo]
    if span <= 0:
        span = 2.0 * np.median(np.diff(x))
    return float(span)


class ZfrModel(_Model):
    name = "zfr"
    names = ("a", "b", "b0", "delta_b")

    def __call__(self, x, p):
        a, b, b0, w = p
        d = x - b0
        h = w * w / 4.0
        return a + (b - a) * h / (d * d + h)

    def jacobian(self, x, p):
        a, b, b0, w = p
        d = x - b0
        h = w * w / 4.0
        q = d * d + h
        lor = h / q
        return np.column_stack([
            1.0 - lor,
            lor,
            (b - a) * h * 2.0 * d / q**2,
            (b - a) * (w / 2.0) * d * d / q**2,
        ])

    def guess(self, x, y):
        k = _edge_slice(len(x))
        a = float(np.median(np.r_[y[:k], y[-k:]]))
        i = int(np.argmax(y))
        b = float(y[i])
        return np.array([a, b, x[i], _half_max_span(x, y - a, i)])

    def to_params(self, d):
        return ZfrParams(d["a"], d["b"], d["b0"], d["delta_b"])


class DispersiveModel(_Model):
    name = "dispersive"
    names = ("u", "b0", "delta_b")

    def __call__(self, x, p):
        u, b0, w = p
        d = x - b0
        return 0.5 * u * d * w / (d * d + w * w / 4.0)

    def jacobian(self, x, p):
        u, b0, w = p
        d = x - b0
        h = w * w / 4.0
        q = d * d + h
        return np.column_stack([
            0.5 * d * w / q,
            -0.5 * u * w * (h - d * d) / q**2,
            0.5 * u * d * (d * d - h) / q**2,
        ])

    def guess(self, x, y):
        i_max, i_min = int(np.argmax(y)), int(np.argmin(y))
        u = float(y[i_max] - y[i_min])
        w = abs(float(x[i_max] - x[i_min]))
        if w <= 0:
            w = 2.0 * float(np.median(np.diff(x)))
        lo, hi = sorted((i_max, i_min))
        seg_x, seg_y = x[lo:hi + 1], y[lo:hi + 1]
        b0 = float(0.5 * (x[i_max] + x[i_min]))
        if len(seg_x) >= 2:
            # steepest segment between the extrema, then its linear zero crossing
            j = int(np.argmax(np.abs(np.diff(seg_y))))
            y0, y1 = seg_y[j], seg_y[j + 1]
            if y0 != y1:
                b0 = float(seg_x[j] - y0 * (seg_x[j + 1] - seg_x[j]) / (y1 - y0))
        # the extremum at b0 + w/2 is +u/2 when u > 0
        if x[i_max] < x[i_min]:
            u = -u
        return np.array([u, b0, w])

    def to_params(self, d):
        return DispersiveParams(d["u"], d["b0"], d["delta_b"])


class AbsorptionModel(_Model):
    name = "absorption"
    names = ("c0", "c1", "nu0", "fwhm", "depth")

    def __call__(self, x, p):
        c0, c1, nu0, w, depth = p
        d = x - nu0
        h = w * w / 4.0
        return c0 + c1 * d - depth * h / (d * d + h)

    def jacobian(self, x, p):
        c0, c1, nu0, w, depth = p
        d = x - nu0
        h = w * w / 4.0
        q = d * d + h
        return np.column_stack([
            np.ones_like(x),
            d,
            -c1 - depth * h * 2.0 * d / q**2,
            -depth * (w / 2.0) * d * d / q**2,
            -h / q,
        ])

    def guess(self, x, y):
        k = _edge_slice(len(x), 0.15)
        ex, ey = np.r_[x[:k], x[-k:]], np.r_[y[:k], y[-k:]]
        slope, intercept = np.polyfit(ex, ey, 1)
        base = intercept + slope * x
        dip = base - y
        i = int(np.argmax(dip))
        nu0 = float(x[i])
        return np.array([
            float(intercept + slope * nu0),
            float(slope),
            nu0,
            _half_max_span(x, dip, i),
            float(dip[i]),
        ])

    def to_params(self, d):
        return AbsorptionModelParams(d["c0"], d["c1"], d["nu0"], d["fwhm"], d["depth"])


MODELS: dict[str, _Model] = {m.name: m for m in (ZfrModel(), DispersiveModel(), AbsorptionModel())}


def _scaled_gradient(jac, resid, y_norm):
    """Infinity-norm of J^T r with each column and the data normalised to unit length.

    Scale-free in the parameters, and tends to zero both at a noisy optimum
    (J^T r = 0) and on noiseless data (r = 0).
    """
    if y_norm == 0:
        y_norm = 1.0
    cn = np.linalg.norm(jac, axis=0)
    cn[cn == 0] = 1.0
    return float(np.max(np.abs(jac.T @ resid) / cn) / y_norm)


def _gradient_floor(resid, y_norm):
    """Smallest scaled gradient resolvable given rounding in the cost itself."""
    if y_norm == 0:
        y_norm = 1.0
    eps = np.finfo(float).eps
    return max(GTOL, 10.0 * np.sqrt(eps) * float(np.linalg.norm(resid)) / y_norm)


def levenberg_marquardt(fun, jac, p0, y_norm=1.0, max_iter=MAX_ITER):
    """Minimise 0.5 * |fun(p)|^2 from ``p0``.

    Marquardt damping lambda * diag(J^T J), starting at 1e-3, divided by 10 on
    an accepted step and multiplied by 10 on a rejected one. Stops when the
    scaled gradient drops below GTOL or an accepted step lowers the cost by
    less than FTOL relative. Returns (p, iterations, converged, message).
    """
    p = np.asarray(p0, dtype=float).copy()
    r = fun(p)
    cost = 0.5 * float(r @ r)
    lam = LAMBDA0
    for it in range(1, max_iter + 1):
        J = jac(p)
        g = J.T @ r
        if _scaled_gradient(J, r, y_norm) < GTOL:
            return p, it - 1, True, "gradient below tolerance"
        A = J.T @ J
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                p_new = p + step
                r_new = fun(p_new)
                cost_new = 0.5 * float(r_new @ r_new)
                if np.isfinite(cost_new) and cost_new < cost:
                    rel = (cost - cost_new) / cost
                    p, r, cost = p_new, r_new, cost_new
                    lam = max(lam / LAMBDA_DOWN, 1e-300)
                    if rel < FTOL:
                        return p, it, True, "relative cost decrease below tolerance"
                    break
            lam *= LAMBDA_UP
            if lam > LAMBDA_MAX:
                if _scaled_gradient(J, r, y_norm) < _gradient_floor(r, y_norm):
                    return p, it, True, "cost at rounding floor"
                return p, it, False, "no descent step found"
    return p, max_iter, False, "maximum iterations reached"


def fit_curve(model: str, x, y, init=None, max_iter: int = MAX_ITER) -> FitResult:
    """Least-squares fit of ``model`` ('zfr', 'dispersive' or 'absorption') to (x, y).

    ``init`` may be a dict keyed by parameter name or a sequence in model
    order; missing entries come from the automatic initial guess.
    """
    try:
        m = MODELS[model]
    except KeyError:
        raise FitError(f"unknown model {model!r}; choose from {sorted(MODELS)}") from None
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise FitError("x and y must be 1-D arrays of equal length")
    npar = len(m.names)
    if x.size < 2 * npar:
        raise FitError(f"need at least {2 * npar} points for model {model!r}, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("data must be finite")
    order = np.argsort(x, kind="stable")
    x, y = x[order], y[order]
    if np.any(np.diff(x) == 0):
        raise FitError("x values must be distinct")

    p0 = m.guess(x, y)
    if init is not None:
        if isinstance(init, dict):
            unknown = set(init) - set(m.names)
            if unknown:
                raise FitError(f"unknown parameters for {model!r}: {sorted(unknown)}")
            for k, v in init.items():
                p0[m.names.index(k)] = float(v)
        else:
            vals = np.asarray(init, dtype=float)
            if vals.shape != (npar,):
                raise FitError(f"init needs {npar} values for {model!r}")
            p0 = vals.copy()

    y_norm = float(np.linalg.norm(y))
    p, iters, converged, message = levenberg_marquardt(
        lambda q: m(x, q) - y, lambda q: m.jacobian(x, q), p0, y_norm, max_iter
    )
    resid = m(x, p) - y
    J = m.jacobian(x, p)
    gnorm = _scaled_gradient(J, resid, y_norm)
    rank_deficient = np.linalg.matrix_rank(J / np.where(np.linalg.norm(J, axis=0) == 0, 1.0,
                                                        np.linalg.norm(J, axis=0))) < npar
    dof = x.size - npar
    s2 = float(resid @ resid) / dof
    if rank_deficient:
        stderr = np.full(npar, np.inf)
        message = f"{message}; rank-deficient Jacobian"
        log.warning("fit %s: rank-deficient Jacobian at optimum", model)
    else:
        cov = s2 * np.linalg.inv(J.T @ J)
        stderr = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    return FitResult(
        model=model,
        params=dict(zip(m.names, map(float, p))),
        stderr=dict(zip(m.names, map(float, stderr))),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        iterations=iters,
        converged=bool(converged),
        rank_deficient=bool(rank_deficient),
        gradient_norm=gnorm,
        gradient_tolerance=max(GTOL, _gradient_floor(resid, y_norm)),
        message=message,
        init=dict(zip(m.names, map(float, p0))),
    )


def derive_pressure(fit: FitResult, gas: BufferGas) -> float:
    """Buffer-gas density in amagat implied by a fitted absorption FWHM."""
    if fit.model != "absorption":
        raise FitError(f"pressure needs an absorption fit, got {fit.model!r}")
    if not fit.converged:
        raise FitError("absorption fit did not converge")
    return density_from_fwhm(gas, fit.params["fwhm"])
