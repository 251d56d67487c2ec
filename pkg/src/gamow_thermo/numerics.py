"""Shared numerical kernel.

Adaptive complex quadrature (Gauss-Kronrod 7-15 with bisection), Cauchy
principal values by symmetric excision, complex Newton iteration with
difference-quotient slopes, fixed-step RK4 evolution of linear complex
rates, and Richardson-extrapolated finite differences.  Everything here is
a pure function of its arguments.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureSpec",
    "RootSearchConfig",
    "NonConvergence",
    "IntegrandError",
    "MaxIterExceeded",
    "SingularStep",
    "StepUnderflow",
    "integrate",
    "principal_value",
    "complex_newton",
    "ode_evolve",
    "derivative",
]


class NonConvergence(RuntimeError):
    """Subdivision or refinement budget exhausted before reaching tolerance."""


class IntegrandError(ValueError):
    """Integrand produced a NaN or infinity inside the integration range."""


class MaxIterExceeded(RuntimeError):
    """Root search did not converge within the iteration budget."""


class SingularStep(RuntimeError):
    """Numerical derivative vanished; Newton step is undefined."""


class StepUnderflow(RuntimeError):
    """ODE step halving hit the resolution floor without converging."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budgets for the adaptive integrator.

    ``oscillation_split`` is the frequency above which a declared
    oscillatory factor exp(-i*omega*t) makes the integrator sum
    half-period chunks instead of relying on plain bisection.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 4000
    oscillation_split: float = 30.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class RootSearchConfig:
    """Complex Newton search parameters.

    ``initial_guess`` may be left as None by callers that derive a
    problem-specific default before invoking :func:`complex_newton`.
    """

    initial_guess: complex | None = None
    step_tol: float = 1e-12
    residual_tol: float = 1e-12
    max_iter: int = 60

    def __post_init__(self):
        if not (self.step_tol > 0 and self.residual_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


# 15-point Kronrod extension of 7-point Gauss on [-1, 1]; the Gauss nodes
# are the odd-indexed Kronrod abscissae.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full symmetric node/weight tables (negative side first, centre last)
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG_FULL = np.zeros_like(_WK)
_WG_FULL[1:-1:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def _panel_eval(fvec, lo: np.ndarray, hi: np.ndarray):
    """Kronrod and Gauss sums over a batch of panels.

    ``lo``/``hi`` are equal-length arrays of panel edges.  Returns the
    Kronrod estimates and |K - G| error gauges, both shaped like ``lo``.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    pts = c[:, None] + h[:, None] * _NODES[None, :]
    vals = fvec(pts.ravel())
    vals = np.asarray(vals, dtype=complex).reshape(pts.shape)
    if not np.all(np.isfinite(vals)):
        bad = pts.ravel()[~np.isfinite(vals.ravel())][0]
        raise IntegrandError(f"integrand is not finite near x = {bad!r}")
    kron = h * (vals * _WK[None, :]).sum(axis=1)
    gauss = h * (vals * _WG_FULL[None, :]).sum(axis=1)
    return kron, np.abs(kron - gauss)


def _vectorize(f):
    """Wrap ``f`` so it maps float arrays to arrays, probing once."""
    probed = {"mode": None}

    def fvec(xs: np.ndarray):
        if probed["mode"] != "scalar":
            try:
                out = np.asarray(f(xs), dtype=complex)
                if out.shape == xs.shape:
                    probed["mode"] = "array"
                    return out
                if out.ndim == 0:  # constant shorthand like lambda w: 1.0
                    probed["mode"] = "scalar"
                    return np.full(xs.shape, complex(out))
            except (TypeError, ValueError):
                pass
            probed["mode"] = "scalar"
        return np.array([complex(f(float(x))) for x in xs])

    return fvec


def _adaptive(fvec, a: float, b: float, spec: QuadratureSpec) -> complex:
    """Globally adaptive bisection driven by a worst-panel heap."""
    kron, err = _panel_eval(fvec, np.array([a]), np.array([b]))
    heap = [(-err[0], a, b, kron[0])]
    total = kron[0]
    total_err = err[0]
    n_panels = 1
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if n_panels >= spec.max_subdivisions:
            raise NonConvergence(
                f"{spec.max_subdivisions} subdivisions exhausted "
                f"(error {total_err:.3e} on [{a!r}, {b!r}])"
            )
        if not heap:
            raise NonConvergence(
                f"all panels at float resolution, error {total_err:.3e}")
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # panel no longer splittable at float resolution
            total_err += neg_err  # remove its error from the budget
            continue
        kron, err = _panel_eval(fvec, np.array([lo, mid]), np.array([mid, hi]))
        total += kron.sum() - val
        total_err += err.sum() + neg_err
        heapq.heappush(heap, (-err[0], lo, mid, kron[0]))
        heapq.heappush(heap, (-err[1], mid, hi, kron[1]))
        n_panels += 1
    return total


def _composite(fvec, edges: np.ndarray, spec: QuadratureSpec) -> complex:
    """Integrate over a fixed chunking, bisecting offending chunks in bulk."""
    lo, hi = edges[:-1], edges[1:]
    kron, err = _panel_eval(fvec, lo, hi)
    tol = max(spec.abs_tol, spec.rel_tol * abs(kron.sum()))
    while err.sum() > tol:
        if lo.size > spec.max_subdivisions:
            raise NonConvergence(
                f"oscillatory chunking exceeded {spec.max_subdivisions} panels"
            )
        bad = err > tol / (2.0 * lo.size)
        mid = 0.5 * (lo[bad] + hi[bad])
        new_lo = np.concatenate([lo[~bad], lo[bad], mid])
        new_hi = np.concatenate([hi[~bad], mid, hi[bad]])
        k2, e2 = _panel_eval(fvec, np.concatenate([lo[bad], mid]),
                             np.concatenate([mid, hi[bad]]))
        kron = np.concatenate([kron[~bad], k2])
        err = np.concatenate([err[~bad], e2])
        lo, hi = new_lo, new_hi
        tol = max(spec.abs_tol, spec.rel_tol * abs(kron.sum()))
    return kron.sum()


def _map_semi_infinite(fvec, a: float):
    """Fold [a, inf) onto [0, 1) through w = a + u/(1-u)."""

    def gvec(us: np.ndarray):
        us = np.asarray(us, dtype=float)
        one_minus = 1.0 - us
        w = a + us / one_minus
        return fvec(w) / one_minus**2

    return gvec


def integrate(f, a: float, b: float, spec: QuadratureSpec | None = None, *,
              oscillation: float = 0.0) -> complex:
    """Integrate a complex-valued ``f`` over [a, b], b possibly +inf.

    ``oscillation`` declares the angular frequency of a known factor
    exp(-i*omega*t) in the integrand (t = oscillation).  Above
    ``spec.oscillation_split`` the range is cut at the oscillation's
    half-period zeros and the pieces summed; plain adaptive bisection
    cannot track thousands of sign changes.

    Returns the integral estimate; raises :class:`NonConvergence` when the
    subdivision budget runs out and :class:`IntegrandError` on NaN/inf.
    """
    spec = spec or QuadratureSpec()
    if not a < b:
        raise ValueError("integration range must satisfy a < b")
    fvec = _vectorize(f)

    if oscillation > spec.oscillation_split:
        half_period = np.pi / oscillation
        if np.isinf(b):
            return _oscillatory_tail_sweep(fvec, a, half_period, spec)
        n = int(np.ceil((b - a) / half_period))
        edges = np.minimum(a + half_period * np.arange(n + 1), b)
        edges[-1] = b
        return _composite(fvec, edges, spec)

    if np.isinf(b):
        return _adaptive(_map_semi_infinite(fvec, a), 0.0, 1.0, spec)
    return _adaptive(fvec, a, b, spec)


def _oscillatory_tail_sweep(fvec, a: float, half_period: float,
                            spec: QuadratureSpec) -> complex:
    """Sum half-period chunks of a decaying oscillatory tail on [a, inf)."""
    block = 64
    total = 0.0 + 0.0j
    quiet = 0
    start = a
    for _ in range(max(1, spec.max_subdivisions // block)):
        edges = start + half_period * np.arange(block + 1)
        kron, _ = _panel_eval(fvec, edges[:-1], edges[1:])
        total += kron.sum()
        start = edges[-1]
        if abs(kron.sum()) < 0.125 * spec.abs_tol:
            quiet += 1
            if quiet >= 2:
                return total
        else:
            quiet = 0
    raise NonConvergence("oscillatory tail did not decay within the chunk budget")


def principal_value(f, a: float, b: float, c: float,
                    spec: QuadratureSpec | None = None) -> float:
    """Cauchy principal value of ``f`` (simple pole at ``c``) over [a, b].

    Symmetric excision of [c-eps, c+eps] evaluated at two excision radii
    and extrapolated to eps -> 0; the linear-in-eps excision error cancels
    exactly, leaving an O(eps^3) residual.
    """
    spec = spec or QuadratureSpec()
    if not (a < c < b):
        raise ValueError(f"pole {c!r} must lie strictly inside [{a!r}, {b!r}]")
    dist = min(c - a, b - c)
    eps = dist / 500.0
    piece = QuadratureSpec(abs_tol=0.25 * spec.abs_tol, rel_tol=spec.rel_tol,
                           max_subdivisions=spec.max_subdivisions,
                           oscillation_split=spec.oscillation_split)
    fvec = _vectorize(f)
    outer = (_adaptive(fvec, a, c - eps, piece)
             + _adaptive(fvec, c + eps, b, piece))
    rings = (_adaptive(fvec, c - eps, c - eps / 2, piece)
             + _adaptive(fvec, c + eps / 2, c + eps, piece))
    inner = outer + rings
    return float((2.0 * inner - outer).real)


def complex_newton(g, cfg: RootSearchConfig) -> complex:
    """Newton iteration for analytic ``g`` with central-difference slopes.

    Derivatives use h = 1e-6 * max(1, |z|) so numerically supplied
    functions (tabulated form factors, quadrature-backed maps) work
    unchanged.  Converged means the last step is below ``step_tol`` and
    the residual below ``residual_tol``.
    """
    if cfg.initial_guess is None:
        raise ValueError("RootSearchConfig.initial_guess is required")
    z = complex(cfg.initial_guess)
    for _ in range(cfg.max_iter):
        gz = complex(g(z))
        if not np.isfinite(gz.real) or not np.isfinite(gz.imag):
            raise IntegrandError(f"g({z!r}) is not finite")
        h = 1e-6 * max(1.0, abs(z))
        dg = (complex(g(z + h)) - complex(g(z - h))) / (2.0 * h)
        if abs(dg) < 1e-300 or not np.isfinite(abs(dg)):
            raise SingularStep(f"derivative vanished at z = {z!r}")
        step = gz / dg
        z = z - step
        if abs(step) <= cfg.step_tol and abs(complex(g(z))) <= cfg.residual_tol:
            return z
    raise MaxIterExceeded(
        f"no root after {cfg.max_iter} iterations (last z = {z!r})")


def _rk4_linear(z: complex, y0: complex, tau_grid: np.ndarray,
                steps_per_interval: np.ndarray) -> np.ndarray:
    out = np.empty(tau_grid.size, dtype=complex)
    out[0] = y = complex(y0)
    for i in range(tau_grid.size - 1):
        n = int(steps_per_interval[i])
        h = (tau_grid[i + 1] - tau_grid[i]) / n
        for _ in range(n):
            k1 = z * y
            k2 = z * (y + 0.5 * h * k1)
            k3 = z * (y + 0.5 * h * k2)
            k4 = z * (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[i + 1] = y
    return out


def ode_evolve(z: complex, y0: complex, tau_grid,
               rel_tol: float = 1e-10) -> np.ndarray:
    """Evolve dy/dtau = z*y through the given grid points.

    Classic fixed-step RK4, with the step count doubled until two
    successive refinements agree to ``rel_tol`` in relative terms at every
    grid point.  The first grid point carries ``y0`` unchanged.
    """
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or tau.size < 1:
        raise ValueError("tau_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(tau) <= 0):
        raise ValueError("tau_grid must be strictly increasing")
    if tau.size == 1:
        return np.array([complex(y0)])

    dt = np.diff(tau)
    steps = np.maximum(1, np.ceil(abs(z) * dt / 0.5)).astype(int)
    prev = _rk4_linear(z, y0, tau, steps)
    prev_diff = None
    for _ in range(40):
        if np.any(dt / (2 * steps) < 1e-15 * np.abs(tau[1:]).clip(min=1.0)):
            raise StepUnderflow("step halving reached float resolution")
        steps = steps * 2
        cur = _rk4_linear(z, y0, tau, steps)
        scale = np.maximum(np.abs(cur), 1e-300)
        diff = float(np.max(np.abs(cur - prev) / scale))
        if diff <= rel_tol:
            return cur
        # a halving should shrink the defect ~16x; a stall means the
        # requested tolerance sits below the roundoff plateau
        if prev_diff is not None and diff > 0.25 * prev_diff:
            raise NonConvergence(
                f"RK4 refinement stalled at relative defect {diff:.3e}")
        prev, prev_diff = cur, diff
    raise NonConvergence("RK4 refinement did not settle")


def derivative(f, x: float, h: float):
    """Central difference with one Richardson step.

    Returns ``(value, error_estimate)``; the estimate is the difference
    between the extrapolated value and the finer plain difference.
    """
    if h <= 0:
        raise ValueError("step size h must be positive")
    samples = [f(x + h), f(x - h), f(x + h / 2), f(x - h / 2)]
    samples = [complex(s) for s in samples]
    if not all(np.isfinite(s.real) and np.isfinite(s.imag) for s in samples):
        raise ValueError(f"f is not finite near x = {x!r}")
    d_h = (samples[0] - samples[1]) / (2.0 * h)
    d_h2 = (samples[2] - samples[3]) / h
    value = (4.0 * d_h2 - d_h) / 3.0
    err = abs(value - d_h2)
    if abs(value.imag) == 0.0:
        return value.real, err
    return value, err
