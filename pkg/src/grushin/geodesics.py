"""Geodesics of the alpha-Grushin plane.

The plane carries the frame ``d/dx, |x|^alpha d/dy``; normal geodesics solve

    x' = u,  y' = v x^(2 alpha),  u' = -alpha v^2 x^(2 alpha - 2) x,  v' = 0.

Away from the horizontal case they are ``x = A sin_alpha(omega t + phi)``,
``u = A omega cos_alpha(omega t + phi)`` with the polar parameters
``A > 0, omega != 0, phi in [0, 2 pi_alpha)``.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from . import gentrig
from .errors import ConvergenceError, CutLocusError, DegenerateInputError, DomainError
from .gentrig import Alpha, as_alpha, even_power, odd_power
from .ode import integrate as ode_integrate

__all__ = [
    "Point", "Covector", "PolarParams", "GeodesicSpec", "GeodesicState",
    "make_spec", "is_line", "to_polar", "from_polar", "centered_phase",
    "geodesic_flow", "geodesic_point", "hamiltonian", "integrate_hamiltonian",
    "connect", "param_derivatives", "ParamDerivatives",
]

LINE_THRESHOLD = 1e-12


class Point(NamedTuple):
    x: float
    y: float


class Covector(NamedTuple):
    u: float
    v: float


@dataclass(frozen=True)
class PolarParams:
    """Amplitude, frequency and phase of ``x(t) = A sin_alpha(omega t + phi)``."""

    A: float
    omega: float
    phi: float

    def __post_init__(self):
        if not np.isfinite(self.A) or self.A <= 0:
            raise DomainError(f"A must be positive, got {self.A}")
        if not np.isfinite(self.omega) or self.omega == 0:
            raise DomainError("omega must be a non-zero real")
        if not np.isfinite(self.phi) or self.phi < 0:
            raise DomainError(f"phi must lie in [0, 2 pi_alpha), got {self.phi}")


@dataclass(frozen=True)
class GeodesicSpec:
    """A geodesic through ``q0`` with initial covector ``lambda0``.

    ``kind`` is ``"line"`` for the horizontal straight lines (and the
    constant curve), ``"oscillating"`` otherwise, in which case ``polar`` holds
    the parameters (A, omega, phi).
    """

    alpha: Alpha
    q0: Point
    lambda0: Covector
    kind: str
    polar: Optional[PolarParams] = None

    @property
    def speed(self):
        return float(np.sqrt(2.0 * hamiltonian(self.alpha, self.q0, self.lambda0)))

    @property
    def is_line(self):
        return self.kind == "line"

    @property
    def cut_time(self):
        if self.is_line:
            return np.inf
        return self.alpha.pi_alpha / abs(self.polar.omega)


class GeodesicState(tuple):
    """``(Point, Covector)`` pair with a ``post_cut`` flag."""

    def __new__(cls, point, covector, post_cut=False):
        obj = super().__new__(cls, (point, covector))
        obj.post_cut = bool(post_cut)
        return obj

    @property
    def point(self):
        return self[0]

    @property
    def covector(self):
        return self[1]

    def __repr__(self):
        return f"GeodesicState({self[0]!r}, {self[1]!r}, post_cut={self.post_cut})"


def hamiltonian(alpha, q0, lambda0):
    """``H = (u^2 + v^2 x^(2 alpha)) / 2``."""
    a = as_alpha(alpha).alpha
    return 0.5 * (lambda0[0] ** 2 + lambda0[1] ** 2 * float(even_power(q0[0], a)))


def is_line(alpha, x0, u0, v0):
    """Dispatch test for the straight-line branch (elementwise)."""
    a = as_alpha(alpha).alpha
    x0, u0, v0 = (np.asarray(z, dtype=float) for z in (x0, u0, v0))
    near_zero_v = np.abs(v0) * (1.0 + np.abs(x0)) ** a <= LINE_THRESHOLD * (np.abs(u0) + 1.0)
    # zero speed, including |x0|^alpha underflow
    still = (u0 == 0) & (v0 * np.abs(x0) ** a == 0)
    return near_zero_v | still


def make_spec(alpha, q0, lambda0):
    """Classify a geodesic and attach its polar parameters."""
    ctx = as_alpha(alpha)
    q0 = Point(float(q0[0]), float(q0[1]))
    lambda0 = Covector(float(lambda0[0]), float(lambda0[1]))
    if not all(np.isfinite(q0 + lambda0)):
        raise DomainError("initial data must be finite")
    if is_line(ctx, q0.x, lambda0.u, lambda0.v):
        return GeodesicSpec(ctx, q0, lambda0, "line")
    return GeodesicSpec(ctx, q0, lambda0, "oscillating", to_polar(ctx, q0, lambda0))


def _amplitude(ctx, x0, u0, v0):
    a = ctx.alpha
    kappa = np.hypot(u0, v0 * np.abs(x0) ** a)
    A = (kappa / np.abs(v0)) ** (1.0 / a)
    omega = v0 * A ** (a - 1)
    return A, omega, kappa


def centered_phase(alpha, s, c):
    """Phase split ``phi = r + k pi_alpha`` with ``|r| <= pi_alpha/2``.

    Returns ``(r, sigma)`` with ``sigma = (-1)^k``, so that
    ``sin_alpha(phi + z) = sigma * sin_alpha(r + z)``. Keeping ``r`` small
    preserves relative accuracy when ``phi`` is close to a multiple of
    ``pi_alpha``.
    """
    ctx = as_alpha(alpha)
    s = np.asarray(s, dtype=float)
    c = np.asarray(c, dtype=float)
    abs_s = np.minimum(np.abs(s), 1.0)
    abs_c = np.minimum(np.abs(c), 1.0)
    ref = np.where(abs_s ** ctx.q <= 0.5, ctx._F(abs_s), 0.5 * ctx.pi_alpha - ctx._Fc(abs_c))
    sigma = np.where(c >= 0, 1.0, -1.0)
    r = np.where(s >= 0, 1.0, -1.0) * sigma * ref
    return r, sigma


def _phase_from_centered(ctx, r, sigma):
    P = ctx.pi_alpha
    phi = r + np.where(sigma < 0, P, 0.0)
    return np.where(phi < 0, phi + 2 * P, phi)


def to_polar(alpha, q0, lambda0):
    """(x0, u0, v0) -> (A, omega, phi)."""
    ctx = as_alpha(alpha)
    x0, (u0, v0) = float(q0[0]), lambda0
    u0, v0 = float(u0), float(v0)
    if v0 == 0 or (x0 == 0 and u0 == 0):
        raise DegenerateInputError("straight-line geodesic has no polar parameters")
    A, omega, kappa = _amplitude(ctx, x0, u0, v0)
    r, sigma = centered_phase(ctx, x0 / A, np.sign(v0) * u0 / kappa)
    phi = float(_phase_from_centered(ctx, r, sigma))
    if phi >= 2 * ctx.pi_alpha:
        phi -= 2 * ctx.pi_alpha
    return PolarParams(float(A), float(omega), phi)


def from_polar(alpha, y0, params):
    """(A, omega, phi) -> (q0, lambda0)."""
    ctx = as_alpha(alpha)
    A, omega, phi = params.A, params.omega, params.phi
    s, c = ctx.sincos(phi)
    v0 = omega / A ** (ctx.alpha - 1)
    return Point(A * s, float(y0)), Covector(A * omega * c, v0)


def geodesic_flow(alpha, x0, y0, u0, v0, t):
    """Closed-form flow, vectorised over all arguments.

    Returns arrays ``(x, y, u, v)`` at time ``t``.
    """
    ctx = as_alpha(alpha)
    a = ctx.alpha
    x0, y0, u0, v0, t = np.broadcast_arrays(*(np.asarray(z, dtype=float)
                                              for z in (x0, y0, u0, v0, t)))
    shape = x0.shape
    x0, y0, u0, v0, t = (np.atleast_1d(z) for z in (x0, y0, u0, v0, t))
    line = is_line(ctx, x0, u0, v0)
    x = x0 + u0 * t
    y = y0.copy()
    u = u0.copy()
    osc = ~line
    if np.any(osc):
        X0, U0, V0, T = x0[osc], u0[osc], v0[osc], t[osc]
        A, omega, kappa = _amplitude(ctx, X0, U0, V0)
        r, sigma = centered_phase(ctx, X0 / A, np.sign(V0) * U0 / kappa)
        theta = r + omega * T
        S, C = ctx.sincos(theta)
        x[osc] = sigma * A * S
        u[osc] = sigma * A * omega * C
        y[osc] = y0[osc] + A ** (a + 1) * gentrig.sin_power_integral_diff(ctx, theta, r)
    out = (x, y, u, v0.copy())
    if not shape:
        return tuple(float(z[0]) for z in out)
    return out


def geodesic_point(spec, t):
    """Point and covector at time ``t``; ``post_cut`` is set past the cut time."""
    x, y, u, v = geodesic_flow(spec.alpha, spec.q0.x, spec.q0.y,
                               spec.lambda0.u, spec.lambda0.v, float(t))
    if t == 0:
        x, y, u, v = spec.q0.x, spec.q0.y, spec.lambda0.u, spec.lambda0.v
    return GeodesicState(Point(x, y), Covector(u, v), post_cut=t > spec.cut_time)


def integrate_hamiltonian(alpha, q0, lambda0, t, tol=1e-12):
    """Hamilton's equations by adaptive Dormand–Prince integration.

    ``t`` may be a scalar (returns ``(Point, Covector)``) or an increasing
    array of non-negative times (returns an array of rows ``x, y, u, v``).
    """
    ctx = as_alpha(alpha)
    a = ctx.alpha
    if tol <= 0:
        raise DomainError("tol must be positive")
    v0 = float(lambda0[1])

    def rhs(_, z):
        x, u = z[0], z[2]
        return (u, v0 * float(even_power(x, a)), -a * v0 * v0 * float(odd_power(x, a - 1)), 0.0)

    def hmax(_, z):
        # |x|^(2 alpha - 2) x is only finitely smooth at x = 0
        x, u = abs(z[0]), abs(z[2])
        return max(1e-5, min(0.05, 0.25 * x / (u + 1e-300)))

    scalar = np.ndim(t) == 0
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise DomainError("times must be non-negative")
    ys = ode_integrate(rhs, (q0[0], q0[1], lambda0[0], v0), ts,
                       rtol=tol, atol=tol, hmax=hmax)
    if scalar:
        x, y, u, v = ys[0]
        return Point(float(x), float(y)), Covector(float(u), float(v))
    return ys


class ParamDerivatives(NamedTuple):
    A_x0: float
    A_u0: float
    A_v0: float
    omega_x0: float
    omega_u0: float
    omega_v0: float
    phi_x0: float
    phi_u0: float
    phi_v0: float


def param_derivatives(alpha, q0, lambda0):
    """Partial derivatives of (A, omega, phi) with respect to (x0, u0, v0)."""
    ctx = as_alpha(alpha)
    a = ctx.alpha
    p = to_polar(ctx, q0, lambda0)
    A, w = p.A, p.omega
    v0 = float(lambda0[1])
    s, c = ctx.sincos(p.phi)
    if s == 0:
        raise DegenerateInputError("A_x0 and omega_x0 are undefined when sin_alpha(phi) = 0")
    c2 = c * c
    one_minus = 1.0 - c2
    return ParamDerivatives(
        A_x0=one_minus / s,
        A_u0=c / (a * w),
        A_v0=-c2 * A / (a * v0),
        omega_x0=(a - 1) * (w / A) * one_minus / s,
        omega_u0=(a - 1) * c / (a * A),
        omega_v0=(w / v0) * (1.0 - (a - 1) / a * c2),
        phi_x0=c / A,
        phi_u0=-s / (a * w * A),
        phi_v0=s * c / (a * v0),
    )


# -- two-point connection ---------------------------------------------------


def _endpoint(ctx, x0, y0, u0, v0):
    x, y, _, _ = geodesic_flow(ctx, x0, y0, u0, v0, 1.0)
    return x, y


def _scaled_miss(ctx, dx, dy):
    return np.abs(dx) + np.abs(dy) ** (1.0 / (ctx.alpha + 1))


def _connect_singular(ctx, q0, q1):
    """x0 = 0: reduce to one monotone equation in z = |omega|."""
    a, P = ctx.alpha, ctx.pi_alpha
    dy = q1.y - q0.y
    target = np.log(abs(dy)) - (a + 1) * np.log(abs(q1.x))

    def g(z):
        s = ctx.sin(z)
        return np.log(gentrig.sin_power_integral(ctx, z)) - (a + 1) * np.log(s) - target

    lo, hi = 1e-300 ** (1.0 / (2 * a + 1)), P * (1 - 1e-15)
    if g(lo) > 0 or g(hi) < 0:
        raise ConvergenceError("singular connection outside the representable range",
                               {"q0": q0, "q1": q1})
    z = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    A = abs(q1.x) / ctx.sin(z)
    omega = np.sign(dy) * z
    sign_c = 1.0 if np.sign(q1.x) == np.sign(dy) else -1.0
    return Covector(sign_c * A * omega, omega / A ** (a - 1))


def _seeds(ctx, q0, q1, n_phi=64, n_omega=16):
    a, P = ctx.alpha, ctx.pi_alpha
    x0 = q0.x
    phi = (np.arange(n_phi) + 0.5) * (2 * P / n_phi)
    w = np.linspace(0, P, n_omega + 2)[1:-1]
    phi, w = np.meshgrid(phi, w, indexing="ij")
    s, c = ctx.sincos(phi.ravel())
    w = w.ravel()
    kappa = np.abs(w * x0 / s)
    u0 = kappa * c
    ratio = s / x0
    v0 = kappa * ratio * np.abs(ratio) ** (a - 1)
    # horizontal-line seed: linearise y in v0
    du = q1.x - q0.x
    if du != 0:
        integral = float((odd_power(q1.x, a) - odd_power(q0.x, a)) / ((2 * a + 1) * du))
    else:
        integral = float(even_power(q0.x, a))
    v_line = (q1.y - q0.y) / integral if integral > 0 else 0.0
    u0 = np.append(u0, du)
    v0 = np.append(v0, v_line)
    return u0, v0


def _newton(ctx, q0, q1, u0, v0, tol, max_iter=100):
    """Damped Newton on the endpoint map, vectorised over starting points."""
    x0, y0 = q0
    u0 = np.array(u0, dtype=float)
    v0 = np.array(v0, dtype=float)

    def resid(u, v):
        x, y = _endpoint(ctx, x0, y0, u, v)
        return np.stack([x - q1.x, y - q1.y], axis=-1)

    F = resid(u0, v0)
    norm = np.linalg.norm(F, axis=-1)
    active = np.isfinite(norm)
    for _ in range(max_iter):
        todo = active & (norm > tol)
        if not np.any(todo):
            break
        u, v, f = u0[todo], v0[todo], F[todo]
        hu = 1e-7 * (1.0 + np.abs(u))
        hv = 1e-7 * (1.0 + np.abs(v))
        Ju = (resid(u + hu, v) - resid(u - hu, v)) / (2 * hu)[:, None]
        Jv = (resid(u, v + hv) - resid(u, v - hv)) / (2 * hv)[:, None]
        det = Ju[:, 0] * Jv[:, 1] - Jv[:, 0] * Ju[:, 1]
        ok = np.isfinite(det) & (det != 0)
        safe = np.where(ok, det, 1.0)
        du = -(Jv[:, 1] * f[:, 0] - Jv[:, 0] * f[:, 1]) / safe
        dv = -(-Ju[:, 1] * f[:, 0] + Ju[:, 0] * f[:, 1]) / safe
        cur = np.linalg.norm(f, axis=-1)
        lam = np.ones_like(cur)
        new_u, new_v, new_f, new_n = u.copy(), v.copy(), f.copy(), cur.copy()
        pending = ok.copy()
        for _ in range(40):
            if not np.any(pending):
                break
            cu = u[pending] + lam[pending] * du[pending]
            cv = v[pending] + lam[pending] * dv[pending]
            cf = resid(cu, cv)
            cn = np.linalg.norm(cf, axis=-1)
            accept = np.isfinite(cn) & (cn < cur[pending])
            idx = np.flatnonzero(pending)
            acc = idx[accept]
            new_u[acc], new_v[acc], new_f[acc], new_n[acc] = (
                cu[accept], cv[accept], cf[accept], cn[accept])
            pending[acc] = False
            lam[pending] *= 0.5
        stalled = ~ok | pending
        idx = np.flatnonzero(todo)
        u0[idx], v0[idx], F[idx], norm[idx] = new_u, new_v, new_f, new_n
        active[idx[stalled]] = False
    return u0, v0, norm


def connect(alpha, q0, q1, tol=None):
    """The minimising geodesic from ``q0`` to ``q1`` on ``[0, 1]``.

    Raises :class:`CutLocusError` if ``q1`` is a cut point of ``q0`` and
    :class:`ConvergenceError` (with diagnostics) if shooting fails.
    """
    from .cutlocus import in_cut_locus

    ctx = as_alpha(alpha)
    q0 = Point(float(q0[0]), float(q0[1]))
    q1 = Point(float(q1[0]), float(q1[1]))
    if not all(np.isfinite(q0 + q1)):
        raise DomainError("points must be finite")
    if q0 == q1:
        raise DomainError("q0 and q1 coincide")
    if in_cut_locus(ctx, q0, q1):
        raise CutLocusError(f"{tuple(q1)} lies in the cut locus of {tuple(q0)}")
    if q1.y == q0.y:
        return make_spec(ctx, q0, (q1.x - q0.x, 0.0))
    if q0.x == 0:
        return make_spec(ctx, q0, _connect_singular(ctx, q0, q1))

    scale = 1.0 + max(abs(q0.x), abs(q0.y), abs(q1.x), abs(q1.y))
    tol = 1e-10 * scale if tol is None else tol
    u_seed, v_seed = _seeds(ctx, q0, q1)
    x, y = _endpoint(ctx, q0.x, q0.y, u_seed, v_seed)
    miss = _scaled_miss(ctx, x - q1.x, y - q1.y)
    miss = np.where(np.isfinite(miss), miss, np.inf)
    order = np.argsort(miss)
    P = ctx.pi_alpha
    best = None
    for batch in (order[:8], order[8:64]):
        u, v, norm = _newton(ctx, q0, q1, u_seed[batch], v_seed[batch], tol)
        for ui, vi, ni in sorted(zip(u, v, norm), key=lambda z: z[2]):
            if not ni <= tol:
                break
            spec = make_spec(ctx, q0, (ui, vi))
            if spec.is_line or abs(spec.polar.omega) <= P * (1 + 1e-12):
                return spec
            if best is None:
                best = (ui, vi, ni)
    raise ConvergenceError(
        f"shooting from {tuple(q0)} to {tuple(q1)} did not converge",
        {"best_seed": (float(u_seed[order[0]]), float(v_seed[order[0]])),
         "best_seed_miss": float(miss[order[0]]), "non_minimising_root": best},
    )
