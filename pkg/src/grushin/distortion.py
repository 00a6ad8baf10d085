"""Jacobian determinants of the exponential map and distortion coefficients.

For the geodesic from ``q0`` with covector ``(u0, v0)`` the determinant of
``(u0, v0) -> (x(t), y(t))`` is

    J(t) = t (u0 x(t) - (x0 + u0 t) u(t)) / (alpha v0^2)
         = A^(2 alpha) t K(t) / (alpha omega),
    K(t) = S1 c - C1 (s + omega t c),

with ``s, c`` at ``phi`` and ``S1, C1`` at ``omega t + phi``. The distortion
coefficient is ``beta_t = J(t) / J(1)``. Both forms cancel badly near the
horizontal limit and for small ``t``; there the identity

    K(t) = alpha omega int_0^t sin_alpha(omega tau + phi)^(2 alpha - 1) (s + omega tau c) dtau

is integrated instead.

The ``*_display`` functions keep longer expanded expressions. They
agree with finite differences of the flow only at ``alpha = 1``.
"""

import enum
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import qmc

from .errors import ConvergenceError, DegenerateInputError, DomainError
from .gentrig import as_alpha, even_power, odd_power, odd_power_moment
from .geodesics import _amplitude, centered_phase, connect, geodesic_flow, is_line

__all__ = [
    "Branch", "DistortionResult", "jacobian", "jacobian_xuv", "jacobian_polar",
    "jacobian_xuv_display", "jacobian_polar_display", "beta", "beta_generic",
    "beta_polar", "beta_horizontal", "beta_singular", "beta_singular_display",
    "beta_u_zero", "singular_g", "singular_h", "aux_vderivatives",
    "fd_jacobian_oracle", "beta_monte_carlo", "MonteCarloEstimate",
]

CANCEL_RATIO = 1e-6


class Branch(enum.Enum):
    GENERIC = "Generic"
    HORIZONTAL = "Horizontal"
    SINGULAR = "Singular"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DistortionResult:
    beta: object  # float or ndarray, matching t
    branch: Branch
    t: object


def _scalar(out):
    return out[()] if np.ndim(out) == 0 else out


# -- Jacobians ----------------------------------------------------------------


def jacobian_xuv(alpha, t, x0, u0, v0, xt, ut):
    """``t (u0 x(t) - (x0 + u0 t) u(t)) / (alpha v0^2)`` from the state at ``t``."""
    a = as_alpha(alpha).alpha
    v0 = np.asarray(v0, dtype=float)
    if np.any(v0 == 0):
        raise DegenerateInputError("v0 = 0: use the horizontal formula")
    t = np.asarray(t, dtype=float)
    return _scalar(t * (u0 * np.asarray(xt) - (x0 + u0 * t) * np.asarray(ut)) / (a * v0 * v0))


def _k_polar(ctx, t, omega, r):
    """``K(t)`` for a centred phase ``r``; falls back to quadrature on cancellation."""
    a = ctx.alpha
    t, omega, r = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (t, omega, r)))
    shape = t.shape
    t, omega, r = (z.ravel() for z in (t, omega, r))
    s, c = ctx.sincos(r)
    S1, C1 = ctx.sincos(omega * t + r)
    first = S1 * c
    second = C1 * (s + omega * t * c)
    K = np.asarray(first - second, dtype=float)
    # rounding in S1 and C1 scales with |s| + |omega t c| even where both terms vanish
    scale = np.abs(first) + np.abs(second) + np.abs(s) + np.abs(omega * t * c)
    bad = np.abs(K) < CANCEL_RATIO * scale
    if np.any(bad):
        K = K.copy()
        ob = omega[bad]
        K[bad] = a * ob * odd_power_moment(ctx, s[bad], ob * c[bad], ob, r[bad], t[bad])
    return K.reshape(shape)


def _center(ctx, phi):
    P = ctx.pi_alpha
    phi = np.asarray(phi, dtype=float)
    k = np.round(phi / P)
    return phi - k * P


def jacobian_polar(alpha, t, A, omega, phi):
    """``t K(t)``: the polar Jacobian without its t-independent prefactor.

    ``A`` only enters the prefactor ``A^(2 alpha)/(alpha omega)`` and is
    accepted for symmetry with the parameter triple.
    """
    ctx = as_alpha(alpha)
    r = _center(ctx, phi)
    # shifting phi by pi_alpha flips both sin and cos, which leaves K unchanged
    t = np.asarray(t, dtype=float)
    return _scalar(t * _k_polar(ctx, t, omega, r))


def jacobian(alpha, t, x0, u0, v0):
    """Full determinant of ``(u0, v0) -> (x(t), y(t))``, numerically stable.

    Covers the straight-line limit, where it equals
    ``t int_0^t (x0 + u0 tau)^(2 alpha) dtau``. Broadcasts.
    """
    ctx = as_alpha(alpha)
    a = ctx.alpha
    t, x0, u0, v0 = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (t, x0, u0, v0)))
    out = np.zeros(t.shape)
    line = is_line(ctx, x0, u0, v0)
    if np.any(line):
        tl, xl, ul = t[line], x0[line], u0[line]
        out[line] = tl * _power_integral_line(a, xl, ul, tl)
    osc = ~line
    if np.any(osc):
        A, omega, kappa = _amplitude(ctx, x0[osc], u0[osc], v0[osc])
        r, _ = centered_phase(ctx, x0[osc] / A, np.sign(v0[osc]) * u0[osc] / kappa)
        K = _k_polar(ctx, t[osc], omega, r)
        out[osc] = even_power(A, a) / (a * omega) * t[osc] * K
    return _scalar(out)


def _power_integral_line(a, x0, u0, t):
    """``int_0^t (x0 + u0 tau)^(2 alpha) dtau``."""
    x0, u0, t = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (x0, u0, t)))
    diff = _odd_power_diff(a, x0, u0 * t)
    safe = np.where(u0 == 0, 1.0, u0)
    return np.where(u0 == 0, even_power(x0, a) * t, diff / ((2 * a + 1) * safe))


def _odd_power_diff(a, x0, d):
    """``(x0 + d)^(2a+1) - x0^(2a+1)`` (signed powers) without cancellation."""
    x0, d = np.broadcast_arrays(np.asarray(x0, dtype=float), np.asarray(d, dtype=float))
    p = 2 * a + 1
    direct = odd_power(x0 + d, a) - odd_power(x0, a)
    safe_x0 = np.where(x0 == 0, 1.0, x0)
    rel = d / safe_x0
    use = (x0 != 0) & (rel > -0.5)
    with np.errstate(invalid="ignore"):
        stable = odd_power(x0, a) * np.expm1(p * np.log1p(np.where(use, rel, 0.0)))
    return np.where(use, stable, direct)


def jacobian_xuv_display(alpha, t, x0, u0, v0, xt, ut):
    """Expanded four-term polynomial form in ``(x0, u0, v0, x(t), u(t))``."""
    a = as_alpha(alpha).alpha
    X = even_power(x0, a)
    k2 = u0 ** 2 + v0 ** 2 * X
    b = (a - 1) ** 2
    return _scalar(
        xt * (t * a * u0 * k2 * ((3 * a - 1) * u0 ** 2 + a * (a + 1) * v0 ** 2 * X)
              + b * u0 ** 4 * x0)
        - ut * (t ** 2 * a * u0 * k2 * ((3 * a - 1) * u0 ** 2 + (2 * a * a - a + 1) * v0 ** 2 * X)
                + t * x0 * ((4 * a * a - 3 * a + 1) * u0 ** 4
                            + 2 * a * a * (a + 1) * u0 ** 2 * v0 ** 2 * X
                            + a * a * (a + 1) * v0 ** 4 * X * X)
                + b * u0 ** 3 * x0 ** 2)
        - xt * ut ** 2 * b * (t * u0 * (u0 ** 2 + a * v0 ** 2 * X) + u0 ** 2 * x0)
        - ut * xt ** 2 * b * u0 ** 3)


def jacobian_polar_display(alpha, t, A, omega, phi):
    """Expanded polar expression (prefactor omitted)."""
    ctx = as_alpha(alpha)
    a = ctx.alpha
    s1, c1 = ctx.sincos(np.asarray(omega * np.asarray(t) + phi, dtype=float))
    s, c = ctx.sincos(phi)
    w = omega * np.asarray(t, dtype=float)
    b = (a - 1) ** 2
    return _scalar(
        s1 * c * (w * a * (a * (a + 1) - b * c ** 2) + b * s * c ** 3)
        + c1 * (w ** 2 * a * c * (-1 + a - 2 * a * a + 2 * b * c ** 2)
                - w * s * (a * a * (a + 1) - (a - 1) ** 3 * c ** 4)
                - b * s ** 2 * c ** 3)
        - s1 * c1 ** 2 * b * c * (w * ((a - 1) * c ** 2 - a) - s * c)
        - s1 ** 2 * c1 * b * c ** 3)


# -- distortion coefficients ---------------------------------------------------


def _ratio(num, den):
    out = np.asarray(num, dtype=float) / den
    return _scalar(out)


def beta_generic(alpha, t, x0, u0, v0):
    """``J(t)/J(1)`` for the geodesic with initial data ``(x0, u0, v0)``."""
    ctx = as_alpha(alpha)
    t = np.asarray(t, dtype=float)
    return _ratio(jacobian(ctx, t, x0, u0, v0), jacobian(ctx, 1.0, x0, u0, v0))


def beta_polar(alpha, t, omega, phi):
    """``beta_t`` as a function of ``(omega, phi)`` only."""
    ctx = as_alpha(alpha)
    r = _center(ctx, phi)
    t = np.asarray(t, dtype=float)
    num = t * _k_polar(ctx, t, omega, r)
    den = _k_polar(ctx, 1.0, omega, r)
    return _scalar(num / den)


def beta_horizontal(alpha, t, x0, u0):
    """Limit ``v0 -> 0``: ``t ((x0 + u0 t)^(2a+1) - x0^(2a+1)) / ((x0 + u0)^(2a+1) - x0^(2a+1))``."""
    a = as_alpha(alpha).alpha
    u0 = float(u0)
    if u0 == 0:
        raise DegenerateInputError("u0 = 0: the horizontal formula is undefined")
    t = np.asarray(t, dtype=float)
    return _scalar(t * _odd_power_diff(a, x0, u0 * t) / _odd_power_diff(a, x0, u0))


def singular_h(alpha, z):
    """``h(z) = sin_alpha z - z cos_alpha z = alpha int_0^z zeta sin_alpha(zeta)^(2 alpha - 1)``."""
    ctx = as_alpha(alpha)
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = np.atleast_1d(z)
    s, c = ctx.sincos(z)
    out = s - z * c
    bad = np.abs(out) < CANCEL_RATIO * (np.abs(s) + np.abs(z * c))
    if np.any(bad):
        zb = z[bad]
        out[bad] = np.sign(zb) * ctx.alpha * odd_power_moment(ctx, 0.0, 1.0, 1.0, 0.0, np.abs(zb))
    return _scalar(out.reshape(shape))


def singular_g(alpha, z):
    """``g(z) = alpha (3 alpha - 1) z - (alpha - 1)^2 sin_alpha z cos_alpha z``."""
    ctx = as_alpha(alpha)
    a = ctx.alpha
    s, c = ctx.sincos(z)
    return _scalar(a * (3 * a - 1) * np.asarray(z) - (a - 1) ** 2 * s * c)


def beta_singular(alpha, t, omega):
    """``beta_t = t h(omega t) / h(omega)`` for geodesics from the y-axis."""
    ctx = as_alpha(alpha)
    omega = float(omega)
    if omega == 0:
        raise DomainError("omega must be non-zero")
    if abs(omega) > ctx.pi_alpha * (1 + 1e-12):
        raise DomainError("|omega| must not exceed pi_alpha")
    t = np.asarray(t, dtype=float)
    num = t * singular_h(ctx, omega * t)
    return _scalar(num / singular_h(ctx, omega))


def beta_singular_display(alpha, t, omega):
    """Alternative ``g(omega t) h(omega t) / (g(omega) h(omega))``."""
    ctx = as_alpha(alpha)
    z = omega * np.asarray(t, dtype=float)
    num = singular_g(ctx, z) * singular_h(ctx, z)
    return _ratio(num, singular_g(ctx, omega) * singular_h(ctx, omega))


def beta_u_zero(alpha, t, omega, phi):
    """``u0 = 0``: ``beta_t = t cos_alpha(omega t + phi) / cos_alpha(omega + phi)``."""
    ctx = as_alpha(alpha)
    t = np.asarray(t, dtype=float)
    return _ratio(t * ctx.cos(omega * t + phi), ctx.cos(omega + phi))


def beta(alpha, q0, q, t):
    """Distortion coefficient ``beta_t(q, q0)`` along the minimising geodesic."""
    ctx = as_alpha(alpha)
    spec = connect(ctx, q0, q)
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise DomainError("t must lie in [0, 1]")
    x0 = spec.q0.x
    u0, v0 = spec.lambda0
    if spec.is_line:
        return DistortionResult(beta_horizontal(ctx, t, x0, u0), Branch.HORIZONTAL, _scalar(t))
    if x0 == 0:
        return DistortionResult(beta_singular(ctx, t, spec.polar.omega), Branch.SINGULAR, _scalar(t))
    return DistortionResult(beta_generic(ctx, t, x0, u0, v0), Branch.GENERIC, _scalar(t))


def aux_vderivatives(alpha, t, x0, u0, v0):
    """``dx(t)/dv0`` and ``du(t)/dv0`` at fixed ``(x0, u0)``."""
    ctx = as_alpha(alpha)
    a = ctx.alpha
    if v0 == 0:
        raise DegenerateInputError("v0 = 0")
    xt, _, ut, _ = geodesic_flow(ctx, x0, 0.0, u0, v0, t)
    X = float(even_power(x0, a))
    k2 = u0 * u0 + v0 * v0 * X
    lead = np.asarray(t) * (u0 * u0 + a * v0 * v0 * X) + u0 * x0
    x_v0 = (lead * ut - u0 * u0 * xt) / (a * v0 * k2)
    u_v0 = v0 * (X * ut - lead * odd_power(xt, a - 1)) / k2
    return _scalar(x_v0), _scalar(u_v0)


# -- oracles -----------------------------------------------------------------


def fd_jacobian_oracle(alpha, t, x0, u0, v0, h=1e-4):
    """Central-difference determinant of ``(u0, v0) -> (x(t), y(t))``.

    Each partial derivative gets one Richardson step (steps ``h`` and ``h/2``,
    scaled by ``1 + |parameter|``). Broadcasts over all arguments.
    """
    ctx = as_alpha(alpha)
    t, x0, u0, v0 = np.broadcast_arrays(*(np.asarray(z, dtype=float) for z in (t, x0, u0, v0)))
    hu = h * (1 + np.abs(u0))
    hv = h * (1 + np.abs(v0))

    def endpoint(u, v):
        x, y, _, _ = geodesic_flow(ctx, x0, 0.0, u, v, t)
        return np.stack([np.asarray(x), np.asarray(y)])

    def deriv(du, dv, step):
        d1 = (endpoint(u0 + du, v0 + dv) - endpoint(u0 - du, v0 - dv)) / (2 * step)
        d2 = (endpoint(u0 + du / 2, v0 + dv / 2) - endpoint(u0 - du / 2, v0 - dv / 2)) / step
        return (4 * d2 - d1) / 3

    zero = np.zeros_like(u0)
    Du = deriv(hu, zero, hu)
    Dv = deriv(zero, hv, hv)
    return _scalar(Du[0] * Dv[1] - Dv[0] * Du[1])


class MonteCarloEstimate(NamedTuple):
    beta: float
    stderr: float
    n_used: int
    n_failed: int


def _ball_points(n, seed):
    """First ``n`` points of a scrambled Sobol sequence that fall in the unit disc."""
    sampler = qmc.Sobol(d=2, scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(2.0, 1.35 * n))))
    pts = []
    count = 0
    while count < n:
        z = 2 * sampler.random_base2(m) - 1
        z = z[np.einsum("ij,ij->i", z, z) <= 1]
        pts.append(z)
        count += len(z)
    return np.concatenate(pts)[:n]


def _connect_many(ctx, q0, targets, seed_cov, tol):
    """Vectorised shooting from ``q0`` to many nearby targets."""
    x0, y0 = q0
    n = len(targets)
    u = np.full(n, seed_cov[0])
    v = np.full(n, seed_cov[1])

    def resid(u, v, tx, ty):
        x, y, _, _ = geodesic_flow(ctx, x0, y0, u, v, 1.0)
        return np.stack([x - tx, y - ty], axis=-1)

    tx, ty = targets[:, 0], targets[:, 1]
    F = resid(u, v, tx, ty)
    done = np.linalg.norm(F, axis=-1) <= tol
    for _ in range(50):
        idx = np.flatnonzero(~done)
        if idx.size == 0:
            break
        uu, vv, f = u[idx], v[idx], F[idx]
        hu = 1e-7 * (1 + np.abs(uu))
        hv = 1e-7 * (1 + np.abs(vv))
        Ju = (resid(uu + hu, vv, tx[idx], ty[idx]) - resid(uu - hu, vv, tx[idx], ty[idx])) / (2 * hu)[:, None]
        Jv = (resid(uu, vv + hv, tx[idx], ty[idx]) - resid(uu, vv - hv, tx[idx], ty[idx])) / (2 * hv)[:, None]
        det = Ju[:, 0] * Jv[:, 1] - Jv[:, 0] * Ju[:, 1]
        det = np.where(det == 0, np.nan, det)
        u[idx] = uu - (Jv[:, 1] * f[:, 0] - Jv[:, 0] * f[:, 1]) / det
        v[idx] = vv - (-Ju[:, 1] * f[:, 0] + Ju[:, 0] * f[:, 1]) / det
        F[idx] = resid(u[idx], v[idx], tx[idx], ty[idx])
        norm = np.linalg.norm(F[idx], axis=-1)
        done[idx] = norm <= tol
        diverged = ~np.isfinite(norm)
        done[idx[diverged]] = True
    ok = done & np.all(np.isfinite(F), axis=-1) & (np.linalg.norm(F, axis=-1) <= tol)
    return u, v, ok


def beta_monte_carlo(alpha, q0, q, t, r=0.01, n=100_000, seed=0, shards=1, full=False):
    """Small-ball estimate of ``beta_t(q, q0)``.

    Samples ``n`` quasi-random points of the disc ``B_r(q)``, connects each to
    ``q0`` and averages the density ``det De_t / det De_1`` of the
    ``t``-intermediate map, both determinants taken by finite differences of
    the flow. Points whose connection fails are dropped and counted. The
    sample set is split into ``shards`` contiguous blocks of one Sobol
    sequence, so the estimate does not depend on ``shards``.
    """
    ctx = as_alpha(alpha)
    if n < 1 or r <= 0:
        raise DomainError("need n >= 1 and r > 0")
    P = ctx.pi_alpha
    q0 = (float(q0[0]), float(q0[1]))
    centre = connect(ctx, q0, q)
    disc = _ball_points(n, seed)
    targets = np.asarray(q, dtype=float) + r * disc
    bounds = np.linspace(0, n, shards + 1).astype(int)
    values = []
    failed = 0
    tol = 1e-11 * (1 + np.max(np.abs(targets)))
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        u, v, ok = _connect_many(ctx, q0, targets[lo:hi], centre.lambda0, tol)
        A, omega, _ = _amplitude(ctx, q0[0], u, np.where(v == 0, 1e-300, v))
        ok &= (np.abs(omega) < P) | is_line(ctx, q0[0], u, v)
        failed += int(np.count_nonzero(~ok))
        u, v = u[ok], v[ok]
        jt = fd_jacobian_oracle(ctx, t, q0[0], u, v)
        j1 = fd_jacobian_oracle(ctx, 1.0, q0[0], u, v)
        values.append(np.atleast_1d(jt / j1))
    values = np.concatenate(values)
    if values.size == 0:
        raise ConvergenceError("no sample could be connected", {"n": n, "r": r})
    est = MonteCarloEstimate(float(np.mean(values)),
                             float(np.std(values) / np.sqrt(values.size)),
                             int(values.size), failed)
    return est if full else est.beta
