"""Cut times, cut loci and the conjugate-point determinant.

From ``q0 = (x0, y0)`` geodesics are parametrised by their speed ``kappa``
and phase ``phi``: ``u0 = kappa cos_alpha(phi)``, ``omega = kappa sin_alpha(phi)/x0``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .gentrig import as_alpha, odd_power, odd_power_moment

__all__ = [
    "CutInfo", "cut_time", "cut_info", "in_cut_locus", "cut_endpoint",
    "conjugate_det", "conjugate_det_dt", "conjugate_det_alpha_one_limit",
    "conjugate_det_at_cut",
]

MEMBERSHIP_TOL = 1e-12


@dataclass(frozen=True)
class CutInfo:
    cut_time: float
    locus_kind: str  # "empty", "y_axis" or "reflected_ray"


def cut_time(spec):
    """``pi_alpha / |omega|``, or ``inf`` for a straight line."""
    if spec.is_line:
        return np.inf
    return spec.alpha.pi_alpha / abs(spec.polar.omega)


def cut_info(spec):
    if spec.is_line:
        return CutInfo(np.inf, "empty")
    kind = "y_axis" if spec.q0.x == 0 else "reflected_ray"
    return CutInfo(cut_time(spec), kind)


def in_cut_locus(alpha, q0, q, tol=MEMBERSHIP_TOL):
    """Membership of ``q`` in the cut locus of ``q0`` (boundary included)."""
    ctx = as_alpha(alpha)
    a = ctx.alpha
    x0, y0 = float(q0[0]), float(q0[1])
    x, y = float(q[0]), float(q[1])
    if x0 == 0:
        return abs(x) <= tol and (x, y) != (x0, y0)
    bound = abs(x0) ** (a + 1) * ctx.pi_alpha / (a + 1)
    return abs(x + x0) <= tol * (1 + abs(x0)) and abs(y - y0) >= bound * (1 - tol)


def cut_endpoint(alpha, q0, polar):
    """Where the geodesic with parameters ``polar`` from ``q0`` reaches its cut time."""
    ctx = as_alpha(alpha)
    a = ctx.alpha
    dy = np.sign(polar.omega) * polar.A ** (a + 1) * ctx.pi_alpha / (a + 1)
    return -float(q0[0]), float(q0[1]) + dy


def _check(ctx, x0, kappa, phi):
    if x0 == 0:
        raise DomainError("x0 must be non-zero")
    if kappa <= 0:
        raise DomainError("kappa must be positive")
    r = np.mod(phi, ctx.pi_alpha)
    if np.any(r == 0):
        raise DomainError("phi must avoid multiples of pi_alpha")


def conjugate_det(alpha, x0, kappa, t, phi):
    """Determinant ``D(t, phi)`` of the differential of ``(t, phi) -> (x, y)``.

    ``D = kappa/s^2 |x0/s|^alpha [x0 S1 c - s (x0 + kappa t c) C1]`` with
    ``s, c`` at ``phi`` and ``S1, C1`` at ``kappa s t/x0 + phi``.
    When the bracket cancels it is evaluated as ``int_0^t dD/dt``.
    Broadcasts over ``t`` and ``phi``.
    """
    ctx = as_alpha(alpha)
    a = ctx.alpha
    x0, kappa = float(x0), float(kappa)
    _check(ctx, x0, kappa, phi)
    t, phi = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(phi, dtype=float))
    s, c = ctx.sincos(phi)
    omega = kappa * s / x0
    S1, C1 = ctx.sincos(omega * t + phi)
    first = x0 * S1 * c
    second = s * (x0 + kappa * t * c) * C1
    bracket = first - second
    pref = kappa / (s * s) * np.abs(x0 / s) ** a
    out = pref * bracket
    scale = np.abs(first) + np.abs(second) + np.abs(s) * (np.abs(x0) + np.abs(kappa * t * c))
    bad = np.abs(bracket) < 1e-6 * scale
    if np.any(bad):
        out = np.where(bad, _conjugate_det_integral(ctx, x0, kappa, t, phi), out)
    return out[()] if out.ndim == 0 else out


def _conjugate_det_integral(ctx, x0, kappa, t, phi):
    a = ctx.alpha
    s, c = ctx.sincos(phi)
    omega = kappa * s / x0
    pref = a * kappa ** 2 / x0 * np.abs(x0 / s) ** a
    return pref * odd_power_moment(ctx, x0, kappa * c, omega, phi, t)


def conjugate_det_dt(alpha, x0, kappa, t, phi):
    """``dD/dt = alpha kappa^2/x0 (x0 + kappa t c) |x0/s|^alpha S1^(2 alpha - 1)``."""
    ctx = as_alpha(alpha)
    a = ctx.alpha
    x0, kappa = float(x0), float(kappa)
    _check(ctx, x0, kappa, phi)
    t, phi = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(phi, dtype=float))
    s, c = ctx.sincos(phi)
    S1 = ctx.sin(kappa * s / x0 * t + phi)
    out = (a * kappa ** 2 / x0 * (x0 + kappa * t * c) * np.abs(x0 / s) ** a
           * odd_power(S1, a - 1))
    return out[()] if out.ndim == 0 else out


def conjugate_det_alpha_one_limit(x0, kappa, t, end="zero"):
    """Limit of ``D`` at ``alpha = 1`` as ``phi -> 0`` (``end="zero"``) or ``phi -> pi``."""
    sign = 1.0 if end == "zero" else -1.0
    t = np.asarray(t, dtype=float)
    out = abs(x0) * kappa ** 2 * t / 3 * (kappa ** 2 * t ** 2 / x0 ** 2
                                          + sign * 3 * kappa * t / x0 + 3)
    return out[()] if out.ndim == 0 else out


def conjugate_det_at_cut(alpha, x0, kappa, phi):
    """``D(t_cut, phi) = kappa pi_alpha/s |x0/s|^(alpha+1) c^2``."""
    ctx = as_alpha(alpha)
    s, c = ctx.sincos(phi)
    return kappa * ctx.pi_alpha / s * np.abs(x0 / s) ** (ctx.alpha + 1) * c * c
