"""Generalised (p, q)-trigonometry, specialised to (2, 2*alpha).

``sin_alpha`` is the inverse of ``F(x) = int_0^x (1 - t^(2 alpha))^(-1/2) dt``
on ``[0, pi_alpha/2]``, reflected about ``pi_alpha/2``, extended as an odd
function and ``2 pi_alpha``-periodically. With that extension it is the
global solution of ``f'' = -alpha |f|^(2 alpha - 2) f, f(0) = 0, f'(0) = 1``.

Powers follow the convention ``x^(2a) := (x^2)^a``; use :func:`even_power` and
:func:`odd_power` rather than writing the exponent out at call sites.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special
from scipy.interpolate import PchipInterpolator

from .errors import DomainError
from .ode import integrate as ode_integrate

__all__ = [
    "PQ", "Alpha", "TrigContext", "as_alpha", "even_power", "odd_power",
    "pi_pq", "F_pq", "sin_alpha", "cos_alpha", "sincos_alpha", "arc_alpha",
    "sin_power_integral", "sin_power_integral_diff", "odd_power_moment",
]


def even_power(x, a):
    """``x^(2a)`` as ``(x^2)^a``; always non-negative."""
    x = np.asarray(x, dtype=float)
    return (x * x) ** a


def odd_power(x, a):
    """``x^(2a) * x``, the sign-preserving odd power."""
    x = np.asarray(x, dtype=float)
    return (x * x) ** a * x


@dataclass(frozen=True)
class PQ:
    p: float
    q: float

    def __post_init__(self):
        if not (np.isfinite(self.p) and np.isfinite(self.q)):
            raise DomainError("p and q must be finite")
        if self.p <= 1 or self.q <= 1:
            raise DomainError(f"need p > 1 and q > 1, got p={self.p}, q={self.q}")


def _as_pq(pq):
    return pq if isinstance(pq, PQ) else PQ(*pq)


@lru_cache(maxsize=256)
def _pi_pq(p, q):
    # (1 - t^q)^(-1/p) = (1 - t)^(-1/p) * ((1 - t^q)/(1 - t))^(-1/p); the second
    # factor is smooth on [0, 1] and tends to q^(-1/p) at t = 1.
    def smooth(t):
        if t >= 1.0:
            return q ** (-1.0 / p)
        ratio = -np.expm1(q * np.log(t)) / (1.0 - t) if t > 0 else 1.0
        return ratio ** (-1.0 / p)

    val, _ = integrate.quad(smooth, 0.0, 1.0, weight="alg", wvar=(0.0, -1.0 / p),
                            epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * val


def pi_pq(pq):
    """The constant ``2 int_0^1 (1 - t^q)^(-1/p) dt``.

    >>> round(pi_pq((2, 2)), 12)
    3.14159265359
    """
    pq = _as_pq(pq)
    return _pi_pq(float(pq.p), float(pq.q))


def F_pq(pq, x):
    """Incomplete integral ``int_0^x (1 - t^q)^(-1/p) dt`` for ``x`` in [0, 1]."""
    pq = _as_pq(pq)
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)) or np.any(np.isnan(x)):
        raise DomainError("F_pq is defined on [0, 1]")
    half = 0.5 * pi_pq(pq)
    out = half * special.betainc(1.0 / pq.q, 1.0 - 1.0 / pq.p, x ** pq.q)
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class Alpha:
    """Structure parameter ``alpha >= 1`` with the evaluation cache for sin_alpha.

    Immutable after construction. The interpolants only seed Newton's method;
    ``seed_error`` records their worst deviation from the exact inverse at the
    interval midpoints, ``target_accuracy`` what the Newton polish achieves.
    """

    alpha: float
    nodes: int = 129
    pi_alpha: float = field(init=False)
    q: float = field(init=False)
    seed_error: float = field(init=False)
    target_accuracy: float = field(init=False, default=1e-14)

    def __post_init__(self):
        a = float(self.alpha)
        if not np.isfinite(a) or a < 1:
            raise DomainError(f"alpha must be >= 1, got {self.alpha}")
        set_ = object.__setattr__
        set_(self, "alpha", a)
        set_(self, "q", 2.0 * a)
        set_(self, "pi_alpha", pi_pq(PQ(2.0, 2.0 * a)))
        # lower quarter: s(r) for r in [0, pi/4]; upper quarter: c(w), w = pi/2 - r
        grid = np.linspace(0.0, self.pi_alpha / 4, self.nodes)
        half = 0.5 * self.pi_alpha
        s_nodes = special.betaincinv(1 / self.q, 0.5, grid / half) ** (1 / self.q)
        c_nodes = np.sqrt(special.betaincinv(0.5, 1 / self.q, grid / half))
        set_(self, "_s_seed", PchipInterpolator(grid, s_nodes))
        set_(self, "_c_seed", PchipInterpolator(grid, c_nodes))
        mid = 0.5 * (grid[1:] + grid[:-1])
        s_mid, _ = self._newton_lower(mid)
        _, c_mid = self._newton_upper(mid)
        err = max(np.max(np.abs(self._s_seed(mid) - s_mid)),
                  np.max(np.abs(self._c_seed(mid) - c_mid)))
        set_(self, "seed_error", float(err))

    def __repr__(self):
        return f"Alpha({self.alpha!r})"

    def __eq__(self, other):
        return isinstance(other, Alpha) and other.alpha == self.alpha

    def __hash__(self):
        return hash(("Alpha", self.alpha))

    # -- quarter-period kernels ------------------------------------------------

    def _F(self, s):
        return 0.5 * self.pi_alpha * special.betainc(1 / self.q, 0.5, s ** self.q)

    def _Fc(self, c):
        # int_s^1 (1 - t^q)^(-1/2) dt written in terms of c = sqrt(1 - s^q)
        return 0.5 * self.pi_alpha * special.betainc(0.5, 1 / self.q, c * c)

    def _newton_lower(self, r, iters=4):
        """sin on [0, pi/4] by Newton on F(s) = r."""
        q = self.q
        s = np.clip(self._s_seed(r), 0.0, 1.0)
        for _ in range(iters):
            step = (self._F(s) - r) * np.sqrt(1.0 - s ** q)
            s = np.clip(s - step, 0.0, 1.0)
        # tiny arguments: series, F is not resolved there
        tiny = r ** q < 1e-17
        s = np.where(tiny, r * (1.0 - r ** q / (2 * (q + 1))), s)
        return s, np.sqrt(1.0 - s ** q)

    def _newton_upper(self, w, iters=4):
        """cos on the upper quarter, as a function of w = pi/2 - r in [0, pi/4]."""
        q = self.q
        c = np.clip(self._c_seed(w), 0.0, 1.0)
        for _ in range(iters):
            deriv = (2.0 / q) * (1.0 - c * c) ** (1.0 / q - 1.0)
            c = np.clip(c - (self._Fc(c) - w) / deriv, 0.0, 1.0)
        return (1.0 - c * c) ** (1.0 / q), c

    def _first_quadrant(self, r):
        """(sin, cos) for r in [0, pi/2], elementwise."""
        r = np.asarray(r, dtype=float)
        quarter = 0.25 * self.pi_alpha
        lower = r <= quarter
        s = np.empty_like(r)
        c = np.empty_like(r)
        if np.any(lower):
            s[lower], c[lower] = self._newton_lower(r[lower])
        if np.any(~lower):
            w = 0.5 * self.pi_alpha - r[~lower]
            s[~lower], c[~lower] = self._newton_upper(np.maximum(w, 0.0))
        return s, c

    def reduce(self, x):
        """Split x into (r, sign_s, sign_c) with r in [0, pi/2]."""
        P = self.pi_alpha
        x = np.asarray(x, dtype=float)
        y = np.mod(x, 2 * P)
        flip = y >= P
        y = np.where(flip, y - P, y)
        sign_s = np.where(flip, -1.0, 1.0)
        back = y > 0.5 * P
        r = np.where(back, P - y, y)
        sign_c = sign_s * np.where(back, -1.0, 1.0)
        return np.clip(r, 0.0, 0.5 * P), sign_s, sign_c

    def sincos(self, x):
        r, ss, sc = self.reduce(x)
        s, c = self._first_quadrant(np.atleast_1d(r))
        s = ss * s.reshape(r.shape)
        c = sc * c.reshape(r.shape)
        if s.ndim == 0:
            return float(s), float(c)
        return s, c

    def sin(self, x):
        return self.sincos(x)[0]

    def cos(self, x):
        return self.sincos(x)[1]


TrigContext = Alpha


@lru_cache(maxsize=64)
def _cached_alpha(a):
    return Alpha(a)


def as_alpha(alpha):
    """Return a (cached) :class:`Alpha` for a number, or pass one through."""
    if isinstance(alpha, Alpha):
        return alpha
    return _cached_alpha(float(alpha))


def _ode_sincos(ctx, x, tol=1e-12):
    """sin_alpha, cos_alpha by integrating the defining ODE from 0."""
    a = ctx.alpha
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out_s = np.empty_like(x)
    out_c = np.empty_like(x)

    def rhs(t, y):
        return (y[1], -a * float(odd_power(y[0], a - 1)))

    for sign in (1.0, -1.0):
        mask = (x >= 0) if sign > 0 else (x < 0)
        if not np.any(mask):
            continue
        order = np.argsort(sign * x[mask])
        ts = x[mask][order]
        ys = ode_integrate(rhs, (0.0, 1.0), ts, rtol=tol, atol=tol,
                           hmax=ctx.pi_alpha / 64)
        idx = np.flatnonzero(mask)[order]
        out_s[idx] = ys[:, 0]
        out_c[idx] = ys[:, 1]
    return out_s, out_c


def sincos_alpha(alpha, x, method="inverse"):
    """Return ``(sin_alpha(x), cos_alpha(x))``.

    ``method="ode"`` integrates the ODE instead (slow, used as an oracle).
    """
    ctx = as_alpha(alpha)
    if method == "inverse":
        return ctx.sincos(x)
    if method == "ode":
        s, c = _ode_sincos(ctx, x)
        if np.ndim(x) == 0:
            return float(s[0]), float(c[0])
        return s.reshape(np.shape(x)), c.reshape(np.shape(x))
    raise ValueError(f"unknown method {method!r}")


def sin_alpha(alpha, x, method="inverse"):
    return sincos_alpha(alpha, x, method)[0]


def cos_alpha(alpha, x, method="inverse"):
    return sincos_alpha(alpha, x, method)[1]


def arc_alpha(alpha, s, c):
    """Angle in [0, 2 pi_alpha) with the given sine and cosine signs/magnitudes.

    The analogue of ``atan2``: ``s`` and ``c`` are assumed to satisfy
    ``|s|^(2 alpha) + c^2 = 1`` up to rounding. The magnitude is taken from
    whichever of the two is better conditioned.
    """
    ctx = as_alpha(alpha)
    s = np.asarray(s, dtype=float)
    c = np.asarray(c, dtype=float)
    abs_s = np.minimum(np.abs(s), 1.0)
    abs_c = np.minimum(np.abs(c), 1.0)
    use_s = abs_s ** ctx.q <= 0.5
    ref = np.where(use_s, ctx._F(abs_s), 0.5 * ctx.pi_alpha - ctx._Fc(abs_c))
    P = ctx.pi_alpha
    phi = np.where(s >= 0, np.where(c >= 0, ref, P - ref),
                   np.where(c < 0, P + ref, 2 * P - ref))
    phi = np.where(phi >= 2 * P, phi - 2 * P, phi)
    return float(phi) if phi.ndim == 0 else phi


def _power_integral_reduced(ctx, r):
    """int_0^r |sin_alpha|^(2 alpha) for |r| <= pi/2, odd in r, no cancellation."""
    q = ctx.q
    s, _ = ctx._first_quadrant(np.atleast_1d(np.abs(r)))
    s = s.reshape(np.shape(r))
    a = 1.0 + 1.0 / q
    total = special.beta(a, 0.5) / q
    return np.sign(r) * total * special.betainc(a, 0.5, s ** q)


def _reduce_half_period(ctx, z):
    P = ctx.pi_alpha
    z = np.asarray(z, dtype=float)
    k = np.round(z / P)
    return k, z - k * P


def sin_power_integral(alpha, z):
    """``int_0^z |sin_alpha|^(2 alpha) = (z - sin_alpha z cos_alpha z)/(alpha+1)``."""
    ctx = as_alpha(alpha)
    k, r = _reduce_half_period(ctx, z)
    out = k * ctx.pi_alpha / (ctx.alpha + 1) + _power_integral_reduced(ctx, r)
    return out[()] if np.ndim(out) == 0 else out


def sin_power_integral_diff(alpha, z1, z0):
    """``sin_power_integral(z1) - sin_power_integral(z0)`` without cancellation."""
    ctx = as_alpha(alpha)
    k1, r1 = _reduce_half_period(ctx, z1)
    k0, r0 = _reduce_half_period(ctx, z0)
    out = ((k1 - k0) * ctx.pi_alpha / (ctx.alpha + 1)
           + (_power_integral_reduced(ctx, r1) - _power_integral_reduced(ctx, r0)))
    return out[()] if np.ndim(out) == 0 else out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)
# graded rule on [0, 1]: tau = v^2 clusters nodes at 0 where the integrand
# behaves like tau^(2 alpha - 1)
_GV = 0.5 * (_GL_NODES + 1.0)
_GRADED_X = _GV ** 2
_GRADED_W = 0.5 * _GL_WEIGHTS * 2.0 * _GV


def odd_power_moment(alpha, a, b, omega, phi, t):
    """``int_0^t (a + b tau) * sin_alpha(omega tau + phi)^(2 alpha - 1) dtau``.

    Requires ``t >= 0``. The odd power is sign preserving. Evaluated by Gauss–Legendre quadrature,
    split at the zeros of the sine and graded towards every sub-interval end,
    so the result keeps full relative accuracy where closed forms cancel.
    All arguments broadcast.
    """
    ctx = as_alpha(alpha)
    P = ctx.pi_alpha
    a, b, omega, phi, t = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                                for v in (a, b, omega, phi, t)))
    shape = a.shape
    a, b, omega, phi, t = (v.ravel() for v in (a, b, omega, phi, t))
    if np.any(t < 0):
        raise DomainError("odd_power_moment needs t >= 0")

    # breakpoints: zeros of sin(omega tau + phi) with tau in (0, t)
    theta_end = phi + omega * t
    lo = np.minimum(phi, theta_end)
    hi = np.maximum(phi, theta_end)
    k_first = np.floor(lo / P) + 1
    breaks = [np.zeros_like(t)]
    safe_omega = np.where(omega == 0, 1.0, omega)
    for j in range(3):
        zero = (k_first + j) * P
        tau = np.where((zero < hi) & (omega != 0), (zero - phi) / safe_omega, t)
        breaks.append(np.clip(tau, 0.0, t))
    breaks.append(t)
    breaks = np.sort(np.stack(breaks, axis=1), axis=1)

    total = np.zeros_like(t)
    for j in range(breaks.shape[1] - 1):
        left, right = breaks[:, j], breaks[:, j + 1]
        mid = 0.5 * (left + right)
        for start, end in ((left, mid), (right, mid)):
            length = end - start
            tau = start[:, None] + length[:, None] * _GRADED_X[None, :]
            s = ctx.sin(omega[:, None] * tau + phi[:, None])
            f = (a[:, None] + b[:, None] * tau) * odd_power(s, ctx.alpha - 1)
            total += np.abs(length) * (f @ _GRADED_W)
    total = total.reshape(shape)
    return total[()] if total.ndim == 0 else total
