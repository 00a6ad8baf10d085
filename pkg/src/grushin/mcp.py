"""Measure-contraction constants and bound sweeps.

The critical dimension is ``N(alpha) = 2((alpha+1) m + 1)/(m + 1)`` where ``m``
is the root in ``[-3, -2)`` of ``(m+1)^(2 alpha)(m+1) = (2 alpha + 1) m + 1``.
``check_bound`` tests ``beta_t >= t^N`` over parameter families of pairs.
"""

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .distortion import beta_horizontal, beta_polar, beta_singular, beta_u_zero
from .errors import DomainError
from .gentrig import as_alpha, even_power, odd_power

__all__ = [
    "McpConstants", "SweepReport", "Family", "solve_m", "meq_residual", "n_crit",
    "mcp_constants", "sigma", "sigma_tau", "f_ratio", "f_max", "gprime_closed",
    "hprime_closed", "default_grid", "check_bound",
]

BOUND_TOL = 1e-9


def _check_alpha(alpha):
    a = float(alpha)
    if not np.isfinite(a) or a < 1:
        raise DomainError(f"alpha must be >= 1, got {alpha}")
    return a


def meq_residual(alpha, m):
    """``(m+1)^(2 alpha)(m+1) - ((2 alpha + 1) m + 1)``."""
    a = float(alpha)
    m = np.asarray(m, dtype=float)
    out = odd_power(m + 1, a) - ((2 * a + 1) * m + 1)
    return out[()] if out.ndim == 0 else out


def solve_m(alpha):
    """Root of :func:`meq_residual` in ``[-3, -2)`` by bisection to adjacent floats."""
    a = _check_alpha(alpha)
    if a == 1:
        return -3.0
    lo, hi = -3.0, -2.0
    f_lo, f_hi = meq_residual(a, lo), meq_residual(a, hi)
    if not (f_lo <= 0 < f_hi):
        raise DomainError(f"root not bracketed for alpha={a}")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if meq_residual(a, mid) <= 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(meq_residual(a, lo)) <= abs(meq_residual(a, hi)) else hi


def n_crit(alpha):
    """Critical dimension ``2((alpha+1) m + 1)/(m + 1)``."""
    a = _check_alpha(alpha)
    if a == 1:
        return 5.0
    m = solve_m(a)
    return 2 * ((a + 1) * m + 1) / (m + 1)


@dataclass(frozen=True)
class McpConstants:
    alpha: float
    m: float
    n_crit: float


def mcp_constants(alpha):
    return McpConstants(float(alpha), solve_m(alpha), n_crit(alpha))


# -- model coefficients --------------------------------------------------------


def sigma(K, N, theta, t):
    """Model coefficient ``sigma_{K,N}^(t)(theta)``; may be ``inf``."""
    kt2 = K * theta * theta
    if kt2 > 0:
        if kt2 >= N * np.pi ** 2:
            return np.inf
        k = np.sqrt(K / N)
        return np.sin(t * theta * k) / np.sin(theta * k)
    if kt2 == 0 or N == 0:
        return float(t)
    k = np.sqrt(-K / N)
    return np.sinh(t * theta * k) / np.sinh(theta * k)


def sigma_tau(K, N, theta, t):
    """``(sigma_{K,N}, tau_{K,N})`` with ``tau = t^(1/N) sigma_{K,N-1}^(1 - 1/N)``."""
    if N < 1 or theta <= 0 or not 0 <= t <= 1:
        raise DomainError("need N >= 1, theta > 0 and t in [0, 1]")
    s = sigma(K, N, theta, t)
    tau = t ** (1.0 / N) * sigma(K, N - 1, theta, t) ** (1.0 - 1.0 / N)
    return s, float(tau)


# -- horizontal extremal problem ------------------------------------------------


def f_ratio(alpha, x, y):
    """``((2(a+1)x + y)(x+y)^(2a) - y^(2a+1)) / ((x+y)^(2a+1) - y^(2a+1))``."""
    a = float(alpha)
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    s = x + y
    num = (2 * (a + 1) * x + y) * even_power(s, a) - odd_power(y, a)
    den = odd_power(s, a) - odd_power(y, a)
    out = num / den
    return out[()] if out.ndim == 0 else out


def f_max(alpha, nodes=10_000):
    """Maximum of the 0-homogeneous map :func:`f_ratio` over the plane.

    Scans the direction angle on ``(0, pi)`` (``f`` is even) and refines the
    best node with a bounded scalar search.
    """
    a = _check_alpha(alpha)
    theta = (np.arange(nodes) + 0.5) * (np.pi / nodes)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = f_ratio(a, np.cos(theta), np.sin(theta))
    vals = np.where(np.isfinite(vals), vals, -np.inf)
    k = int(np.argmax(vals))
    step = np.pi / nodes

    def neg(th):
        return -f_ratio(a, np.cos(th), np.sin(th))

    res = optimize.minimize_scalar(neg, bounds=(theta[k] - step, theta[k] + step),
                                   method="bounded", options={"xatol": 1e-12})
    best = max(-res.fun, vals[k])
    # the ray y = 0 is only reached as a limit
    return float(max(best, 2 * (a + 1)))


def hprime_closed(alpha, z):
    """``alpha z sin_alpha(z)^(2 alpha - 1)``, the derivative of ``sin_alpha z - z cos_alpha z``."""
    ctx = as_alpha(alpha)
    z = np.asarray(z, dtype=float)
    return ctx.alpha * z * odd_power(ctx.sin(z), ctx.alpha - 1)


def gprime_closed(alpha, z):
    """``(alpha+1)(alpha^2 - (alpha-1)^2 cos_alpha(z)^2)``, the derivative of
    ``alpha(3 alpha - 1) z - (alpha-1)^2 sin_alpha z cos_alpha z``."""
    ctx = as_alpha(alpha)
    a = ctx.alpha
    c = np.asarray(ctx.cos(z))
    return (a + 1) * (a * a - (a - 1) ** 2 * c * c)


# -- sweeps ----------------------------------------------------------------------


class Family(enum.Enum):
    HORIZONTAL = "horizontal"
    SINGULAR = "singular"
    UZERO = "uzero"
    GENERIC = "generic"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower().replace("_", ""))


@dataclass(frozen=True)
class SweepReport:
    """Outcome of a bound sweep.

    ``max_ratio`` is the largest ``log beta_t / log t`` on the grid; since
    ``log t < 0`` the bound ``beta_t >= t^N`` holds exactly where this ratio
    is at most ``N``, so ``max_ratio`` measures sharpness. ``min_ratio`` is
    reported alongside.
    """

    alpha: float
    N: float
    family: str
    grid: dict
    min_ratio: float
    max_ratio: float
    n_evaluated: int
    n_violations: int
    violations: list = field(default_factory=list)

    def as_dict(self):
        return {
            "alpha": self.alpha, "N": self.N, "family": self.family, "grid": self.grid,
            "min_ratio": self.min_ratio, "max_ratio": self.max_ratio,
            "n_evaluated": self.n_evaluated, "n_violations": self.n_violations,
            "violations": self.violations,
        }


def default_grid(family, alpha):
    ctx = as_alpha(alpha)
    P = ctx.pi_alpha
    family = Family.parse(family)
    grid = {"t": np.linspace(0.01, 0.99, 99)}
    if family is Family.HORIZONTAL:
        axis = np.round(np.linspace(-3, 3, 61), 12)
        grid["x0"] = axis
        grid["u0"] = axis[axis != 0]
    elif family in (Family.SINGULAR, Family.UZERO):
        grid["omega"] = np.linspace(0, P, 202)[1:-1]
    else:
        grid["phi"] = (np.arange(64) + 0.5) * (2 * P / 64)
        grid["omega_abs"] = np.linspace(0, P, 66)[1:-1]
    return grid


def _family_values(ctx, family, grid):
    """Return (beta array of shape (cases, t), parameter rows, parameter names)."""
    t = np.asarray(grid["t"], dtype=float)
    if family is Family.HORIZONTAL:
        x0, u0 = np.meshgrid(grid["x0"], grid["u0"], indexing="ij")
        params = np.column_stack([x0.ravel(), u0.ravel()])
        vals = np.array([beta_horizontal(ctx, t, x, u) for x, u in params])
        return vals, params, ("x0", "u0")
    if family is Family.SINGULAR:
        om = np.asarray(grid["omega"], dtype=float)
        om = np.concatenate([om, -om])
        vals = np.array([beta_singular(ctx, t, w) for w in om])
        return vals, om[:, None], ("omega",)
    if family is Family.UZERO:
        P = ctx.pi_alpha
        om = np.asarray(grid["omega"], dtype=float)
        om = np.concatenate([om, -om])
        rows = [(w, ph) for ph in (0.5 * P, 1.5 * P) for w in om]
        vals = np.array([beta_u_zero(ctx, t, w, ph) for w, ph in rows])
        return vals, np.array(rows), ("omega", "phi")
    phi, w = np.meshgrid(grid["phi"], grid["omega_abs"], indexing="ij")
    phi, w = phi.ravel(), w.ravel()
    # chart with x0 > 0: omega carries the sign of sin_alpha(phi)
    omega = w * np.sign(ctx.sin(phi))
    keep = omega != 0
    phi, omega = phi[keep], omega[keep]
    vals = beta_polar(ctx, t[None, :], omega[:, None], phi[:, None])
    return vals, np.column_stack([omega, phi]), ("omega", "phi")


def check_bound(alpha, N=None, family="horizontal", grid=None, tol=BOUND_TOL, max_listed=100):
    """Sweep ``beta_t >= t^N`` over a family of pairs and report.

    Violations are data, not errors: each is a dict of the parameters, ``t``,
    ``beta`` and the bound ``t^N``.
    """
    ctx = as_alpha(alpha)
    family = Family.parse(family)
    N = n_crit(ctx.alpha) if N is None else float(N)
    grid = default_grid(family, ctx.alpha) if grid is None else dict(grid)
    t = np.asarray(grid["t"], dtype=float)
    vals, params, names = _family_values(ctx, family, grid)
    bound = t[None, :] ** N
    bad = ~(vals >= bound - tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.log(vals) / np.log(t)[None, :]
    finite = ratio[np.isfinite(ratio)]
    violations = []
    for i, j in zip(*np.nonzero(bad)):
        if len(violations) >= max_listed:
            break
        entry = {n: float(v) for n, v in zip(names, params[i])}
        entry.update(t=float(t[j]), beta=float(vals[i, j]), bound=float(bound[0, j]))
        violations.append(entry)
    desc = {k: {"min": float(np.min(v)), "max": float(np.max(v)), "n": int(np.size(v))}
            for k, v in grid.items()}
    return SweepReport(
        alpha=ctx.alpha, N=N, family=family.value, grid=desc,
        min_ratio=float(np.min(finite)) if finite.size else float("nan"),
        max_ratio=float(np.max(finite)) if finite.size else float("nan"),
        n_evaluated=int(vals.size), n_violations=int(np.count_nonzero(bad)),
        violations=violations,
    )
