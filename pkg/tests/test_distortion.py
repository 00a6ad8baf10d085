import numpy as np
import pytest

from grushin.distortion import (Branch, aux_vderivatives, beta, beta_generic, beta_horizontal,
                                beta_monte_carlo, beta_polar, beta_singular,
                                beta_singular_display, beta_u_zero, fd_jacobian_oracle,
                                jacobian, jacobian_polar, jacobian_polar_display, jacobian_xuv,
                                jacobian_xuv_display)
from grushin.errors import CutLocusError, DegenerateInputError, DomainError
from grushin.gentrig import as_alpha
from grushin.geodesics import geodesic_flow, make_spec, to_polar

from .conftest import ALPHAS
from .test_geodesics import random_case


def grushin_beta(t, x0, u0, v0):
    """Closed-form distortion coefficient of the alpha = 1 plane."""
    def f(s):
        return ((u0 ** 2 + s * u0 * v0 ** 2 * x0 + v0 ** 2 * x0 ** 2) * np.sin(s * v0)
                - s * u0 ** 2 * v0 * np.cos(s * v0))
    return t * f(t) / f(1.0)


def test_beta_examples():
    res = beta(2, (1.0, 0.0), (2.0, 0.0), 0.5)
    assert res.branch is Branch.HORIZONTAL and str(res.branch) == "Horizontal"
    assert res.beta == pytest.approx(0.5 * 6.59375 / 31, rel=1e-14)
    assert beta_horizontal(1, 0.5, 1.0, 1.0) == pytest.approx(0.5 * 2.375 / 7, rel=1e-14)
    assert beta_horizontal(1, 0.5, 1.0, 1.0) == pytest.approx(0.169642857, abs=1e-9)
    for a in ALPHAS:
        assert beta_horizontal(a, 0.3, 0.0, 1.7) == pytest.approx(0.3 ** (2 * a + 2), rel=1e-13)
        assert beta_horizontal(a, 1.0, 0.4, -0.9) == 1.0
    with pytest.raises(DegenerateInputError):
        beta_horizontal(2, 0.5, 1.0, 0.0)


def test_alpha_one_singular_example():
    q1 = geodesic_flow(1, 0.0, 0.0, 1.0, 1.0, 1.0)[:2]
    ts = np.linspace(0, 1, 11)
    res = beta(1, (0.0, 0.0), q1, ts)
    assert res.branch is Branch.SINGULAR
    ref = ts * (np.sin(ts) - ts * np.cos(ts)) / (np.sin(1) - np.cos(1))
    assert np.max(np.abs(res.beta - ref)) < 1e-12


@pytest.mark.parametrize("alpha", ALPHAS)
def test_beta_at_one_and_zero(alpha, rng):
    for _ in range(5):
        x0, u0, v0 = random_case(rng, alpha)
        q1 = geodesic_flow(alpha, x0, 0.0, u0, v0, 1.0)[:2]
        res = beta(alpha, (x0, 0.0), q1, [0.0, 1.0])
        assert res.branch is Branch.GENERIC
        assert res.beta[0] == 0.0
        assert res.beta[1] == pytest.approx(1.0, abs=1e-14)


def test_beta_errors():
    with pytest.raises(CutLocusError):
        beta(2, (0.0, 0.0), (0.0, 1.0), 0.5)
    with pytest.raises(DomainError):
        beta(2, (1.0, 0.0), (2.0, 1.0), 1.5)
    with pytest.raises(DomainError):
        beta_singular(2, 0.5, 0.0)


def test_alpha_one_closed_form(rng):
    for _ in range(50):
        x0, u0, v0 = random_case(rng, 1.0)
        ts = np.linspace(0.05, 1, 20)
        got = beta_generic(1, ts, x0, u0, v0)
        assert np.max(np.abs(got - grushin_beta(ts, x0, u0, v0))) < 1e-9


def test_jacobians_vanish_at_zero():
    assert jacobian_xuv(2, 0.0, 0.5, 0.3, 1.2, 0.5, 0.3) == 0.0
    assert jacobian_polar(2, 0.0, 1.0, 0.8, 0.4) == 0.0


@pytest.mark.parametrize("alpha", ALPHAS)
def test_coordinate_forms_agree(alpha, rng):
    for _ in range(30):
        x0, u0, v0 = random_case(rng, alpha)
        p = to_polar(alpha, (x0, 0.0), (u0, v0))
        t = rng.uniform(0.05, 1)
        xt, _, ut, _ = geodesic_flow(alpha, x0, 0.0, u0, v0, t)
        jx = jacobian_xuv(alpha, t, x0, u0, v0, xt, ut)
        jp = jacobian_polar(alpha, t, p.A, p.omega, p.phi) * p.A ** (2 * alpha) / (alpha * p.omega)
        assert jx == pytest.approx(jp, rel=1e-9, abs=1e-13)
        assert jacobian(alpha, t, x0, u0, v0) == pytest.approx(jp, rel=1e-9, abs=1e-13)
        assert beta_polar(alpha, t, p.omega, p.phi) == pytest.approx(
            beta_generic(alpha, t, x0, u0, v0), rel=1e-9)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_jacobian_matches_fd(alpha, rng):
    for _ in range(20):
        x0, u0, v0 = random_case(rng, alpha)
        t = rng.uniform(0.1, 1)
        fd = fd_jacobian_oracle(alpha, t, x0, u0, v0)
        assert jacobian(alpha, t, x0, u0, v0) == pytest.approx(fd, rel=1e-6, abs=1e-10)


def test_fd_oracle_alpha_one_and_line():
    x0, u0, v0 = 0.6, 0.8, 1.1
    ratio = fd_jacobian_oracle(1, 0.4, x0, u0, v0) / fd_jacobian_oracle(1, 1.0, x0, u0, v0)
    assert ratio == pytest.approx(grushin_beta(0.4, x0, u0, v0), rel=1e-4)
    # straight line: finite, equal to t int_0^t (x0 + u0 tau)^(2 alpha)
    fd = fd_jacobian_oracle(2, 0.7, 0.5, 1.0, 0.0)
    ref = 0.7 * ((0.5 + 0.7) ** 5 - 0.5 ** 5) / 5
    assert np.isfinite(fd) and fd == pytest.approx(ref, rel=1e-6)
    assert jacobian(2, 0.7, 0.5, 1.0, 0.0) == pytest.approx(ref, rel=1e-13)


def test_expanded_displays_only_match_at_alpha_one(rng):
    for alpha, agree in [(1.0, True), (2.0, False), (3.0, False)]:
        errs = []
        for _ in range(10):
            x0, u0, v0 = random_case(rng, alpha)
            xt, _, ut, _ = geodesic_flow(alpha, x0, 0.0, u0, v0, 0.5)
            x1, _, u1, _ = geodesic_flow(alpha, x0, 0.0, u0, v0, 1.0)
            disp = (jacobian_xuv_display(alpha, 0.5, x0, u0, v0, xt, ut)
                    / jacobian_xuv_display(alpha, 1.0, x0, u0, v0, x1, u1))
            errs.append(abs(disp - beta_generic(alpha, 0.5, x0, u0, v0)))
        assert (max(errs) < 1e-9) == agree
    p = to_polar(1, (0.6, 0.0), (0.8, 1.1))
    disp = (jacobian_polar_display(1, 0.5, p.A, p.omega, p.phi)
            / jacobian_polar_display(1, 1.0, p.A, p.omega, p.phi))
    assert disp == pytest.approx(beta_polar(1, 0.5, p.omega, p.phi), rel=1e-9)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_horizontal_continuity(alpha):
    ts = np.linspace(0.05, 1, 20)
    for x0, u0 in [(1.0, 1.0), (0.5, -2.0), (-1.0, 0.7), (0.0, 1.5)]:
        ref = beta_horizontal(alpha, ts, x0, u0)
        for v0 in (1e-6, -1e-6, 1e-4):
            got = beta_generic(alpha, ts, x0, u0, v0)
            assert np.max(np.abs(got - ref)) < 1e-3


@pytest.mark.parametrize("alpha", ALPHAS)
def test_singular_branch_matches_generic(alpha):
    ts = np.linspace(0.05, 1, 20)
    for u0, v0 in [(1.0, 1.0), (-0.5, 2.0), (0.3, -0.8)]:
        spec = make_spec(alpha, (0.0, 0.0), (u0, v0))
        got = beta_singular(alpha, ts, spec.polar.omega)
        assert np.max(np.abs(got - beta_generic(alpha, ts, 0.0, u0, v0))) < 1e-9
        near = beta_polar(alpha, ts, spec.polar.omega, 1e-7)
        assert np.max(np.abs(near - got)) < 1e-4
    if alpha == 1.0:
        assert beta_singular_display(1, 0.4, 1.3) == pytest.approx(beta_singular(1, 0.4, 1.3),
                                                                   rel=1e-12)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_u_zero_cos_form(alpha):
    ctx = as_alpha(alpha)
    ts = np.linspace(0.05, 1, 20)
    for x0, v0 in [(1.0, 0.8), (-0.6, 1.5)]:
        p = to_polar(ctx, (x0, 0.0), (0.0, v0))
        got = beta_u_zero(ctx, ts, p.omega, p.phi)
        assert np.max(np.abs(got - beta_generic(ctx, ts, x0, 0.0, v0))) < 1e-9


@pytest.mark.parametrize("alpha", ALPHAS)
def test_aux_vderivatives(alpha, rng):
    h = 1e-6
    for _ in range(50):
        x0, u0, v0 = random_case(rng, alpha)
        t = rng.uniform(0, 1)
        xv, uv = aux_vderivatives(alpha, t, x0, u0, v0)
        xp, _, up, _ = geodesic_flow(alpha, x0, 0.0, u0, v0 + h, t)
        xm, _, um, _ = geodesic_flow(alpha, x0, 0.0, u0, v0 - h, t)
        assert xv == pytest.approx((xp - xm) / (2 * h), abs=1e-5)
        assert uv == pytest.approx((up - um) / (2 * h), abs=1e-5)
    assert aux_vderivatives(alpha, 0.0, 0.4, 0.7, 1.2) == pytest.approx((0, 0), abs=1e-15)
    with pytest.raises(DegenerateInputError):
        aux_vderivatives(alpha, 0.5, 0.4, 0.7, 0.0)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_small_t_vanishing(alpha, rng):
    ts = np.linspace(1e-3, 0.1, 25)
    for _ in range(20):
        x0, u0, v0 = random_case(rng, alpha)
        assert np.all(beta_generic(alpha, ts, x0, u0, v0) <= 2 * ts)


def test_monte_carlo_small():
    q0 = (0.5, 0.0)
    q1 = geodesic_flow(1, 0.5, 0.0, 1.2, 0.8, 1.0)[:2]
    est = beta_monte_carlo(1, q0, q1, 1.0, n=2000, full=True)
    assert est.beta == pytest.approx(1.0, rel=0.02)
    assert est.n_used + est.n_failed == 2000
    one = beta_monte_carlo(1, q0, q1, 0.5, n=2000)
    sharded = beta_monte_carlo(1, q0, q1, 0.5, n=2000, shards=4)
    assert one == pytest.approx(sharded, rel=1e-12)
    assert one == pytest.approx(beta(1, q0, q1, 0.5).beta, rel=0.02)
