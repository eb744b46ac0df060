import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fbcsf import geometry as g
from fbcsf import oval as ov
from fbcsf.errors import (BracketFailure, ConfigError, LambdaOutOfRange,
                          OutOfSupport, RhoTooLarge)


# ------------------------------------------------------ scalar limits

def test_sigma_symmetric_unit():
    s = ov.solve_sigma(1.0)
    assert abs(s * np.tanh(s) - 1.0) < 1e-13
    assert abs(s - 1.1996786402577344) < 1e-12


def test_lambda0_symmetric_matches_sigma():
    for k in (0.5, 1.0, 2.0):
        lam = ov.solve_lambda0(k, k)
        assert abs(lam * np.tanh(lam) - k) < 1e-10
        assert abs(lam - ov.solve_sigma(k)) < 1e-12


def test_lambda0_oracles():
    assert abs(ov.solve_lambda0(0.5, 0.5) - 0.7717023192091043) < 1e-12
    assert abs(ov.solve_lambda0(2.0, 2.0) - 2.0653381389747048) < 1e-12
    assert abs(ov.solve_lambda0(1.0, 0.5) - 1.0765642046115869) < 1e-12


def test_lambda0_quadratic_residual():
    k1, k2 = 1.0, 0.5
    lam = ov.solve_lambda0(k1, k2)
    res = lam ** 2 - lam * (k1 + k2) / np.tanh(2 * lam) + k1 * k2
    assert abs(res) < 1e-12
    assert max(k1, k2) < lam <= ov.solve_sigma(max(k1, k2)) + 1e-12


def test_xi0_oracle():
    lam = ov.solve_lambda0(1.0, 0.5)
    x = ov.xi0(lam, 1.0)
    assert abs(x - (-0.5328116536289997)) < 1e-12


def test_limits_shift_identities():
    lim = ov.compute_limits(1.0, 0.5)
    assert abs(np.tanh(lim.lambda0 * (1 - lim.xi0)) - 1.0 / lim.lambda0) < 1e-10
    assert abs(np.tanh(lim.lambda0 * (1 + lim.xi0)) - 0.5 / lim.lambda0) < 1e-10


kappas = st.floats(0.3, 3.0)


@settings(max_examples=30, deadline=None)
@given(kappas, kappas)
def test_lambda0_ordering_and_identities(k1, k2):
    lim = ov.compute_limits(k1, k2)
    kmax = max(k1, k2)
    assert kmax < lim.lambda0 <= lim.sigma + 1e-12
    assert abs(np.tanh(lim.lambda0 * (1 - lim.xi0)) - k1 / lim.lambda0) < 1e-10
    assert abs(np.tanh(lim.lambda0 * (1 + lim.xi0)) - k2 / lim.lambda0) < 1e-10
    res = (lim.lambda0 ** 2
           - lim.lambda0 * (k1 + k2) / np.tanh(2 * lim.lambda0) + k1 * k2)
    assert abs(res) < 1e-10


# ----------------------------------------------------- height profile

def test_lower_height_apex():
    par = ov.OvalParams(lam=1.3, xi=0.2, t=-0.8)
    want = np.arcsin(np.exp(1.3 ** 2 * -0.8)) / 1.3
    assert abs(par.lower_height(0.2) - want) < 1e-14


def test_lower_height_direct_value():
    par = ov.OvalParams(lam=1.0, xi=0.0, t=-1.0)
    assert abs(par.lower_height(0.0) - 0.376727508058575) < 1e-12


def test_lower_height_branch_junction():
    par = ov.OvalParams(lam=1.0, xi=0.0, t=-1.0)
    w = par.support_halfwidth
    assert abs(par.lower_height(w) - np.pi / 2) < 1e-7
    with pytest.raises(OutOfSupport):
        par.lower_height(w * 1.01)


def test_height_factor_bound():
    par = ov.OvalParams(lam=2.0, xi=0.0, t=-0.5)
    assert 0.0 < par.height_factor < 1.0


# ----------------------------------------- single-contact placement

def test_single_point_orthogonal_disk(ndisk):
    gr = g.UpperBoundaryGraph(ndisk.domain)
    x0 = float(np.cos(0.2))
    phi0 = float(gr.phi(np.array([x0]))[0])
    dphi0 = float(gr.dphi(np.array([x0]))[0])
    lo, hi = ov.admissible_interval(phi0, dphi0)
    par = ov.single_point_orthogonal(gr, x0, 0.5 * (lo + hi))
    n_ov = par.normal_direction(x0, phi0)
    n_ov = n_ov / np.linalg.norm(n_ov)
    # orthogonal intersection: the oval's normal lies along the boundary
    # tangent, i.e. perpendicular to the boundary normal
    n_bd = np.array([x0, phi0])  # unit outward normal of the disk
    assert abs(float(n_ov @ n_bd)) < 1e-10
    tau_bd = np.array([-phi0, x0])
    assert abs(abs(float(n_ov @ tau_bd)) - 1.0) < 1e-10


def test_single_point_upper_limit_shift(ndisk):
    gr = g.UpperBoundaryGraph(ndisk.domain)
    x0 = float(np.cos(0.2))
    phi0 = float(gr.phi(np.array([x0]))[0])
    dphi0 = float(gr.dphi(np.array([x0]))[0])
    lo, hi = ov.admissible_interval(phi0, dphi0)
    par = ov.single_point_orthogonal(gr, x0, hi * (1 - 1e-12))
    assert abs(par.xi - x0) < 1e-5


def test_single_point_lower_endpoint_rejected(ndisk):
    gr = g.UpperBoundaryGraph(ndisk.domain)
    x0 = float(np.cos(0.2))
    phi0 = float(gr.phi(np.array([x0]))[0])
    dphi0 = float(gr.dphi(np.array([x0]))[0])
    lo, _ = ov.admissible_interval(phi0, dphi0)
    with pytest.raises(LambdaOutOfRange):
        ov.single_point_orthogonal(gr, x0, lo)


# ------------------------------------------------- two-contact solve

def test_disk_oval_symmetric(ndisk):
    o = ov.construct_orthogonal_oval(ndisk, 0.3)
    assert abs(o.params.xi) < 1e-12
    assert abs(o.x0 + o.xhat) < 1e-10
    assert abs(o.lam - 1.204217501199189) < 1e-9
    assert max(o.residuals) < 1e-10
    assert o.p_first[1] < 0.3 and o.p_second[1] < 0.3
    assert abs(o.p_first[1] - 0.15) < 1e-10  # contact pinned at rho/2


def test_ellipse_minor_oval_symmetric(nellipse_minor):
    o = ov.construct_orthogonal_oval(nellipse_minor, 0.2)
    assert abs(o.params.xi) < 1e-12
    assert max(o.residuals) < 1e-8
    assert abs(o.lam - 0.522208619421) < 1e-9


def test_egg_oval_asymmetric(negg):
    o = ov.construct_orthogonal_oval(negg, 0.15)
    assert abs(o.params.xi) > 0.01
    assert max(o.residuals) < 1e-8
    assert o.p_first[1] < 0.15 and o.p_second[1] < 0.15
    assert abs(o.lam - 1.562692939008649) < 1e-9
    # independent verification: the second contact solves the level-set
    # equation and the normals align on a fine boundary grid re-check
    par = o.params
    E = np.exp(par.lam ** 2 * par.t)
    lhs = np.sin(par.lam * o.p_second[1])
    rhs = E * np.cosh(par.lam * (o.p_second[0] - par.xi))
    assert abs(lhs - rhs) < 1e-10


def test_oval_sign_claims(negg):
    o = ov.construct_orthogonal_oval(negg, 0.2)
    assert o.claim_f_lo < 0.0 < o.claim_f_hi


def test_oval_scale_bounds(ndisk, negg, nellipse_minor):
    for nd, rho in ((ndisk, 0.2), (negg, 0.2), (nellipse_minor, 0.2)):
        o = ov.construct_orthogonal_oval(nd, rho)
        kmax = max(nd.kappa1, nd.kappa2)
        assert o.lam > kmax
        assert o.lam <= o.sigma_unshifted + 1e-9


def test_oval_convergence_to_limit(ndisk):
    lim = ov.compute_limits(ndisk.kappa1, ndisk.kappa2)
    rhos = (0.2, 0.1, 0.05, 0.025)
    errs = [abs(ov.construct_orthogonal_oval(ndisk, r).lam - lim.lambda0)
            for r in rhos]
    assert all(a > b for a, b in zip(errs, errs[1:]))
    # clean second order in rho: Richardson removes the leading term
    lams = [ov.construct_orthogonal_oval(ndisk, r).lam for r in rhos]
    rich = (4 * lams[-1] - lams[-2]) / 3
    assert abs(rich - lim.lambda0) < 1e-3
    assert abs(rich - lim.lambda0) < 1e-6


def test_old_but_not_ancient_window_grows(ndisk):
    ts = [ov.construct_orthogonal_oval(ndisk, r).params.t
          for r in (0.2, 0.1, 0.05)]
    assert ts[0] > ts[1] > ts[2]  # smaller cap starts further in the past


def test_rho_too_large(ndisk):
    with pytest.raises(RhoTooLarge):
        ov.construct_orthogonal_oval(ndisk, 1.2)
    with pytest.raises(RhoTooLarge):
        ov.construct_orthogonal_oval(ndisk, -0.1)


# ------------------------------------------------------ initial curve

def test_sample_initial_curve_uniform(ndisk):
    o = ov.construct_orthogonal_oval(ndisk, 0.3)
    pts = ov.sample_initial_curve(o, 200)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    assert seg.max() / seg.min() - 1 < 1e-5
    assert np.all(np.diff(pts[:, 0]) > 0)
    assert np.allclose(pts[0], o.p_second, atol=0)
    assert np.allclose(pts[-1], o.p_first, atol=0)


def test_sample_initial_curve_endpoint_tangents(ndisk):
    o = ov.construct_orthogonal_oval(ndisk, 0.3)
    par = o.params
    for om, xe in ((o.omega_hat, o.xhat), (o.omega0, o.x0)):
        s = par.lower_slope(np.array([xe]))[0]
        t = np.array([1.0, s]) / np.hypot(1.0, s)
        n_in = -ndisk.domain.outward_normal(om)
        assert min(np.linalg.norm(t - n_in), np.linalg.norm(t + n_in)) < 1e-6


def test_sample_initial_curve_secant_tangent_converges(ndisk):
    o = ov.construct_orthogonal_oval(ndisk, 0.3)
    n_in = -ndisk.domain.outward_normal(o.omega0)
    errs = []
    for n in (100, 200, 400):
        pts = ov.sample_initial_curve(o, n)
        t = pts[-1] - pts[-2]
        t /= np.linalg.norm(t)
        errs.append(np.linalg.norm(-t - n_in))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 2.1 * errs[1] / 2 < 2.1 * errs[0] / 4


def test_sample_initial_curve_mirror_symmetry(ndisk):
    o = ov.construct_orthogonal_oval(ndisk, 0.3)
    pts = ov.sample_initial_curve(o, 129)
    mir = pts[::-1].copy()
    mir[:, 0] = 2 * o.params.xi - mir[:, 0]
    assert np.abs(mir - pts).max() < 1e-10


def _seg_dist(P, A, B):
    d = B - A
    tt = np.clip(((P - A) @ d) / (d @ d), 0.0, 1.0)
    return np.linalg.norm(P - (A + tt[:, None] * d), axis=1)


def _poly_hausdorff(A, B):
    def side(P, Q):
        m = np.full(len(P), np.inf)
        for i in range(len(Q) - 1):
            m = np.minimum(m, _seg_dist(P, Q[i], Q[i + 1]))
        return m.max()
    return max(side(A, B), side(B, A))


def test_sample_initial_curve_refinement(ndisk):
    o = ov.construct_orthogonal_oval(ndisk, 0.3)
    p16 = ov.sample_initial_curve(o, 16)
    p512 = ov.sample_initial_curve(o, 512)
    assert _poly_hausdorff(p16, p512) < 1e-3


def test_sample_initial_curve_min_nodes(ndisk):
    o = ov.construct_orthogonal_oval(ndisk, 0.3)
    with pytest.raises(ConfigError):
        ov.sample_initial_curve(o, 15)
