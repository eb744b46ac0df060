"""Angenent ovals fitted orthogonally into a normalized convex domain.

The oval family is the level set

    sin(lam y) = exp(lam^2 t) cosh(lam (x - xi)),   0 < y < pi/(2 lam),

whose lower branch is a convex smile between two tips at height
pi/(2 lam).  Requiring the oval to cross the upper boundary graph
y = phi(x) orthogonally at a chosen right contact x0 determines t and xi
in closed form for every admissible scale lam, leaving a one-parameter
family.  A nested solve then picks the scale so the oval crosses the
boundary orthogonally at a second, left contact as well:

  * the first-contact abscissa x0 is fixed (given the height cap rho)
    so that at the extreme scale lam = pi/(2 rho) the oval's left tip
    lands exactly on the boundary at height rho;
  * with x0 frozen, the scale is bisected between the configuration
    whose shift is xi = -1 (the second crossing is then obtuse) and
    pi/(2 rho) (acute), converging on the orthogonal configuration.

As rho -> 0 the scale tends to lambda0, the unique root above both
endpoint curvatures of  lam^2 - lam (k1 + k2) coth(2 lam) + k1 k2 = 0,
which also rules the exponential decay rate lambda0^2 of the flow.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BracketFailure,
    ConfigError,
    InvalidScale,
    LambdaOutOfRange,
    NoRoot,
    OutOfSupport,
    RhoTooLarge,
)
from .geometry import ConvexDomain, NormalizedDomain
from .solve import safe_brentq


# -- oval primitives --------------------------------------------------------


@dataclass
class OvalParams:
    """Scale, horizontal shift, and time slice of an Angenent oval."""

    lam: float
    xi: float
    t: float

    @property
    def height_factor(self):
        """e^{lam^2 t}, in (0,1) for t < 0."""
        return float(np.exp(self.lam ** 2 * self.t))

    @property
    def support_halfwidth(self):
        """Half-width of the oval: tips sit at xi -+ this."""
        return float(np.arccosh(1.0 / self.height_factor) / self.lam)

    def lower_height(self, x, clip=False):
        E = self.height_factor
        u = E * np.cosh(self.lam * (np.asarray(x, dtype=float) - self.xi))
        if clip:
            u = np.minimum(u, 1.0)
        else:
            if np.any(u > 1.0 + 1e-12):
                raise OutOfSupport("point beyond the oval tips")
            u = np.minimum(u, 1.0)
        return np.arcsin(u) / self.lam

    def lower_slope(self, x):
        E = self.height_factor
        v = self.lam * (np.asarray(x, dtype=float) - self.xi)
        u = np.minimum(E * np.cosh(v), 1.0)
        return E * np.sinh(v) / np.sqrt(np.maximum(1.0 - u * u, 1e-300))

    def normal_direction(self, x, y):
        """Unnormalized outward normal (tanh(lam(x-xi)), -cot(lam y))."""
        v = self.lam * (np.asarray(x, dtype=float) - self.xi)
        return np.stack(
            [np.tanh(v), -1.0 / np.tan(self.lam * np.asarray(y, dtype=float))],
            axis=-1,
        )


def oval_lower_height(params, x):
    """Lower-branch height y(x) = arcsin(e^{lam^2 t} cosh(lam(x-xi)))/lam."""
    return params.lower_height(x)


# -- limiting scales --------------------------------------------------------


@dataclass
class Limits:
    lambda0: float
    xi0: float
    sigma: float


def solve_sigma(kappa):
    """Unique positive root of s tanh s = kappa."""
    if kappa <= 0:
        raise ConfigError("curvature must be positive")

    def f(s):
        return s * np.tanh(s) - kappa

    hi = max(np.sqrt(kappa), kappa) + 2.0
    while f(hi) < 0:
        hi *= 2.0
    return float(safe_brentq(f, 1e-14, hi))


def lambda0_residual(lam, kappa1, kappa2):
    """N(lam) = lam^2 - lam (k1 + k2) coth(2 lam) + k1 k2."""
    lam = np.asarray(lam, dtype=float)
    return lam ** 2 - lam * (kappa1 + kappa2) / np.tanh(2.0 * lam) + kappa1 * kappa2


def solve_lambda0(kappa1, kappa2):
    """The unique root of N above max(kappa1, kappa2).

    For equal curvatures the equation factorizes as
    (lam tanh lam - k)(lam - k tanh lam)/tanh(lam) and the admissible
    factor is lam tanh lam = k, handled directly for exactness.
    """
    if kappa1 <= 0 or kappa2 <= 0:
        raise ConfigError("curvatures must be positive")
    kmax = max(kappa1, kappa2)
    if abs(kappa1 - kappa2) <= 1e-12 * kmax:
        return solve_sigma(0.5 * (kappa1 + kappa2))
    sigma = solve_sigma(kmax)
    lo = kmax
    hi = sigma + max(1e-10, 1e-10 * sigma)
    flo = lambda0_residual(lo, kappa1, kappa2)
    fhi = lambda0_residual(hi, kappa1, kappa2)
    if flo >= 0 or fhi <= 0:
        raise NoRoot(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: N={flo:.3e}, {fhi:.3e}"
        )
    return float(safe_brentq(
        lambda s: float(lambda0_residual(s, kappa1, kappa2)), lo, hi))


def xi0(lambda0, kappa1):
    """Limiting shift: xi0 = 1 - arctanh(kappa1/lambda0)/lambda0.

    (arccosh(1/sqrt(1-u^2)) = arctanh(u) for u in (0,1), so this matches
    the arccosh form; arctanh is better conditioned near u = 0.)
    """
    if lambda0 <= kappa1:
        raise InvalidScale("scale must exceed the right endpoint curvature")
    return float(1.0 - np.arctanh(kappa1 / lambda0) / lambda0)


def compute_limits(kappa1, kappa2):
    lam0 = solve_lambda0(kappa1, kappa2)
    return Limits(lambda0=lam0, xi0=xi0(lam0, kappa1),
                  sigma=solve_sigma(max(kappa1, kappa2)))


# -- single-point orthogonality ---------------------------------------------


def admissible_interval(phi0, dphi0):
    """Scales for which an oval can cross (x0, phi0) orthogonally:
    ( arctan(-1/phi'(x0)) / phi(x0),  pi / (2 phi(x0)) )."""
    return (float(np.arctan(-1.0 / dphi0) / phi0),
            float(np.pi / (2.0 * phi0)))


def _params_from_contact(phi0, dphi0, x0, lam):
    if phi0 <= 0 or dphi0 >= 0:
        raise ConfigError(
            "first contact must have phi(x0) > 0 and phi'(x0) < 0")
    ang = lam * phi0
    if not (0.0 < ang < np.pi / 2):
        raise LambdaOutOfRange("scale at or above pi/(2 phi(x0))")
    S, C = np.sin(ang), np.cos(ang)
    E2 = S * S - (C / dphi0) ** 2
    if E2 <= 0.0:
        raise LambdaOutOfRange("scale at or below the arctan endpoint")
    t = float(np.log(E2) / (2.0 * lam ** 2))
    xi = float(x0 - np.arccosh(max(S / np.sqrt(E2), 1.0)) / lam)
    return OvalParams(lam=float(lam), xi=xi, t=t)


def single_point_orthogonal(graph, x0, lam):
    """Oval through (x0, phi(x0)) with its normal along the boundary normal.

    graph must expose phi(x) and dphi(x) for the upper boundary.  The
    time slice comes out as t = log(sin^2(lam phi0) - cos^2(lam phi0)/
    phi'(x0)^2)/(2 lam^2) and the shift as x0 - arccosh(sin(lam phi0)/
    e^{lam^2 t})/lam.
    """
    phi0 = float(graph.phi(x0))
    dphi0 = float(graph.dphi(x0))
    return _params_from_contact(phi0, dphi0, x0, lam)


# -- the nested two-contact construction --------------------------------------


@dataclass
class OrthogonalOval:
    """An oval crossing the boundary orthogonally at two points below y = rho."""

    params: OvalParams
    x0: float
    xhat: float
    residuals: tuple
    rho_cap: float
    omega0: float = 0.0           # boundary turning angle at the right contact
    omega_hat: float = 0.0        # boundary turning angle at the left contact
    p_first: np.ndarray = None
    p_second: np.ndarray = None
    sigma_unshifted: float = np.nan  # scale of the xi = 0 member at the same x0
    lam_min: float = np.nan
    lam_hat: float = np.nan
    claim_f_lo: float = np.nan
    claim_f_hi: float = np.nan
    domain: ConvexDomain = field(default=None, repr=False)

    @property
    def lam(self):
        return self.params.lam


def _alignment_residual(n_oval, tau_bd):
    """1 - |cos(angle between the oval normal and the boundary tangent)|."""
    n = np.asarray(n_oval, dtype=float)
    n = n / np.linalg.norm(n)
    return float(1.0 - abs(float(n @ tau_bd)))


def construct_orthogonal_oval(ndom, rho, ngrid=8193):
    """Build the oval meeting the boundary orthogonally twice below y = rho.

    ndom is a NormalizedDomain (or an already-normalized ConvexDomain with
    the diameter on [-1,1]).  The first contact is pinned on the descending
    side of the upper boundary at height rho/2; each trial scale places the
    oval through that contact with the closed-form shift and time, and the
    scale is bisected until the second boundary crossing is orthogonal.
    The bracket runs from the shift = -1 configuration (obtuse second
    angle) up to scale pi/(2 rho) (acute side, possibly detached from the
    far wall).  Raises RhoTooLarge when the line y = rho fails to cross
    the upper boundary twice, and BracketFailure when a sign condition of
    the nested solve is not met (brackets are never widened silently).
    """
    dom = ndom.domain if isinstance(ndom, NormalizedDomain) else ndom
    if not dom.is_normalized:
        raise ConfigError("domain must be normalized (diameter on [-1,1])")

    om_grid = np.linspace(np.pi / 2, 3 * np.pi / 2, ngrid)
    pts = dom.point(om_grid)
    xs, ys = pts[:, 0], pts[:, 1]
    itop = int(np.argmax(ys))
    ymax = float(ys[itop])
    if not (0.0 < rho < ymax):
        raise RhoTooLarge(
            f"line y = {rho:.6g} misses the upper boundary (max height {ymax:.6g})")

    def y_of(om):
        return float(dom.point(om)[1])

    lam_hat = np.pi / (2.0 * rho)

    # first contact pinned at half the cap height on the descending side;
    # the scale sweep below then drives the second contact to orthogonality
    om0 = safe_brentq(lambda w: y_of(w) - 0.5 * rho, np.pi / 2, om_grid[itop])
    p0_ = dom.point(om0)
    x0, phi0, dphi0 = float(p0_[0]), float(p0_[1]), float(np.tan(om0))
    lam_min, lam_max_adm = admissible_interval(phi0, dphi0)
    if not lam_min < lam_hat:
        raise RhoTooLarge(
            f"no scale bracket at rho = {rho:.6g}: pi/(2 rho) = {lam_hat:.6g}"
            f" does not exceed the admissible lower endpoint {lam_min:.6g}")

    # sign claim for the xi = -1 equation, evaluated at both endpoints
    claim_f_lo = dphi0 ** 2 * (np.tanh(lam_min * (x0 + 1.0)) ** 2 - 1.0)
    claim_f_hi = dphi0 ** 2 * np.tanh(lam_max_adm * (x0 + 1.0)) ** 2
    if not (claim_f_lo < 0.0 < claim_f_hi):
        raise BracketFailure("endpoint signs of the xi = -1 equation failed")

    def xi_of(lam):
        try:
            return _params_from_contact(phi0, dphi0, x0, lam).xi
        except LambdaOutOfRange:
            return None

    def solve_xi_equals(target, lam_a, lam_b, n=400):
        """Root of xi(lam) = target scanning from lam_b down toward lam_a.

        The shift drops to -inf at the lower admissible endpoint, so the
        scan is geometrically refined toward lam_a.
        """
        grid = (lam_a + (lam_b - lam_a) * np.geomspace(1e-13, 1.0, n))[::-1]
        prev = None
        for lam in grid:
            val = xi_of(lam)
            if val is None:
                prev = None
                continue
            r = val - target
            if prev is not None and prev[1] * r < 0:
                return safe_brentq(
                    lambda s: xi_of(s) - target, lam, prev[0])
            if r == 0.0:
                return lam
            prev = (lam, r)
        return None

    lam_star = solve_xi_equals(-1.0, lam_min, lam_hat)
    if lam_star is None:
        raise BracketFailure("no scale with shift xi = -1 in the admissible range")

    guard = max(4, int(ngrid / 2000))

    def second_contact(lam):
        """(omega_hat, params) of the second boundary crossing, or None."""
        par = _params_from_contact(phi0, dphi0, x0, lam)
        w = par.support_halfwidth
        xlim = par.xi - w
        sel = np.nonzero((om_grid > om0) & (xs >= max(xlim, xs[-1])))[0]
        sel = sel[guard:] if len(sel) > guard else sel[:0]
        if len(sel) == 0:
            return None
        d = ys[sel] - par.lower_height(xs[sel], clip=True)
        neg = np.nonzero(d < 0.0)[0]
        if len(neg) == 0:
            return None
        j = sel[neg[0]]
        om_b = om_grid[j]
        om_a = om_grid[j - 1] if j > 0 else om0

        def dres(om):
            p = dom.point(om)
            return float(p[1] - par.lower_height(p[0], clip=True))

        om_hat = safe_brentq(dres, om_a, om_b)
        return float(om_hat), par

    def angle_residual(lam):
        hit = second_contact(lam)
        if hit is None:
            return 1.0, None  # no crossing: treat as the acute side
        om_hat, par = hit
        p = dom.point(om_hat)
        n_ov = par.normal_direction(p[0], p[1])
        n_ov = n_ov / np.linalg.norm(n_ov)
        n_bd = np.array([np.sin(om_hat), -np.cos(om_hat)])
        return float(n_ov @ n_bd), hit

    f_lo, _ = angle_residual(lam_star)
    if not f_lo < 0.0:
        raise BracketFailure(
            f"obtuse-side residual not negative at xi=-1 scale: {f_lo:.3e}")

    lo, hi = lam_star, lam_hat
    best = None
    for _ in range(110):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm, hit = angle_residual(mid)
        if hit is not None and (best is None or abs(fm) < abs(best[0])):
            best = (fm, mid, hit)
        if fm > 0:
            hi = mid
        else:
            lo = mid
    if best is None:
        raise BracketFailure("second-contact bisection never found a crossing")

    f_fin, lam_fin, (om_hat, par) = best
    p_hat = dom.point(om_hat)
    p0 = dom.point(om0)
    tau0 = np.array([np.cos(om0), np.sin(om0)])
    tau_hat = np.array([np.cos(om_hat), np.sin(om_hat)])
    r1 = _alignment_residual(par.normal_direction(p0[0], p0[1]), tau0)
    r2 = _alignment_residual(par.normal_direction(p_hat[0], p_hat[1]), tau_hat)

    # scale of the unshifted (xi = 0) member through the same contact; the
    # constructed scale never exceeds it
    xi_fin = xi_of(lam_fin)
    if xi_fin is not None and abs(xi_fin) < 1e-9:
        sigma_u = lam_fin
    else:
        sigma_u = solve_xi_equals(0.0, lam_fin * (1.0 - 1e-12), lam_hat)
        if sigma_u is None:
            raise BracketFailure("unshifted-oval scale bound not found")

    return OrthogonalOval(
        params=par,
        x0=x0,
        xhat=float(p_hat[0]),
        residuals=(r1, r2),
        rho_cap=float(rho),
        omega0=float(om0),
        omega_hat=float(om_hat),
        p_first=p0,
        p_second=p_hat,
        sigma_unshifted=float(sigma_u),
        lam_min=lam_min,
        lam_hat=lam_hat,
        claim_f_lo=float(claim_f_lo),
        claim_f_hi=float(claim_f_hi),
        domain=dom,
    )


def sample_initial_curve(oval, n):
    """n nodes on the oval arc between its contacts, uniform in arc length.

    Nodes run left to right; the two end nodes are placed exactly at the
    boundary contact points.
    """
    if n < 16:
        raise ConfigError("need at least 16 nodes")
    par = oval.params
    m = max(4001, 16 * n + 1)
    xs = np.linspace(oval.xhat, oval.x0, m)
    sp = par.lower_slope(xs)
    seg = np.hypot(np.diff(xs), np.diff(xs) * 0.5 * (sp[1:] + sp[:-1]))
    # trapezoid of sqrt(1+y'^2) is equivalent at this resolution but the
    # midpoint-slope form avoids endpoint slope spikes
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, cum[-1], n)
    xq = np.interp(targets, cum, xs)
    pts = np.stack([xq, par.lower_height(xq, clip=True)], axis=-1)
    pts[0] = oval.p_second
    pts[-1] = oval.p_first
    return pts
