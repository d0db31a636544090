"""Profile functions for surfaces of revolution diffeomorphic to the sphere.

A surface of revolution is encoded by its profile gamma: [0, ell] -> R, the
distance from the axis as a function of arclength t along a meridian. Smooth
closure at the two poles and the round metric convention used throughout
impose:

  gamma(0) = gamma(ell) = 0,     gamma > 0 on (0, ell),
  gamma'(0) = 1, gamma'(ell) = -1,   |gamma'| < 1 on (0, ell),
  gamma''(0) = gamma''(ell) = 0,

and the normalization area = 4 pi, i.e. integral of gamma over [0, ell]
equals 2. Gamma denotes the antiderivative of gamma with Gamma(0) = -1, so
Gamma(ell) = +1 for a normalized profile. Gauss curvature is
K = -gamma''/gamma, extended to the poles by the limit -gamma'''/gamma'.

Profiles are exposed through a small evaluation API (gamma, dgamma, ddgamma,
dddgamma, Gamma, curvature), vectorized over numpy arrays. Evaluation does
not clamp or raise outside [0, ell]; callers that integrate ODEs may probe a
few ulps past the ends and receive the natural smooth extension of the
representation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import make_interp_spline

from .numerics import gauss_nodes

# Below this height the ratio -gamma''/gamma is replaced by its pole limit
# -gamma'''/gamma'; both agree to O(t^2) near a pole but the limit form stays
# conditioned as gamma -> 0.
_POLE_BAND = 1e-3


@dataclass(frozen=True)
class ProfileJet:
    """Pointwise jet of a profile: value, first two derivatives, Gamma, K."""
    t: float
    gamma: float
    dgamma: float
    ddgamma: float
    Gamma: float
    curvature: float


class ProfileFunction:
    """Base class; subclasses provide _gamma, _dgamma, _ddgamma, _dddgamma, _Gamma."""

    kind = "abstract"
    ell: float

    # -- evaluation ---------------------------------------------------------

    def gamma(self, t):
        return self._gamma(np.asarray(t, dtype=float))

    def dgamma(self, t):
        return self._dgamma(np.asarray(t, dtype=float))

    def ddgamma(self, t):
        return self._ddgamma(np.asarray(t, dtype=float))

    def dddgamma(self, t):
        return self._dddgamma(np.asarray(t, dtype=float))

    def Gamma(self, t):
        return self._Gamma(np.asarray(t, dtype=float))

    def curvature(self, t):
        """Gauss curvature K = -gamma''/gamma, pole limit -gamma'''/gamma'."""
        t_in = np.asarray(t, dtype=float)
        t1 = np.atleast_1d(t_in)
        g = np.atleast_1d(np.asarray(self._gamma(t1), dtype=float))
        near = np.abs(g) < _POLE_BAND
        out = np.empty_like(g)
        if np.any(~near):
            out[~near] = -np.asarray(self._ddgamma(t1[~near])) / g[~near]
        if np.any(near):
            out[near] = (-np.asarray(self._dddgamma(t1[near]), dtype=float)
                         / np.asarray(self._dgamma(t1[near]), dtype=float))
        return out.reshape(t_in.shape) if t_in.ndim else float(out[0])

    def eval(self, t: float) -> ProfileJet:
        t = float(t)
        if not (0.0 <= t <= self.ell):
            raise ValueError(f"t = {t} outside the profile domain "
                             f"[0, {self.ell}]")
        return ProfileJet(t, float(self.gamma(t)), float(self.dgamma(t)),
                          float(self.ddgamma(t)), float(self.Gamma(t)),
                          float(self.curvature(t)))

    # -- integrals ----------------------------------------------------------

    def gamma_integral(self) -> float:
        """Integral of gamma over [0, ell] (equals 2 when normalized)."""
        val, _ = quad(lambda s: float(self.gamma(s)), 0.0, self.ell,
                      points=self._breakpoints(), limit=400)
        return val

    def area(self) -> float:
        return 2.0 * np.pi * self.gamma_integral()

    def _breakpoints(self):
        """Interior points where the representation loses smoothness."""
        return None

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} kind={self.kind!r} ell={self.ell:.6g}>"


class SphereProfile(ProfileFunction):
    """Round sphere of radius a: gamma = a sin(t/a) on [0, pi a].

    Normalized (area 4 pi) iff a = 1. Everything is closed form, so this
    doubles as the exact oracle for the numerically constructed profiles.
    """

    kind = "sphere"

    def __init__(self, radius: float = 1.0):
        if radius <= 0:
            raise ValueError("sphere radius must be positive")
        self.radius = float(radius)
        self.ell = np.pi * self.radius

    def _gamma(self, t):
        return self.radius * np.sin(t / self.radius)

    def _dgamma(self, t):
        return np.cos(t / self.radius)

    def _ddgamma(self, t):
        return -np.sin(t / self.radius) / self.radius

    def _dddgamma(self, t):
        return -np.cos(t / self.radius) / self.radius**2

    def _Gamma(self, t):
        # antiderivative with Gamma(0) = -1
        return -1.0 + self.radius**2 * (1.0 - np.cos(t / self.radius))

    def gamma_integral(self) -> float:
        return 2.0 * self.radius**2

    def to_dict(self):
        return {"kind": "sphere", "radius": self.radius}


class _SplineFields:
    """Shared quintic-spline evaluation over sampled (t, gamma, ...) data."""

    def _attach_splines(self, t, g, dg, ddg, Gam):
        self._sp_g = make_interp_spline(t, g, k=5)
        self._sp_dg = make_interp_spline(t, dg, k=5)
        self._sp_ddg = make_interp_spline(t, ddg, k=5)
        self._sp_dddg = self._sp_ddg.derivative()
        self._sp_Gam = make_interp_spline(t, Gam, k=5)

    def _gamma(self, t):
        return self._sp_g(t)

    def _dgamma(self, t):
        return self._sp_dg(t)

    def _ddgamma(self, t):
        return self._sp_ddg(t)

    def _dddgamma(self, t):
        return self._sp_dddg(t)

    def _Gamma(self, t):
        return self._sp_Gam(t)


class EllipsoidProfile(_SplineFields, ProfileFunction):
    """Ellipsoid of revolution x^2 + y^2 + (z/rho)^2 = 1, rescaled to area 4 pi.

    rho < 1 is oblate, rho > 1 prolate. The profile is built by integrating
    the meridian arclength dt/du = sqrt(cos^2 u + rho^2 sin^2 u) over the
    polar angle u in [0, pi] with per-interval Gauss quadrature, then
    rescaling lengths so the area normalization holds. Derivatives in u are
    closed form, so every sampled jet is exact up to the quadrature of t(u);
    quintic splines interpolate between samples.
    """

    kind = "ellipsoid"

    def __init__(self, ratio: float, n_grid: int = 4096):
        if ratio <= 0:
            raise ValueError("ellipsoid axis ratio must be positive")
        self.ratio = float(ratio)
        rho = self.ratio
        u = np.linspace(0.0, np.pi, n_grid + 1)
        x, w = gauss_nodes(10)
        # cumulative t(u) and I(u) = integral gamma_raw dt over each u-cell
        uu = u[:-1, None] + np.diff(u)[:, None] * x[None, :]
        sp = np.sqrt(np.cos(uu) ** 2 + rho**2 * np.sin(uu) ** 2)
        dcell_t = np.diff(u)[:, None] * w[None, :] * sp
        dcell_I = dcell_t * np.sin(uu)
        t_raw = np.concatenate(([0.0], np.cumsum(dcell_t.sum(axis=1))))
        I_raw = np.concatenate(([0.0], np.cumsum(dcell_I.sum(axis=1))))
        # raw jets from the parametrization gamma_raw(u) = sin u
        spu = np.sqrt(np.cos(u) ** 2 + rho**2 * np.sin(u) ** 2)
        g_raw = np.sin(u)
        dg = np.cos(u) / spu
        ddg_raw = -np.sin(u) * (spu**2 + np.cos(u) ** 2 * (rho**2 - 1.0)) / spu**4
        # rescale t -> s*t so that integral gamma = 2
        s = np.sqrt(2.0 / I_raw[-1])
        self._scale = s
        t = s * t_raw
        t[0], g_raw[0], dg[0], ddg_raw[0] = 0.0, 0.0, 1.0, 0.0
        g_raw[-1], dg[-1], ddg_raw[-1] = 0.0, -1.0, 0.0
        self.ell = float(t[-1])
        Gam = -1.0 + s * s * I_raw
        self._attach_splines(t, s * g_raw, dg, ddg_raw / s, Gam)
        # exact pole curvature of the rescaled profile
        self.pole_curvature = rho**2 / s**2
        self.equator_curvature = 1.0 / (rho**2 * s**2)

    def _dddgamma(self, t):
        t = np.asarray(t, dtype=float)
        v = np.asarray(self._sp_dddg(t), dtype=float)
        # spline third derivatives drift near the ends; pin the exact limit
        near0 = t < _POLE_BAND
        near1 = t > self.ell - _POLE_BAND
        v = np.where(near0, -self.pole_curvature, v)
        v = np.where(near1, self.pole_curvature, v)
        return v if t.ndim else float(v)

    def gamma_integral(self) -> float:
        return 2.0

    def to_dict(self):
        return {"kind": "ellipsoid", "ratio": self.ratio}


class SplineProfile(_SplineFields, ProfileFunction):
    """Profile from samples (t_i, gamma_i) on [0, ell], quintic interpolation.

    End conditions gamma' = +1 / -1 and gamma'' = 0 are imposed on the
    interpolant unless end_conditions overrides them (useful for building
    deliberately invalid profiles in tests). Gamma is the exact
    antiderivative of the spline, and the derivative fields are the exact
    derivatives of the spline, so the sampled representation is internally
    consistent to machine precision.
    """

    kind = "samples"

    def __init__(self, t, gamma, end_conditions=None):
        t = np.asarray(t, dtype=float)
        g = np.asarray(gamma, dtype=float)
        if t.ndim != 1 or t.shape != g.shape or t.size < 8:
            raise ValueError("need matching 1-d sample arrays, at least 8 points")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("sample abscissae must increase from 0")
        self.ell = float(t[-1])
        self._t_samples = t
        self._g_samples = g
        if end_conditions is None:
            end_conditions = ([(1, 1.0), (2, 0.0)], [(1, -1.0), (2, 0.0)])
        self._end_conditions = end_conditions
        sp = make_interp_spline(t, g, k=5, bc_type=end_conditions)
        self._sp_g = sp
        self._sp_dg = sp.derivative()
        self._sp_ddg = sp.derivative(2)
        self._sp_dddg = sp.derivative(3)
        anti = sp.antiderivative()
        self._sp_Gam = anti
        self._Gam0 = float(anti(0.0))

    def _Gamma(self, t):
        return -1.0 + (self._sp_Gam(t) - self._Gam0)

    def gamma_integral(self) -> float:
        return float(self._sp_Gam(self.ell) - self._Gam0)

    def to_dict(self):
        return {"kind": "samples", "ell": self.ell,
                "t": self._t_samples.tolist(),
                "gamma": self._g_samples.tolist()}


class StretchBump:
    """Even C^4 bump density rho on [-w, w] with unit integral.

    rho(x) = (1 - (x/w)^2)^p / (w c_p), with c_p = integral of (1-v^2)^p on
    [-1, 1]. R is the centered cumulative, R(x) = integral of rho from 0 to
    x, so R(+-w) = +-1/2; both are closed-form polynomials.
    """

    def __init__(self, half_width: float, exponent: int = 5):
        if half_width <= 0:
            raise ValueError("bump half_width must be positive")
        if exponent < 3:
            raise ValueError("exponent >= 3 keeps the bump C^2 at its edges")
        self.half_width = float(half_width)
        self.exponent = int(exponent)
        base = np.polynomial.Polynomial([1.0, 0.0, -1.0]) ** self.exponent
        prim = base.integ()
        self._norm = 2.0 * prim(1.0)          # c_p
        self._poly = base / self._norm        # rho in u = x/w, up to 1/w
        self._prim = prim / prim(1.0) / 2.0   # R in u, R(1) = 1/2
        self._dpoly = self._poly.deriv()
        self._ddpoly = self._dpoly.deriv()

    def _u(self, x):
        return np.clip(np.asarray(x, dtype=float) / self.half_width, -1.0, 1.0)

    def density(self, x):
        u = self._u(x)
        return self._poly(u) / self.half_width

    def ddensity(self, x):
        u = self._u(x)
        return self._dpoly(u) / self.half_width**2

    def dddensity(self, x):
        u = self._u(x)
        return self._ddpoly(u) / self.half_width**3

    def cumulative(self, x):
        """R(x): odd, equals -1/2 left of the support and +1/2 right of it."""
        return self._prim(self._u(x))

    def to_dict(self):
        return {"half_width": self.half_width, "exponent": self.exponent}


class StretchedProfile(ProfileFunction):
    """Insert a collar of extra length 2C around center c of a base profile.

    The meridian is reparametrized by F(t) = t + 2C R(t - c) - offset so that
    the band [c - w, c + w] of the base is spread over a band of width
    2w + 2C while everything outside is translated rigidly. gamma values are
    transported (gamma_C(s) = gamma_base(G(s)) with G the inverse of the
    reparametrization), which preserves both endpoint jets exactly and adds
    2C * integral(gamma_base * rho) to the gamma integral; the added area is
    affine in C, which normalize_stretch exploits.

    G is evaluated by an interpolating spline over the collar plus two Newton
    polish steps, giving machine-precision inversion at spline cost.
    """

    kind = "stretched"

    def __init__(self, base: ProfileFunction, C: float, bump: StretchBump,
                 center: float, _n_inverse: int = 2048):
        if C < 0:
            raise ValueError("stretch amount C must be nonnegative")
        w = bump.half_width
        if not (0.0 < center - w and center + w < base.ell):
            raise ValueError("bump support must lie strictly inside (0, ell)")
        self.base = base
        self.C = float(C)
        self.bump = bump
        self.center = float(center)
        self.ell = base.ell + 2.0 * self.C
        self._s_lo = center - w            # collar start (same in s and t)
        self._s_hi = center + w + 2.0 * C  # collar end in s
        # dense inverse of s(t) = t + 2C (R(t-c) + 1/2) over the collar
        tg = np.linspace(center - w, center + w, _n_inverse + 1)
        sg = tg + 2.0 * self.C * (bump.cumulative(tg - center) + 0.5)
        self._inv = make_interp_spline(sg, tg, k=3)
        # cumulative weighted area P(t) = integral gamma_base rho over [c-w, t]
        x, wq = gauss_nodes(12)
        cells = np.linspace(center - w, center + w, 513)
        tt = cells[:-1, None] + np.diff(cells)[:, None] * x[None, :]
        f = np.asarray(base.gamma(tt)) * np.asarray(bump.density(tt - center))
        dP = (np.diff(cells)[:, None] * wq[None, :] * f).sum(axis=1)
        P = np.concatenate(([0.0], np.cumsum(dP)))
        self._P = make_interp_spline(cells, P, k=5)
        self.weighted_area = float(P[-1])

    # -- reparametrization --------------------------------------------------

    def _G(self, s):
        """Base parameter t with s = t + 2C (R(t - c) + 1/2) on the collar."""
        s_in = np.asarray(s, dtype=float)
        s = np.atleast_1d(s_in)
        t = np.where(s <= self._s_lo, s,
                     np.where(s >= self._s_hi, s - 2 * self.C, 0.0))
        mid = (s > self._s_lo) & (s < self._s_hi)
        if np.any(mid):
            sm = s[mid]
            tm = np.clip(self._inv(sm), self._s_lo, self.center + self.bump.half_width)
            for _ in range(2):  # Newton polish; F' >= 1 so this is safe
                F = tm + 2 * self.C * (self.bump.cumulative(tm - self.center) + 0.5)
                Fp = 1.0 + 2 * self.C * self.bump.density(tm - self.center)
                tm = tm - (F - sm) / Fp
            t[mid] = tm
        return t.reshape(s_in.shape) if s_in.ndim else float(t[0])

    def _chain(self, s):
        """G, G', G'', G''' at s."""
        t = self._G(s)
        x = t - self.center
        rho = self.bump.density(x)
        drho = self.bump.ddensity(x)
        ddrho = self.bump.dddensity(x)
        Fp = 1.0 + 2 * self.C * rho
        Fpp = 2 * self.C * drho
        Fppp = 2 * self.C * ddrho
        G1 = 1.0 / Fp
        G2 = -Fpp * G1**3
        G3 = (3.0 * Fpp**2 / Fp - Fppp) * G1**4
        return t, G1, G2, G3

    # -- fields --------------------------------------------------------------

    def _gamma(self, s):
        return self.base.gamma(self._G(s))

    def _dgamma(self, s):
        t, G1, _, _ = self._chain(s)
        return self.base.dgamma(t) * G1

    def _ddgamma(self, s):
        t, G1, G2, _ = self._chain(s)
        return self.base.ddgamma(t) * G1**2 + self.base.dgamma(t) * G2

    def _dddgamma(self, s):
        t, G1, G2, G3 = self._chain(s)
        return (self.base.dddgamma(t) * G1**3
                + 3.0 * self.base.ddgamma(t) * G1 * G2
                + self.base.dgamma(t) * G3)

    def _Gamma(self, s):
        s = np.asarray(s, dtype=float)
        t = self._G(s)
        base = np.asarray(self.base.Gamma(t), dtype=float)
        lo, hi = self._s_lo, self._s_hi
        extra = np.where(s <= lo, 0.0,
                         np.where(s >= hi, 2 * self.C * self.weighted_area,
                                  2 * self.C * self._P(np.clip(t, lo,
                                                               self.center + self.bump.half_width))))
        out = base + extra
        return out if s.ndim else float(out)

    def gamma_integral(self) -> float:
        return self.base.gamma_integral() + 2.0 * self.C * self.weighted_area

    def _breakpoints(self):
        return [self._s_lo, self._s_hi]

    def to_dict(self):
        return {"kind": "stretched", "C": self.C, "center": self.center,
                "bump": self.bump.to_dict(), "base": self.base.to_dict()}


# -- constructors -------------------------------------------------------------


def make_sphere(radius: float = 1.0) -> SphereProfile:
    return SphereProfile(radius)


def make_ellipsoid(ratio: float) -> ProfileFunction:
    """Area-normalized ellipsoid of revolution; ratio 1 returns the sphere."""
    if ratio == 1.0:
        return SphereProfile(1.0)
    return EllipsoidProfile(ratio)


def stretch(p: ProfileFunction, C: float, bump: StretchBump,
            center: float | None = None) -> ProfileFunction:
    """Stretched profile with collar 2C; C = 0 returns p itself."""
    if C == 0.0:
        return p
    if center is None:
        center = 0.5 * p.ell
    # the cumulative bump must be odd so the collar inserts symmetrically
    probes = np.linspace(0.1, 0.9, 5) * bump.half_width
    odd_res = np.max(np.abs(np.asarray(bump.cumulative(probes))
                            + np.asarray(bump.cumulative(-probes))))
    if odd_res > 1e-12:
        raise ValueError(f"bump cumulative not odd (residual {odd_res:.3e})")
    return StretchedProfile(p, C, bump, center)


def normalize_stretch(p: ProfileFunction, bump: StretchBump,
                      center: float | None = None) -> ProfileFunction:
    """Choose the collar length so the stretched profile has area 4 pi.

    Needs gamma_integral(p) < 2, i.e. a base with area deficit to absorb.
    Because the added integral is linear in C, the solve is a single
    division, then verified by quadrature; the chosen value is available
    as the C attribute of the returned profile.
    """
    if center is None:
        center = 0.5 * p.ell
    base_int = p.gamma_integral()
    if base_int >= 2.0:
        raise ValueError("base profile already has area >= 4 pi")
    probe = StretchedProfile(p, 1.0, bump, center)
    C = (2.0 - base_int) / (2.0 * probe.weighted_area)
    out = StretchedProfile(p, C, bump, center)
    residual = out.gamma_integral() - 2.0
    if abs(residual) > 1e-10:
        raise RuntimeError(f"stretch normalization residual {residual:.3e}")
    return out


def make_spindle(delta: float, eps: float) -> ProfileFunction:
    """Normalized profile that is a round cap of small radius near each pole.

    The base is a sphere of radius a < 1 chosen so that gamma'(delta) =
    cos(delta / a) < eps; the missing area is restored by stretching a
    collar centered at the apex, which leaves both polar caps of meridian
    depth delta exactly round. Such profiles make the supremum of
    |Gamma + gamma'| / gamma large: past the collar Gamma has absorbed
    almost all of the area while gamma stays below a, so the ratio at the
    delta-latitude already exceeds (1 - eps)/delta - delta. The cap radius
    and collar length are attached as cap_radius and collar_C.
    """
    if not (0.0 < delta < np.pi / 2):
        raise ValueError("need 0 < delta < pi/2")
    if not (0.0 < eps < 1.0):
        raise ValueError("need 0 < eps < 1")
    a = delta / np.arccos(0.9 * eps)
    if a >= 1.0:
        # cos(delta) <= 0.9 eps already; any subunit radius close to 1 works
        a = 0.5 * (1.0 + 2.0 * delta / np.pi)
    if not (2 * delta / np.pi < a and np.cos(delta / a) < eps):
        raise ValueError("no admissible cap radius for these (delta, eps)")
    base = SphereProfile(a)
    apex = 0.5 * base.ell
    w = apex - delta  # collar leaves [0, delta] and [ell - delta, ell] intact
    prof = normalize_stretch(base, StretchBump(w), center=apex)
    prof.cap_radius = a
    prof.collar_C = prof.C
    return prof


def make_negative_action(delta: float, eps: float):
    """Normalized profile whose delta-latitude has gamma'(delta) < -eps.

    The base is a sphere of radius a with delta past its apex, so the
    meridian is already descending at depth delta; the collar that
    restores the area sits strictly between the delta-latitude and the far
    pole. Returns (profile, delta): the designated latitude is t = delta,
    where the steep descent forces gamma' Gamma > gamma^2 and hence a
    negative latitude action.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError("need 0 < eps < 1")
    target = eps + 0.1 * (1.0 - eps)  # aim below -eps with 10% margin
    a = delta / (np.pi - np.arccos(target))
    if not (delta / np.pi < a < 2 * delta / np.pi):
        raise ValueError("no admissible cap radius for these (delta, eps)")
    base = SphereProfile(a)
    if not (delta < base.ell):
        raise ValueError("delta-latitude falls outside the base meridian")
    center = 0.5 * (delta + base.ell)
    w = 0.3 * (base.ell - delta)
    prof = normalize_stretch(base, StretchBump(w), center=center)
    prof.cap_radius = a
    return prof, delta


# -- validation ---------------------------------------------------------------


@dataclass
class Condition:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass
class ValidationReport:
    kind: str
    conditions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def lines(self):
        out = [f"profile kind={self.kind}: "
               f"{'OK' if self.passed else 'INVALID'}"]
        for c in self.conditions:
            mark = "ok " if c.passed else "FAIL"
            out.append(f"  [{mark}] {c.name:<28s} residual={c.residual:.3e}"
                       + (f"  {c.detail}" if c.detail else ""))
        return out


def validate(p: ProfileFunction, n: int = 2048, tol: float = 1e-8) -> ValidationReport:
    """Check closure, slope, flat-pole, and area conditions on a dense grid."""
    rep = ValidationReport(kind=p.kind)
    L = p.ell
    g0, g1 = float(p.gamma(0.0)), float(p.gamma(L))
    rep.conditions.append(Condition(
        "endpoint values gamma=0", max(abs(g0), abs(g1)) <= tol,
        max(abs(g0), abs(g1))))
    t = np.linspace(0.0, L, n + 1)[1:-1]
    g = np.asarray(p.gamma(t))
    gmin = float(g.min())
    rep.conditions.append(Condition(
        "interior positivity", gmin > 0.0, gmin,
        f"min at t={t[np.argmin(g)]:.4g}"))
    d0, d1 = float(p.dgamma(0.0)), float(p.dgamma(L))
    rep.conditions.append(Condition(
        "endpoint slopes +1/-1", max(abs(d0 - 1), abs(d1 + 1)) <= tol,
        max(abs(d0 - 1), abs(d1 + 1))))
    dmax = float(np.abs(np.asarray(p.dgamma(t))).max())
    rep.conditions.append(Condition(
        "interior slope bound |gamma'|<1", dmax < 1.0, 1.0 - dmax))
    dd0, dd1 = float(p.ddgamma(0.0)), float(p.ddgamma(L))
    rep.conditions.append(Condition(
        "flat poles gamma''=0", max(abs(dd0), abs(dd1)) <= tol,
        max(abs(dd0), abs(dd1))))
    a = p.gamma_integral()
    rep.conditions.append(Condition(
        "normalization area=4pi", abs(a - 2.0) <= max(tol, 1e-8), abs(a - 2.0),
        f"integral gamma = {a:.12g}"))
    return rep


# -- serialization ------------------------------------------------------------


def from_dict(d: dict) -> ProfileFunction:
    kind = d.get("kind")
    if kind == "sphere":
        return SphereProfile(d.get("radius", 1.0))
    if kind == "ellipsoid":
        return EllipsoidProfile(d["ratio"])
    if kind == "samples":
        return SplineProfile(d["t"], d["gamma"])
    if kind == "stretched":
        b = d["bump"]
        return StretchedProfile(from_dict(d["base"]), d["C"],
                                StretchBump(b["half_width"], b.get("exponent", 5)),
                                d["center"])
    raise ValueError(f"unknown profile kind {kind!r}")


def save_profile(p: ProfileFunction, path):
    with open(path, "w") as fh:
        json.dump(p.to_dict(), fh, indent=1)


def load_profile(path) -> ProfileFunction:
    with open(path) as fh:
        return from_dict(json.load(fh))


def parse_profile_spec(spec: str) -> ProfileFunction:
    """Builtin profile names: sphere, ellipsoid:R, spindle:D:E, negative-action:D:E.

    Anything else is treated as a path to a profile JSON file.
    """
    parts = spec.split(":")
    if parts[0] == "sphere" and len(parts) == 1:
        return SphereProfile(1.0)
    if parts[0] == "ellipsoid" and len(parts) == 2:
        return make_ellipsoid(float(parts[1]))
    if parts[0] == "spindle" and len(parts) == 3:
        return make_spindle(float(parts[1]), float(parts[2]))
    if parts[0] == "negative-action" and len(parts) == 3:
        return make_negative_action(float(parts[1]), float(parts[2]))[0]
    return load_profile(spec)
