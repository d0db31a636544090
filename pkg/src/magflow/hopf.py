"""Quaternionic double cover of the unit sphere bundle and linking checks.

Identify R^4 with the quaternions (basis 1, i, j, k) and R^3 with the
imaginary span. Conjugation C_U(V) = U^-1 V U by a unit quaternion U
rotates the imaginary span, and

    p0(U) = (U^-1 i U, U^-1 j U)

sends the 3-sphere onto the bundle of oriented orthonormal 2-frames of
R^3, which is the unit sphere bundle of the round 2-sphere: the first
component is the base point, the second the unit tangent vector. p0 is a
2-to-1 cover with deck transformation U -> -U.

The contact form on the bundle at (u1, u2) is psi0(Z) = <Z_v, u1 x u2>,
pairing the tangent's vector part with the complementary frame vector.
Its pullback satisfies p0* psi0 = -2 lambda_st with lambda_st(W) =
<i U, W> the standard contact form of S^3; pullback_residual verifies the
identity at random samples with exact differentials.

The remaining tools work with closed polylines on S^3: stereographic
Gauss linking numbers, the even-linking property of antipodal pairs, and
continuous lifting of frame paths through p0, which detects whether a
closed path upstairs closes after one or two traversals.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

QI = np.array([0.0, 1.0, 0.0, 0.0])
QJ = np.array([0.0, 0.0, 1.0, 0.0])
QK = np.array([0.0, 0.0, 0.0, 1.0])
UNIT_TOL = 1e-12


# -- quaternion algebra ----------------------------------------------------------


def quat_mul(a, b):
    """Hamilton product; broadcasts over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw], axis=-1)


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_norm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def imag_part(q):
    return np.asarray(q, dtype=float)[..., 1:]


def from_imag(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (4,))
    out[..., 1:] = v
    return out


def _require_unit(U, what: str = "quaternion"):
    n = quat_norm(U)
    if np.any(np.abs(n - 1.0) > UNIT_TOL):
        raise ValueError(f"{what} not unit: |norm - 1| = "
                         f"{float(np.max(np.abs(n - 1.0))):.3g}")


def conj_rot(U, V):
    """C_U(V) = U^-1 V U; an isometry restricting to the imaginary span."""
    _require_unit(U, "conjugating quaternion")
    return quat_mul(quat_conj(U), quat_mul(V, U))


def rotation_matrix(U) -> np.ndarray:
    """R with U v U^-1 = R v on imaginary v, for a unit quaternion U."""
    _require_unit(U)
    w, x, y, z = np.asarray(U, dtype=float)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)]])


def quat_from_rotation(B) -> np.ndarray:
    """One of the two unit quaternions U with rotation_matrix(U) = B.

    Largest-pivot branch selection keeps the reconstruction stable for
    every rotation; the overall sign is arbitrary and handled by callers.
    """
    B = np.asarray(B, dtype=float)
    tr = B[0, 0] + B[1, 1] + B[2, 2]
    choices = [tr, B[0, 0], B[1, 1], B[2, 2]]
    c = int(np.argmax(choices))
    if c == 0:
        r = np.sqrt(1.0 + tr)
        s = 0.5 / r
        q = np.array([0.5 * r, (B[2, 1] - B[1, 2]) * s,
                      (B[0, 2] - B[2, 0]) * s, (B[1, 0] - B[0, 1]) * s])
    elif c == 1:
        r = np.sqrt(1.0 + B[0, 0] - B[1, 1] - B[2, 2])
        s = 0.5 / r
        q = np.array([(B[2, 1] - B[1, 2]) * s, 0.5 * r,
                      (B[0, 1] + B[1, 0]) * s, (B[0, 2] + B[2, 0]) * s])
    elif c == 2:
        r = np.sqrt(1.0 - B[0, 0] + B[1, 1] - B[2, 2])
        s = 0.5 / r
        q = np.array([(B[0, 2] - B[2, 0]) * s, (B[0, 1] + B[1, 0]) * s,
                      0.5 * r, (B[1, 2] + B[2, 1]) * s])
    else:
        r = np.sqrt(1.0 - B[0, 0] - B[1, 1] + B[2, 2])
        s = 0.5 / r
        q = np.array([(B[1, 0] - B[0, 1]) * s, (B[0, 2] + B[2, 0]) * s,
                      (B[1, 2] + B[2, 1]) * s, 0.5 * r])
    return q / np.linalg.norm(q)


# -- the double cover ------------------------------------------------------------


def p0(U):
    """Frame pair (U^-1 i U, U^-1 j U); satisfies p0(U) = p0(-U) exactly."""
    _require_unit(U, "cover point")
    Uc = quat_conj(U)
    return (quat_mul(Uc, quat_mul(QI, U)), quat_mul(Uc, quat_mul(QJ, U)))


def dp0(U, W):
    """Exact differential of p0 at U applied to a tangent W.

    Uses d(U^-1) = -U^-1 (dU) U^-1; W must satisfy <U, W> = 0.
    """
    U = np.asarray(U, dtype=float)
    W = np.asarray(W, dtype=float)
    _require_unit(U, "cover point")
    if abs(float(np.dot(U, W))) > 1e-9 * max(1.0, float(quat_norm(W))):
        raise ValueError("W is not tangent to the 3-sphere at U")
    Uc = quat_conj(U)
    out = []
    for q in (QI, QJ):
        qU = quat_mul(q, U)
        term1 = -quat_mul(Uc, quat_mul(W, quat_mul(Uc, qU)))
        term2 = quat_mul(Uc, quat_mul(q, W))
        out.append(term1 + term2)
    return tuple(out)


def psi0(point, Z) -> float:
    """Contact form at point = (u1, u2) on the tangent pair Z = (z1, z2)."""
    u1, u2 = (imag_part(c) for c in point)
    zv = imag_part(Z[1])
    return float(np.dot(zv, np.cross(u1, u2)))


def lambda_st(U, W) -> float:
    """Standard contact form of S^3: <i U, W> in the flat metric."""
    return float(np.dot(quat_mul(QI, U), np.asarray(W, dtype=float)))


def pullback_residual(n_samples: int, seed: int = 0) -> float:
    """Max residual of the cover pullback identity at random samples.

    Draws unit quaternions U and tangents W and evaluates
    |psi0(dp0(U, W)) + 2 lambda_st(U, W)|, which vanishes identically.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(n_samples)):
        U = rng.normal(size=4)
        U /= np.linalg.norm(U)
        W = rng.normal(size=4)
        W -= np.dot(W, U) * U
        res = abs(psi0(p0(U), dp0(U, W)) + 2.0 * lambda_st(U, W))
        worst = max(worst, res)
    return worst


# -- star-shaped hypersurfaces ---------------------------------------------------


def star_embed(rho, z):
    """Scale points of S^3 onto the hypersurface {Q_rho = 1}."""
    z = np.asarray(z, dtype=float)
    r = np.asarray(rho(z), dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("rho must be positive")
    return np.sqrt(r)[..., None] * z if z.ndim > 1 else float(np.sqrt(r)) * z


def q_rho(rho, z) -> float:
    """Defining Hamiltonian Q(z) = |z|^2 / rho(z / |z|)."""
    z = np.asarray(z, dtype=float)
    n2 = float(np.dot(z, z))
    if n2 == 0.0:
        raise ValueError("Q_rho undefined at the origin")
    r = float(rho(z / np.sqrt(n2)))
    if r <= 0.0:
        raise ValueError("rho must be positive")
    return n2 / r


@dataclass(frozen=True)
class HessianScan:
    min_eigenvalue: float
    argmin_point: np.ndarray
    n_samples: int


def hessian_convexity(rho, n_samples: int, seed: int = 0,
                      fd_h: float = 1e-4) -> HessianScan:
    """Minimal eigenvalue of the Hessian of Q_rho over surface samples.

    Points are sampled on {Q_rho = 1}; the 4x4 Hessian is built by central
    second differences with step fd_h. Positive definiteness everywhere is
    the convexity criterion for the star-shaped hypersurface.
    """
    rng = np.random.default_rng(seed)
    best = np.inf
    arg = None
    eye = np.eye(4)
    for _ in range(int(n_samples)):
        u = rng.normal(size=4)
        u /= np.linalg.norm(u)
        z = star_embed(rho, u)
        H = np.empty((4, 4))
        q0 = q_rho(rho, z)
        for a in range(4):
            ea = fd_h * eye[a]
            H[a, a] = (q_rho(rho, z + ea) - 2.0 * q0
                       + q_rho(rho, z - ea)) / fd_h**2
            for b in range(a + 1, 4):
                eb = fd_h * eye[b]
                H[a, b] = H[b, a] = (
                    q_rho(rho, z + ea + eb) - q_rho(rho, z + ea - eb)
                    - q_rho(rho, z - ea + eb) + q_rho(rho, z - ea - eb)
                ) / (4.0 * fd_h**2)
        lam = float(np.linalg.eigvalsh(H)[0])
        if lam < best:
            best = lam
            arg = z
    return HessianScan(min_eigenvalue=best, argmin_point=arg,
                       n_samples=int(n_samples))


# -- knots on the 3-sphere -------------------------------------------------------


@dataclass(frozen=True)
class KnotPolyline:
    """Closed polyline of unit quaternions; first point equals the last."""
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 4 or pts.shape[0] < 4:
            raise ValueError("need an (n, 4) array with n >= 4")
        if np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) > 1e-9:
            raise ValueError("polyline points must lie on the unit 3-sphere")
        if np.linalg.norm(pts[0] - pts[-1]) > 1e-9:
            raise ValueError("polyline must close: first point != last")
        chord = np.max(np.linalg.norm(np.diff(pts, axis=0), axis=1))
        if chord >= 0.1:
            raise ValueError(f"consecutive chord {chord:.3g} >= 0.1; "
                             f"resample the curve more densely")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0] - 1

    def antipode(self) -> "KnotPolyline":
        return KnotPolyline(-self.points)

    def doubled(self) -> "KnotPolyline":
        """Refined polyline with midpoints reprojected to the sphere."""
        pts = self.points
        mids = 0.5 * (pts[:-1] + pts[1:])
        mids /= np.linalg.norm(mids, axis=1)[:, None]
        out = np.empty((2 * (len(pts) - 1) + 1, 4))
        out[0:-1:2] = pts[:-1]
        out[1::2] = mids
        out[-1] = pts[-1]
        return KnotPolyline(out)

    def min_distance(self, other: "KnotPolyline") -> float:
        a = self.points[:-1]
        b = other.points[:-1]
        d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=2)
        return float(np.sqrt(np.min(d2)))

    def to_json_list(self):
        return [[float(c) for c in row] for row in self.points]


def knot_from_samples(samples, n: int | None = None) -> KnotPolyline:
    """Close and uniformly resample a curve given by S^3 samples.

    Resampling is by chord arclength with linear interpolation followed by
    reprojection to the sphere, so the output satisfies the polyline
    density invariant if n is large enough.
    """
    pts = np.asarray(samples, dtype=float)
    if np.linalg.norm(pts[0] - pts[-1]) > 1e-6:
        pts = np.vstack([pts, pts[0]])
    else:
        pts = pts.copy()
        pts[-1] = pts[0]
    if n is None:
        n = max(256, 2 * (len(pts) - 1))
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    grid = np.linspace(0.0, arc[-1], n + 1)
    out = np.empty((n + 1, 4))
    for c in range(4):
        out[:, c] = np.interp(grid, arc, pts[:, c])
    out /= np.linalg.norm(out, axis=1)[:, None]
    out[-1] = out[0]
    return KnotPolyline(out)


# -- Gauss linking ---------------------------------------------------------------

_POLE_SEED = 1905


def _choose_pole(points: np.ndarray) -> np.ndarray:
    """Point of S^3 far from every input point (seeded, deterministic)."""
    rng = np.random.default_rng(_POLE_SEED)
    cands = rng.normal(size=(512, 4))
    cands /= np.linalg.norm(cands, axis=1)[:, None]
    d2 = np.sum((cands[:, None, :] - points[None, :, :]) ** 2, axis=2)
    return cands[int(np.argmax(np.min(d2, axis=1)))]


def _stereographic(points: np.ndarray, pole: np.ndarray) -> np.ndarray:
    """Project S^3 minus the pole to R^3 in an orthonormal chart."""
    basis = []
    for seed in np.eye(4):
        v = seed - np.dot(seed, pole) * pole
        for b in basis:
            v = v - np.dot(v, b) * b
        nv = np.linalg.norm(v)
        if nv > 1e-6:
            basis.append(v / nv)
        if len(basis) == 3:
            break
    E = np.array(basis)
    w = points @ pole
    y = points @ E.T
    return y / (1.0 - w)[:, None]


def _gauss_double_sum(X: np.ndarray, Y: np.ndarray) -> float:
    """Midpoint-rule Gauss integral for two closed polylines in R^3."""
    dX = np.diff(X, axis=0)
    dY = np.diff(Y, axis=0)
    MX = X[:-1] + 0.5 * dX
    MY = Y[:-1] + 0.5 * dY
    r = MX[:, None, :] - MY[None, :, :]
    cr = np.cross(dX[:, None, :], dY[None, :, :])
    num = np.sum(r * cr, axis=2)
    den = np.sum(r * r, axis=2) ** 1.5
    return float(np.sum(num / den) / (4.0 * np.pi))


def gauss_linking(k1: KnotPolyline, k2: KnotPolyline,
                  max_doublings: int = 5) -> int:
    """Linking number by the Gauss integral after stereographic projection.

    The projection pole maximizes the distance to both curves. Resolution
    is doubled until the raw value sits within 0.05 of an integer, which
    certifies the rounding.
    """
    gap = k1.min_distance(k2)
    if gap <= 1e-3:
        raise ValueError(f"knots too close for linking: min distance "
                         f"{gap:.3g} <= 1e-3")
    pole = _choose_pole(np.vstack([k1.points[:-1], k2.points[:-1]]))
    a, b = k1, k2
    for _ in range(max_doublings + 1):
        raw = _gauss_double_sum(_stereographic(a.points, pole),
                                _stereographic(b.points, pole))
        if abs(raw - round(raw)) < 0.05:
            return int(round(raw))
        a, b = a.doubled(), b.doubled()
    raise RuntimeError(f"Gauss integral failed to settle near an integer "
                       f"(last raw value {raw:.4f})")


@dataclass(frozen=True)
class AntipodalLinkReport:
    disjoint: bool
    lk: int | None
    even: bool | None

    def to_dict(self):
        return {"disjoint": self.disjoint, "lk": self.lk, "even": self.even}


def antipodal_link_parity(k: KnotPolyline) -> AntipodalLinkReport:
    """Linking of a knot with its pointwise antipode, plus the parity bit.

    Curves meeting their own antipode (Hopf fibers do: e^{i pi} U = -U)
    are reported as not disjoint and carry no linking number.
    """
    a = k.antipode()
    if k.min_distance(a) <= 1e-3:
        return AntipodalLinkReport(disjoint=False, lk=None, even=None)
    lk = gauss_linking(k, a)
    return AntipodalLinkReport(disjoint=True, lk=lk, even=(lk % 2 == 0))


# -- lifting frame paths ---------------------------------------------------------


@dataclass(frozen=True)
class LiftResult:
    U: np.ndarray                 # (n, 4) lifted path
    max_residual: float           # sup |p0(U_k) - frame_k|
    closed_after_one: bool | None  # None when the input path is not closed
    min_step_alignment: float

    @property
    def closed_after_two(self) -> bool | None:
        if self.closed_after_one is None:
            return None
        return True                # deck transformation has order two


def lift_path(x: np.ndarray, v: np.ndarray, tol: float = 1e-6) -> LiftResult:
    """Continuous lift of a frame path (x_k, v_k) through the double cover.

    Each orthonormal frame determines the rotation B = [x | v | x x v] =
    R(U^-1), recovering U up to sign; the sheet is fixed by aligning each
    quaternion with its predecessor. For a closed input path the lift
    either closes after one traversal or returns to the antipode (then two
    traversals close it), which is the parity detected here.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != v.shape or x.ndim != 2 or x.shape[1] != 3:
        raise ValueError("need matching (n, 3) arrays")
    if np.max(np.abs(np.sum(x * v, axis=1))) > 1e-6:
        raise ValueError("frames not orthogonal")
    step = np.max(np.linalg.norm(np.diff(x, axis=0), axis=1)
                  + np.linalg.norm(np.diff(v, axis=0), axis=1))
    if step >= 0.1:
        raise ValueError(f"frame path too coarse: max step {step:.3g}")
    n = x.shape[0]
    w = np.cross(x, v)
    U = np.empty((n, 4))
    min_align = 1.0
    for k in range(n):
        B = np.column_stack([x[k], v[k], w[k]])
        q = quat_conj(quat_from_rotation(B))
        if k > 0:
            align = float(np.dot(q, U[k - 1]))
            if align < 0.0:
                q = -q
                align = -align
            if align < 0.7:
                raise RuntimeError(f"lift continuation ambiguous at sample "
                                   f"{k}: alignment {align:.3f}")
            min_align = min(min_align, align)
        U[k] = q / np.linalg.norm(q)
    res = 0.0
    for k in (0, n // 3, 2 * n // 3, n - 1):
        a, b = p0(U[k])
        res = max(res,
                  float(np.max(np.abs(imag_part(a) - x[k]))),
                  float(np.max(np.abs(imag_part(b) - v[k]))))
    closed = None
    if (np.linalg.norm(x[0] - x[-1]) < 1e-9
            and np.linalg.norm(v[0] - v[-1]) < 1e-9):
        closed = bool(np.linalg.norm(U[-1] - U[0]) < tol)
        if not closed and np.linalg.norm(U[-1] + U[0]) >= tol:
            raise RuntimeError("closed frame path lifted to a non-closed, "
                               "non-antipodal endpoint")
    return LiftResult(U=U, max_residual=res, closed_after_one=closed,
                      min_step_alignment=min_align)


# -- round-sphere embedding helpers ----------------------------------------------


def sphere_frames(t, phi, theta):
    """Embed unit-bundle coordinates of the round sphere into frame pairs.

    x is the surface point, v the unit tangent at angle phi from the
    meridian direction; both as 3-vectors with the north pole at t = 0.
    """
    t = np.asarray(t, dtype=float)
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    st, ct = np.sin(t), np.cos(t)
    sth, cth = np.sin(theta), np.cos(theta)
    x = np.stack([st * cth, st * sth, ct], axis=-1)
    e_t = np.stack([ct * cth, ct * sth, -st], axis=-1)
    e_th = np.stack([-sth, cth, np.zeros_like(sth)], axis=-1)
    v = np.cos(phi)[..., None] * e_t + np.sin(phi)[..., None] * e_th
    return x, v
