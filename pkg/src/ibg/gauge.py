"""Gauge fields on the low-dimensional backgrounds and their field equations.

Covers the generalized Nahm equation on Riccati spaces (matrix, grid
Hamiltonian and vector-field realizations, with solver and isomonodromy/Lax
checks), the generalized Hitchin equations over spinor-vortex surfaces, the
Einstein-Weyl Bogomolny equation, and the spinor-vortex background residuals.

Sign conventions (pinned by calibration tests):

* Nahm: Phi_r - a Phi - *[Phi, Phi] = B . Phi with (*[Phi,Phi])_i = [Phi_j,
  Phi_k] cyclic; Phi_i = -e_i/r solves the B = 0 su(2) equation.
* Hamiltonian form: F_r - a F - {F_j, F_k} = (B F)_i with {F, G} =
  F_p G_q - F_q G_p.
* Vector-field realizations bracket with MINUS the naive commutator.
* Lax connection: d - Phi(e_z) dz/Q + Phi(e_z x B e_z) dr/Q, Q = <B e_z, e_z>.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebras import HamiltonianGrid, MatrixAlgebra, VectorFieldAlgebra
from .errors import AlgebraMismatch, DegenerateHiggs, NearPole, OutOfRange
from .ode import Trajectory, rk4
from .riccati import RiccatiSpace
from .tensorcalc import FDConfig, FieldSpec, WeylStructure, fd_jet
from . import kernels

# ---------------------------------------------------------------------------
# small FD helpers for scalar complex fields
# ---------------------------------------------------------------------------

_W1_4 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_OFF4 = np.arange(-2, 3)


def fd_partial(f, pts, axis, h=1e-5):
    """4th-order d/dx_axis of a vectorized callable pts -> values."""
    pts = np.asarray(pts, dtype=float)
    P = np.repeat(pts[None], 5, axis=0)
    P[:, :, axis] += (_OFF4 * h)[:, None]
    vals = np.stack([np.asarray(f(P[i])) for i in range(5)])
    return np.tensordot(_W1_4, vals, axes=(0, 0)) / h


def d_z(f, pts, h=1e-5):
    return 0.5 * (fd_partial(f, pts, 0, h) - 1j * fd_partial(f, pts, 1, h))


def d_zbar(f, pts, h=1e-5):
    return 0.5 * (fd_partial(f, pts, 0, h) + 1j * fd_partial(f, pts, 1, h))


# ---------------------------------------------------------------------------
# Nahm fields
# ---------------------------------------------------------------------------


def star_bracket(Phi, bracket):
    """(*[Phi, Phi])_i = [Phi_j, Phi_k] for cyclic (i, j, k)."""
    out = np.empty_like(Phi)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        out[..., i, :, :] = bracket(Phi[..., j, :, :], Phi[..., k, :, :])
    return out


@dataclass
class MatrixNahmField:
    riccati: RiccatiSpace
    algebra: MatrixAlgebra
    phi: Callable                      # r -> (len(r), 3, n, n)
    phi_r: Optional[Callable] = None   # analytic derivative, same layout
    r_range: tuple = None

    def __post_init__(self):
        if self.r_range is None:
            self.r_range = self.riccati.r_range

    def derivative(self, r, h=1e-5):
        if self.phi_r is not None:
            return np.asarray(self.phi_r(np.atleast_1d(r)))
        r = np.atleast_1d(r)
        vals = np.stack([np.asarray(self.phi(r + k * h)) for k in _OFF4])
        return np.tensordot(_W1_4, vals, axes=(0, 0)) / h


@dataclass
class HamiltonianNahmField:
    """Nahm field of grid Hamiltonians F^i(p, q, r) (area-preserving fields)."""

    riccati: RiccatiSpace
    grid: HamiltonianGrid
    rs: np.ndarray                     # trajectory samples
    Fs: np.ndarray                     # (m, 3, N, N)

    @property
    def r_range(self):
        return float(self.rs[0]), float(self.rs[-1])

    def index_of(self, r):
        h = self.rs[1] - self.rs[0]
        i = int(round((r - self.rs[0]) / h))
        if not (0 <= i < len(self.rs)) or abs(self.rs[i] - r) > 1e-9 * max(1, abs(r)):
            raise OutOfRange("r is not a stored trajectory sample")
        return i

    def derivative(self, i):
        """dF/dr at sample index i by 4th-order FD over stored samples."""
        h = self.rs[1] - self.rs[0]
        if i < 2 or i > len(self.rs) - 3:
            raise OutOfRange("need two samples on each side for the r-derivative")
        stack = np.stack([self.Fs[i + k] for k in _OFF4])
        return np.tensordot(_W1_4, stack, axes=(0, 0)) / h


@dataclass
class AnalyticHamiltonianNahmField:
    """Hamiltonians given as callables F(pts (n,3)=(r,p,q)) -> (n,3)."""

    riccati: RiccatiSpace
    F: Callable
    r_range: tuple = None

    def __post_init__(self):
        if self.r_range is None:
            self.r_range = self.riccati.r_range


@dataclass
class CallbackNahmField:
    """Higgs fields realized as vector fields on a fibre chart Sigma^d."""

    riccati: RiccatiSpace
    phi: Callable                      # (r, pts (n,d)) -> (n, 3, d)
    sigma_dim: int
    phi_r: Optional[Callable] = None
    r_range: tuple = None

    def __post_init__(self):
        if self.r_range is None:
            self.r_range = self.riccati.r_range
        self.vf = VectorFieldAlgebra(self.sigma_dim)

    def derivative(self, r, pts, h=1e-5):
        if self.phi_r is not None:
            return np.asarray(self.phi_r(r, pts))
        vals = np.stack([np.asarray(self.phi(r + k * h, pts)) for k in _OFF4])
        return np.tensordot(_W1_4, vals, axes=(0, 0)) / h


def _a_and_B(ric: RiccatiSpace, r):
    r1 = np.atleast_1d(float(r))
    return np.asarray(ric.a(r1))[0], np.asarray(ric.B(r1))[0]


def nahm_residual(nf, r, sigma_pts=None, h=1e-5):
    """Max-norm residual of the generalized Nahm equation at the sample r."""
    if isinstance(nf, MatrixNahmField):
        lo, hi = nf.r_range
        if not (lo <= r <= hi):
            raise OutOfRange(f"r = {r} outside field range {nf.r_range}")
        a, B = _a_and_B(nf.riccati, r)
        Phi = np.asarray(nf.phi(np.atleast_1d(float(r))))[0]
        dPhi = nf.derivative(float(r), h=h)[0]
        res = dPhi - a * Phi - star_bracket(Phi, MatrixAlgebra.bracket)
        res = res - np.einsum("ij,jab->iab", B, Phi)
        return float(np.max(np.abs(res)))
    if isinstance(nf, HamiltonianNahmField):
        i = nf.index_of(r)
        a, B = _a_and_B(nf.riccati, nf.rs[i])
        F = nf.Fs[i]
        dF = nf.derivative(i)
        res = dF - a * F - np.einsum("ij,jpq->ipq", np.real(B), F)
        for k in range(3):
            res[k] -= nf.grid.bracket(F[(k + 1) % 3], F[(k + 2) % 3])
        return float(np.max(np.abs(res)))
    if isinstance(nf, AnalyticHamiltonianNahmField):
        if sigma_pts is None:
            raise OutOfRange("analytic Hamiltonian residual needs sigma_pts (p, q)")
        pq = np.asarray(sigma_pts, dtype=float)
        pts = np.column_stack([np.full(len(pq), float(r)), pq])
        a, B = _a_and_B(nf.riccati, r)
        F = np.asarray(nf.F(pts))
        dF = fd_partial(nf.F, pts, 0, h)
        Fp = fd_partial(nf.F, pts, 1, h)
        Fq = fd_partial(nf.F, pts, 2, h)
        res = dF - a * F - F @ np.real(B).T
        for k in range(3):
            j, l = (k + 1) % 3, (k + 2) % 3
            res[:, k] -= Fp[:, j] * Fq[:, l] - Fq[:, j] * Fp[:, l]
        return float(np.max(np.abs(res)))
    if isinstance(nf, CallbackNahmField):
        if sigma_pts is None:
            raise OutOfRange("callback residual needs fibre sample points")
        pts = np.asarray(sigma_pts, dtype=float)
        a, B = _a_and_B(nf.riccati, r)
        Phi = np.asarray(nf.phi(float(r), pts))        # (n, 3, d)
        dPhi = nf.derivative(float(r), pts, h=h)
        res = dPhi - a * Phi - np.einsum("ij,njd->nid", np.real(B), Phi)
        for k in range(3):
            j, l = (k + 1) % 3, (k + 2) % 3
            Xj = lambda P, j=j: np.asarray(nf.phi(float(r), P))[:, j]
            Xl = lambda P, l=l: np.asarray(nf.phi(float(r), P))[:, l]
            res[:, k] -= nf.vf.bracket(Xj, Xl, pts)
        return float(np.max(np.abs(res)))
    raise AlgebraMismatch(f"unsupported Nahm field {type(nf).__name__}")


def solve_nahm(phi0, ric: RiccatiSpace, r_span, steps, algebra=None) -> MatrixNahmField:
    """RK4 for the matrix Nahm equation; fixed steps, dense trajectory."""
    phi0 = np.asarray(phi0, dtype=complex)
    if phi0.shape[0] != 3 or phi0.shape[1] != phi0.shape[2]:
        raise AlgebraMismatch("phi0 must be (3, n, n)")

    def rhs(r, Phi):
        a, B = _a_and_B(ric, r)
        return (
            a * Phi
            + star_bracket(Phi, MatrixAlgebra.bracket)
            + np.einsum("ij,jab->iab", B, Phi)
        )

    rs, ys = rk4(rhs, phi0, r_span[0], r_span[1], steps)
    traj = Trajectory(rs, ys)
    return MatrixNahmField(ric, algebra, traj, r_range=(r_span[0], r_span[1]))


def solve_nahm_grid(F0, ric: RiccatiSpace, r_span, steps,
                    grid: HamiltonianGrid) -> HamiltonianNahmField:
    """RK4 for the Hamiltonian-form Nahm equation on the periodic grid."""
    F0 = np.asarray(F0, dtype=float)

    def rhs(r, F):
        a, B = _a_and_B(ric, r)
        out = a * F + np.einsum("ij,jpq->ipq", np.real(B), F)
        for k in range(3):
            out[k] += grid.bracket(F[(k + 1) % 3], F[(k + 2) % 3])
        return out

    rs, ys = rk4(rhs, F0, r_span[0], r_span[1], steps)
    return HamiltonianNahmField(ric, grid, rs, ys)


# ---------------------------------------------------------------------------
# isomonodromy / Lax checks
# ---------------------------------------------------------------------------


def e_zeta(z):
    return np.array([0.5 * (z * z + 1), 1j * z, 0.5j * (z * z - 1)], dtype=complex)


def e_zeta_prime(z):
    return np.array([z, 1j, 1j * z], dtype=complex)


def _phi_of(nf: MatrixNahmField, r):
    return np.asarray(nf.phi(np.atleast_1d(float(r))))[0]


def _contract(vec, Phi):
    return np.einsum("i,iab->ab", vec, Phi)


def standard_nahm_lax_pair(nf: MatrixNahmField, r, z):
    """(L, M) with L = Phi(e_z), M = -Phi(e_z'); Nahm <=> L_r = [L, M] at B=0."""
    Phi = _phi_of(nf, r)
    return _contract(e_zeta(z), Phi), -_contract(e_zeta_prime(z), Phi)


def lax_residual(nf: MatrixNahmField, samples, dzeta=1e-5, dr=1e-5, margin=1e-2):
    """Zero-curvature residual of the spectral-parameter connection.

    For nonzero B the connection is d + (-Phi(e_z) dz + Phi(e_z x B e_z) dr)/Q
    with Q = <B(e_z), e_z>; flatness (FD in zeta and r, plus the commutator)
    is equivalent to the generalized Nahm equation.  For B = 0 the closure of
    the standard Nahm Lax pair is checked instead.
    """
    if not isinstance(nf, MatrixNahmField):
        raise AlgebraMismatch("Lax residual needs a matrix Nahm field")
    worst = 0.0
    for z, r in samples:
        _, B = _a_and_B(nf.riccati, r)
        Bnorm = np.linalg.norm(B)
        if Bnorm < 1e-12:
            L, M = standard_nahm_lax_pair(nf, r, z)
            dPhi = nf.derivative(float(r), h=dr)[0]
            Lr = _contract(e_zeta(z), dPhi)
            F = Lr - (L @ M - M @ L)
            worst = max(worst, float(np.max(np.abs(F))))
            continue

        def A_at(rr, zz):
            Phi = _phi_of(nf, rr)
            Brr = np.asarray(nf.riccati.B(np.atleast_1d(float(rr))))[0]
            e = e_zeta(zz)
            Q = e @ (Brr @ e)
            Az = -_contract(e, Phi) / Q
            Ar = _contract(np.cross(e, Brr @ e), Phi) / Q
            return Az, Ar, Q

        _, _, Q = A_at(r, z)
        if abs(Q) < margin * Bnorm * max(1.0, abs(z)) ** 4:
            raise NearPole(f"zeta = {z} too close to the pencil base locus")
        Az_p, _, _ = A_at(r + dr, z)
        Az_m, _, _ = A_at(r - dr, z)
        dAz_dr = (Az_p - Az_m) / (2 * dr)
        _, Ar_p, _ = A_at(r, z + dzeta)
        _, Ar_m, _ = A_at(r, z - dzeta)
        dAr_dz = (Ar_p - Ar_m) / (2 * dzeta)
        Az, Ar, _ = A_at(r, z)
        F = dAr_dz - dAz_dr + (Az @ Ar - Ar @ Az)
        worst = max(worst, float(np.max(np.abs(F))))
    return worst


# ---------------------------------------------------------------------------
# spinor-vortex surfaces
# ---------------------------------------------------------------------------


@dataclass
class SpinorVortexSpace:
    """2d background data in a fixed smooth trivialization.

    `conf` is the conformal factor of the base representative g = conf^2 |dz|^2,
    `herm` the Hermitian factor of the weight bundle pairing (curvature enters
    the third background equation), `a_zbar` the (0,1) connection coefficient,
    and C0/psi0 the two background fields as complex scalar functions.
    """

    conf: Callable
    herm: Callable
    a_zbar: Callable
    C0: Callable
    psi0: Callable
    box2: tuple = ((-1.0, 1.0), (-1.0, 1.0))
    label: str = "custom"

    def sample_box(self, n=3, margin=0.05):
        (x0, x1), (y0, y1) = self.box2
        xs = np.linspace(x0 + margin * (x1 - x0), x1 - margin * (x1 - x0), n)
        ys = np.linspace(y0 + margin * (y1 - y0), y1 - margin * (y1 - y0), n)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


def _const2(value):
    def f(pts):
        return np.full(len(pts), value, dtype=complex if isinstance(value, complex) else float)

    return f


def sv_trivial(box=((-1, 1), (-1, 1))) -> SpinorVortexSpace:
    return SpinorVortexSpace(_const2(1.0), _const2(1.0), _const2(0j),
                             _const2(0j), _const2(0j), box, "trivial")


def sv_spherical(box=((-0.8, 0.8), (-0.8, 0.8))) -> SpinorVortexSpace:
    """psi trivializes the weight bundle; unit-curvature base representative."""

    def conf(pts):
        s = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return 2.0 / (1.0 + s)

    def herm(pts):
        return conf(pts) ** 2

    return SpinorVortexSpace(conf, herm, _const2(0j), _const2(0j), _const2(1.0 + 0j),
                             box, "spherical")


def sv_spherical_gauge(box=((-0.8, 0.8), (-0.8, 0.8))) -> SpinorVortexSpace:
    """The same spherical geometry in the fibred-coordinate trivialization."""

    def conf(pts):
        s = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return 2.0 / (1.0 + s)

    def a_zbar(pts):
        z = pts[:, 0] + 1j * pts[:, 1]
        return -z / (1.0 + z * np.conj(z))

    def psi0(pts):
        z = pts[:, 0] + 1j * pts[:, 1]
        return -1j / (1.0 + z * np.conj(z))

    return SpinorVortexSpace(conf, _const2(4.0), a_zbar, _const2(0j), psi0,
                             box, "spherical")


def sv_hyperbolic(box=((-0.55, 0.55), (-0.55, 0.55))) -> SpinorVortexSpace:
    """C identifies the square of the weight bundle with TN; curvature -4 base."""

    def conf(pts):
        s = pts[:, 0] ** 2 + pts[:, 1] ** 2
        return 1.0 / (1.0 - s)

    return SpinorVortexSpace(conf, conf, _const2(0j), _const2(1.0 + 0j), _const2(0j),
                             box, "hyperbolic")


def spinor_vortex_residual(sv: SpinorVortexSpace, pts2):
    """Residual triple of the three background equations at surface points."""
    pts2 = np.asarray(pts2, dtype=float)
    C = np.asarray(sv.C0(pts2), dtype=complex)
    psi = np.asarray(sv.psi0(pts2), dtype=complex)
    a = np.asarray(sv.a_zbar(pts2), dtype=complex)
    lam = np.asarray(sv.conf(pts2), dtype=float)

    e1 = d_zbar(sv.C0, pts2) - 2 * a * C
    e2 = d_zbar(sv.psi0, pts2) - a * psi + 3 * C * np.conj(psi)

    # curvature of the Hermitian pairing, (0,1)-connection corrected
    logH = lambda P: np.log(np.asarray(sv.herm(P), dtype=float))
    dzdzbar_logH = d_z(lambda P: d_zbar(logH, P), pts2)
    a_ind = lambda P: -np.asarray(sv.a_zbar(P), dtype=complex)
    a_ind_bar = lambda P: np.conj(a_ind(P))
    s = -(2.0 / lam**2) * np.real(
        dzdzbar_logH - d_z(a_ind, pts2) - d_zbar(a_ind_bar, pts2)
    )
    H = np.asarray(sv.herm(pts2), dtype=float)
    rhs = np.abs(psi) ** 2 * H / lam**2 - 2 * np.abs(C) ** 2 * H**2 / lam**2
    e3 = s - rhs
    return (
        float(np.max(np.abs(e1))),
        float(np.max(np.abs(e2))),
        float(np.max(np.abs(e3))),
    )


# ---------------------------------------------------------------------------
# Hitchin fields over spinor-vortex surfaces
# ---------------------------------------------------------------------------


@dataclass
class HitchinField:
    """Gauge field (A, Phi) over a spinor-vortex surface, fibred over t.

    `higgs` and `alpha` are complex scalar callables on (x, y, t): the dz
    coefficients of the Higgs field and connection in the display
    normalization.  Fibre (t) dependence realizes one-dimensional gauge
    algebras; t-independent fields are Abelian.
    """

    sv: SpinorVortexSpace
    higgs: Callable
    alpha: Callable
    higgs_t: Optional[Callable] = None
    alpha_t: Optional[Callable] = None
    t_range: tuple = (0.5, 1.5)
    label: str = "custom"

    def _dt(self, f, f_t, pts3, h=1e-5):
        if f_t is not None:
            return np.asarray(f_t(pts3))
        return fd_partial(f, pts3, 2, h)

    def dt_higgs(self, pts3):
        return self._dt(self.higgs, self.higgs_t, pts3)

    def dt_alpha(self, pts3):
        return self._dt(self.alpha, self.alpha_t, pts3)


def _vf_bracket_t(u, v, du, dv):
    """Minus the naive commutator of u(t) d_t, v(t) d_t at matched samples."""
    return -(u * dv - v * du)


def hitchin_residual(hf: HitchinField, pts2, ts=None):
    """Residual pair of the generalized Hitchin equations (max norms).

    (i)  F^A - [Phi, Phi~] matches the psi-coupling of the background;
    (ii) dbar^{a,A} Phi = C Phi~ (Euclidean reality: Phi~ = conj Phi).
    """
    pts2 = np.asarray(pts2, dtype=float)
    if ts is None:
        ts = np.linspace(hf.t_range[0], hf.t_range[1], 5)
    worst1 = worst2 = 0.0
    sv = hf.sv
    for t in np.atleast_1d(ts):
        pts3 = np.column_stack([pts2, np.full(len(pts2), float(t))])
        Phi = np.asarray(hf.higgs(pts3))
        alpha = np.asarray(hf.alpha(pts3))
        dPhi_t = hf.dt_higgs(pts3)
        dalpha_t = hf.dt_alpha(pts3)
        psi = np.asarray(sv.psi0(pts2), dtype=complex)
        C = np.asarray(sv.C0(pts2), dtype=complex)
        a = np.asarray(sv.a_zbar(pts2), dtype=complex)

        F = d_z(lambda P: np.conj(hf.alpha(np.column_stack([P, np.full(len(P), t)]))), pts2) \
            - d_zbar(lambda P: hf.alpha(np.column_stack([P, np.full(len(P), t)])), pts2) \
            + _vf_bracket_t(alpha, np.conj(alpha), dalpha_t, np.conj(dalpha_t))
        r1 = F - _vf_bracket_t(Phi, np.conj(Phi), dPhi_t, np.conj(dPhi_t)) \
            + psi * np.conj(Phi) - np.conj(psi) * Phi
        r2 = d_zbar(lambda P: hf.higgs(np.column_stack([P, np.full(len(P), t)])), pts2) \
            - a * Phi \
            + _vf_bracket_t(np.conj(alpha), Phi, np.conj(dalpha_t), dPhi_t) \
            - C * np.conj(Phi)
        worst1 = max(worst1, float(np.max(np.abs(r1))))
        worst2 = max(worst2, float(np.max(np.abs(r2))))
    return worst1, worst2


# ---------------------------------------------------------------------------
# Bogomolny (monopole) fields on Weyl 3-spaces
# ---------------------------------------------------------------------------


@dataclass
class BogomolnyField:
    """Monopole pair (A, Phi) on a 3d Weyl structure (Abelian by default)."""

    weyl3: WeylStructure
    A: FieldSpec       # shape (3,)
    phi: FieldSpec     # shape ()

    def __post_init__(self):
        if self.weyl3.chart.dim != 3:
            raise AlgebraMismatch("Bogomolny fields live on 3d charts")


def bogomolny_residual(bf: BogomolnyField, pts, cfg: FDConfig = FDConfig()):
    """Max norm of *(d Phi - omega Phi) - dA at the given points (Abelian)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=cfg.dtype))
    bf.weyl3.chart.require_inside(pts, reach=cfg.reach(3))
    g = bf.weyl3.metric.components(pts)
    gi = kernels.batched_inv(g)
    phi, dphi = bf.phi.jet(pts, cfg, 1)
    om = bf.weyl3.omega(pts)
    _, dA = bf.A.jet(pts, cfg, 1)
    Fa = dA - np.swapaxes(dA, -1, -2)       # (dA)_ea = d_e A_a - d_a A_e
    Dphi = dphi - om * phi[:, None]
    res = kernels.star_one_form(g, gi, Dphi) - Fa
    return float(np.max(np.abs(res)))
