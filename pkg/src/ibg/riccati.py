"""Matrix Riccati backgrounds in one dimension.

The flow B' = 2(B^2)_0 for symmetric traceless 3x3 matrices, its algebraic
invariants and the six-type classification, the closed-form solutions for
types 0/D/II/N/III, a numeric solver, and the Darboux-Halphen/Chazy residuals
of the diagonal Bianchi-IX reduction.
"""

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BadParams, NotSymmetric, NotTraceless, TypeIUnsupported
from .ode import Trajectory, rk4

_SYM_TOL = 1e-10


def _validate(B, tol=_SYM_TOL):
    B = np.asarray(B)
    if B.shape[-2:] != (3, 3):
        raise BadParams("B must be 3x3")
    scale = max(1.0, float(np.max(np.abs(B))))
    if np.max(np.abs(B - np.swapaxes(B, -1, -2))) > tol * scale:
        raise NotSymmetric("B must be symmetric")
    if np.max(np.abs(np.trace(B, axis1=-2, axis2=-1))) > tol * scale:
        raise NotTraceless("B must be traceless")
    return B


def riccati_rhs(B, a=None):
    """2(B^2)_0, the traceless square; with a gauge term a, adds a*B."""
    B = _validate(B)
    B2 = B @ B
    tr = np.trace(B2, axis1=-2, axis2=-1)
    out = 2 * B2 - (2.0 / 3.0) * tr[..., None, None] * np.eye(3, dtype=B2.dtype)
    if a is not None:
        out = out + np.asarray(a)[..., None, None] * B
    return out


@dataclass(frozen=True)
class RiccatiInvariants:
    """Pointwise invariants of B and the pencil-of-conics type label."""

    x: complex
    y: complex
    disc: complex
    c2: complex
    type_label: str

    def char_poly(self, lam):
        return 4 * lam**3 - 3 * self.x * lam - self.y


def analyze(B, tol=1e-8) -> RiccatiInvariants:
    """Invariants x = (2/3)tr B^2, y = 4 det B and the type (I/II/III/D/N/0)."""
    B = _validate(np.asarray(B, dtype=complex))
    x = (2.0 / 3.0) * np.trace(B @ B)
    y = 4.0 * np.linalg.det(B)
    disc = y**2 - x**3
    c2 = -4.0 * disc / 27.0
    norm = np.linalg.norm(B)
    if norm <= 1e-12:
        label = "0"
    elif abs(disc) > tol * max(norm, 1e-30) ** 6:
        # disc scales like |B|^6; roundoff in x^3, y^2 sits near 1e-14 |B|^6
        label = "I"
    elif abs(x) > tol * norm**2:
        # repeated eigenvalue lam with spectrum (lam, lam, -2 lam)
        lam = -y / (2 * x)
        rank = int(np.sum(np.linalg.svd(B - lam * np.eye(3), compute_uv=False)
                          > tol * norm))
        label = "D" if rank <= 1 else "II"
    else:
        B2 = B @ B
        label = "III" if np.linalg.norm(B2) > tol * norm**2 else "N"
    if np.max(np.abs(B.imag)) < 1e-14:
        x, y, disc, c2 = (complex(v).real for v in (x, y, disc, c2))
    return RiccatiInvariants(x=x, y=y, disc=disc, c2=c2, type_label=label)


@dataclass
class RiccatiSpace:
    """A 1d background: B(r) with gauge term a(r) on an r-interval.

    `B` and `a` are vectorized callables; `dB` is the exact derivative
    (from the flow equation for solver output, analytic for closed forms).
    """

    kind: str                      # "closed:<type>" or "trajectory" or "custom"
    B: Callable
    a: Callable
    r_range: tuple
    coordinate: str = "affine"
    params: dict = field(default_factory=dict)
    trajectory: Optional[Trajectory] = None

    def dB(self, r):
        return riccati_rhs_many(self.B(r), self.a(r))

    def invariants(self, r):
        B = self.B(np.atleast_1d(r))
        return [analyze(B[i]) for i in range(B.shape[0])]


def riccati_rhs_many(B, a=None):
    """Vectorized RHS without input validation (trusted trajectories)."""
    B = np.asarray(B)
    B2 = np.einsum("...ab,...bc->...ac", B, B)
    tr = np.trace(B2, axis1=-2, axis2=-1)
    out = 2 * B2 - (2.0 / 3.0) * tr[..., None, None] * np.eye(3, dtype=B2.dtype)
    if a is not None:
        out = out + np.asarray(a)[..., None, None] * B
    return out


def _zeros_like_r(r):
    return np.zeros(np.shape(np.atleast_1d(r)))


def solve(B0, r_span, steps, a=None) -> RiccatiSpace:
    """Fixed-step RK4 for B' = 2(B^2)_0 [+ aB]; affine gauge when a is None."""
    B0 = _validate(np.asarray(B0))
    r0, r1 = r_span
    afun = a if a is not None else (lambda r: _zeros_like_r(r))

    def rhs(r, B):
        aval = np.atleast_1d(afun(np.atleast_1d(r)))[0] if a is not None else None
        return riccati_rhs_many(B, aval)

    rs, Bs = rk4(rhs, B0, r0, r1, steps)
    traj = Trajectory(rs, Bs)
    return RiccatiSpace(
        kind="trajectory",
        B=traj,
        a=afun,
        r_range=(r0, r1),
        coordinate="affine" if a is None else "general",
        trajectory=traj,
    )


def closed_form(type_label: str, **params) -> RiccatiSpace:
    """Closed-form Riccati spaces for types 0, D, II, N, III (affine gauge).

    D/II:  B = [[lam+mu, i mu, 0], [i mu, lam-mu, 0], [0, 0, -2 lam]],
           lam = 1/(2r), mu = b r^2 (D iff b = 0).
    N:     constant beta * [[1, i, 0], [i, -1, 0], [0, 0, 0]].
    III:   [[mu, i mu, beta], [i mu, -mu, i beta], [beta, i beta, 0]],
           mu = 2 beta^2 r.
    """
    t = type_label.upper().strip()
    if t == "I":
        raise TypeIUnsupported("type I has no implemented closed form; use solve()")
    if t == "0":
        def B(r):
            r = np.atleast_1d(r)
            return np.zeros((len(r), 3, 3))
        return RiccatiSpace("closed:0", B, _zeros_like_r, (-np.inf, np.inf))
    if t in ("D", "II"):
        b = params.get("b", 0.0)
        if t == "D" and b != 0:
            raise BadParams("type D requires b = 0 (b != 0 is type II)")
        if t == "II" and b == 0:
            raise BadParams("type II requires b != 0")
        dtype = complex if (t == "II" or isinstance(b, complex)) else float

        def B(r, b=b, dtype=dtype):
            r = np.atleast_1d(np.asarray(r))
            lam = 1.0 / (2.0 * r)
            mu = b * r**2
            out = np.zeros((len(r), 3, 3), dtype=dtype)
            out[:, 0, 0] = lam + mu
            out[:, 1, 1] = lam - mu
            out[:, 2, 2] = -2 * lam
            if b != 0:
                out[:, 0, 1] = out[:, 1, 0] = 1j * mu
            return out

        return RiccatiSpace(f"closed:{t}", B, _zeros_like_r, (1e-12, np.inf),
                            params={"b": b})
    if t == "N":
        beta = params.get("beta", 1.0)
        if beta == 0:
            raise BadParams("type N requires beta != 0")
        M = np.array([[1, 1j, 0], [1j, -1, 0], [0, 0, 0]], dtype=complex) * beta

        def B(r, M=M):
            r = np.atleast_1d(r)
            return np.broadcast_to(M, (len(r), 3, 3)).copy()

        return RiccatiSpace("closed:N", B, _zeros_like_r, (-np.inf, np.inf),
                            params={"beta": beta})
    if t == "III":
        beta = params.get("beta", 1.0)
        if beta == 0:
            raise BadParams("type III requires beta != 0")

        def B(r, beta=beta):
            r = np.atleast_1d(np.asarray(r))
            mu = 2 * beta**2 * r
            out = np.zeros((len(r), 3, 3), dtype=complex)
            out[:, 0, 0] = mu
            out[:, 1, 1] = -mu
            out[:, 0, 1] = out[:, 1, 0] = 1j * mu
            out[:, 0, 2] = out[:, 2, 0] = beta
            out[:, 1, 2] = out[:, 2, 1] = 1j * beta
            return out

        return RiccatiSpace("closed:III", B, _zeros_like_r, (-np.inf, np.inf),
                            params={"beta": beta})
    raise BadParams(f"unknown Riccati type {type_label!r}")


def type_d_projective(lam=1.0 / 6.0):
    """Type D in the projective gauge: constant B = diag(lam, lam, -2 lam), a = 2 lam."""
    M = np.diag([lam, lam, -2 * lam]).astype(float)

    def B(r):
        r = np.atleast_1d(r)
        return np.broadcast_to(M, (len(r), 3, 3)).copy()

    def a(r):
        return np.full(np.shape(np.atleast_1d(r)), 2 * lam)

    return RiccatiSpace("closed:D", B, a, (-np.inf, np.inf),
                        coordinate="projective", params={"lam": lam})


def to_affine(space: RiccatiSpace, r_span, steps=2000, s0=1.0):
    """Reparameterize a general-gauge space (a != 0) to the affine gauge.

    Solves s' = -a s, dr/dt = 1/s along the original coordinate t; the affine
    data is B_affine(r(t)) = s(t) B(t).  Returns (affine RiccatiSpace,
    t_of_r Trajectory on a uniform affine grid).
    """
    t0, t1 = r_span

    def rhs(t, y):
        s = y[0]
        aval = np.atleast_1d(space.a(np.atleast_1d(t)))[0]
        return np.array([-aval * s, 1.0 / s])

    ts, ys = rk4(rhs, np.array([s0, 0.0]), t0, t1, steps)
    svals, rvals = ys[:, 0], ys[:, 1]
    runiform = np.linspace(rvals[0], rvals[-1], steps + 1)
    t_u = np.interp(runiform, rvals, ts)
    s_u = np.interp(runiform, rvals, svals)
    B_u = space.B(t_u) * s_u[:, None, None]
    B_interp = Trajectory(runiform, B_u)
    affine = RiccatiSpace("trajectory", B_interp, _zeros_like_r,
                          (float(runiform[0]), float(runiform[-1])),
                          trajectory=B_interp)
    return affine, Trajectory(runiform, t_u)


# ---------------------------------------------------------------------------
# Darboux-Halphen / Chazy residuals
# ---------------------------------------------------------------------------

# order-6 central stencils on offsets -4..4 (longdouble evaluation)
_OFF6 = np.arange(-4, 5)
_W1_6 = np.array([0, -1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0, 0]) / 60.0
_W2_6 = np.array([0, 2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0, 0]) / 180.0
_W3_6 = np.array([-7 / 240, 3 / 10, -169 / 120, 61 / 30, 0.0,
                  -61 / 30, 169 / 120, -3 / 10, 7 / 240])


def _fd_scalar(f, ts, h, weights, power):
    ts = np.asarray(ts, dtype=np.longdouble)
    vals = f((ts[:, None] + _OFF6[None, :] * np.longdouble(h)).ravel()).reshape(len(ts), 9)
    return (vals @ weights.astype(np.longdouble)) / np.longdouble(h) ** power


def _fd_scalar_rich(f, ts, h, weights, power):
    # one Richardson step on the O(h^6) stencils -> O(h^8)
    d_h = _fd_scalar(f, ts, h, weights, power)
    d_h2 = _fd_scalar(f, ts, h / 2, weights, power)
    return (64 * d_h2 - d_h) / 63.0


@dataclass(frozen=True)
class HalphenChazyResiduals:
    halphen: float
    chazy: float
    linkage: float


def halphen_chazy_residual(A1, A2, A3, a, ts, h=1.5e-2) -> HalphenChazyResiduals:
    """Max-norm residuals of the Darboux-Halphen system and the Chazy equation.

    A_i and a are vectorized scalar callables of t.  Also checks the linkage
    a = -(2/3)(A1 + A2 + A3).
    """
    ts = np.asarray(ts, dtype=np.longdouble)
    A = [np.asarray(f(ts), dtype=np.longdouble) for f in (A1, A2, A3)]
    dA = [_fd_scalar_rich(f, ts, h, _W1_6, 1) for f in (A1, A2, A3)]
    res_h = 0.0
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        res_h = max(res_h, float(np.max(np.abs(
            dA[i] - (A[j] * A[k] - A[i] * (A[j] + A[k]))))))
    av = np.asarray(a(ts), dtype=np.longdouble)
    da = _fd_scalar_rich(a, ts, h, _W1_6, 1)
    dda = _fd_scalar_rich(a, ts, h, _W2_6, 2)
    ddda = _fd_scalar_rich(a, ts, h, _W3_6, 3)
    res_c = float(np.max(np.abs(ddda - (6 * av * dda - 9 * da**2))))
    res_l = float(np.max(np.abs(av + (2.0 / 3.0) * (A[0] + A[1] + A[2]))))
    return HalphenChazyResiduals(halphen=res_h, chazy=res_c, linkage=res_l)


def export_trajectory_csv(space: RiccatiSpace, fileobj, n=101):
    """CSV rows: r, the nine B entries, x, y, disc."""
    r0, r1 = space.r_range
    if not np.isfinite(r0) or not np.isfinite(r1):
        r0, r1 = 1.0, 2.0
    rs = np.linspace(r0, r1, n)
    writer = csv.writer(fileobj)
    names = [f"B{i}{j}" for i in range(1, 4) for j in range(1, 4)]
    writer.writerow(["r"] + names + ["x", "y", "disc"])
    B = space.B(rs)
    for i, r in enumerate(rs):
        inv = analyze(B[i])
        row = [repr(float(r))]
        row += [repr(complex(v)) if np.iscomplexobj(B) else repr(float(v.real))
                for v in B[i].ravel()]
        row += [repr(v) for v in (inv.x, inv.y, inv.disc)]
        writer.writerow(row)
