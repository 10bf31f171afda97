"""Tensor calculus on coordinate charts.

Charts carry named coordinates, a domain box, and an optional excluded-region
predicate.  Fields are vectorized callbacks (points come in as an (n, dim)
array); derivatives come from analytic callbacks when supplied and from
central finite differences otherwise.  Signature-agnostic: Riemannian and
Lorentzian representatives go through the same code paths.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .errors import OutOfDomain, SingularMetric, StencilOverflow

# first/second derivative central stencils per order
_D1_W = {
    2: np.array([-0.5, 0.0, 0.5]),
    4: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    6: np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0,
}
_D2_W = {
    2: np.array([1.0, -2.0, 1.0]),
    4: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
    6: np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0,
}


def _offsets(order):
    # stencil half-width: order 2 -> 1, 4 -> 2, 6 -> 3
    half = {2: 1, 4: 2, 6: 3}[order]
    return np.arange(-half, half + 1)


@dataclass(frozen=True)
class FDConfig:
    """Finite-difference configuration: per-coordinate step and stencil order."""

    h: float | Sequence[float] = 1e-3
    order: int = 4
    dtype: type = np.float64

    def __post_init__(self):
        if self.order not in (2, 4, 6):
            raise ValueError("stencil order must be 2, 4 or 6")
        hs = np.atleast_1d(np.asarray(self.h, dtype=float))
        if np.any(hs <= 0):
            raise ValueError("FD step must be positive")

    def steps(self, dim):
        hs = np.atleast_1d(np.asarray(self.h, dtype=float))
        if hs.size == 1:
            return np.full(dim, hs[0])
        if hs.size != dim:
            raise ValueError("h must be scalar or one step per coordinate")
        return hs

    def reach(self, dim):
        half = {2: 1, 4: 2, 6: 3}[self.order]
        return half * self.steps(dim)


@dataclass(frozen=True)
class Chart:
    """A coordinate box in dimension 3 or 4 with optional excluded regions."""

    dim: int
    names: tuple
    box: tuple
    excluded: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.dim not in (3, 4):
            raise ValueError("charts must have dimension 3 or 4")
        if len(self.names) != self.dim or len(self.box) != self.dim:
            raise ValueError("names/box must match dim")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError("domain box is empty")

    def inside(self, pts, margin=0.0):
        pts = np.asarray(pts)
        m = np.atleast_1d(np.asarray(margin, dtype=float))
        if m.size == 1:
            m = np.full(self.dim, m[0])
        ok = np.ones(pts.shape[0], dtype=bool)
        for c, (lo, hi) in enumerate(self.box):
            ok &= (pts[:, c] >= lo + m[c]) & (pts[:, c] <= hi - m[c])
        if self.excluded is not None:
            ok &= ~np.asarray(self.excluded(pts), dtype=bool)
        return ok

    def require_inside(self, pts, reach=None):
        pts = np.asarray(pts)
        if not np.all(self.inside(pts)):
            raise OutOfDomain("point outside chart box or in an excluded region")
        if reach is not None and not np.all(self.inside(pts, margin=reach)):
            raise StencilOverflow("FD stencil leaves the chart box")

    def grid(self, shape, margin):
        """Uniform interior lattice, `margin` in from every box face."""
        axes = []
        m = np.atleast_1d(np.asarray(margin, dtype=float))
        if m.size == 1:
            m = np.full(self.dim, m[0])
        for c, (lo, hi) in enumerate(self.box):
            axes.append(np.linspace(lo + m[c], hi - m[c], shape[c]))
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([a.ravel() for a in mesh], axis=-1)
        if self.excluded is not None:
            pts = pts[~np.asarray(self.excluded(pts), dtype=bool)]
        return pts


class FieldSpec:
    """A tensor-valued field: vectorized evaluation plus optional analytic jets.

    func(pts (n,dim)) -> (n, *shape); d1 -> (n, dim, *shape);
    d2 -> (n, dim, dim, *shape); d3 likewise.  Missing derivatives fall back
    to central finite differences of `func`.
    """

    def __init__(self, shape, func, d1=None, d2=None, d3=None):
        self.shape = tuple(shape)
        self.func = func
        self.d1 = d1
        self.d2 = d2
        self.d3 = d3

    def __call__(self, pts):
        pts = np.asarray(pts)
        out = np.asarray(self.func(pts))
        want = (pts.shape[0],) + self.shape
        if out.shape != want:
            raise ValueError(f"field returned {out.shape}, expected {want}")
        return out

    def jet(self, pts, cfg: FDConfig, order: int):
        """(value, d1[, d2]) with analytic callbacks preferred per order."""
        pts = np.asarray(pts, dtype=cfg.dtype)
        need_fd1 = order >= 1 and self.d1 is None
        need_fd2 = order >= 2 and self.d2 is None
        f0 = d1 = d2 = None
        if need_fd1 or need_fd2:
            f0, fd1, fd2 = fd_jet(self, pts, cfg, want2=need_fd2)
            d1 = fd1 if need_fd1 else None
            d2 = fd2 if need_fd2 else None
        if f0 is None:
            f0 = self(pts)
        if order >= 1 and d1 is None:
            d1 = np.asarray(self.d1(pts))
        if order >= 2 and d2 is None:
            d2 = np.asarray(self.d2(pts))
        if order == 0:
            return (f0,)
        if order == 1:
            return f0, d1
        return f0, d1, d2

    @staticmethod
    def constant(shape, value):
        value = np.asarray(value)

        def func(pts):
            out = np.zeros((pts.shape[0],) + tuple(shape), dtype=np.result_type(value, pts.dtype))
            out[...] = value
            return out

        zshape = tuple(shape)

        def dk(extra):
            def f(pts):
                dim = pts.shape[1]
                return np.zeros((pts.shape[0],) + (dim,) * extra + zshape,
                                dtype=np.result_type(value, pts.dtype))

            return f

        return FieldSpec(shape, func, d1=dk(1), d2=dk(2), d3=dk(3))


def fd_jet(fs: FieldSpec, pts, cfg: FDConfig, want2=True):
    """Value, gradient and (optionally) Hessian of a FieldSpec by central FD."""
    pts = np.asarray(pts, dtype=cfg.dtype)
    n, dim = pts.shape
    hs = cfg.steps(dim).astype(cfg.dtype)
    w1 = _D1_W[cfg.order].astype(cfg.dtype)
    w2 = _D2_W[cfg.order].astype(cfg.dtype)
    off = _offsets(cfg.order)
    half = len(off) // 2

    # unique offset table: center, axis points, cross points
    table = {(0,) * dim: 0}

    def key_for(vec):
        return tuple(int(v) for v in vec)

    entries = [np.zeros(dim, dtype=int)]
    for c in range(dim):
        for k in off:
            if k == 0:
                continue
            v = np.zeros(dim, dtype=int)
            v[c] = k
            kk = key_for(v)
            if kk not in table:
                table[kk] = len(entries)
                entries.append(v)
    if want2:
        for c in range(dim):
            for d in range(c + 1, dim):
                for k in off:
                    for l in off:
                        if k == 0 or l == 0:
                            continue
                        v = np.zeros(dim, dtype=int)
                        v[c], v[d] = k, l
                        kk = key_for(v)
                        if kk not in table:
                            table[kk] = len(entries)
                            entries.append(v)
    offsets = np.asarray(entries, dtype=cfg.dtype)  # (K, dim) integer steps
    scaled = offsets * hs[None, :]
    P = (pts[:, None, :] + scaled[None, :, :]).reshape(-1, dim)
    vals = fs(P).reshape((n, len(entries)) + fs.shape)

    f0 = vals[:, 0]
    tshape = fs.shape
    d1 = np.zeros((n, dim) + tshape, dtype=vals.dtype)
    for c in range(dim):
        for i, k in enumerate(off):
            if w1[i] == 0:
                continue
            v = np.zeros(dim, dtype=int)
            v[c] = k
            d1[:, c] += w1[i] * vals[:, table[key_for(v)]]
        d1[:, c] /= hs[c]
    if not want2:
        return f0, d1, None
    d2 = np.zeros((n, dim, dim) + tshape, dtype=vals.dtype)
    for c in range(dim):
        acc = w2[half] * f0 * 0
        for i, k in enumerate(off):
            v = np.zeros(dim, dtype=int)
            v[c] = k
            acc = acc + w2[i] * vals[:, table[key_for(v)]]
        d2[:, c, c] = acc / hs[c] ** 2
    for c in range(dim):
        for d in range(c + 1, dim):
            acc = 0
            for i, k in enumerate(off):
                if w1[i] == 0:
                    continue
                for j, l in enumerate(off):
                    if w1[j] == 0:
                        continue
                    v = np.zeros(dim, dtype=int)
                    v[c], v[d] = k, l
                    acc = acc + (w1[i] * w1[j]) * vals[:, table[key_for(v)]]
            acc = acc / (hs[c] * hs[d])
            d2[:, c, d] = acc
            d2[:, d, c] = acc
    return f0, d1, d2


@dataclass
class MetricField:
    """Metric representative on a chart with a declared signature."""

    chart: Chart
    components: FieldSpec
    signature: tuple = None

    def __post_init__(self):
        if self.components.shape != (self.chart.dim, self.chart.dim):
            raise ValueError("metric components must be (dim, dim)")
        if self.signature is None:
            self.signature = (self.chart.dim, 0)

    def validate_at(self, pts, tol=1e-10):
        g = self.components(np.asarray(pts, dtype=float))
        if np.max(np.abs(g - np.swapaxes(g, -1, -2))) > tol * max(1.0, np.max(np.abs(g))):
            raise SingularMetric("metric not symmetric at sampled points")
        det = kernels.batched_det(g)
        if np.any(np.abs(det) < 1e-14):
            raise SingularMetric("metric degenerate at sampled points")
        ev = np.linalg.eigvalsh(g.astype(float))
        pos = int(np.median((ev > 0).sum(axis=1)))
        npos, nneg = self.signature
        if pos != npos:
            raise SingularMetric(
                f"signature mismatch: expected {self.signature}, found {pos} positive directions"
            )

    def jet(self, pts, cfg, order):
        return self.components.jet(pts, cfg, order)


@dataclass
class WeylStructure:
    """Metric representative plus Weyl 1-form (the gauge pair)."""

    metric: MetricField
    omega: FieldSpec

    def __post_init__(self):
        if self.omega.shape != (self.metric.chart.dim,):
            raise ValueError("omega must be a 1-form on the chart")

    @property
    def chart(self):
        return self.metric.chart


def flat_weyl_structure(chart):
    dim = chart.dim
    g = FieldSpec.constant((dim, dim), np.eye(dim))
    om = FieldSpec.constant((dim,), np.zeros(dim))
    return WeylStructure(MetricField(chart, g, (dim, 0)), om)


@dataclass
class CurvatureBundle:
    """All curvature data of a Weyl structure at a batch of points."""

    g: np.ndarray
    g_inv: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray          # R^a_bcd of the Weyl connection
    ricci: np.ndarray
    ricci_sym0: np.ndarray
    scal: np.ndarray
    faraday: np.ndarray
    weyl: np.ndarray             # lowered conformal Weyl tensor (0 in dim 3)
    riemann_norm: np.ndarray
    wplus_norm: Optional[np.ndarray] = None
    wminus_norm: Optional[np.ndarray] = None


def _metric_inverse(g):
    det = kernels.batched_det(g)
    if np.any(np.abs(det) < 1e-14):
        raise SingularMetric("metric degenerate at evaluation point")
    return kernels.batched_inv(g)


def weyl_connection(ws: WeylStructure, pts, cfg: FDConfig = FDConfig()):
    """Connection coefficients Gamma^a_bc of the Weyl connection.

    Gamma^D = Gamma^g + delta^a_b om_c + delta^a_c om_b - g_bc om^a.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=cfg.dtype))
    dim = ws.chart.dim
    ws.chart.require_inside(pts, reach=cfg.reach(dim))
    g, dg = ws.metric.jet(pts, cfg, 1)
    om = ws.omega(pts)
    gi = _metric_inverse(g)
    gam = kernels._lc_christoffel_np(gi, dg)
    I = np.eye(dim, dtype=g.dtype)
    om_up = np.einsum("nab,nb->na", gi, om)
    gam = (
        gam
        + np.einsum("ab,nc->nabc", I, om)
        + np.einsum("ac,nb->nabc", I, om)
        - np.einsum("nbc,na->nabc", g, om_up)
    )
    return gam


def curvature(ws: WeylStructure, pts, cfg: FDConfig = FDConfig()) -> CurvatureBundle:
    """Riemann/Ricci data of the Weyl connection plus the conformal Weyl tensor."""
    pts = np.atleast_2d(np.asarray(pts, dtype=cfg.dtype))
    dim = ws.chart.dim
    ws.chart.require_inside(pts, reach=cfg.reach(dim))
    g, dg, d2g = ws.metric.jet(pts, cfg, 2)
    om, dom = ws.omega.jet(pts, cfg, 1)
    gi = _metric_inverse(g)

    gam, _, R, Ric = kernels.curvature_core(g, gi, dg, d2g, om, dom)
    sym0, scal = kernels.ricci_split(Ric, g, gi)
    F = kernels.faraday(dom)

    # conformal Weyl tensor comes from the Levi-Civita part alone
    if np.max(np.abs(om)) == 0 and np.max(np.abs(dom)) == 0:
        R_lc = R
    else:
        _, _, R_lc, _ = kernels.curvature_core(g, gi, dg, d2g, None, None)
    C, Rlow = kernels.weyl_tensor(g, gi, R_lc)
    if Rlow is None:
        Rlow = np.einsum("nae,nebcd->nabcd", g, R_lc)
    riem_norm = np.sqrt(kernels.norm2_riemann(Rlow, gi))

    wp = wm = None
    if dim == 4:
        wp, wm = kernels.weyl_pm_norms(g, gi, C)
    return CurvatureBundle(
        g=g, g_inv=gi, gamma=gam, riemann=R, ricci=Ric, ricci_sym0=sym0,
        scal=scal, faraday=F, weyl=C, riemann_norm=riem_norm,
        wplus_norm=wp, wminus_norm=wm,
    )


def hodge_sd_asd(metric: MetricField, pts, phi, cfg: FDConfig = FDConfig()):
    """Hodge star of a 2-form; in dim 4 also the SD/ASD projections.

    Returns (star_phi,) in dim 3 and (star_phi, p_plus, p_minus) in dim 4.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=cfg.dtype))
    metric.chart.require_inside(pts)
    g = metric.components(pts)
    gi = _metric_inverse(g)
    phi = np.asarray(phi)
    if phi.ndim == 2:
        phi = np.broadcast_to(phi, g.shape).astype(g.dtype)
    if metric.chart.dim == 3:
        return (kernels.star_two_form(g, gi, phi),)
    return kernels.sd_asd_split(g, gi, phi)


def asd_weyl_norm(metric4: MetricField, pts, cfg: FDConfig = FDConfig()):
    """|W-| of the conformal structure of a 4-metric at the given points."""
    if metric4.chart.dim != 4:
        raise ValueError("asd_weyl_norm needs a 4-dimensional chart")
    zero = FieldSpec.constant((4,), np.zeros(4))
    bundle = curvature(WeylStructure(metric4, zero), pts, cfg)
    return bundle.wminus_norm


def norm_sym0(bundle: CurvatureBundle):
    """|r0| pointwise, metric contraction of the traceless symmetric Ricci."""
    return np.sqrt(kernels.norm2_2tensor(bundle.ricci_sym0, bundle.g_inv))


def gauge_transform(ws: WeylStructure, f: FieldSpec) -> WeylStructure:
    """Representative change (g, om) -> (e^{2f} g, om - df), same Weyl connection."""
    if f.shape != ():
        raise ValueError("gauge function must be scalar")
    met, om = ws.metric, ws.omega
    dim = ws.chart.dim

    def gfun(pts):
        E = np.exp(2.0 * f(pts))
        return E[:, None, None] * met.components(pts)

    d1 = d2 = None
    if f.d1 is not None and met.components.d1 is not None:
        def d1f(pts):
            E = np.exp(2.0 * f(pts))
            df = np.asarray(f.d1(pts))
            g0 = met.components(pts)
            dg0 = np.asarray(met.components.d1(pts))
            return E[:, None, None, None] * (2 * df[:, :, None, None] * g0[:, None] + dg0)
        d1 = d1f
    if (f.d1 is not None and f.d2 is not None
            and met.components.d1 is not None and met.components.d2 is not None):
        def d2f(pts):
            E = np.exp(2.0 * f(pts))
            df = np.asarray(f.d1(pts))
            ddf = np.asarray(f.d2(pts))
            g0 = met.components(pts)
            dg0 = np.asarray(met.components.d1(pts))
            ddg0 = np.asarray(met.components.d2(pts))
            t = (
                4 * df[:, :, None, None, None] * df[:, None, :, None, None] * g0[:, None, None]
                + 2 * ddf[:, :, :, None, None] * g0[:, None, None]
                + 2 * df[:, :, None, None, None] * dg0[:, None]
                + 2 * df[:, None, :, None, None] * dg0[:, :, None]
                + ddg0
            )
            return E[:, None, None, None, None] * t
        d2 = d2f

    new_g = FieldSpec((dim, dim), gfun, d1=d1, d2=d2)

    def omfun(pts):
        df = (np.asarray(f.d1(pts)) if f.d1 is not None
              else fd_jet(f, pts, FDConfig(), want2=False)[1])
        return om(pts) - df

    om_d1 = None
    if f.d2 is not None and om.d1 is not None:
        def om_d1f(pts):
            return np.asarray(om.d1(pts)) - np.asarray(f.d2(pts))
        om_d1 = om_d1f
    new_om = FieldSpec((dim,), omfun, d1=om_d1)
    return WeylStructure(MetricField(ws.chart, new_g, met.signature), new_om)


def pullback_weyl(ws: WeylStructure, chart: Chart, phi, jac, d_jac=None) -> WeylStructure:
    """Pull a Weyl structure back along a map phi: chart -> ws.chart.

    jac(pts) -> (n, dim_target, dim_source) Jacobian of phi; used to pull back
    the metric (J^T g J) and the 1-form (J^T om).
    """
    dim = chart.dim

    def gfun(pts):
        J = np.asarray(jac(pts))
        g = ws.metric.components(np.asarray(phi(pts)))
        return np.einsum("nia,nij,njb->nab", J, g, J)

    def omfun(pts):
        J = np.asarray(jac(pts))
        om = ws.omega(np.asarray(phi(pts)))
        return np.einsum("nia,ni->na", J, om)

    return WeylStructure(
        MetricField(chart, FieldSpec((dim, dim), gfun), ws.metric.signature),
        FieldSpec((dim,), omfun),
    )
