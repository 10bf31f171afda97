"""Batched curvature kernels.

All functions operate on stacked per-point arrays (leading axis = point index).
Index layout, fixed once for the whole package:

    g[n,a,b]          metric components
    dg[n,e,a,b]       d_e g_ab
    d2g[n,e,f,a,b]    d_e d_f g_ab
    om[n,a]           Weyl 1-form
    dom[n,e,a]        d_e om_a
    Gam[n,a,b,c]      Gamma^a_bc
    dGam[n,e,a,b,c]   d_e Gamma^a_bc
    R[n,a,b,c,d]      R^a_bcd = d_c Gam^a_db - d_d Gam^a_cb + Gam.Gam
    Ric[n,b,d]        R^a_bad

The fused assembly `curvature_core` has a numba path (float64) and a numpy
einsum path (any dtype, including longdouble); `ibg.backend` selects.
"""

import numpy as np

from .backend import njit, use_numba

# ---------------------------------------------------------------------------
# determinants and inverses (dtype-generic; np.linalg does not do longdouble)
# ---------------------------------------------------------------------------


def batched_det(g):
    d = g.shape[-1]
    if d == 2:
        return g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    if d == 3:
        return (
            g[..., 0, 0] * (g[..., 1, 1] * g[..., 2, 2] - g[..., 1, 2] * g[..., 2, 1])
            - g[..., 0, 1] * (g[..., 1, 0] * g[..., 2, 2] - g[..., 1, 2] * g[..., 2, 0])
            + g[..., 0, 2] * (g[..., 1, 0] * g[..., 2, 1] - g[..., 1, 1] * g[..., 2, 0])
        )
    if d == 4:
        det = np.zeros(g.shape[:-2], dtype=g.dtype)
        rows = [0, 1, 2, 3]
        for j in range(4):
            minor = g[..., 1:, :][..., :, [k for k in rows if k != j]]
            det = det + ((-1) ** j) * g[..., 0, j] * batched_det(minor)
        return det
    raise ValueError(f"unsupported dimension {d}")


def batched_inv(g):
    """Adjugate-based inverse; preserves dtype (longdouble, complex)."""
    d = g.shape[-1]
    det = batched_det(g)
    if np.any(det == 0):
        raise np.linalg.LinAlgError("singular matrix in batched_inv")
    if d == 2:
        inv = np.empty_like(g)
        inv[..., 0, 0] = g[..., 1, 1]
        inv[..., 1, 1] = g[..., 0, 0]
        inv[..., 0, 1] = -g[..., 0, 1]
        inv[..., 1, 0] = -g[..., 1, 0]
        return inv / det[..., None, None]
    adj = np.empty_like(g)
    rows = list(range(d))
    for i in range(d):
        for j in range(d):
            minor = g[..., [r for r in rows if r != i], :][..., :, [c for c in rows if c != j]]
            adj[..., j, i] = ((-1) ** (i + j)) * batched_det(minor)
    return adj / det[..., None, None]


# ---------------------------------------------------------------------------
# numpy path
# ---------------------------------------------------------------------------


def _lc_christoffel_np(gi, dg):
    T = 0.5 * (
        np.einsum("nbdc->nbcd", dg) + np.einsum("ncdb->nbcd", dg) - np.einsum("ndbc->nbcd", dg)
    )
    return np.einsum("nad,nbcd->nabc", gi, T)


def _curvature_core_np(g, gi, dg, d2g, om, dom):
    n, d = g.shape[:2]
    dgi = -np.einsum("nab,nebc,ncd->nead", gi, dg, gi)
    # T_bcd = 1/2 (d_b g_dc + d_c g_db - d_d g_bc); dT[e,b,c,d] = d_e T_bcd
    T = 0.5 * (
        np.einsum("nbdc->nbcd", dg) + np.einsum("ncdb->nbcd", dg) - np.einsum("ndbc->nbcd", dg)
    )
    dT = 0.5 * (
        np.einsum("nebdc->nebcd", d2g)
        + np.einsum("necdb->nebcd", d2g)
        - np.einsum("nedbc->nebcd", d2g)
    )
    Gam = np.einsum("nad,nbcd->nabc", gi, T)
    dGam = np.einsum("nead,nbcd->neabc", dgi, T) + np.einsum("nad,nebcd->neabc", gi, dT)
    if om is not None:
        I = np.eye(d, dtype=g.dtype)
        om_up = np.einsum("nab,nb->na", gi, om)
        dom_up = np.einsum("nead,nd->nea", dgi, om) + np.einsum("nad,ned->nea", gi, dom)
        Gam = (
            Gam
            + np.einsum("ab,nc->nabc", I, om)
            + np.einsum("ac,nb->nabc", I, om)
            - np.einsum("nbc,na->nabc", g, om_up)
        )
        dGam = (
            dGam
            + np.einsum("ab,nec->neabc", I, dom)
            + np.einsum("ac,neb->neabc", I, dom)
            - np.einsum("nebc,na->neabc", dg, om_up)
            - np.einsum("nbc,nea->neabc", g, dom_up)
        )
    R = (
        np.einsum("ncadb->nabcd", dGam)
        - np.einsum("ndacb->nabcd", dGam)
        + np.einsum("nace,nedb->nabcd", Gam, Gam)
        - np.einsum("nade,necb->nabcd", Gam, Gam)
    )
    Ric = np.einsum("nabad->nbd", R)
    return Gam, dGam, R, Ric


# ---------------------------------------------------------------------------
# numba path (float64)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _curvature_core_nb(g, gi, dg, d2g, om, dom, has_weyl):  # pragma: no cover - numba
    n = g.shape[0]
    d = g.shape[1]
    Gam = np.zeros((n, d, d, d))
    dGam = np.zeros((n, d, d, d, d))
    R = np.zeros((n, d, d, d, d))
    Ric = np.zeros((n, d, d))
    dgi = np.zeros((n, d, d, d))
    for p in range(n):
        for e in range(d):
            for a in range(d):
                for dd in range(d):
                    s = 0.0
                    for b in range(d):
                        for c in range(d):
                            s += gi[p, a, b] * dg[p, e, b, c] * gi[p, c, dd]
                    dgi[p, e, a, dd] = -s
    for p in range(n):
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    s = 0.0
                    for dd in range(d):
                        T = 0.5 * (dg[p, b, dd, c] + dg[p, c, dd, b] - dg[p, dd, b, c])
                        s += gi[p, a, dd] * T
                    Gam[p, a, b, c] = s
        for e in range(d):
            for a in range(d):
                for b in range(d):
                    for c in range(d):
                        s = 0.0
                        for dd in range(d):
                            T = 0.5 * (dg[p, b, dd, c] + dg[p, c, dd, b] - dg[p, dd, b, c])
                            dT = 0.5 * (
                                d2g[p, e, b, dd, c]
                                + d2g[p, e, c, dd, b]
                                - d2g[p, e, dd, b, c]
                            )
                            s += dgi[p, e, a, dd] * T + gi[p, a, dd] * dT
                        dGam[p, e, a, b, c] = s
        if has_weyl:
            for a in range(d):
                om_up = 0.0
                for b in range(d):
                    om_up += gi[p, a, b] * om[p, b]
                for b in range(d):
                    for c in range(d):
                        v = -g[p, b, c] * om_up
                        if a == b:
                            v += om[p, c]
                        if a == c:
                            v += om[p, b]
                        Gam[p, a, b, c] += v
            for e in range(d):
                for a in range(d):
                    dom_up = 0.0
                    om_up = 0.0
                    for dd in range(d):
                        dom_up += dgi[p, e, a, dd] * om[p, dd] + gi[p, a, dd] * dom[p, e, dd]
                        om_up += gi[p, a, dd] * om[p, dd]
                    for b in range(d):
                        for c in range(d):
                            v = -dg[p, e, b, c] * om_up - g[p, b, c] * dom_up
                            if a == b:
                                v += dom[p, e, c]
                            if a == c:
                                v += dom[p, e, b]
                            dGam[p, e, a, b, c] += v
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    for dd in range(d):
                        s = dGam[p, c, a, dd, b] - dGam[p, dd, a, c, b]
                        for e in range(d):
                            s += Gam[p, a, c, e] * Gam[p, e, dd, b]
                            s -= Gam[p, a, dd, e] * Gam[p, e, c, b]
                        R[p, a, b, c, dd] = s
        for b in range(d):
            for dd in range(d):
                s = 0.0
                for a in range(d):
                    s += R[p, a, b, a, dd]
                Ric[p, b, dd] = s
    return Gam, dGam, R, Ric


def curvature_core(g, gi, dg, d2g, om=None, dom=None):
    """Connection, its derivative, Riemann and Ricci in one pass.

    `om`/`dom` add the Weyl terms; None gives the Levi-Civita quantities.
    """
    if use_numba(g, gi, dg, d2g) and (om is None or use_numba(om, dom)):
        has_weyl = om is not None
        if not has_weyl:
            n, d = g.shape[:2]
            om_ = np.zeros((n, d))
            dom_ = np.zeros((n, d, d))
        else:
            om_, dom_ = np.ascontiguousarray(om), np.ascontiguousarray(dom)
        return _curvature_core_nb(
            np.ascontiguousarray(g),
            np.ascontiguousarray(gi),
            np.ascontiguousarray(dg),
            np.ascontiguousarray(d2g),
            om_,
            dom_,
            has_weyl,
        )
    return _curvature_core_np(g, gi, dg, d2g, om, dom)


# ---------------------------------------------------------------------------
# derived tensors (numpy; cheap relative to the core)
# ---------------------------------------------------------------------------


def ricci_split(Ric, g, gi):
    """(sym0, scal): traceless symmetric part and raw metric trace."""
    d = g.shape[-1]
    S = 0.5 * (Ric + np.swapaxes(Ric, -1, -2))
    scal = np.einsum("nbd,nbd->n", gi, S)
    sym0 = S - scal[:, None, None] * g / d
    return sym0, scal


def faraday(dom):
    """F = d(omega) from the 1-form jet: F_ea = d_e om_a - d_a om_e."""
    return dom - np.swapaxes(dom, -1, -2)


def norm2_2tensor(T, gi):
    return np.abs(np.einsum("nab,nac,nbd,ncd->n", T, gi, gi, np.conj(T)))


def norm2_riemann(Rlow, gi):
    return np.abs(
        np.einsum("nabcd,nae,nbf,ncg,ndh,nefgh->n", Rlow, gi, gi, gi, gi, np.conj(Rlow))
    )


def weyl_tensor(g, gi, R_lc):
    """Totally trace-free part of the (lowered) Levi-Civita Riemann tensor."""
    d = g.shape[-1]
    if d < 4:
        return np.zeros_like(R_lc), None
    Rlow = np.einsum("nae,nebcd->nabcd", g, R_lc)
    Ric = np.einsum("nac,ncbad->nbd", gi, Rlow)
    scal = np.einsum("nbd,nbd->n", gi, Ric)
    S = (Ric - scal[:, None, None] * g / (2 * (d - 1))) / (d - 2)
    kn = (
        np.einsum("nac,nbd->nabcd", g, S)
        - np.einsum("nad,nbc->nabcd", g, S)
        + np.einsum("nbd,nac->nabcd", g, S)
        - np.einsum("nbc,nad->nabcd", g, S)
    )
    return Rlow - kn, Rlow


_EPS4 = None


def eps_symbol(d):
    """Levi-Civita symbol in coordinate order (+1 on the identity)."""
    global _EPS4
    if d == 4 and _EPS4 is not None:
        return _EPS4
    eps = np.zeros((d,) * d)
    import itertools

    for perm in itertools.permutations(range(d)):
        sign = 1
        p = list(perm)
        for i in range(d):
            while p[i] != i:
                j = p[i]
                p[i], p[j] = p[j], p[i]
                sign = -sign
        eps[perm] = sign
    if d == 4:
        _EPS4 = eps
    return eps


def star_two_form(g, gi, phi):
    """Hodge star of a 2-form; dim 3 gives a 1-form, dim 4 a 2-form."""
    d = g.shape[-1]
    eps = eps_symbol(d).astype(g.dtype)
    sg = np.sqrt(np.abs(batched_det(g)))
    if d == 3:
        return 0.5 * sg[:, None] * np.einsum("abc,nbe,ncf,nef->na", eps, gi, gi, phi)
    if d == 4:
        return 0.5 * sg[:, None, None] * np.einsum(
            "abcd,nce,ndf,nef->nab", eps, gi, gi, phi
        )
    raise ValueError("star_two_form needs dim 3 or 4")


def star_one_form(g, gi, alpha):
    """Hodge star of a 1-form in dim 3 (a 2-form)."""
    eps = eps_symbol(3).astype(g.dtype)
    sg = np.sqrt(np.abs(batched_det(g)))
    return sg[:, None, None] * np.einsum("abc,ncd,nd->nab", eps, gi, alpha)


def sd_asd_split(g, gi, phi):
    """(star phi, P+ phi, P- phi) for a 2-form in dim 4."""
    sphi = star_two_form(g, gi, phi)
    return sphi, 0.5 * (phi + sphi), 0.5 * (phi - sphi)


def _star_weyl_first(g, gi, C):
    eps = eps_symbol(4).astype(g.dtype)
    sg = np.sqrt(np.abs(batched_det(g)))
    return 0.5 * sg[:, None, None, None, None] * np.einsum(
        "abef,nep,nfq,npqcd->nabcd", eps, gi, gi, C
    )


def _star_weyl_second(g, gi, C):
    eps = eps_symbol(4).astype(g.dtype)
    sg = np.sqrt(np.abs(batched_det(g)))
    return 0.5 * sg[:, None, None, None, None] * np.einsum(
        "cdef,nep,nfq,nabpq->nabcd", eps, gi, gi, C
    )


def weyl_pm_norms(g, gi, C):
    """Frobenius norms |W+|, |W-| of the SD/ASD Weyl parts (dim 4).

    W+- = P+- C P+- with P+- = (Id +- star)/2 acting on both 2-form slots;
    norms are full metric contractions of the lowered tensors.
    """
    SC = _star_weyl_first(g, gi, C)
    CS = _star_weyl_second(g, gi, C)
    SCS = _star_weyl_second(g, gi, SC)
    Wp = 0.25 * (C + SC + CS + SCS)
    Wm = 0.25 * (C - SC - CS + SCS)
    return np.sqrt(norm2_riemann(Wp, gi)), np.sqrt(norm2_riemann(Wm, gi))
