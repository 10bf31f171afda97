"""Fixed-step RK4 with blow-up detection and dense trajectory storage."""

import numpy as np

from .errors import BlowUp

BLOWUP_NORM = 1e8


def rk4(rhs, y0, r0, r1, steps, blowup_norm=BLOWUP_NORM):
    """Integrate y' = rhs(r, y) from r0 to r1; returns (rs, ys) with all samples.

    Raises BlowUp (carrying the last good r) when any component magnitude
    exceeds `blowup_norm` -- Riccati-type flows have poles.
    """
    y0 = np.asarray(y0)
    h = (r1 - r0) / steps
    rs = r0 + h * np.arange(steps + 1)
    ys = np.empty((steps + 1,) + y0.shape, dtype=np.result_type(y0.dtype, float))
    ys[0] = y0
    y = ys[0].copy()
    for i in range(steps):
        r = rs[i]
        k1 = rhs(r, y)
        k2 = rhs(r + h / 2, y + (h / 2) * k1)
        k3 = rhs(r + h / 2, y + (h / 2) * k2)
        k4 = rhs(r + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > blowup_norm:
            raise BlowUp(f"solution blew up near r = {rs[i + 1]:.6g}", last_good_r=rs[i])
        ys[i + 1] = y
    return rs, ys


class Trajectory:
    """Dense samples of a function of one variable with local Lagrange interpolation."""

    def __init__(self, rs, ys, stencil=8):
        self.rs = np.asarray(rs, dtype=float)
        self.ys = np.asarray(ys)
        self.h = float(self.rs[1] - self.rs[0])
        self.stencil = min(stencil, len(self.rs))

    @property
    def r_range(self):
        return float(self.rs[0]), float(self.rs[-1])

    def __call__(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        k = self.stencil
        i0 = np.clip(np.round((r - self.rs[0]) / self.h).astype(int) - k // 2,
                     0, len(self.rs) - k)
        out = np.zeros(r.shape + self.ys.shape[1:], dtype=self.ys.dtype)
        for idx in range(len(r)):
            i = i0[idx]
            xs = self.rs[i:i + k]
            vals = self.ys[i:i + k]
            acc = np.zeros(self.ys.shape[1:], dtype=self.ys.dtype)
            for a in range(k):
                w = 1.0
                for b in range(k):
                    if b != a:
                        w *= (r[idx] - xs[b]) / (xs[a] - xs[b])
                acc = acc + w * vals[a]
            out[idx] = acc
        return out
