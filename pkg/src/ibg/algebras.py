"""Gauge algebra realizations.

Three kinds are used by the field equations:

* matrix algebras (finite bases, commutator bracket);
* the grid Hamiltonian algebra: smooth periodic functions on [0, 2pi)^2 with
  the Poisson bracket {F, G} = F_p G_q - F_q G_p via 4th-order periodic FD;
* vector-field callbacks on a 1/2/3-dimensional fibre, bracketed by finite
  differences.  Realized vector fields enter every field equation through
  MINUS the naive commutator (invariant vertical fields carry the opposite
  bracket); the sign is pinned by the su(2)/frame calibration tests.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import AlgebraMismatch, BadParams


@dataclass
class MatrixAlgebra:
    name: str
    basis: np.ndarray  # (k, n, n)

    def __post_init__(self):
        self.basis = np.asarray(self.basis, dtype=complex)
        if self.basis.ndim != 3 or self.basis.shape[1] != self.basis.shape[2]:
            raise BadParams("basis must be a stack of square matrices")

    @staticmethod
    def bracket(X, Y):
        return X @ Y - Y @ X

    def structure_constants(self):
        """c[k, i, j] with [e_i, e_j] = sum_k c[k,i,j] e_k (least squares)."""
        k = len(self.basis)
        flat = self.basis.reshape(k, -1).T  # (n^2, k)
        c = np.zeros((k, k, k), dtype=complex)
        for i in range(k):
            for j in range(k):
                br = self.bracket(self.basis[i], self.basis[j]).reshape(-1)
                sol, res, *_ = np.linalg.lstsq(flat, br, rcond=None)
                c[:, i, j] = sol
        return c

    def validate(self, tol=1e-12):
        c = self.structure_constants()
        scale = max(1.0, np.abs(c).max())
        if np.abs(c + np.swapaxes(c, 1, 2)).max() > tol * scale:
            raise AlgebraMismatch("structure constants not antisymmetric")
        # Jacobi on the basis
        for i in range(len(self.basis)):
            for j in range(len(self.basis)):
                for k_ in range(len(self.basis)):
                    s = (
                        self.bracket(self.bracket(self.basis[i], self.basis[j]), self.basis[k_])
                        + self.bracket(self.bracket(self.basis[j], self.basis[k_]), self.basis[i])
                        + self.bracket(self.bracket(self.basis[k_], self.basis[i]), self.basis[j])
                    )
                    if np.abs(s).max() > tol * max(1.0, np.abs(self.basis).max() ** 3):
                        raise AlgebraMismatch("Jacobi identity fails")
        return c


def su2() -> MatrixAlgebra:
    """Basis e_i = -i sigma_i / 2 with [e_i, e_j] = eps_ijk e_k."""
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    return MatrixAlgebra("su2", np.stack([-0.5j * s1, -0.5j * s2, -0.5j * s3]))


def abelian(n=2) -> MatrixAlgebra:
    basis = np.stack([np.diag(np.eye(n)[i]) for i in range(n)]).astype(complex)
    return MatrixAlgebra(f"abelian{n}", basis)


class HamiltonianGrid:
    """Periodic N x N grid on [0, 2pi)^2 with the FD Poisson bracket."""

    def __init__(self, n=64):
        self.n = n
        self.h = 2 * np.pi / n
        ax = np.arange(n) * self.h
        self.p, self.q = np.meshgrid(ax, ax, indexing="ij")

    def sample(self, fn):
        """Grid samples of a callable fn(p, q)."""
        return np.asarray(fn(self.p, self.q))

    def d_p(self, F):
        return (
            np.roll(F, 2, axis=-2) - 8 * np.roll(F, 1, axis=-2)
            + 8 * np.roll(F, -1, axis=-2) - np.roll(F, -2, axis=-2)
        ) / (12 * self.h)

    def d_q(self, F):
        return (
            np.roll(F, 2, axis=-1) - 8 * np.roll(F, 1, axis=-1)
            + 8 * np.roll(F, -1, axis=-1) - np.roll(F, -2, axis=-1)
        ) / (12 * self.h)

    def bracket(self, F, G):
        """{F, G} = F_p G_q - F_q G_p."""
        return self.d_p(F) * self.d_q(G) - self.d_q(F) * self.d_p(G)

    def integral(self, F):
        return F.mean(axis=(-2, -1)) * (2 * np.pi) ** 2


@dataclass
class VectorFieldAlgebra:
    """Vector fields on a fibre chart, bracketed by FD Jacobians.

    `bracket` returns minus the naive commutator: realized invariant vector
    fields obey the opposite bracket (see the module docstring).  Elements
    are vectorized callables pts (n, dim) -> (n, dim).
    """

    dim: int
    h: float = 1e-5

    def jacobian(self, X: Callable, pts):
        pts = np.asarray(pts, dtype=float)
        w = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
        off = np.arange(-2, 3)
        n = pts.shape[0]
        J = np.zeros((n, self.dim, self.dim))
        for c in range(self.dim):
            P = np.repeat(pts[None], 5, axis=0)
            P[:, :, c] += (off * self.h)[:, None]
            vals = np.stack([np.asarray(X(P[i])) for i in range(5)])
            J[:, :, c] = np.tensordot(w, vals, axes=(0, 0)) / self.h
        return J

    def raw_commutator(self, X, Y, pts):
        pts = np.asarray(pts, dtype=float)
        JX = self.jacobian(X, pts)
        JY = self.jacobian(Y, pts)
        return (
            np.einsum("nab,nb->na", JY, np.asarray(X(pts)))
            - np.einsum("nab,nb->na", JX, np.asarray(Y(pts)))
        )

    def bracket(self, X, Y, pts):
        return -self.raw_commutator(X, Y, pts)
