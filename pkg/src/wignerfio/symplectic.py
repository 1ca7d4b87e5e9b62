"""Symplectic matrices: J, D_L, V_C, A_tau and products, with certification."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SymplecticError(ValueError):
    pass


def standard_J(n: int) -> np.ndarray:
    """The ``2n × 2n`` standard symplectic matrix ``[[0, I], [-I, 0]]``."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


@dataclass(frozen=True)
class SymplecticMatrix:
    matrix: np.ndarray
    kind: str

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise SymplecticError(f"need a square matrix of even size, got {A.shape}")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @property
    def n(self) -> int:
        return self.matrix.shape[0] // 2

    def residual(self) -> float:
        """``max |AᵀJA - J|``."""
        J = standard_J(self.n)
        return float(np.max(np.abs(self.matrix.T @ J @ self.matrix - J)))

    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    def certify(self, tol: float = 1e-12, det_tol: float = 1e-10) -> None:
        r = self.residual()
        if r > tol:
            raise SymplecticError(f"{self.kind}: AᵀJA - J residual {r:.3e} exceeds {tol:.1e}")
        if abs(self.det() - 1) > det_tol:
            raise SymplecticError(f"{self.kind}: determinant {self.det()} is not 1")

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        return SymplecticMatrix(self.matrix @ other.matrix, "product")


def symplectic_builder(kind: str, **params) -> SymplecticMatrix:
    """Build and certify one of ``J``, ``D_L``, ``V_C``, ``A_tau``.

    ``J`` takes ``n``; ``D_L`` takes an invertible ``L``; ``V_C`` a symmetric
    ``C``; ``A_tau`` takes ``tau`` and ``d`` and returns the ``4d × 4d``
    matrix of the tau-Wigner distribution.
    """
    if kind == "J":
        A = standard_J(int(params.get("n", 1)))
    elif kind == "D_L":
        L = np.atleast_2d(np.asarray(params["L"], dtype=float))
        if abs(np.linalg.det(L)) < 1e-14:
            raise SymplecticError("D_L needs an invertible L")
        Z = np.zeros_like(L)
        A = np.block([[np.linalg.inv(L), Z], [Z, L.T]])
    elif kind == "V_C":
        C = np.atleast_2d(np.asarray(params["C"], dtype=float))
        if not np.allclose(C, C.T, atol=0, rtol=0):
            raise SymplecticError("V_C needs a symmetric C")
        I = np.eye(C.shape[0])
        A = np.block([[I, np.zeros_like(C)], [C, I]])
    elif kind == "A_tau":
        tau = float(params["tau"])
        d = int(params.get("d", 1))
        I = np.eye(d)
        Z = np.zeros((d, d))
        A = np.block([
            [(1 - tau) * I, tau * I, Z, Z],
            [Z, Z, tau * I, -(1 - tau) * I],
            [Z, Z, I, I],
            [-I, I, Z, Z],
        ])
    else:
        raise SymplecticError(f"unknown symplectic kind {kind!r}")
    out = SymplecticMatrix(A, kind)
    out.certify()
    return out
