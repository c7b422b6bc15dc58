"""Discrete PT-symmetric Hamiltonians and the symmetry premises they satisfy.

Conventions used throughout the package:

* time reversal T acts as entrywise complex conjugation,
* parity P is a real involutive permutation (index reversal on grids),
* grid states are stored in the unit-metric embedding ``psi_i = sqrt(dx) * phi(x_i)``,
  so plain matrix algebra reproduces the continuum integrals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ModelError

#: Largest exponent for which real-line eigenfunctions of x^2 (ix)^nu still decay.
NU_MAX = 2.0

_INVOLUTION_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Symmetric uniform grid on [-L, L] with an odd number of nodes."""

    half_width: float
    point_count: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.half_width) or self.half_width <= 0:
            raise ModelError(f"half_width L must be positive, got {self.half_width!r}")
        n = self.point_count
        if int(n) != n or n < 3:
            raise ModelError(f"point_count N must be an integer >= 3, got {n!r}")
        if n % 2 == 0:
            raise ModelError(
                f"point_count N must be odd so that x = 0 is a grid node "
                f"(parity center missing for N = {n})"
            )

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.point_count - 1)

    @property
    def nodes(self) -> NDArray[np.float64]:
        # built as +-k*dx around the center so that x_i + x_{N-1-i} == 0 exactly
        center = self.point_count // 2
        k = np.arange(self.point_count) - center
        return k * self.spacing


@dataclass(frozen=True)
class OperatorTriple:
    """Hamiltonian, parity and metric weight: the discrete stand-in for (H, P, T)."""

    hamiltonian: NDArray[np.complex128]
    parity: NDArray[np.float64]
    metric_weight: float
    label: str
    grid: GridSpec | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        h = np.array(self.hamiltonian, dtype=complex)
        p = np.array(self.parity, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ModelError(f"hamiltonian must be square, got shape {h.shape}")
        if p.shape != h.shape:
            raise ModelError(
                f"dimension mismatch: hamiltonian {h.shape} vs parity {p.shape}"
            )
        if not np.all(np.isfinite(h)):
            raise ModelError("hamiltonian contains non-finite entries")
        if not self.metric_weight > 0:
            raise ModelError(f"metric weight must be positive, got {self.metric_weight!r}")
        h.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "parity", p)
        object.__setattr__(self, "metric_weight", float(self.metric_weight))

    @property
    def dimension(self) -> int:
        return self.hamiltonian.shape[0]


def _check_parity(p: NDArray, tol: float = _INVOLUTION_TOL) -> None:
    n = p.shape[0]
    if np.linalg.norm(p @ p - np.eye(n)) > tol:
        raise ModelError("parity matrix is not involutive (P^2 != I)")
    if np.linalg.norm(p - p.conj().T) > tol:
        raise ModelError("parity matrix is not self-adjoint (P != P^dagger)")


def reversal(n: int) -> NDArray[np.float64]:
    """Index-reversal permutation matrix, the grid parity x -> -x."""
    return np.eye(n)[::-1].copy()


def potential(x: ArrayLike, nu: float) -> NDArray[np.complex128]:
    """V(x) = x^2 (ix)^nu on the principal branch, with V(0) = 0."""
    x = np.asarray(x, dtype=float)
    v = np.zeros(x.shape, dtype=complex)
    nz = x != 0
    v[nz] = x[nz] ** 2 * np.exp(nu * np.log(1j * x[nz]))
    if nu == 0:
        # exp(0 * Log) is exactly 1; keep the Hermitian limit exactly real
        v = (x**2).astype(complex)
    return v


def build_grid_hamiltonian(spec: GridSpec, nu: float) -> OperatorTriple:
    """Three-point finite-difference H = -d^2/dx^2 + x^2 (ix)^nu, Dirichlet at +-L."""
    if not (0.0 <= nu < NU_MAX):
        raise ModelError(
            f"nu = {nu!r} outside [0, {NU_MAX:g}): for nu >= 2 the eigenfunctions "
            "only decay along complex contours, which a real-line grid cannot represent"
        )
    n = spec.point_count
    dx = spec.spacing
    x = spec.nodes
    off = -np.ones(n - 1) / dx**2
    h = np.diag(2.0 / dx**2 + potential(x, nu)) + np.diag(off, 1) + np.diag(off, -1)
    return OperatorTriple(
        hamiltonian=h,
        parity=reversal(n),
        metric_weight=dx,
        label=f"grid(nu={nu!r}, L={spec.half_width!r}, N={n})",
        grid=spec,
    )


def build_matrix_model(r: float, s: float, theta: float) -> OperatorTriple:
    """The two-level PT model H = [[r e^{i theta}, s], [s, r e^{-i theta}]]."""
    h = np.array(
        [[r * np.exp(1j * theta), s], [s, r * np.exp(-1j * theta)]], dtype=complex
    )
    return OperatorTriple(
        hamiltonian=h,
        parity=np.array([[0.0, 1.0], [1.0, 0.0]]),
        metric_weight=1.0,
        label=f"matrix2(r={r!r}, s={s!r}, theta={theta!r})",
    )


def build_explicit(h_entries: ArrayLike, p_entries: ArrayLike, w: float = 1.0) -> OperatorTriple:
    h = np.asarray(h_entries, dtype=complex)
    p_raw = np.asarray(p_entries)
    if np.iscomplexobj(p_raw):
        if np.max(np.abs(p_raw.imag), initial=0.0) > _INVOLUTION_TOL:
            raise ModelError("parity matrix must be real")
        p_raw = p_raw.real
    p = np.asarray(p_raw, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ModelError(f"hamiltonian must be square, got shape {h.shape}")
    if p.shape != h.shape:
        raise ModelError(f"dimension mismatch: hamiltonian {h.shape} vs parity {p.shape}")
    _check_parity(p)
    return OperatorTriple(
        hamiltonian=h, parity=p, metric_weight=w, label=f"explicit(N={h.shape[0]})"
    )


def _relative(num: float, h: NDArray) -> float:
    scale = np.linalg.norm(h)
    if scale == 0:
        return float(num)
    return float(num / scale)


def check_pt_symmetry(t: OperatorTriple) -> float:
    """Relative Frobenius residual of [H, PT] = 0, i.e. ||P conj(H) P - H|| / ||H||."""
    h, p = t.hamiltonian, t.parity
    return _relative(np.linalg.norm(p @ h.conj() @ p - h), h)


def check_pseudo_hermiticity(t: OperatorTriple) -> float:
    """Relative residual of P H P = H^dagger."""
    h, p = t.hamiltonian, t.parity
    return _relative(np.linalg.norm(p @ h @ p - h.conj().T), h)
