"""Biorthonormal eigenbases of a general complex Hamiltonian.

``eigendecompose`` returns right eigenvectors ``v_n`` of H and left duals
``u_n`` (eigenvectors of H^dagger with eigenvalue conj(E_n)) normalised so that
``u_m^dagger v_n = delta_mn``.

Two modes exist:

* full (``levels=None``): all N levels; the duals are the columns of
  ``inv(V)^dagger``, so biorthonormality and completeness hold to solve
  roundoff.
* subset (``levels=k``): only the k lowest levels.  Duals come from the left
  eigenvectors returned by LAPACK, polished by inverse iteration and
  normalised pairwise.  This is what makes low-lying levels usable when the
  full eigenvector matrix is too ill-conditioned to invert (non-Hermitian
  grids at large L).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg as sla
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linear_sum_assignment

from .errors import IllConditioned, NearDegenerate, SpectralError, UnpairedComplexEigenvalue
from .model import OperatorTriple
from .tolerances import DEFAULT_TOLERANCES, Tolerances

#: Inverse-iteration sweeps applied to each eigenpair in subset mode.
REFINE_STEPS = 2


class Reality(str, Enum):
    REAL = "real"
    COMPLEX_PAIR_MEMBER = "complex_pair_member"


@dataclass(frozen=True)
class EigenPair:
    eigenvalue: complex
    right: NDArray[np.complex128]
    left: NDArray[np.complex128]
    residual_right: float
    residual_left: float


@dataclass(frozen=True)
class SpectrumClassification:
    all_real: bool
    broken_pairs: int
    max_imag_over_scale: float
    reality: tuple[Reality, ...]


@dataclass(frozen=True)
class BiorthogonalSystem:
    """Paired right/left eigenvectors of one operator triple.

    ``pairs`` are sorted by (Re E, Im E).  ``complete`` is False in subset
    mode, where the completeness relation cannot hold.  ``spectrum`` always
    holds every eigenvalue of H, sorted the same way.
    """

    pairs: tuple[EigenPair, ...]
    reality: tuple[Reality, ...]
    metric_weight: float
    condition_estimate: float
    triple: OperatorTriple
    complete: bool
    spectrum: NDArray[np.complex128]

    @property
    def eigenvalues(self) -> NDArray[np.complex128]:
        return np.array([p.eigenvalue for p in self.pairs], dtype=complex)

    @property
    def right(self) -> NDArray[np.complex128]:
        """Right eigenvectors as columns."""
        return np.column_stack([p.right for p in self.pairs])

    @property
    def left(self) -> NDArray[np.complex128]:
        """Left duals as columns."""
        return np.column_stack([p.left for p in self.pairs])

    def __len__(self) -> int:
        return len(self.pairs)

    def with_vectors(self, right: NDArray, left: NDArray) -> BiorthogonalSystem:
        """Copy with replaced eigenvectors; residuals are recomputed."""
        h = self.triple.hamiltonian
        pairs = tuple(
            _make_pair(h, p.eigenvalue, right[:, k], left[:, k])
            for k, p in enumerate(self.pairs)
        )
        return BiorthogonalSystem(
            pairs=pairs,
            reality=self.reality,
            metric_weight=self.metric_weight,
            condition_estimate=self.condition_estimate,
            triple=self.triple,
            complete=self.complete,
            spectrum=self.spectrum,
        )


def sort_order(values: ArrayLike) -> NDArray[np.intp]:
    """Ascending by real part, ties broken by imaginary part."""
    values = np.asarray(values, dtype=complex)
    return np.lexsort((values.imag, values.real))


def _make_pair(h: NDArray, e: complex, v: NDArray, u: NDArray) -> EigenPair:
    hnorm = np.linalg.norm(h) or 1.0
    rr = np.linalg.norm(h @ v - e * v) / (hnorm * np.linalg.norm(v))
    rl = np.linalg.norm(h.conj().T @ u - np.conj(e) * u) / (hnorm * np.linalg.norm(u))
    return EigenPair(complex(e), v.copy(), u.copy(), float(rr), float(rl))


def _conjugate_partners(a: complex, b: complex, reality_tol: float) -> bool:
    scale = reality_tol * max(1.0, abs(a))
    return abs(a.imag) > scale and abs(b - np.conj(a)) <= scale


def _refine_pair(h: NDArray, e: complex, v: NDArray, u: NDArray, steps: int):
    """Inverse iteration on H and H^dagger with a two-sided Rayleigh quotient shift."""
    eye = np.eye(h.shape[0])
    v = v / np.linalg.norm(v)
    u = u / np.linalg.norm(u)
    for _ in range(steps):
        overlap = np.vdot(u, v)
        if overlap != 0:
            e = np.vdot(u, h @ v) / overlap
        lu = sla.lu_factor(h - e * eye, check_finite=False)
        v_new = sla.lu_solve(lu, v, check_finite=False)
        u_new = sla.lu_solve(lu, u, trans=2, check_finite=False)
        if not (np.all(np.isfinite(v_new)) and np.all(np.isfinite(u_new))):
            break
        v = v_new / np.linalg.norm(v_new)
        u = u_new / np.linalg.norm(u_new)
    overlap = np.vdot(u, v)
    if overlap != 0:
        e = np.vdot(u, h @ v) / overlap
    return complex(e), v, u


def _check_degeneracy(spectrum: NDArray, selected: NDArray, tol: float) -> None:
    if spectrum.size < 2:
        return
    diameter = float(np.max(np.abs(spectrum[:, None] - spectrum[None, :])))
    if diameter == 0.0:
        raise NearDegenerate("all eigenvalues coincide")
    for i in selected:
        gaps = np.abs(spectrum - spectrum[i])
        gaps[i] = np.inf
        j = int(np.argmin(gaps))
        if gaps[j] < tol * diameter:
            raise NearDegenerate(
                f"eigenvalues {spectrum[i]:.12g} and {spectrum[j]:.12g} are closer than "
                f"{tol:g} x spectral diameter ({diameter:.6g}); the dual-basis "
                "construction requires a non-degenerate spectrum"
            )


def eigendecompose(
    t: OperatorTriple,
    tol: Tolerances = DEFAULT_TOLERANCES,
    levels: int | None = None,
) -> BiorthogonalSystem:
    """Eigendecompose ``t.hamiltonian`` into biorthonormal dual bases.

    Raises NearDegenerate, IllConditioned, or SpectralError when the residual
    contract ``eig_tol`` is violated.
    """
    h = t.hamiltonian
    n = t.dimension
    if levels is not None and not 1 <= levels <= n:
        raise ValueError(f"levels must lie in [1, {n}], got {levels}")
    subset = levels is not None and levels < n

    if subset:
        w, vl, vr = sla.eig(h, left=True, right=True)
    else:
        w, vr = sla.eig(h)
    order = sort_order(w)
    w = w[order]
    vr = vr[:, order]

    if subset:
        vl = vl[:, order]
        k = levels
        # never split a conjugate pair across the cut
        while k < n and _conjugate_partners(w[k - 1], w[k], tol.reality_tol):
            k += 1
        selected = np.arange(k)
    else:
        selected = np.arange(n)

    _check_degeneracy(w, selected, tol.degeneracy_tol)

    if subset:
        w = w.copy()
        v = np.empty((n, len(selected)), dtype=complex)
        u = np.empty_like(v)
        for j, i in enumerate(selected):
            w[i], v[:, j], u[:, j] = _refine_pair(h, w[i], vr[:, i], vl[:, i], REFINE_STEPS)
        overlaps = np.einsum("ij,ij->j", u.conj(), v)
        if np.any(overlaps == 0):
            raise IllConditioned("left and right eigenvectors are orthogonal (defective matrix)")
        u = u / overlaps.conj()
        # largest eigenvalue condition number ||u|| ||v|| / |u^dagger v| in the subset
        cond = float(np.max(np.linalg.norm(u, axis=0)))
    else:
        v = vr / np.linalg.norm(vr, axis=0)
        cond = float(np.linalg.cond(v))
    if not np.isfinite(cond) or cond > tol.cond_max:
        raise IllConditioned(
            f"eigenvector condition estimate {cond:.3e} exceeds cond_max "
            f"{tol.cond_max:.3e}; H is numerically non-diagonalizable"
        )
    if not subset:
        u = np.linalg.inv(v).conj().T

    pairs = tuple(_make_pair(h, w[i], v[:, j], u[:, j]) for j, i in enumerate(selected))
    worst = max(max(p.residual_right, p.residual_left) for p in pairs)
    if worst > tol.eig_tol:
        raise SpectralError(f"eigenpair residual {worst:.3e} exceeds eig_tol {tol.eig_tol:.3e}")

    values = w[selected]
    return BiorthogonalSystem(
        pairs=pairs,
        reality=_reality_flags(values, tol.reality_tol),
        metric_weight=t.metric_weight,
        condition_estimate=cond,
        triple=t,
        complete=not subset,
        spectrum=w,
    )


def _is_real(values: NDArray, reality_tol: float) -> NDArray[np.bool_]:
    return np.abs(values.imag) <= reality_tol * np.maximum(1.0, np.abs(values.real))


def _reality_flags(values: NDArray, reality_tol: float) -> tuple[Reality, ...]:
    return tuple(
        Reality.REAL if r else Reality.COMPLEX_PAIR_MEMBER
        for r in _is_real(values, reality_tol)
    )


def classify_eigenvalues(values: ArrayLike, reality_tol: float = 1e-6) -> SpectrumClassification:
    """Split a spectrum into real eigenvalues and complex-conjugate pairs.

    An eigenvalue counts as real when |Im E| <= reality_tol * max(1, |Re E|).
    The rest are paired greedily with their nearest conjugate; any leftover
    raises UnpairedComplexEigenvalue.
    """
    values = np.asarray(values, dtype=complex)
    real = _is_real(values, reality_tol)
    scale = np.maximum(1.0, np.abs(values.real))
    max_imag = float(np.max(np.abs(values.imag) / scale, initial=0.0))

    remaining = [int(i) for i in np.flatnonzero(~real)]
    pairs = 0
    while remaining:
        i = remaining.pop(0)
        if not remaining:
            raise UnpairedComplexEigenvalue(
                f"complex eigenvalue {values[i]:.12g} has no conjugate partner"
            )
        target = np.conj(values[i])
        dists = [abs(values[j] - target) for j in remaining]
        k = int(np.argmin(dists))
        limit = reality_tol * max(1.0, abs(values[i]))
        if dists[k] > limit:
            raise UnpairedComplexEigenvalue(
                f"complex eigenvalue {values[i]:.12g} has no conjugate partner within "
                f"{limit:.3e} (nearest candidate {values[remaining[k]]:.12g})"
            )
        remaining.pop(k)
        pairs += 1

    return SpectrumClassification(
        all_real=pairs == 0,
        broken_pairs=pairs,
        max_imag_over_scale=max_imag,
        reality=_reality_flags(values, reality_tol),
    )


def classify_reality(sys: BiorthogonalSystem, reality_tol: float = 1e-6) -> SpectrumClassification:
    return classify_eigenvalues(sys.eigenvalues, reality_tol)


def dual_completeness_residual(sys: BiorthogonalSystem) -> float:
    """||sum_n v_n u_n^dagger - I||_F."""
    v, u = sys.right, sys.left
    return float(np.linalg.norm(v @ u.conj().T - np.eye(v.shape[0])))


def biorthonormality_residual(sys: BiorthogonalSystem) -> float:
    """Largest entry of |U^dagger V - I|."""
    v, u = sys.right, sys.left
    return float(np.max(np.abs(u.conj().T @ v - np.eye(v.shape[1]))))


def adjoint_spectrum_mismatch(sys: BiorthogonalSystem) -> float:
    """Largest gap between conj(spec H) and an independent eigensolve of H^dagger.

    The two spectra are matched one-to-one by minimal total distance.
    """
    adj = sla.eigvals(sys.triple.hamiltonian.conj().T)
    mine = np.conj(sys.spectrum)
    cost = np.abs(mine[:, None] - adj[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))
