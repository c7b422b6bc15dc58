"""From a biorthonormal system to a PT basis with signature, and the charge operator.

The chain, level by level:

1. ``fix_pt_phase``: PT v = d v with |d| = 1; multiply by e^{i arg(d)/2} so PT v = v.
2. ``compute_c_coefficients``: the dual is parallel to P v, u = c P v with c real.
3. ``rescale_dual_pairs``: (v, u) -> (lambda v, u / lambda) with
   lambda = (|u|^2 / |v|^2)^{1/4}, after which u = s P v, s = +-1.
4. ``signature``: s = v^dagger P v, cross-checked against sign(c).

``build_c_operator`` then forms C = sum_k s_k v_k u_k^dagger.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from numpy.typing import NDArray

from .errors import (
    BrokenPhase,
    IncompleteBasis,
    NotProportional,
    NotPTInvariant,
    SignatureMismatch,
    ZeroCoefficient,
)
from .spectral import BiorthogonalSystem, Reality
from .tolerances import DEFAULT_TOLERANCES, Tolerances


@dataclass(frozen=True)
class PTBasis:
    """Phase-fixed, rescaled dual bases with per-level signature."""

    vectors: NDArray[np.complex128]  # columns phi_n
    duals: NDArray[np.complex128]  # columns phi^n
    energies: NDArray[np.float64]
    signature: tuple[int, ...]
    phase_factors: NDArray[np.complex128]
    lambdas: NDArray[np.float64]
    coefficients: NDArray[np.complex128]
    parity: NDArray[np.float64]
    metric_weight: float
    complete: bool
    label: str

    def __len__(self) -> int:
        return self.vectors.shape[1]


@dataclass(frozen=True)
class COperator:
    matrix: NDArray[np.complex128]
    signature_source: tuple[int, ...]
    basis_label: str
    complete: bool = True

    def continuum(self, metric_weight: float) -> NDArray[np.complex128]:
        """Kernel C(x_i, x_j) in continuum units."""
        return self.matrix / metric_weight


def _require_unbroken(sys: BiorthogonalSystem) -> None:
    bad = [i for i, r in enumerate(sys.reality) if r is not Reality.REAL]
    if bad:
        raise BrokenPhase(
            f"{len(bad)} level(s) have complex eigenvalues (first: n={bad[0]}, "
            f"E={sys.pairs[bad[0]].eigenvalue:.12g}); the PT chain applies only "
            "to the unbroken phase"
        )


def pt_phase(v: NDArray, parity: NDArray) -> complex:
    """d with P conj(v) = d v, read off at the largest-modulus component."""
    w = parity @ v.conj()
    k = int(np.argmax(np.abs(v)))
    return complex(w[k] / v[k])


def fix_pt_phase(sys: BiorthogonalSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> BiorthogonalSystem:
    """Rotate every eigenvector so that P conj(v_n) = v_n.

    The dual is multiplied by the same phase, which keeps u^dagger v = 1.  The
    remaining global sign is fixed by making the largest-modulus component
    of v_n have non-negative real part.
    """
    _require_unbroken(sys)
    p = sys.triple.parity
    v = sys.right.copy()
    u = sys.left.copy()
    for n in range(v.shape[1]):
        vn = v[:, n]
        d = pt_phase(vn, p)
        scale = np.linalg.norm(vn)
        if abs(abs(d) - 1.0) > tol.pt_tol or np.linalg.norm(p @ vn.conj() - d * vn) > tol.pt_tol * scale:
            raise NotPTInvariant(
                f"level n={n} (E={sys.pairs[n].eigenvalue:.12g}) is not a PT eigenstate: "
                f"|d|={abs(d):.12g}, residual {np.linalg.norm(p @ vn.conj() - d * vn) / scale:.3e}"
            )
        phase = np.exp(0.5j * np.angle(d))
        vn = phase * vn
        k = int(np.argmax(np.abs(vn)))
        if vn[k].real < 0:
            phase = -phase
        v[:, n] = phase * sys.right[:, n]
        u[:, n] = phase * sys.left[:, n]
    return sys.with_vectors(v, u)


def pt_phase_residual(vectors: NDArray, parity: NDArray) -> float:
    """max_n ||P conj(v_n) - v_n|| / ||v_n||."""
    diff = parity @ vectors.conj() - vectors
    return float(np.max(np.linalg.norm(diff, axis=0) / np.linalg.norm(vectors, axis=0)))


def compute_c_coefficients(sys: BiorthogonalSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> NDArray[np.complex128]:
    """c_n = (P v_n)^dagger u_n / ||P v_n||^2, with proportionality and reality checked."""
    _require_unbroken(sys)
    p = sys.triple.parity
    v, u = sys.right, sys.left
    pv = p @ v
    c = np.einsum("ij,ij->j", pv.conj(), u) / np.einsum("ij,ij->j", pv.conj(), pv).real
    for n in range(len(c)):
        unorm = np.linalg.norm(u[:, n])
        miss = np.linalg.norm(u[:, n] - c[n] * pv[:, n])
        if miss > tol.rel_tol * unorm:
            raise NotProportional(
                f"level n={n}: dual is not parallel to P v_n "
                f"(relative residual {miss / unorm:.3e})"
            )
        if abs(c[n].imag) > tol.c_real_tol * abs(c[n]):
            raise NotProportional(
                f"level n={n}: coefficient c_n = {c[n]:.12g} is not real "
                f"(|Im c|/|c| = {abs(c[n].imag) / abs(c[n]):.3e})"
            )
    return c


def rescale_dual_pairs(
    sys: BiorthogonalSystem, c: NDArray, tol: Tolerances = DEFAULT_TOLERANCES
) -> PTBasis:
    """Balance each dual pair so that u_n = s_n P v_n with s_n = sign(c_n)."""
    c = np.asarray(c, dtype=complex)
    if np.any(np.abs(c) < tol.zero_guard):
        n = int(np.argmin(np.abs(c)))
        raise ZeroCoefficient(f"level n={n}: |c_n| = {abs(c[n]):.3e} below underflow guard")
    p = sys.triple.parity
    v, u = sys.right, sys.left
    lam = (np.linalg.norm(u, axis=0) ** 2 / np.linalg.norm(v, axis=0) ** 2) ** 0.25
    v = v * lam
    u = u / lam
    s = np.sign(c.real).astype(int)

    pv = p @ v
    c_after = np.einsum("ij,ij->j", pv.conj(), u) / np.einsum("ij,ij->j", pv.conj(), pv).real
    dev = np.abs(c_after - s)
    if np.any(dev > tol.scale_tol):
        n = int(np.argmax(dev))
        raise NotProportional(
            f"level n={n}: rescaled coefficient {c_after[n]:.12g} differs from s_n={s[n]}"
        )
    return PTBasis(
        vectors=v,
        duals=u,
        energies=sys.eigenvalues.real.copy(),
        signature=tuple(int(x) for x in s),
        phase_factors=np.array([pt_phase(sys.right[:, n], p) for n in range(v.shape[1])]),
        lambdas=lam,
        coefficients=c,
        parity=p,
        metric_weight=sys.metric_weight,
        complete=sys.complete,
        label=sys.triple.label,
    )


def signature(basis: PTBasis, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[int, ...]:
    """s_n = <E_n| P |E_n>, asserted to be +-1 and equal to sign(c_n)."""
    v, p = basis.vectors, basis.parity
    raw = np.einsum("ij,ij->j", v.conj(), p @ v)
    out = []
    for n, val in enumerate(raw):
        s = int(round(val.real))
        if s not in (-1, 1) or abs(val - s) > tol.sig_tol:
            raise SignatureMismatch(
                f"level n={n}: <E_n|P|E_n> = {val:.12g} is not +-1 within {tol.sig_tol:g}"
            )
        if s != basis.signature[n]:
            raise SignatureMismatch(
                f"level n={n}: <E_n|P|E_n> gives {s:+d} but sign(c_n) gives {basis.signature[n]:+d}"
            )
        out.append(s)
    return tuple(out)


def build_pt_basis(sys: BiorthogonalSystem, tol: Tolerances = DEFAULT_TOLERANCES) -> PTBasis:
    """Run phase fixing, c_n, rescaling and the signature cross-check."""
    p = sys.triple.parity
    raw_phases = np.array([pt_phase(pair.right, p) for pair in sys.pairs])
    fixed = fix_pt_phase(sys, tol)
    c = compute_c_coefficients(fixed, tol)
    basis = replace(rescale_dual_pairs(fixed, c, tol), phase_factors=raw_phases)
    signature(basis, tol)
    return basis


def build_c_operator(basis: PTBasis, allow_incomplete: bool = False) -> COperator:
    """C_s = sum_k s_k v_k u_k^dagger.

    With ``allow_incomplete`` a basis covering only some levels yields C_s
    restricted to their span: it acts exactly like C_s on those levels but is
    not an involution on the whole space.
    """
    if not basis.complete and not allow_incomplete:
        raise IncompleteBasis(
            f"basis holds {len(basis)} of {basis.vectors.shape[0]} levels; "
            "C_s needs every level to be idempotent"
        )
    s = np.asarray(basis.signature, dtype=float)
    c = (basis.vectors * s) @ basis.duals.conj().T
    return COperator(
        matrix=c,
        signature_source=basis.signature,
        basis_label=basis.label,
        complete=basis.complete,
    )
