"""Residuals for the completeness and orthonormality identities, and the full report.

Inner products follow the position-space convention ``(f, g) = sum_x [X f](x) g(x)``
where ``X`` is PT or CPT and T is complex conjugation.  Under the unit-metric
embedding the sum over nodes is the integral over x, and delta(x - y) is the
identity matrix.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg as sla
from numpy.typing import NDArray

from . import __version__
from .errors import PTDualError
from .model import OperatorTriple, check_pseudo_hermiticity, check_pt_symmetry
from .ptcore import COperator, PTBasis, build_c_operator, build_pt_basis, pt_phase_residual
from .spectral import (
    BiorthogonalSystem,
    SpectrumClassification,
    classify_eigenvalues,
    dual_completeness_residual,
    eigendecompose,
    sort_order,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not_applicable"
REPORTED = "reported"


def _check_dims(*arrays: NDArray) -> None:
    shapes = {a.shape[0] for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


def pt_inner_product(f: NDArray, g: NDArray, parity: NDArray) -> complex:
    """(f, g) = sum_x [PT f](x) g(x) = (P f)^dagger g."""
    f, g = np.asarray(f, dtype=complex), np.asarray(g, dtype=complex)
    _check_dims(f, g, parity)
    return complex(np.dot(parity @ f.conj(), g))


def cpt_inner_product(f: NDArray, g: NDArray, parity: NDArray, c: NDArray) -> complex:
    """<f|g> = sum_x [CPT f](x) g(x)."""
    f, g = np.asarray(f, dtype=complex), np.asarray(g, dtype=complex)
    _check_dims(f, g, parity, c)
    return complex(np.dot(c @ (parity @ f.conj()), g))


@dataclass(frozen=True)
class GramMatrices:
    pt_gram: NDArray[np.complex128]
    cpt_gram: NDArray[np.complex128]
    dual_gram: NDArray[np.complex128]


def gram_matrices(basis: PTBasis, c: COperator) -> GramMatrices:
    v, u, p = basis.vectors, basis.duals, basis.parity
    pt_v = p @ v.conj()
    return GramMatrices(
        pt_gram=pt_v.T @ v,
        cpt_gram=(c.matrix @ pt_v).T @ v,
        dual_gram=u.conj().T @ v,
    )


def signed_completeness_residual(basis: PTBasis) -> float:
    """||sum_n s_n phi_n(x) phi_n(y) - delta(x - y)||_F."""
    v = basis.vectors
    s = np.asarray(basis.signature, dtype=float)
    return float(np.linalg.norm((v * s) @ v.T - np.eye(v.shape[0])))


def signed_completeness_operator_residual(basis: PTBasis) -> float:
    """||sum_n s_n |E_n><E_n| P - I||_F; independent of the phase convention."""
    v, p = basis.vectors, basis.parity
    s = np.asarray(basis.signature, dtype=float)
    return float(np.linalg.norm((v * s) @ v.conj().T @ p - np.eye(v.shape[0])))


def dual_completeness_residual_signed(basis: PTBasis) -> float:
    """||sum_n s_n phi^n(x) phi^n(y) - delta(x - y)||_F."""
    u = basis.duals
    s = np.asarray(basis.signature, dtype=float)
    return float(np.linalg.norm((u * s) @ u.T - np.eye(u.shape[0])))


def cpt_completeness_residual(basis: PTBasis, c: COperator) -> float:
    """||sum_n [CPT phi_n](x) phi_n(y) - delta(x - y)||_F."""
    v, p = basis.vectors, basis.parity
    return float(np.linalg.norm((c.matrix @ (p @ v.conj())) @ v.T - np.eye(v.shape[0])))


def c_kernel_residual(basis: PTBasis, c: COperator) -> float:
    """Distance between C_s and its position kernel sum_n phi_n(x) phi_n(y)."""
    v = basis.vectors
    return float(np.linalg.norm(c.matrix - v @ v.T))


def c_eigenvalue_mismatch(c: COperator) -> float:
    """Largest gap between the sorted eigenvalues of C and the sorted signature."""
    ev = sla.eigvals(c.matrix)
    ev = ev[sort_order(ev)]
    s = np.sort(np.asarray(c.signature_source, dtype=float))
    return float(np.max(np.abs(ev - s)))


@dataclass
class Entry:
    value: float | None
    tolerance: float | None
    status: str
    note: str = ""


@dataclass
class ResidualReport:
    label: str
    dimension: int
    metric_weight: float
    entries: dict[str, Entry] = field(default_factory=dict)
    all_real: bool | None = None
    broken_pairs: int | None = None
    max_imag_over_scale: float | None = None
    condition_estimate: float | None = None
    energies: list[complex] = field(default_factory=list)
    signature: list[int] = field(default_factory=list)
    tolerances: dict[str, float] = field(default_factory=dict)
    timestamp: str | None = None

    @property
    def passed(self) -> bool:
        return all(e.status != FAIL for e in self.entries.values())

    @property
    def failures(self) -> list[str]:
        return [k for k, e in self.entries.items() if e.status == FAIL]

    def gate(self, name: str, value: float, tolerance: float, note: str = "") -> None:
        status = PASS if value <= tolerance else FAIL
        self.entries[name] = Entry(float(value), float(tolerance), status, note)

    def report(self, name: str, value: float, note: str = "") -> None:
        self.entries[name] = Entry(float(value), None, REPORTED, note)

    def fail(self, names: list[str], note: str) -> None:
        for name in names:
            self.entries[name] = Entry(None, None, FAIL, note)

    def skip(self, names: list[str], note: str) -> None:
        for name in names:
            self.entries[name] = Entry(None, None, NOT_APPLICABLE, note)

    def to_flat(self) -> dict[str, object]:
        """Flat key-value view used by both the JSON and CSV writers."""
        out: dict[str, object] = {
            "label": self.label,
            "version": __version__,
            "dimension": self.dimension,
            "metric_weight": self.metric_weight,
            "passed": self.passed,
            "all_real": self.all_real,
            "broken_pairs": self.broken_pairs,
            "max_imag_over_scale": self.max_imag_over_scale,
            "condition_estimate": self.condition_estimate,
            "levels": len(self.energies),
        }
        if self.timestamp is not None:
            out["timestamp"] = self.timestamp
        for n, e in enumerate(self.energies):
            out[f"energy.{n}.re"] = float(e.real)
            out[f"energy.{n}.im"] = float(e.imag)
        for n, s in enumerate(self.signature):
            out[f"signature.{n}"] = int(s)
        for name, e in self.entries.items():
            out[f"{name}.value"] = e.value
            out[f"{name}.tolerance"] = e.tolerance
            out[f"{name}.status"] = e.status
            if e.note:
                out[f"{name}.note"] = e.note
        for name, value in self.tolerances.items():
            out[f"tol.{name}"] = value
        return out


_SPECTRAL = ["biorthonormality", "biorthogonal_completeness"]
_CHAIN = [
    "pt_phase",
    "signed_completeness",
    "dual_completeness",
    "cpt_completeness",
    "c_squared",
    "c_commutator",
    "c_kernel",
    "c_eigenvalues",
    "c_nonhermiticity",
]
_LEVELS = ["pt_gram_deviation", "cpt_gram_deviation", "gram_chain"]


def _refusal(exc: PTDualError) -> str:
    return f"refused at {exc.stage}: {type(exc).__name__}: {exc}"


def _gate_chain(rep: ResidualReport, t: OperatorTriple, basis: PTBasis, c: COperator, tol: Tolerances) -> None:
    n = t.dimension
    h = t.hamiltonian
    hnorm = float(np.linalg.norm(h)) or 1.0
    rep.gate("pt_phase", pt_phase_residual(basis.vectors, basis.parity), tol.pt_tol)
    signed = signed_completeness_residual(basis)
    rep.gate("signed_completeness", signed, tol.comp_tol)
    rep.report("signed_completeness_continuum", signed / t.metric_weight, "continuum units (divided by metric weight)")
    rep.gate("dual_completeness", dual_completeness_residual_signed(basis), tol.comp_tol)
    rep.gate("cpt_completeness", cpt_completeness_residual(basis, c), tol.comp_tol)
    cm = c.matrix
    rep.gate("c_squared", np.linalg.norm(cm @ cm - np.eye(n)), tol.c_tol * n)
    rep.gate("c_commutator", np.linalg.norm(cm @ h - h @ cm) / hnorm, tol.c_tol)
    rep.gate("c_kernel", c_kernel_residual(basis, c), tol.c_tol * n)
    rep.gate("c_eigenvalues", c_eigenvalue_mismatch(c), tol.gram_tol)
    rep.report("c_nonhermiticity", np.linalg.norm(cm - cm.conj().T), "informational: C is not self-adjoint in general")


def _gate_levels(rep: ResidualReport, basis: PTBasis, c: COperator, tol: Tolerances, source: str) -> None:
    g = gram_matrices(basis, c)
    s = np.diag(np.asarray(basis.signature, dtype=float))
    k = len(basis)
    rep.gate("pt_gram_deviation", np.linalg.norm(g.pt_gram - s), tol.gram_tol, source)
    rep.gate("cpt_gram_deviation", np.linalg.norm(g.cpt_gram - np.eye(k)), tol.gram_tol, source)
    rep.report("gram_chain", np.linalg.norm(g.cpt_gram - g.dual_gram), "||cpt_gram - dual_gram||_F")


def _slice_basis(basis: PTBasis, k: int) -> PTBasis:
    return replace(
        basis,
        vectors=basis.vectors[:, :k],
        duals=basis.duals[:, :k],
        energies=basis.energies[:k],
        signature=basis.signature[:k],
        phase_factors=basis.phase_factors[:k],
        lambdas=basis.lambdas[:k],
        coefficients=basis.coefficients[:k],
        complete=k == basis.vectors.shape[0],
    )


def full_report(
    t: OperatorTriple,
    tol: Tolerances = DEFAULT_TOLERANCES,
    levels: int | None = None,
    timestamp: bool = True,
) -> ResidualReport:
    """Run the whole chain on ``t`` and collect every residual.

    Upstream refusals become failure entries; stages that do not apply to a
    broken-phase spectrum are marked not-applicable.  Gram matrices cover the
    lowest ``levels`` levels (all of them by default); completeness and
    C-operator residuals always need the full basis.
    """
    n = t.dimension
    k = n if levels is None else int(levels)
    if not 1 <= k <= n:
        raise ValueError(f"levels must lie in [1, {n}], got {levels}")
    rep = ResidualReport(label=t.label, dimension=n, metric_weight=t.metric_weight, tolerances=tol.as_dict())
    if timestamp:
        rep.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")

    rep.gate("pt_symmetry", check_pt_symmetry(t), tol.model_tol)
    rep.gate("pseudo_hermiticity", check_pseudo_hermiticity(t), tol.model_tol)

    system: BiorthogonalSystem | None = None
    try:
        system = eigendecompose(t, tol)
        spectrum = system.spectrum
        rep.condition_estimate = system.condition_estimate
    except PTDualError as exc:
        rep.fail(_SPECTRAL, _refusal(exc))
        spectrum = sla.eigvals(t.hamiltonian)
        spectrum = spectrum[sort_order(spectrum)]
        spectral_error: PTDualError | None = exc
    else:
        spectral_error = None
        u, v = system.left, system.right
        rep.gate("biorthonormality", np.linalg.norm(u.conj().T @ v - np.eye(n)), tol.bi_tol)
        rep.gate("biorthogonal_completeness", dual_completeness_residual(system), tol.comp_tol)

    classification: SpectrumClassification | None
    try:
        classification = classify_eigenvalues(spectrum, tol.reality_tol)
    except PTDualError as exc:
        classification = None
        rep.fail(["classification"], _refusal(exc))
    else:
        rep.all_real = classification.all_real
        rep.broken_pairs = classification.broken_pairs
        rep.max_imag_over_scale = classification.max_imag_over_scale
    rep.energies = [complex(e) for e in spectrum[:k]]

    full_basis: PTBasis | None = None
    if classification is None:
        rep.skip(_CHAIN, "spectrum could not be classified")
    elif not classification.all_real:
        rep.skip(_CHAIN, f"broken PT phase: {classification.broken_pairs} complex-conjugate pair(s)")
    elif system is None:
        rep.fail(_CHAIN, _refusal(spectral_error))
    else:
        try:
            full_basis = build_pt_basis(system, tol)
            c_full = build_c_operator(full_basis)
        except PTDualError as exc:
            rep.fail(_CHAIN, _refusal(exc))
            full_basis = None
        else:
            _gate_chain(rep, t, full_basis, c_full, tol)

    # low-lying levels: from the full basis when available, otherwise a subset solve
    low_real = bool(
        np.all(np.abs(spectrum[:k].imag) <= tol.reality_tol * np.maximum(1.0, np.abs(spectrum[:k].real)))
    )
    if full_basis is not None:
        sub = _slice_basis(full_basis, k)
        _gate_levels(rep, sub, build_c_operator(sub, allow_incomplete=True), tol, "full basis")
        rep.signature = list(sub.signature)
    elif not low_real:
        rep.skip(_LEVELS, f"complex eigenvalues among the lowest {k} levels")
    else:
        try:
            sub_system = eigendecompose(t, tol, levels=k)
            sub = build_pt_basis(sub_system, tol)
            sub_c = build_c_operator(sub, allow_incomplete=not sub.complete)
        except PTDualError as exc:
            rep.fail(_LEVELS, _refusal(exc))
        else:
            rep.signature = list(sub.signature)
            _gate_levels(rep, sub, sub_c, tol, f"subset solve of the lowest {len(sub)} levels")
    return rep
