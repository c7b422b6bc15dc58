"""Parameter sweeps across the real/complex spectral transition.

Each sample point records whether the ``levels`` low-lying eigenvalues (those
of smallest modulus) are all real.  Wherever that flag flips between neighbouring samples the boundary is
bracketed by bisection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .config import RunConfig, SweepSpec
from .errors import PTDualError
from .ptcore import build_pt_basis
from .spectral import UnpairedComplexEigenvalue, classify_eigenvalues, eigendecompose, sort_order


@dataclass(frozen=True)
class SweepPoint:
    value: float
    all_real: bool
    broken_pairs: int
    max_imag_over_scale: float
    eigenvalues: tuple[complex, ...]
    signature: tuple[int, ...]


@dataclass(frozen=True)
class Boundary:
    lower: float
    upper: float
    real_side: str  # "lower" or "upper"

    @property
    def estimate(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _low_spectrum(cfg: RunConfig, k: int) -> np.ndarray:
    """The k eigenvalues of smallest modulus, ordered by real part.

    Selecting by modulus keeps box-wall artefacts of truncated grids (complex
    pairs with large negative real part) out of the low-lying window.
    """
    w = sla.eigvals(cfg.build().hamiltonian)
    w = w[sort_order(w)]
    low = w[np.sort(np.argsort(np.abs(w), kind="stable")[:k])]
    return low


def _is_all_real(values: np.ndarray, reality_tol: float) -> tuple[bool, int, float]:
    try:
        c = classify_eigenvalues(values, reality_tol)
    except UnpairedComplexEigenvalue:
        # a conjugate partner fell outside the window: the window is not real
        scale = np.maximum(1.0, np.abs(values.real))
        return False, 0, float(np.max(np.abs(values.imag) / scale))
    return c.all_real, c.broken_pairs, c.max_imag_over_scale


def evaluate_point(cfg: RunConfig, value: float, k: int) -> SweepPoint:
    values = _low_spectrum(cfg, k)
    tol = cfg.tolerances
    all_real, pairs, max_imag = _is_all_real(values, tol.reality_tol)
    sig: tuple[int, ...] = ()
    if all_real:
        try:
            t = cfg.build()
            system = eigendecompose(t, tol, levels=k if k < t.dimension else None)
            sig = build_pt_basis(system, tol).signature[:k]
        except PTDualError:
            # near an exceptional point the chain may refuse; flags stay valid
            sig = ()
    return SweepPoint(
        value=float(value),
        all_real=all_real,
        broken_pairs=pairs,
        max_imag_over_scale=max_imag,
        eigenvalues=tuple(complex(v) for v in values),
        signature=sig,
    )


def _flag(cfg: RunConfig, param: str, value: float, k: int) -> bool:
    values = _low_spectrum(cfg.with_param(param, value), k)
    return _is_all_real(values, cfg.tolerances.reality_tol)[0]


def bisect_boundary(cfg: RunConfig, param: str, lo: float, hi: float, k: int, width: float) -> Boundary:
    """Shrink [lo, hi] around a flip of the all-real flag until hi - lo <= width."""
    flag_lo = _flag(cfg, param, lo, k)
    flag_hi = _flag(cfg, param, hi, k)
    if flag_lo == flag_hi:
        raise ValueError(f"no transition inside [{lo}, {hi}]")
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if _flag(cfg, param, mid, k) == flag_lo:
            lo = mid
        else:
            hi = mid
    return Boundary(lower=lo, upper=hi, real_side="lower" if flag_lo else "upper")


def run_sweep(cfg: RunConfig, spec: SweepSpec) -> tuple[list[SweepPoint], list[Boundary]]:
    spec.validate(cfg.model)
    k = cfg.resolved_levels(cfg.build().dimension)
    points = [
        evaluate_point(cfg.with_param(spec.param, float(v)), float(v), k) for v in spec.points()
    ]
    boundaries = [
        bisect_boundary(cfg, spec.param, a.value, b.value, k, spec.bisect_width)
        for a, b in zip(points, points[1:])
        if a.all_real != b.all_real
    ]
    return points, boundaries
