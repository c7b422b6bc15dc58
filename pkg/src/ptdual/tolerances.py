from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Named numerical tolerances shared by every stage of the pipeline.

    The first eight are the user-facing set exposed on the command line as
    ``--tol.<name>``; the rest guard internal consistency checks.
    """

    eig_tol: float = 1e-10
    bi_tol: float = 1e-9
    pt_tol: float = 1e-8
    reality_tol: float = 1e-6
    gram_tol: float = 1e-8
    c_tol: float = 1e-10
    degeneracy_tol: float = 1e-8
    cond_max: float = 1e10
    # internal guards
    model_tol: float = 1e-12
    comp_tol: float = 1e-8
    rel_tol: float = 1e-8
    c_real_tol: float = 1e-9
    scale_tol: float = 1e-8
    sig_tol: float = 1e-8
    zero_guard: float = 1e-150

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"tolerance {f.name} must be positive, got {value!r}")

    def with_overrides(self, **overrides: float) -> Tolerances:
        unknown = set(overrides) - {f.name for f in fields(self)}
        if unknown:
            raise ValueError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        return replace(self, **{k: float(v) for k, v in overrides.items()})

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


DEFAULT_TOLERANCES = Tolerances()
