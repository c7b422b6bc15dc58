import math

import numpy as np
import pytest

import oracles
from ptdual.errors import ModelError
from ptdual.model import (
    GridSpec,
    build_explicit,
    build_grid_hamiltonian,
    build_matrix_model,
    check_pseudo_hermiticity,
    check_pt_symmetry,
    potential,
    reversal,
)


@pytest.mark.parametrize("n", [4, 800])
def test_even_point_count_rejected_with_parity_message(n):
    with pytest.raises(ModelError, match="parity center"):
        GridSpec(1.0, n)


@pytest.mark.parametrize("L,n", [(0.0, 11), (-1.0, 11), (float("nan"), 11), (1.0, 1), (1.0, 7.5)])
def test_bad_grid_rejected(L, n):
    with pytest.raises(ModelError):
        GridSpec(L, n)


def test_nodes_are_exactly_mirror_symmetric():
    spec = GridSpec(12.0, 601)
    x = spec.nodes
    assert x[300] == 0.0
    assert np.array_equal(x, -x[::-1])
    assert spec.spacing == pytest.approx(0.04)
    assert x[0] == pytest.approx(-12.0) and x[-1] == pytest.approx(12.0)


def test_reversal_is_involutive_permutation():
    p = reversal(5)
    assert np.array_equal(p @ p, np.eye(5))
    assert np.array_equal(p @ np.arange(5), np.arange(5)[::-1])


def test_potential_principal_branch():
    x = np.array([-2.0, -0.5, 0.0, 0.5, 2.0])
    # nu = 1: x^2 (ix) = i x^3
    assert np.allclose(potential(x, 1.0), 1j * x**3)
    assert np.array_equal(potential(x, 0.0), (x**2).astype(complex))
    # PT symmetry of the potential: conj(V(-x)) = V(x)
    v = potential(x, 0.7)
    assert np.allclose(np.conj(v[::-1]), v)


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 1.5, 1.99])
def test_grid_hamiltonian_satisfies_both_premises(nu):
    t = build_grid_hamiltonian(GridSpec(3.0, 41), nu)
    assert check_pt_symmetry(t) <= 1e-15
    assert check_pseudo_hermiticity(t) <= 1e-15
    assert np.array_equal(t.hamiltonian, t.hamiltonian.T)
    assert t.metric_weight == pytest.approx(3.0 / 20)


@pytest.mark.parametrize("nu", [-0.1, 2.0, 3.0])
def test_nu_outside_real_line_range_rejected(nu):
    with pytest.raises(ModelError, match="contour"):
        build_grid_hamiltonian(GridSpec(3.0, 41), nu)


def test_hermitian_limit_is_real_symmetric():
    t = build_grid_hamiltonian(GridSpec(3.0, 41), 0.0)
    assert np.all(t.hamiltonian.imag == 0)


def test_matrix_model_matches_closed_form():
    t = build_matrix_model(1.0, 1.0, math.pi / 6)
    assert np.allclose(t.hamiltonian, oracles.matrix2_entries(1.0, 1.0, math.pi / 6), atol=0)
    assert check_pt_symmetry(t) == 0.0
    assert check_pseudo_hermiticity(t) == 0.0
    assert t.dimension == 2


def test_explicit_checks_parity():
    h = np.diag([1.0, 2.0])
    with pytest.raises(ModelError, match="involutive"):
        build_explicit(h, [[1, 0], [0, 2]])
    with pytest.raises(ModelError, match="self-adjoint"):
        build_explicit(h, [[-1, 0], [1, 1]])  # involutive, not symmetric
    with pytest.raises(ModelError, match="mismatch"):
        build_explicit(h, np.eye(3))
    with pytest.raises(ModelError, match="square"):
        build_explicit(np.ones((2, 3)), np.eye(2))


def test_explicit_rejects_complex_parity():
    with pytest.raises(ModelError, match="real"):
        build_explicit(np.eye(2), [[0, 1j], [-1j, 0]])


def test_triple_is_immutable():
    t = build_matrix_model(1.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        t.hamiltonian[0, 0] = 0
    with pytest.raises(ModelError):
        build_explicit(np.eye(2), np.eye(2), w=0.0)


def test_premise_residuals_detect_violation():
    h = np.array([[1.0, 2.0], [0.5, 3.0]], dtype=complex)
    t = build_explicit(h, [[0, 1], [1, 0]])
    assert check_pt_symmetry(t) > 0.1
    assert check_pseudo_hermiticity(t) > 0.1
