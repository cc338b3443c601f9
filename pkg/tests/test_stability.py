import itertools
import math

import numpy as np
import pytest

from fourws.controller import ControlGains
from fourws.errors import PlacementError
from fourws.stability import (
    CharPoly,
    PolePlacementSpec,
    Stability,
    boundary_curves,
    char_coeffs,
    classify,
    closed_loop_matrix,
    crab_gains,
    eigenvalues,
    is_stable,
    linearize_path_frame,
    place_double_pole,
    sample_region,
    state_matrices,
)
from fourws.vehicle_model import VehicleParams

PARAMS = VehicleParams(2.7, 1.35)


def test_char_coeffs_examples():
    p = char_coeffs(ControlGains(0.1, 0.2, 0), 5, PARAMS, 0)
    assert (p.c1, p.c0) == pytest.approx((10 / 27, 25 / 27), rel=1e-14)
    assert char_coeffs(ControlGains(0.7, -3, 1), 20, PARAMS, 0).c0 == 0


def test_closed_loop_matrix_examples():
    m = closed_loop_matrix(ControlGains(0.1, 0.3, 0), 5, PARAMS, 0)
    np.testing.assert_allclose(m, [[0, 5], [-5 * 0.1 / 2.7, -5 * 0.3 / 2.7]], rtol=1e-14)
    np.testing.assert_array_equal(closed_loop_matrix(ControlGains(0, 0, 0.3), 5, PARAMS, 0), [[0, 5], [0, 0]])


def test_trace_and_determinant_match_coefficients():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        k1, k2 = rng.uniform(-2, 2, 2)
        a, v, f, kappa = rng.uniform(-2, 2), rng.uniform(0.5, 40), rng.uniform(1, 5), rng.uniform(-0.2, 0.2)
        params = VehicleParams(f, f / 2)
        g = ControlGains(k1, k2, a)
        m = closed_loop_matrix(g, v, params, kappa)
        p = char_coeffs(g, v, params, kappa)
        scale = v * v * (1 + abs(k1) + abs(k2)) * (1 + abs(a))
        assert -np.trace(m) == pytest.approx(p.c1, abs=1e-12 * scale)
        assert np.linalg.det(m) == pytest.approx(p.c0, abs=1e-12 * scale)


def test_is_stable_examples():
    assert is_stable(ControlGains(0.00675, 0.27, 0), 20, PARAMS, 0) == Stability.STABLE
    assert is_stable(ControlGains(-0.01, 0.27, 0), 20, PARAMS, 0) == Stability.UNSTABLE
    assert is_stable(ControlGains(0, 0.3, 0), 20, PARAMS, 0) == Stability.MARGINAL


def test_classify_band():
    assert classify(1e-13, 1.0) == Stability.MARGINAL
    assert classify(-1e-13, 1.0) == Stability.MARGINAL
    assert classify(-1e-11, 1.0) == Stability.UNSTABLE
    assert classify(1.0, -1e-11) == Stability.UNSTABLE
    assert classify(1e-11, 1e-11) == Stability.STABLE
    np.testing.assert_array_equal(classify([1, -1, 0], [1, 1, 1]), [1, 0, 2])


def test_eigenvalue_examples():
    assert eigenvalues(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx((-1j, 1j))
    assert eigenvalues(np.array([[0.0, 5.0], [0.0, 0.0]])) == (0, 0)
    assert eigenvalues(np.array([[-3.0, 0.0], [0.0, 2.0]])) == pytest.approx((-3, 2))
    assert CharPoly(2.0, 1.0).roots() == pytest.approx((-1, -1))


def test_eigenvalues_agree_with_numpy():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        m = rng.normal(size=(2, 2))
        ours = np.sort_complex(np.array(eigenvalues(m)))
        ref = np.sort_complex(np.linalg.eigvals(m))
        np.testing.assert_allclose(ours, ref, atol=1e-7)


def test_placement_examples():
    cases = [
        ((0.0, 20, 0.0), (0.00675, 0.27)),
        ((0.0, 20, 0.01), (0.00648, 0.27)),
        ((0.5, 20, 0.0), (0.0135, 0.50355)),
    ]
    for (a, v, kappa), expected in cases:
        g = place_double_pole(PolePlacementSpec(-1.0), a, v, PARAMS, kappa)
        assert (g.k1, g.k2) == pytest.approx(expected, rel=1e-12)
        p = char_coeffs(g, v, PARAMS, kappa)
        assert (p.c1, p.c0) == pytest.approx((2.0, 1.0), rel=1e-12)


def test_placement_closed_forms_match_direct_solve():
    """Every branch agrees with a plain linear solve of the coefficient equations."""
    f = PARAMS.wheelbase_f
    for a, v, kappa, lam in itertools.product(
        (-1.5, -1, -0.5, 0, 0.5, 1, 1.5), (5, 20), (0, 0.01, 0.1), (-1, -2, -3)
    ):
        if a == 1 and kappa == 0:
            continue
        g = place_double_pole(PolePlacementSpec(lam), a, v, PARAMS, kappa)
        M = np.array([[v * a, v * (1 - a) / f], [v * v * (1 - a) / f, -v * v * a * kappa**2]])
        rhs = np.array([-2 * lam, lam * lam - v * v * kappa**2])
        k1, k2 = np.linalg.solve(M, rhs)
        assert (g.k1, g.k2) == pytest.approx((k1, k2), rel=1e-9, abs=1e-12)


def test_placement_errors():
    with pytest.raises(PlacementError, match="structural"):
        place_double_pole(PolePlacementSpec(-1.0), 1.0, 5.0, PARAMS, 0.0)
    with pytest.raises(ValueError):
        PolePlacementSpec(0.5)
    assert PolePlacementSpec(0.0).lambda0 == 0.0


def test_crab_gains_pin_one_root_at_zero():
    g = crab_gains(-1.0, 5.0, k2=0.4)
    roots = eigenvalues(closed_loop_matrix(g, 5.0, PARAMS, 0.0))
    assert roots == pytest.approx((-2.0, 0.0), abs=1e-12)


def test_boundary_curve_examples():
    curves = boundary_curves(0.0, PARAMS, 0.0, ((-1, 1), (-1, 1)), n=11)
    np.testing.assert_allclose(curves["c0"][:, 0], 0.0, atol=1e-15)
    np.testing.assert_allclose(curves["c1"][:, 1], 0.0, atol=1e-15)
    curves = boundary_curves(0.0, PARAMS, 0.1, ((-1, 1), (-1, 1)), n=11)
    np.testing.assert_allclose(curves["c0"][:, 0], -0.027, rtol=1e-12)
    curves = boundary_curves(1.0, PARAMS, 0.0, ((-1, 1), (-1, 1)), n=11)
    assert set(curves) == {"c1"}
    np.testing.assert_allclose(curves["c1"][:, 0], 0.0, atol=1e-15)
    curves = boundary_curves(1.0, PARAMS, 0.1, ((-1, 1), (-1, 1)), n=11)
    np.testing.assert_allclose(curves["c0"][:, 1], 1.0, rtol=1e-12)


@pytest.mark.parametrize("a", [-1.5, -1, -0.5, 0, 0.5, 1, 1.5])
@pytest.mark.parametrize("kappa", [0, 0.01, 0.1])
def test_boundary_points_are_marginal(a, kappa):
    for name, pts in boundary_curves(a, PARAMS, kappa, ((-1, 1), (-1, 1)), n=51).items():
        for k1, k2 in pts:
            p = char_coeffs(ControlGains(k1, k2, a), 5.0, PARAMS, kappa)
            value = p.c1 if name == "c1" else p.c0
            assert abs(value) < 1e-12


def test_region_example_and_ordering():
    grid = sample_region((-0.1, 1, 12), (-0.1, 1, 12), 0.0, 5.0, PARAMS, 0.0)
    K1, K2 = np.meshgrid(grid.k1, grid.k2, indexing="ij")
    zero1, zero2 = np.abs(K1) < 1e-15, np.abs(K2) < 1e-15
    expected = np.where((K1 > 0) & (K2 > 0), 1, 0)
    expected[(zero1 & (K2 >= 0)) | (zero2 & (K1 >= 0))] = 2
    np.testing.assert_array_equal(grid.cells, expected)
    first = list(grid.iter_cells())[:2]
    assert first[0][:2] == (grid.k1[0], grid.k2[0])
    assert first[1][:2] == (grid.k1[0], grid.k2[1])
    with pytest.raises(ValueError):
        sample_region((0, 1, 1), (0, 1, 5), 0.0, 5.0, PARAMS, 0.0)


def test_region_threads_match_serial():
    serial = sample_region((-1, 1, 101), (-1, 1, 101), 0.5, 5.0, PARAMS, 0.1)
    threaded = sample_region((-1, 1, 101), (-1, 1, 101), 0.5, 5.0, PARAMS, 0.1, workers=4)
    np.testing.assert_array_equal(serial.cells, threaded.cells)


def test_a_one_straight_ignores_k2():
    grid = sample_region((-1, 1, 41), (-1, 1, 41), 1.0, 5.0, PARAMS, 0.0)
    assert (grid.cells == grid.cells[:, :1]).all()


def test_placed_gains_are_stable():
    for a, kappa, lam in itertools.product((-1.5, -0.5, 0, 0.5, 1.5), (0, 0.01, 0.1), (-1, -2, -3)):
        g = place_double_pole(PolePlacementSpec(lam), a, 5.0, PARAMS, kappa)
        assert is_stable(g, 5.0, PARAMS, kappa) == Stability.STABLE


@pytest.mark.parametrize("v,kappa", [(5.0, 0.1), (20.0, 0.01), (5.0, 0.0)])
def test_linearization_matches_design_model(v, kappa):
    """Finite differences reproduce A and B, except B[1, 0].

    The exact derivative of the yaw error rate with respect to the front angle
    carries a factor 1 + (kappa f)**2 that the design model leaves out; the
    mismatch vanishes on straight roads.
    """
    A_fd, B_fd = linearize_path_frame(v, PARAMS, kappa)
    A, B = state_matrices(v, PARAMS, kappa)
    np.testing.assert_allclose(A_fd, A, atol=1e-7)
    f = PARAMS.wheelbase_f
    np.testing.assert_allclose(B_fd[0], B[0], atol=1e-7)
    assert B_fd[1, 1] == pytest.approx(B[1, 1], abs=1e-7)
    assert B_fd[1, 0] == pytest.approx(v * (1 + (kappa * f) ** 2) / f, abs=1e-7)
    if kappa == 0:
        assert B_fd[1, 0] == pytest.approx(B[1, 0], abs=1e-7)
    else:
        assert abs(B_fd[1, 0] - B[1, 0]) > 1e-3
