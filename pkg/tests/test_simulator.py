import csv
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfekit import catalog
from gfekit.simulator import (
    CSV_HEADER,
    Field,
    Grid,
    PeriodicityError,
    RunConfig,
    energy,
    enstrophy,
    fd_residual_grid,
    residual_from_jet,
    run,
    stationarity_drift,
    stencil_weights,
    step,
    stream_function,
)

# -- grid and fields -----------------------------------------------------


@pytest.mark.parametrize("n", [8, 48, 100])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        Grid(n, 64)


def test_dealias_mask_keeps_two_thirds():
    g = Grid(64, 64)
    m = g.dealias_mask()
    assert m.shape == (64, 33)
    assert m[0, 21] and not m[0, 22]
    assert m[21, 0] and not m[22, 0] and m[-21, 0]


def test_energy_and_enstrophy_of_a_single_mode():
    g = Grid(32, 32)
    X, Y = g.nodes()
    w = Field(g, np.sin(X))
    # psi = -sin x, so both integrals are (1/2)(1/2)(2 pi)^2
    assert energy(w) == pytest.approx(math.pi**2, rel=1e-13)
    assert enstrophy(w) == pytest.approx(math.pi**2, rel=1e-13)
    assert np.allclose(stream_function(w).values, -np.sin(X), atol=1e-13)


def test_step_requires_zero_mean():
    g = Grid(16, 16)
    with pytest.raises(ValueError, match="mean"):
        step(Field(g, np.ones((16, 16))), 1.0, 1e-3)


def test_field_shape_checked():
    with pytest.raises(ValueError):
        Field(Grid(16, 16), np.zeros((16, 32)))


def test_single_rossby_step_matches_exact_phase():
    g = Grid(32, 32)
    X, Y = g.nodes()
    dt = 1e-2
    w1 = step(Field(g, -np.sin(X)), 1.0, dt)
    # w = -sin(x + t) for A = k = beta = 1; one RK4 step is accurate to dt^5
    assert np.max(np.abs(w1.values + np.sin(X + dt))) < 1e-10


def _smooth_field(seed):
    g = Grid(32, 32)
    X, Y = g.nodes()
    rng = np.random.default_rng(seed)
    w = sum(rng.normal() * np.cos(kx * X + ky * Y + rng.uniform(0, 2 * np.pi))
            for kx, ky in [(1, 0), (0, 1), (1, 1), (2, 1), (1, -2)])
    return Field(g, w - w.mean())


@settings(max_examples=5, deadline=None)
@given(st.integers(0, 10**6))
def test_spectral_step_conserves_energy_and_enstrophy(seed):
    w = _smooth_field(seed)
    e0, z0 = energy(w), enstrophy(w)
    for _ in range(50):
        w = step(w, 1.0, 2e-3)
    assert abs(energy(w) - e0) <= 1e-8 * e0
    assert abs(enstrophy(w) - z0) <= 1e-8 * z0


def test_zonal_flow_is_stationary():
    assert stationarity_drift(catalog.zonal_flow("sin(y)")) <= 1e-12
    assert stationarity_drift(catalog.zonal_flow("cos(2*y)")) <= 1e-12


def test_short_rossby_run(tmp_path):
    rec = catalog.get("rossby", A=1, k=1, beta=1)
    res = run(RunConfig(rec, N=32, dt=1e-2, T=1.0, output_every=20))
    assert res.steps == 100 and res.dt == pytest.approx(1e-2)
    assert res.final_linf < 1e-9
    assert res.relative_drift("energy") < 1e-10
    path = res.write_csv(tmp_path / "run.csv")
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == CSV_HEADER
    assert float(rows[-1][0]) == pytest.approx(1.0)
    again = run(RunConfig(rec, N=32, dt=1e-2, T=1.0, output_every=20))
    assert np.array_equal(res.final.values, again.final.values)


def test_dt_adjusted_to_land_on_T():
    rec = catalog.get("rossby", A=1, k=1, beta=1)
    n, dt = RunConfig(rec, dt=0.3, T=1.0).steps()
    assert n == 4 and dt == 0.25


def test_non_periodic_solution_rejected():
    with pytest.raises(PeriodicityError):
        run(RunConfig(catalog.polynomial_solution(1, 0, 1), N=16, T=0.01))


def test_beta_mismatch_rejected():
    with pytest.raises(ValueError, match="beta"):
        run(RunConfig(catalog.get("rossby", A=1, k=1, beta=1), N=16, T=0.01, beta=2.0))


# -- finite-difference grid ------------------------------------------------


def test_textbook_stencils():
    F = Fraction
    assert stencil_weights(1, 2) == ((-1, F(-1, 2)), (1, F(1, 2)))
    assert stencil_weights(2, 2) == ((-1, F(1)), (0, F(-2)), (1, F(1)))
    assert stencil_weights(1, 4) == ((-2, F(1, 12)), (-1, F(-2, 3)), (1, F(2, 3)), (2, F(-1, 12)))
    assert stencil_weights(3, 2) == ((-2, F(-1, 2)), (-1, F(1)), (1, F(-1)), (2, F(1, 2)))


@given(st.integers(1, 3), st.sampled_from([2, 4]), st.lists(st.fractions(-5, 5), min_size=1, max_size=6))
def test_stencils_exact_on_low_degree_polynomials(deriv, order, coeffs):
    # exact at x = 0 for every polynomial of degree < deriv + order
    coeffs = (coeffs + [Fraction(0)] * 8)[: deriv + order]
    exact = coeffs[deriv] * math.factorial(deriv)
    approx = sum(w * sum(c * Fraction(j) ** k for k, c in enumerate(coeffs)) for j, w in stencil_weights(deriv, order))
    assert approx == exact


def test_residual_from_jet_matches_formula():
    d = {k: mpmath.mpf(i + 1) for i, k in enumerate(["H_x", "H_y", "H_txx", "H_tyy", "H_xxx", "H_xyy", "H_xxy", "H_yyy"])}
    # w_t = 7, w_x = 11, w_y = 15
    assert residual_from_jet(d, 2) == 7 - 2 * 11 + 1 * 15 + 2 * 1


@settings(max_examples=10, deadline=None)
@given(st.floats(1e-3, 0.5), st.sampled_from([2, 4]))
def test_cubic_polynomial_is_exact_at_any_spacing(h, order):
    rec = catalog.polynomial_solution(1, 1, 1)
    res = fd_residual_grid(rec, "t=0:1,x=-1:1,y=-1:1", h, order, refine=False)
    assert res.max_abs <= 1e-10


@pytest.mark.parametrize("order", [2, 4])
def test_harmonic_observed_order(order):
    rec = catalog.harmonic_solution(1)
    res = fd_residual_grid(rec, "t=0:1,x=1:2,y=-0.4:0.4", 0.02, order)
    assert abs(res.observed_order - order) <= 0.2


def test_fd_box_outside_validity_rejected():
    with pytest.raises(ValueError, match="validity"):
        fd_residual_grid(catalog.harmonic_solution(1), "t=0:1,x=-1:1,y=-0.4:0.4", 0.01)


def test_fd_needs_bound_parameters():
    with pytest.raises(ValueError, match="bind"):
        fd_residual_grid(catalog.polynomial_solution(), "t=0:1,x=0:1,y=0:1", 0.1)


def test_fd_detects_a_non_solution():
    rec = catalog.get("rossby", A=1, k=1, beta=1)
    wrong = fd_residual_grid(rec, "t=0:1,x=0:1,y=0:1", 0.01, beta=2)
    right = fd_residual_grid(rec, "t=0:1,x=0:1,y=0:1", 0.01)
    assert wrong.max_abs > 0.1
    assert right.max_abs < 1e-3
