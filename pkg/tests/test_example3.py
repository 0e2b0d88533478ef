import mpmath
import pytest

from gfekit import catalog
from gfekit.expr import Const, parse, simplify
from gfekit.foliation import (
    FoliationError,
    Window,
    automorphic_residuals,
    equivalence_check,
    equivalent_solution,
    example3_pair_from_Q,
    example3_reduced_system,
    example3_residuals,
    rossby_window,
)


@pytest.fixture(scope="module")
def rossby():
    return catalog.get("rossby", A=1, k=1, beta=1)


@pytest.fixture(scope="module")
def pair(rossby):
    return example3_pair_from_Q(rossby)


def test_naive_guess_fails_second_equation():
    r1, r2 = example3_reduced_system("beta*h^2/2", "1", "beta")
    assert r1 == Const(0)
    assert r2 == simplify(parse("beta*h"))


def test_degenerate_zero_pair():
    assert example3_reduced_system("0", "0", "0") == (Const(0), Const(0))


def test_closed_pair_from_hand_computation():
    # phase in (0, pi): U = sqrt(1 - h^2), V = -sqrt(1 - h^2) for A = k = beta = 1
    r = example3_reduced_system("sqrt(1 - h^2)", "-sqrt(1 - h^2)", 1)
    assert r == (Const(0), Const(0))


def test_tabulated_values_match_hand_oracle(pair):
    with mpmath.workdps(40):
        for t, h in [(0.0, 0.2), (0.5, -0.6), (1.0, 0.7)]:
            U, V, W, Z = pair.evaluator(t, h)
            root = mpmath.sqrt(1 - mpmath.mpf(h) ** 2)
            assert abs(U - root) < 1e-30
            assert abs(V + root) < 1e-30
            assert W == Z == 0


def test_reduced_system_on_table(pair):
    res = example3_residuals(pair, 1)
    assert res.names == ("E1", "E2")
    assert len(res.values) == len(pair.rows) and not res.skipped
    assert res.max_abs <= 1e-10


def test_window_is_recorded(pair):
    assert pair.coords == ("t", "h")
    assert set(pair.window) >= {"x_lo", "x_hi", "t", "h"}


def test_zonal_flow_rejected():
    with pytest.raises(FoliationError, match="monotone"):
        example3_pair_from_Q(catalog.zonal_flow("sin(y)"), Window(parse("-1"), parse("1")))


def test_non_monotone_window_rejected(rossby):
    with pytest.raises(FoliationError, match="monotone"):
        example3_pair_from_Q(rossby, Window(parse("-t"), parse("2*pi - t")))


def test_y_dependent_solution_rejected():
    with pytest.raises(FoliationError, match="H_xy"):
        example3_pair_from_Q(parse("x^2 + x*y"), Window(parse("1"), parse("2")))


def test_equivalent_solution_formula(rossby):
    H2, F = equivalent_solution(rossby, "sin(t)")
    assert F == simplify(parse("-cos(t)"))
    assert simplify(H2 - parse("sin(x + t + cos(t)) - y*sin(t)")) == Const(0)


def test_equivalent_solution_needs_known_antiderivative(rossby):
    with pytest.raises(FoliationError):
        equivalent_solution(rossby, "exp(t^2)")


def test_equivalence_reproduces_the_pair(rossby):
    pair1, pair2, H2, worst = equivalence_check(rossby)
    assert worst <= 1e-10
    box = rossby_window(rossby).shifted(parse("-cos(t)")).box()
    auto = automorphic_residuals(H2, pair1, box=box, n=16)
    assert len(auto.values) == 16 and auto.max_abs <= 1e-10
