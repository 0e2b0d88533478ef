import math

import mpmath
import pytest

from gfekit import catalog
from gfekit.catalog import ParameterError, UnknownSolution
from gfekit.expr import Const, diff, parse, simplify
from gfekit.expr.numeric import NON_ZERO, PROBABLY_ZERO, PROVED_ZERO, equals_zero, eval_numeric
from gfekit.model import gfe_residual


@pytest.mark.parametrize("rec", catalog.list_records(verify=False), ids=lambda r: r.key)
def test_every_registered_solution_passes_its_residual_check(rec):
    v = catalog.verified(rec)
    assert v.ok, f"{rec.key}: NonZero witness {v.witness}"
    assert v.status == (PROVED_ZERO if rec.strategy == "symbolic" else PROBABLY_ZERO)


def test_registry_contents():
    recs = catalog.list_records(verify=False)
    assert len(recs) >= 5
    assert {r.key for r in recs} >= {"polynomial", "harmonic:base", "harmonic:plus", "harmonic:minus", "rossby", "zonal"}


def test_get_polynomial():
    rec = catalog.get("polynomial", c1=1, c2=0, beta=1)
    assert rec.tag == "{Y1,Y3}"
    assert rec.periodicity is None


def test_get_accepts_greek_beta():
    assert catalog.get("rossby", A=1, k=1, **{"β": 2}).beta == Const(2)


def test_get_unknown_name():
    with pytest.raises(UnknownSolution):
        catalog.get("nope")


def test_get_missing_and_unknown_parameters():
    with pytest.raises(ParameterError):
        catalog.get("polynomial", c1=1)
    with pytest.raises(ParameterError):
        catalog.get("rossby", A=1, k=1, beta=1, omega=3)


def test_polynomial_special_cases():
    rec = catalog.polynomial_solution(1, 0, 0)
    assert simplify(rec.expr) == simplify(parse("x^3 - 3*x*y^2"))
    assert rec.verify().status == PROVED_ZERO
    assert catalog.polynomial_solution(0, 0).verify().status == PROVED_ZERO


def test_polynomial_value_by_hand():
    rec = catalog.polynomial_solution(1, 1, 1)
    assert rec.evaluate({"t": 0, "x": 1, "y": 1}) == -0.25


def test_polynomial_symbolic_parameters():
    rec = catalog.polynomial_solution()
    assert gfe_residual(rec.expr) == Const(0)


def test_harmonic_vanishes_on_axis():
    rec = catalog.harmonic_solution(1)
    for x in (0.5, 1.0, 2.0):
        assert rec.evaluate({"t": 0, "x": x, "y": 0}) == 0


def test_harmonic_value_at_one_one():
    rec = catalog.harmonic_solution(2)
    with mpmath.workdps(40):
        v = rec.evaluate({"t": 0, "x": 1, "y": 1}, "extended")
        oracle = mpmath.mpf(2) ** 1.5 * mpmath.sin(mpmath.pi / 12) ** 3
        assert abs(v - oracle) < mpmath.mpf(10) ** -35
    assert abs(float(v) - 0.04904) < 1e-5


def test_harmonic_validity():
    rec = catalog.harmonic_solution()
    assert rec.is_valid_at({"x": 1, "y": 0})
    assert not rec.is_valid_at({"x": -1, "y": 0})


def test_harmonic_unknown_variant():
    with pytest.raises(ParameterError):
        catalog.harmonic_solution(1, "sideways")


def test_rossby_constraint():
    rec = catalog.rossby_wave("A", "k")
    Q = rec.expr
    constraint = diff(Q, "t", "x", "x") + parse("beta") * diff(Q, "x")
    assert simplify(constraint) == Const(0)
    assert rec.verify().status == PROVED_ZERO


def test_rossby_value_and_period():
    rec = catalog.rossby_wave(1, 1, 1)
    assert abs(rec.evaluate({"t": 0, "x": math.pi / 2, "y": 0.3}) - 1) < 1e-15
    assert rec.periodicity == (2 * math.pi, None)
    assert rec.check_periodicity()


def test_rossby_rejects_zero_wavenumber():
    with pytest.raises(ParameterError):
        catalog.rossby_wave(1, 0, 1)


@pytest.mark.parametrize("profile", ["y^2", "sin(y)", "y"])
def test_zonal_profiles(profile):
    rec = catalog.zonal_flow(profile)
    assert rec.verify().status == PROVED_ZERO


def test_zonal_period_detected():
    assert catalog.zonal_flow("sin(y)").periodicity == (None, 2 * math.pi)
    assert catalog.zonal_flow("y^2").periodicity is None


def test_zonal_rejects_x_dependence():
    with pytest.raises(ParameterError):
        catalog.zonal_flow("sin(x)")


def test_non_solution_gets_a_witness():
    v = equals_zero(gfe_residual(parse("x"), 1, canonical=False), "numeric", "t=0:1,x=0:1,y=0:1")
    assert v.status == NON_ZERO
    assert float(v.witness["value"]) == pytest.approx(1.0)


def test_record_json_is_stable():
    rec = catalog.get("rossby", A=1, k=2, beta=1)
    js = rec.to_json()
    assert js["name"] == "rossby" and js["tag"] == "{Y2}"
    assert js["periodicity"][0] == pytest.approx(math.pi)
    assert eval_numeric(rec.expr, {"t": 0, "x": 0, "y": 0}) == 0
