import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gfekit import catalog
from gfekit.expr import as_expr
from gfekit.expr.numeric import Box
from gfekit.foliation import (
    FoliationError,
    ReconstructConfig,
    TabulatedQuadruple,
    compare_with,
    dumps_table,
    example1_quadruple,
    example2_parametric,
    loads_table,
    read_table,
    reconstruct_quadruple,
    solve_S_for_lambda,
    write_table,
)
from gfekit.foliation.table import FULL_HEADER


@pytest.fixture(scope="module")
def polynomial():
    return catalog.polynomial_solution(1, 1, 1)


@pytest.fixture(scope="module")
def poly_recon(polynomial):
    return reconstruct_quadruple(polynomial, ReconstructConfig(samples=32))


def test_polynomial_is_well_defined_on_its_branch(poly_recon):
    assert poly_recon.well_defined and poly_recon.verdict == "well-defined"
    # H_x is monotone in x on the branch, so no other x shares (t, y, h)
    assert poly_recon.partners == 0


def test_polynomial_matches_closed_form(poly_recon):
    q = example1_quadruple(1, 1, 1)
    worst, _ = compare_with(poly_recon, lambda t, y, h: q.evaluate(t, y, h))
    assert worst <= 1e-8


def test_polynomial_without_branch_is_ill_defined(polynomial):
    rc = reconstruct_quadruple(polynomial, ReconstructConfig(samples=16), branch=None)
    assert not rc.well_defined
    c = rc.collisions[0]
    assert c.gap > 1e-6
    js = c.to_json()
    assert set(js) == {"first", "second", "outputs_first", "outputs_second", "gap", "kind"}


def test_harmonic_matches_parametric():
    rec = catalog.harmonic_solution(1)
    rc = reconstruct_quadruple(rec, ReconstructConfig(samples=24))
    assert rc.well_defined
    q = example2_parametric(as_expr(1))
    worst, _ = compare_with(rc, lambda t, y, h: q.evaluate_at(t, y, h, lambda lam: solve_S_for_lambda(lam, 1)))
    assert worst <= 1e-6


def test_zonal_reconstruction():
    rec = catalog.zonal_flow("sin(y)")
    rc = reconstruct_quadruple(rec, ReconstructConfig(samples=16))
    assert rc.well_defined
    for p, (U, V, W, Z) in zip(rc.points, rc.outputs):
        assert U == V == W == 0
        with mpmath.workdps(40):
            assert abs(Z + mpmath.sin(p["y"])) < 1e-30
    assert np.all(rc.quadruple.rows[:, 2] == 0)


def test_rossby_is_ill_defined():
    rc = reconstruct_quadruple(catalog.rossby_wave(1, 1, 1), ReconstructConfig(samples=16))
    assert not rc.well_defined
    assert rc.collisions[0].kind in ("sample", "partner")


def test_box_outside_validity_rejected():
    rec = catalog.harmonic_solution(1)
    with pytest.raises(FoliationError, match="validity"):
        reconstruct_quadruple(rec, ReconstructConfig(samples=8, box=Box.parse("t=0:1,x=-1:1,y=-0.2:0.2")))


def test_reconstruction_is_seeded(polynomial):
    a = reconstruct_quadruple(polynomial, ReconstructConfig(samples=8, seed=5))
    b = reconstruct_quadruple(polynomial, ReconstructConfig(samples=8, seed=5))
    assert np.array_equal(a.quadruple.rows, b.quadruple.rows)


# -- table format --------------------------------------------------------


def test_table_roundtrip_is_exact(tmp_path, poly_recon):
    q = poly_recon.quadruple
    path = write_table(q, tmp_path / "table.txt")
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.split(b"\n")[0].decode() == " ".join(FULL_HEADER)
    back = read_table(path)
    assert back.coords == ("t", "y", "h")
    assert np.array_equal(back.rows, q.rows)


def test_bad_header_rejected():
    with pytest.raises(FoliationError):
        loads_table("t y h U V W\n1 2 3 4 5 6\n")


def test_ragged_row_rejected():
    with pytest.raises(FoliationError, match="line 3"):
        loads_table("t h U V W Z\n1 2 3 4 5 6\n1 2 3\n")


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.just(7)), elements=finite))
def test_table_text_roundtrip_property(rows):
    q = TabulatedQuadruple(coords=("t", "y", "h"), rows=rows)
    back = loads_table(dumps_table(q))
    assert np.array_equal(back.rows, rows)
    assert all(math.copysign(1, a) == math.copysign(1, b) for a, b in zip(back.rows.ravel(), rows.ravel()))
