import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cartv.core_ops import diff1
from cartv.structure import (
    StructureReport,
    Support2D,
    column_cardinality,
    distinct_column_supports,
    distinct_row_supports,
    gradient_supports,
    min_sep_cols,
    min_sep_rows,
    row_cardinality,
    sign_pattern,
    structure_summary,
    support_of,
)
from tests import oracles


def test_support_of_examples():
    assert len(support_of(np.zeros((4, 4)), 0.0)) == 0
    z = np.zeros((4, 4))
    z[1, 2] = 1.0
    assert set(support_of(z, 0.0)) == {(2, 3)}
    z[0, 0] = 1e-14
    assert set(support_of(z, 1e-9)) == {(2, 3)}
    with pytest.raises(ValueError):
        support_of(z, -1.0)


def test_cardinality_examples():
    empty = Support2D(4)
    assert column_cardinality(empty) == 0 and row_cardinality(empty) == 0
    delta = Support2D.from_members(4, [(1, 1), (3, 1), (2, 2)])
    assert column_cardinality(delta) == 2
    assert row_cardinality(delta) == 1
    full = Support2D.full(5)
    assert column_cardinality(full) == 5 and row_cardinality(full) == 5


def test_separation_examples():
    delta = Support2D.from_members(8, [(1, 1), (3, 1)])
    assert min_sep_rows(delta) == 0.25
    assert min_sep_cols(delta) is None
    single = Support2D.from_members(8, [(2, 2)])
    assert min_sep_rows(single) is None and min_sep_cols(single) is None
    delta = Support2D.from_members(16, [(1, 1), (5, 1), (9, 1)])
    assert min_sep_rows(delta) == 0.25


def test_separation_is_linear_not_circular():
    delta = Support2D.from_members(16, [(1, 1), (16, 1)])
    assert min_sep_rows(delta) == 15 / 16


def test_distinct_supports_examples():
    assert distinct_column_supports(np.ones((4, 4))) == 1
    assert distinct_row_supports(np.ones((4, 4))) == 1
    assert distinct_column_supports(np.arange(16.0).reshape(4, 4)) == 4
    a, b = np.array([1.0, 2, 3, 4]), np.array([0.0, 2, 3, 4])
    z = np.column_stack([a, a, b, a])
    assert distinct_column_supports(z) == 2


def test_negative_zero_is_not_a_new_column():
    z = np.zeros((3, 3))
    z[0, 1] = -0.0
    assert distinct_column_supports(z) == 1


def test_support2d_validation_and_views():
    with pytest.raises(ValueError):
        Support2D.from_members(4, [(0, 1)])
    with pytest.raises(ValueError):
        Support2D(4, np.zeros((3, 3), dtype=bool))
    delta = Support2D.from_members(4, [(1, 2), (3, 2), (4, 4)])
    assert delta.column(2) == (1, 3)
    assert delta.row(4) == (4,)
    assert (3, 2) in delta and (2, 3) not in delta and (9, 9) not in delta
    assert len(delta.complement()) == 13
    assert delta == Support2D.from_members(4, [(4, 4), (3, 2), (1, 2)])
    assert hash(delta) == hash(Support2D.from_members(4, [(4, 4), (3, 2), (1, 2)]))
    with pytest.raises(ValueError):
        delta.mask[0, 0] = True


def test_sign_pattern():
    w = np.array([[2.0, 0.0], [-3j, 1 + 1j]])
    s = sign_pattern(w)
    np.testing.assert_allclose(s, [[1, 0], [-1j, (1 + 1j) / np.sqrt(2)]])


def test_constant_image_summary():
    rep = structure_summary(np.full((8, 8), 2.0))
    assert (rep.s1, rep.s2, rep.T1, rep.T2) == (0, 0, 1, 1)
    assert rep.nu_row is None and rep.nu_col is None
    assert rep.M1 == rep.M2 == 2


def test_rectangle_summary():
    x = np.zeros((32, 32))
    x[7:15, 7:15] = 1.0  # rows 8..15, cols 8..15: jumps enter at 8 and leave at 16
    rep = structure_summary(x)
    assert rep.s1 == 2 and rep.s2 == 2
    assert rep.nu_row == 8 / 32 and rep.nu_col == 8 / 32
    # sign columns: (+1 at row 8, -1 at row 16) in 8 columns, zero elsewhere
    assert rep.T1 == 2 and rep.T2 == 2
    assert rep.M1 == 8 and rep.M2 == 8


def test_bandwidth_capped_at_n():
    x = np.zeros((8, 8))
    x[0, :] = 1.0  # jumps at rows 1 and 2: separation 1/8, floor(2 / (1/8)) = 16
    rep = structure_summary(x)
    assert rep.M1 == 8


def test_default_bandwidth_when_undefined():
    x = np.zeros((16, 16))
    x[:, :5] = 1.0  # constant down every column: no vertical jumps
    rep = structure_summary(x, bandwidth=6)
    assert rep.nu_row is None and rep.M1 == 6
    assert structure_summary(x).M1 == 4


def test_report_text_round_trip():
    rep = StructureReport(n=16, s1=2, s2=0, nu_row=0.25, nu_col=None, T1=3, T2=1, M1=8, M2=4)
    text = rep.to_text()
    assert "nu_col = undefined" in text
    assert StructureReport.from_text(text) == rep


def test_scale_invariance(rng):
    x = np.round(rng.standard_normal((12, 12)))
    assert structure_summary(3.5 * x) == structure_summary(x)


def test_sign_weighted_jumps_telescope(rng):
    x = np.round(rng.standard_normal((10, 10)) * 2)
    d1, _ = gradient_supports(x, 0.0)
    g = diff1(x)
    per_column = np.where(d1.mask, np.abs(g) * sign_pattern(g), 0).sum(axis=0)
    np.testing.assert_allclose(per_column, 0, atol=1e-12)


def _random_support(rng, n):
    return Support2D(n, rng.random((n, n)) < rng.uniform(0.02, 0.5))


@pytest.mark.parametrize("trial", range(40))
def test_matches_brute_force(trial):
    rng = np.random.default_rng(trial)
    n = int(rng.integers(2, 17))
    delta = _random_support(rng, n)
    mem = oracles.members(delta.mask)
    assert column_cardinality(delta) == oracles.column_cardinality(mem, n)
    assert row_cardinality(delta) == oracles.row_cardinality(mem, n)
    assert min_sep_rows(delta) == oracles.min_sep_rows(mem, n)
    assert min_sep_cols(delta) == oracles.min_sep_cols(mem, n)
    z = rng.integers(0, 2, size=(n, n)) * rng.choice([1.0, -1.0, 1j], size=(n, n))
    assert distinct_column_supports(z) == oracles.distinct_columns(z)
    assert distinct_row_supports(z) == oracles.distinct_rows(z)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: st.sets(st.tuples(st.integers(1, n), st.integers(1, n))).map(
    lambda s: (n, s))))
def test_cardinality_bounds(data):
    n, members = data
    delta = Support2D.from_members(n, members)
    c = column_cardinality(delta)
    assert -(-len(delta) // n) <= c <= len(delta)
