import numpy as np
import pytest

from cartv.io import write_tvls
from cartv.phantoms import make_phantom, separated_breakpoints
from cartv.structure import gradient_supports, structure_summary


def test_rect_phantom_structure():
    ph = make_phantom("rect", 32, rows=(8, 16), cols=(8, 16))
    assert ph.image[7, 7] == 1 and ph.image[15, 15] == 0 and ph.image.sum() == 64
    st = ph.structure
    assert (st.s1, st.s2, st.T1, st.T2) == (2, 2, 2, 2)
    assert st.nu_row == 8 / 32


def test_line_grid_separation():
    for K in (2, 4, 8):
        ph = make_phantom("line-grid", 64, seed=1, K1=K, K2=K)
        st = ph.structure
        assert st.nu_row == 1 / K and st.nu_col == 1 / K
        assert st.s1 == K and st.s2 == K
        # every jump line spans the full width
        assert np.all(ph.delta1.mask.sum(axis=1) % 64 == 0)


def test_random_piecewise_respects_separation():
    for seed in range(20):
        ph = make_phantom("random-piecewise", 32, seed, s1=3, s2=2, sep=0.25)
        st = ph.structure
        assert st.s1 <= 3 and st.s2 <= 2
        if st.nu_row is not None:
            assert st.nu_row >= 0.25
        if st.nu_col is not None:
            assert st.nu_col >= 0.25


def test_infeasible_separation_rejected():
    with pytest.raises(ValueError):
        make_phantom("random-piecewise", 32, 0, s1=5, s2=2, sep=0.25)
    with pytest.raises(ValueError):
        make_phantom("stripes", 32, 0, s1=9, sep=0.125)


def test_breakpoints_circular_gap(rng):
    for _ in range(50):
        pts = separated_breakpoints(40, 4, 9, rng)
        gaps = np.diff(np.r_[pts, pts[0] + 40])
        assert gaps.min() >= 9 and len(set(pts.tolist())) == 4
    assert separated_breakpoints(10, 0, 3, rng).size == 0
    tight = separated_breakpoints(32, 4, 8, rng)
    assert np.all(np.diff(np.r_[tight, tight[0] + 32]) == 8)
    with pytest.raises(ValueError):
        separated_breakpoints(32, 5, 8, rng)


def test_stripes_phantom():
    ph = make_phantom("stripes", 64, 2)
    assert ph.structure.s1 >= 6
    assert ph.structure.s2 == 2


def test_deterministic_per_seed_and_invariants():
    a = make_phantom("random-piecewise", 16, 5, s1=2, s2=2, sep=0.25)
    b = make_phantom("random-piecewise", 16, 5, s1=2, s2=2, sep=0.25)
    np.testing.assert_array_equal(a.image, b.image)
    d1, d2 = gradient_supports(a.image)
    assert a.delta1 == d1 and a.delta2 == d2
    assert a.structure == structure_summary(a.image)


def test_from_file_round_trip(tmp_path):
    src = make_phantom("line-grid", 16, 3, K1=2, K2=4)
    path = tmp_path / "p.tvls"
    write_tvls(path, src.image)
    ph = make_phantom("from-file", path=str(path))
    np.testing.assert_array_equal(ph.image, src.image)
    assert ph.structure == src.structure


def test_unknown_kind():
    with pytest.raises(ValueError):
        make_phantom("ellipse", 16)
