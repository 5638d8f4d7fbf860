from itertools import product

import numpy as np
import pytest

from sixdma import capacity as cap, codebook as cb, constraints as cons

LAM = 0.125


@pytest.fixture(scope="module")
def tiny_book():
    return cb.sphere_codebook(4, 2, radius=0.5, wavelength=LAM)


@pytest.fixture(scope="module")
def tiny_data(tiny_book):
    return cons.build_constraint_data(tiny_book)


def test_constraint_data_shapes(tiny_book, tiny_data):
    assert tiny_data.u_matrix.shape == (4, 2)
    assert tiny_data.dist.shape == (4, 4)
    assert np.allclose(np.diag(tiny_data.dist), 0.0)
    assert np.abs(tiny_data.dist - tiny_data.dist.T).max() < 1e-12


def test_radial_u_equals_radius(tiny_book, tiny_data):
    # rotation 0 is the radial frame: normal aligned with the position
    assert np.allclose(tiny_data.u_matrix[:, 0], 0.5, atol=1e-9)


def test_check_feasible_single_surface(tiny_data):
    state = cap.IndicatorState(np.array([0]), np.array([0]), 4, 2)
    report = cons.check_feasible(state, tiny_data)
    assert report.ok
    assert not report.reflection and not report.distance


def test_check_feasible_same_position_distance(tiny_data):
    state = cap.IndicatorState(np.array([1, 1]), np.array([0, 0]), 4, 2)
    report = cons.check_feasible(state, tiny_data)
    assert len(report.distance) == 1


def test_check_feasible_blockage_flag(tiny_book):
    data = cons.build_constraint_data(tiny_book)
    bad = cons.ConstraintData(
        u_matrix=-np.abs(data.u_matrix), dist=data.dist, d_min=data.d_min
    )
    state = cap.IndicatorState(np.array([0]), np.array([0]), 4, 2)
    report = cons.check_feasible(state, bad)
    assert len(report.blockage) == 1


def test_check_feasible_radial_pairs_clean(tiny_book, tiny_data):
    state = cap.IndicatorState(np.array([0, 2]), np.array([0, 0]), 4, 2)
    report = cons.check_feasible(state, tiny_data, tiny_book)
    assert report.ok and report.pose_ok
    assert not report.divergent_pairs


def test_pose_level_divergence_reported():
    # facet rotations have position-dependent margins: the indicator rows
    # and the pose-level rule can disagree, which must be surfaced (the
    # regular tetrahedron is too symmetric for this; use 8 positions)
    book = cb.sphere_codebook(8, 2, radius=0.5, wavelength=LAM)
    data = cons.build_constraint_data(book)
    found = False
    for pos in product(range(8), repeat=2):
        if pos[0] == pos[1]:
            continue
        for rot in product(range(2), repeat=2):
            state = cap.IndicatorState(np.array(pos), np.array(rot), 8, 2)
            report = cons.check_feasible(state, data, book)
            if report.divergent_pairs:
                found = True
                assert report.ok != report.pose_ok
    assert found


def test_label_permutation_invariance(tiny_data):
    rng = np.random.default_rng(0)
    for _ in range(30):
        pos = rng.choice(4, size=2, replace=False)
        rot = rng.integers(0, 2, size=2)
        a = cons.check_feasible(cap.IndicatorState(pos, rot, 4, 2), tiny_data)
        b = cons.check_feasible(
            cap.IndicatorState(pos[::-1], rot[::-1], 4, 2), tiny_data
        )
        assert a.ok == b.ok


def test_linearize_counts(tiny_data):
    lin = cons.linearize(2, tiny_data)
    B, M, L = 2, 4, 2
    assert lin.n_z == B * (M + L)
    assert lin.n_w == B * B * M * L
    assert lin.n_wbar == B * (B - 1) * M * M
    expected_rows = (
        3 * lin.n_w  # w envelopes
        + B * (B - 1)  # reflection aggregates
        + B  # blockage aggregates
        + 3 * lin.n_wbar  # w_bar envelopes
        + B * (B - 1)  # distance aggregates
    )
    assert lin.a_ub.shape == (expected_rows, lin.n_vars)
    assert lin.a_eq.shape == (2 * B, lin.n_vars)


def test_linearize_single_surface(tiny_data):
    lin = cons.linearize(1, tiny_data)
    assert lin.n_wbar == 0
    # blockage aggregate still present: one row with rhs 0 and M*L entries
    row_nnz = np.diff(lin.a_ub.indptr)
    assert np.any((lin.b_ub == 0) & (row_nnz == 4 * 2))


def test_lemma_equivalence_exhaustive(tiny_book, tiny_data):
    """Binary feasibility of the original rules == satisfiability of the
    linearized system with the product auxiliaries, over every one-hot z."""
    lin = cons.linearize(2, tiny_data)
    n_checked = 0
    for pos in product(range(4), repeat=2):
        for rot in product(range(2), repeat=2):
            state = cap.IndicatorState(np.array(pos), np.array(rot), 4, 2)
            direct = cons.check_feasible(state, tiny_data).ok
            x = lin.aux_for_state(state)
            # for binary z the envelopes force w to the exact products:
            # lower bound max(0, a+b-1) equals upper bound min(a, b)
            linearized = cons.satisfies(lin, x)
            assert direct == linearized, (pos, rot)
            n_checked += 1
    assert n_checked == 64


def test_mccormick_envelopes_force_products():
    # for binary factors the envelope interval collapses to the product
    for a in (0.0, 1.0):
        for b in (0.0, 1.0):
            lo = max(0.0, a + b - 1.0)
            hi = min(a, b)
            assert lo == hi == a * b


def test_aux_for_relaxed_feasible_envelopes(tiny_data):
    rng = np.random.default_rng(1)
    lin = cons.linearize(2, tiny_data)
    for _ in range(20):
        s = rng.dirichlet(np.ones(4), size=2)
        g = rng.dirichlet(np.ones(2), size=2)
        x = lin.aux_for_relaxed(s, g)
        # envelope rows always hold at the product point; only the
        # aggregate rows may fail for an arbitrary interior point
        slack = lin.a_ub @ x - lin.b_ub
        row_nnz = np.diff(lin.a_ub.indptr)
        envelope = (lin.b_ub >= 0) & (row_nnz <= 3)
        assert slack[envelope].max() < 1e-9


def test_export_lp_text(tiny_data, tmp_path):
    lin = cons.linearize(2, tiny_data)
    path = tmp_path / "system.txt"
    cons.export_lp_text(lin, path)
    text = path.read_text()
    assert f"vars {lin.n_vars}" in text
    assert text.count("ub_rhs") == lin.a_ub.shape[0]
