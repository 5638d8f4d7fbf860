import numpy as np
import pytest

from sixdma import codebook as cb, geometry as geo

LAM = 0.125
D_MIN = cb.min_surface_distance(LAM)


def test_d_min_value():
    assert np.isclose(D_MIN, np.sqrt(2) / 2 * LAM + LAM / 2)


def test_fibonacci_on_sphere():
    pts = cb.fibonacci_positions(50, 0.5)
    assert np.abs(np.linalg.norm(pts, axis=1) - 0.5).max() < 1e-12


def test_fibonacci_min_spacing_m100():
    pts = cb.fibonacci_positions(100, 0.5)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    # frozen from evaluating the lattice: min spacing 0.15452 m >= d_min
    assert np.isclose(d.min(), 0.1545186866, atol=1e-9)
    assert d.min() >= D_MIN


def test_fibonacci_distinct():
    pts = cb.fibonacci_positions(16, 0.5)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    assert d.min() > 0.0


def test_fibonacci_deterministic():
    a = cb.fibonacci_positions(37, 0.7)
    b = cb.fibonacci_positions(37, 0.7)
    assert np.array_equal(a, b)


def test_fibonacci_preconditions():
    with pytest.raises(ValueError):
        cb.fibonacci_positions(1, 0.5)
    with pytest.raises(ValueError):
        cb.fibonacci_positions(8, 0.0)


def test_hull_rotations_radial_first_column():
    pts = cb.fibonacci_positions(12, 0.5)
    frames = cb.hull_rotations(pts, 2)
    for m, per_pos in enumerate(frames):
        radial = per_pos[0]
        assert np.abs(radial[:, 0] - pts[m] / np.linalg.norm(pts[m])).max() < 1e-9


def test_hull_rotations_north_pole():
    pts = np.vstack([[0.0, 0.0, 0.5], cb.fibonacci_positions(9, 0.5)[2:]])
    frames = cb.hull_rotations(pts, 1)
    assert np.allclose(frames[0][0][:, 0], [0.0, 0.0, 1.0])


def test_hull_rotations_valid_rotations():
    pts = cb.fibonacci_positions(20, 0.5)
    frames = cb.hull_rotations(pts, 3)
    for per_pos in frames:
        assert len(per_pos) == 3
        for rot in per_pos:
            assert np.abs(rot.T @ rot - np.eye(3)).max() < 1e-9
            assert abs(np.linalg.det(rot) - 1.0) < 1e-9


def test_hull_facet_frame_tetrahedron():
    # regular tetrahedron: hand-check one facet normal
    pts = np.array(
        [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
    ) / np.sqrt(3)
    frames = cb.hull_rotations(pts, 2)
    # facet through vertices {0,1,2} has outward normal (1,1,-1)/sqrt(3);
    # each vertex's facet frames must carry one of its incident facet normals
    for m, per_pos in enumerate(frames):
        facet_normal = per_pos[1][:, 0]
        others = np.delete(np.arange(4), m)
        # the facet normal must point away from the opposite vertex
        assert all(facet_normal @ (pts[o] - pts[m]) <= 1e-9 for o in others)
        # and be one of the four face normals of the tetrahedron
        expected = -pts  # each face normal is the negated opposite vertex
        assert min(np.linalg.norm(expected - facet_normal, axis=1).min(),
                   np.linalg.norm(expected + facet_normal, axis=1).min()) < 1e-9


def test_hull_rotations_needs_four_points():
    with pytest.raises(ValueError):
        cb.hull_rotations(np.eye(3), 1)


def test_sphere_codebook_shapes_and_consistency():
    book = cb.sphere_codebook(10, 2, radius=0.5, wavelength=LAM)
    assert book.n_positions == 10 and book.n_rotations == 2
    assert book.size == 20
    for m in range(10):
        for l in range(2):
            cand = book.candidate(m, l)
            assert np.abs(geo.rotation_matrix(cand.angles) - cand.matrix).max() < 1e-9
            assert np.allclose(cand.normal, cand.matrix[:, 0])


def test_grid_codebook_single_rotation():
    book = cb.grid_codebook(1.0, 8, 1, LAM)
    assert book.n_rotations == 1
    assert np.allclose(book.angles[:, 0], 0.0)


def test_grid_codebook_z3():
    book = cb.grid_codebook(1.0, 8, 3, LAM)
    assert book.n_rotations == 27
    steps = np.unique(np.round(book.angles[0, :, 0], 12))
    assert np.allclose(steps, [0.0, 2 * np.pi / 3, 4 * np.pi / 3])


def test_grid_codebook_spacing_guard():
    with pytest.raises(ValueError):
        cb.grid_codebook(1.0, 600, 1, LAM)  # lattice spacing 0.125 < d_min
    book = cb.grid_codebook(1.0, 600, 1, LAM, enforce_spacing=False)
    assert book.n_positions == 600


def test_grid_codebook_spacing_ok():
    book = cb.grid_codebook(1.0, 27, 1, LAM)
    d = np.linalg.norm(
        book.positions[:, None, :] - book.positions[None, :, :], axis=-1
    )
    np.fill_diagonal(d, np.inf)
    assert d.min() >= D_MIN


def test_validate_sphere_codebook_clean():
    book = cb.sphere_codebook(30, 2, radius=0.5, wavelength=LAM)
    report = cb.validate(book)
    assert report.ok, report.summary()


def test_validate_flags_min_distance():
    book = cb.sphere_codebook(8, 1, radius=0.5, wavelength=LAM)
    squeezed = cb.PoseCodebook(
        positions=book.positions,
        angles=book.angles,
        matrices=book.matrices,
        normals=book.normals,
        wavelength=book.wavelength,
        d_min=10.0,  # impossible requirement
        site=book.site,
        kind=book.kind,
    )
    report = cb.validate(squeezed)
    assert len(report.distance) > 0


def test_validate_flags_blockage():
    book = cb.sphere_codebook(8, 1, radius=0.5, wavelength=LAM)
    flipped = cb.PoseCodebook(
        positions=book.positions,
        angles=book.angles,
        matrices=book.matrices,
        normals=-book.normals,  # inward-facing
        wavelength=book.wavelength,
        d_min=book.d_min,
        site=book.site,
        kind=book.kind,
    )
    report = cb.validate(flipped)
    assert len(report.blockage) == flipped.size


def test_codebook_file_roundtrip(tmp_path):
    book = cb.sphere_codebook(12, 2, radius=0.5, wavelength=LAM)
    path = tmp_path / "book.txt"
    cb.write_codebook(book, path)
    back = cb.read_codebook(path)
    assert back.n_positions == book.n_positions
    assert back.n_rotations == book.n_rotations
    assert np.abs(back.positions - book.positions).max() < 1e-8
    assert np.abs(back.angles - book.angles).max() < 1e-8
    # diff stability: export of the import is byte-identical
    path2 = tmp_path / "book2.txt"
    cb.write_codebook(back, path2)
    assert path.read_text() == path2.read_text()


def test_codebook_file_rejects_garbage(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("not a codebook\n")
    with pytest.raises(ValueError):
        cb.read_codebook(path)
