import numpy as np
import pytest

from sixdma import benchmarks as bm, channel as ch, scenario as sc

PATTERN = ch.AntennaPattern()
SYS = ch.SystemConfig(n_antennas=2, n_surfaces=4)


@pytest.fixture(scope="module")
def realizations():
    scen = sc.default_scenario(mu=8)
    return [sc.sample_realization(scen, s) for s in range(4)]


def test_antennas_per_sector():
    setup = bm.BenchmarkSetup(kind=bm.BenchmarkKind.FPA, total_antennas=8)
    assert setup.antennas_per_sector == 3  # ceil(8 / 3)


def test_fpa_geometry():
    setup = bm.BenchmarkSetup(kind=bm.BenchmarkKind.FPA, total_antennas=8)
    poses = bm.fpa_poses(setup)
    assert len(poses) == 3
    for pose, az in zip(poses, bm.SECTOR_AZIMUTHS):
        # center on the ring at its anchor azimuth
        assert np.isclose(np.arctan2(pose.position[1], pose.position[0]) % (2 * np.pi),
                          az % (2 * np.pi))
        assert np.isclose(np.linalg.norm(pose.position[:2]), setup.ring_radius)
        # outward normal with a 15 degree downtilt
        assert np.isclose(pose.normal[2], np.sin(-bm.DOWNTILT))
        horiz = pose.normal[:2] / np.linalg.norm(pose.normal[:2])
        assert np.allclose(horiz, [np.cos(az), np.sin(az)], atol=1e-9)


def test_fpa_deterministic(realizations):
    setup = bm.BenchmarkSetup(kind=bm.BenchmarkKind.FPA, total_antennas=8)
    a = bm.run_benchmark(setup, realizations, PATTERN, SYS)
    b = bm.run_benchmark(setup, realizations, PATTERN, SYS)
    assert a.capacity == b.capacity


def test_circular_single_position_equals_fpa(realizations):
    fpa = bm.run_benchmark(
        bm.BenchmarkSetup(kind=bm.BenchmarkKind.FPA, total_antennas=8),
        realizations, PATTERN, SYS,
    )
    circ1 = bm.run_benchmark(
        bm.BenchmarkSetup(
            kind=bm.BenchmarkKind.CIRCULAR_POSITIONS, total_antennas=8, n_position_steps=1
        ),
        realizations, PATTERN, SYS,
    )
    assert circ1.capacity == fpa.capacity


def test_movable_baselines_dominate_fpa(realizations):
    fpa = bm.run_benchmark(
        bm.BenchmarkSetup(kind=bm.BenchmarkKind.FPA, total_antennas=8),
        realizations, PATTERN, SYS,
    )
    for kind in (bm.BenchmarkKind.CIRCULAR_POSITIONS, bm.BenchmarkKind.ROTATIONS_ONLY):
        res = bm.run_benchmark(
            bm.BenchmarkSetup(kind=kind, total_antennas=8),
            realizations, PATTERN, SYS,
        )
        assert res.capacity >= fpa.capacity  # anchor config is in the grid


def test_rotations_only_keeps_positions(realizations):
    res = bm.run_benchmark(
        bm.BenchmarkSetup(kind=bm.BenchmarkKind.ROTATIONS_ONLY, total_antennas=8,
                          n_rotation_steps=8),
        realizations, PATTERN, SYS,
    )
    fpa_positions = [p.position for p in bm.fpa_poses(
        bm.BenchmarkSetup(kind=bm.BenchmarkKind.FPA, total_antennas=8))]
    for pose, ref in zip(res.poses, fpa_positions):
        assert np.allclose(pose.position, ref)


def test_empty_realizations_error():
    with pytest.raises(ValueError):
        bm.run_benchmark(
            bm.BenchmarkSetup(kind=bm.BenchmarkKind.FPA, total_antennas=8),
            [], PATTERN, SYS,
        )
