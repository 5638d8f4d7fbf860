import numpy as np
import pytest

from sixdma import scenario as sc


def test_density_background_and_hotspot():
    cfg = sc.default_scenario()
    h0 = cfg.hotspots[0]
    inside = h0.center + np.array([0.0, 0.0, h0.radius / 2])
    far = np.array([0.0, 0.0, 150.0])
    assert np.isclose(sc.density(far, cfg), cfg.rho0)
    assert np.isclose(sc.density(inside, cfg), cfg.rho0 + cfg.rho_extra[0])
    assert cfg.rho_extra[0] > 0


def test_density_outside_errors():
    cfg = sc.default_scenario()
    with pytest.raises(ValueError):
        sc.density(np.array([0.0, 0.0, 10.0]), cfg)
    with pytest.raises(ValueError):
        sc.density(np.array([0.0, 0.0, 500.0]), cfg)


def test_all_regular_limit_is_uniform():
    cfg = sc.default_scenario(xi=1.0)
    assert np.allclose(cfg.rho_extra, 0.0)
    assert np.isclose(sc.density(cfg.hotspots[2].center, cfg), cfg.rho0)


def test_hotspot_mean_ratio():
    cfg = sc.default_scenario()
    means = cfg.hotspot_means()
    assert np.allclose(means / means[0], [1.0, 2.0, 3.0], rtol=1e-9)
    # total mass: background fraction xi, hotspot extras the rest
    assert np.isclose(cfg.region_means().sum(), cfg.mu)


def test_config_invariants():
    with pytest.raises(ValueError):
        sc.ScenarioConfig(mu=10, xi=1.5)
    with pytest.raises(ValueError):
        sc.ScenarioConfig(
            mu=10,
            hotspots=(sc.Hotspot(center=np.array([0.0, 0.0, 29.0]), radius=5.0, weight=1.0),),
        )
    with pytest.raises(ValueError):
        sc.ScenarioConfig(
            mu=10,
            hotspots=(
                sc.Hotspot(center=np.array([50.0, 0.0, 0.0]), radius=5.0, weight=1.0),
                sc.Hotspot(center=np.array([53.0, 0.0, 0.0]), radius=5.0, weight=1.0),
            ),
        )


def test_sample_determinism():
    cfg = sc.default_scenario(mu=15)
    a = sc.sample_realization(cfg, 123)
    b = sc.sample_realization(cfg, 123)
    assert np.array_equal(a.positions, b.positions)
    c = sc.sample_realization(cfg, 124)
    assert a.n_users != c.n_users or not np.array_equal(a.positions, c.positions)


def test_sample_positions_inside_region():
    cfg = sc.default_scenario(mu=30)
    users = sc.sample_realization(cfg, 7)
    r = np.linalg.norm(users.positions, axis=1)
    assert np.all(r >= cfg.r_inner - 1e-9) and np.all(r <= cfg.r_outer + 1e-9)


def test_sample_all_hotspot_when_xi_zero():
    cfg = sc.default_scenario(mu=30, xi=0.0)
    users = sc.sample_realization(cfg, 9)
    assert users.n_users > 0
    in_any = np.zeros(users.n_users, dtype=bool)
    for h in cfg.hotspots:
        in_any |= np.linalg.norm(users.positions - h.center, axis=1) <= h.radius
    assert np.all(in_any)


def test_background_users_avoid_hotspots():
    cfg = sc.default_scenario(mu=60, xi=1.0)
    users = sc.sample_realization(cfg, 11)
    for h in cfg.hotspots:
        assert np.all(np.linalg.norm(users.positions - h.center, axis=1) > h.radius)


def test_poisson_mean():
    cfg = sc.default_scenario(mu=40)
    counts = sc.sample_region_counts(cfg, 20000, 5)
    ks = counts.sum(axis=1)
    assert abs(ks.mean() - 40.0) / 40.0 < 0.01
    assert ks.min() >= 0


def test_k_zero_probability():
    cfg = sc.default_scenario(mu=3.0)
    counts = sc.sample_region_counts(cfg, 200000, 6)
    p0 = np.mean(counts.sum(axis=1) == 0)
    assert abs(p0 - np.exp(-3.0)) < 0.003


def test_region_fractions_match_density_integrals():
    cfg = sc.default_scenario(mu=40)
    counts = sc.sample_region_counts(cfg, 100000, 8)
    fractions = counts.sum(axis=0) / counts.sum()
    expected = cfg.region_means() / cfg.mu
    assert np.abs(fractions - expected).max() < 0.02


def test_counts_match_full_sampler():
    # the fast count path and the full position sampler share the split
    cfg = sc.default_scenario(mu=20)
    n = 400
    full = np.zeros((n, 4), dtype=int)
    for i in range(n):
        users = sc.sample_realization(cfg, 1000 + i)
        for v, h in enumerate(cfg.hotspots):
            inside = np.linalg.norm(users.positions - h.center, axis=1) <= h.radius
            full[i, v + 1] = inside.sum()
        full[i, 0] = users.n_users - full[i, 1:].sum()
    fast = sc.sample_region_counts(cfg, n, 999)
    # same distribution: compare means within sampling tolerance
    assert np.abs(full.mean(axis=0) - fast.mean(axis=0)).max() < 1.0


def test_users_csv(tmp_path):
    cfg = sc.default_scenario(mu=10)
    users = sc.sample_realization(cfg, 3)
    path = tmp_path / "users.csv"
    sc.write_users_csv(users, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "user,x,y,z"
    assert len(lines) == users.n_users + 1
