import numpy as np
import pytest
import scipy.sparse as sp

from multirc.errors import InvalidSpecError
from multirc.netgen import (
    build_adjacency, build_input_matrix, build_network, load_network,
    rescale_to_rho, save_network, spectral_radius,
)


def test_unit_spectral_radius_and_rescale():
    m = build_adjacency(120, 0.05, seed=11)
    assert spectral_radius(m) == pytest.approx(1.0, rel=1e-12)
    for rho in (0.1, 1.25, 2.5):
        assert spectral_radius(rescale_to_rho(m, rho)) == pytest.approx(rho, rel=1e-10)
    with pytest.raises(InvalidSpecError):
        rescale_to_rho(m, -0.5)


def test_storage_switches_at_threshold():
    assert isinstance(build_adjacency(40, 0.2, seed=2), np.ndarray)
    assert sp.issparse(build_adjacency(80, 0.1, seed=2))


def test_adjacency_density_is_plausible():
    n, p = 200, 0.04
    m = build_adjacency(n, p, seed=9)
    nnz = m.nnz if sp.issparse(m) else np.count_nonzero(m)
    # binomial(n^2, p): allow 5 sigma
    assert abs(nnz - p * n * n) < 5 * np.sqrt(n * n * p * (1 - p))


def test_determinism_and_seed_sensitivity():
    a = build_adjacency(80, 0.1, seed=4).toarray()
    b = build_adjacency(80, 0.1, seed=4).toarray()
    c = build_adjacency(80, 0.1, seed=5).toarray()
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_input_matrix_one_nonzero_per_row():
    w = build_input_matrix(500, 2, seed=7)
    assert w.shape == (500, 2)
    assert np.all(np.count_nonzero(w, axis=1) == 1)
    nz = w[w != 0]
    assert np.all((-1 < nz) & (nz < 1))
    # both columns get used
    assert np.count_nonzero(w[:, 0]) > 0 and np.count_nonzero(w[:, 1]) > 0


def test_invalid_arguments():
    with pytest.raises(InvalidSpecError):
        build_adjacency(100, 0.0, seed=1)
    with pytest.raises(InvalidSpecError):
        build_adjacency(100, 1.5, seed=1)
    with pytest.raises(InvalidSpecError):
        build_adjacency(1, 0.5, seed=1)
    with pytest.raises(InvalidSpecError):
        build_input_matrix(0, 2, seed=1)


def test_network_round_trip(tmp_path):
    net = build_network(n=70, d=2, p=0.1, sigma=0.2, gamma=5.0, tau=0.01, seed=42)
    path = tmp_path / "net.txt"
    save_network(net, path)
    loaded = load_network(path)
    assert loaded.n == net.n and loaded.d == net.d and loaded.seed == net.seed
    np.testing.assert_array_equal(loaded.w_in, net.w_in)
    np.testing.assert_array_equal(
        loaded.m_csr(1.0).toarray(), net.m_csr(1.0).toarray()
    )
    assert loaded.sigma == net.sigma
    assert loaded.gamma == net.gamma
    assert loaded.tau == net.tau


def test_network_master_seed_derives_both_parts():
    n1 = build_network(n=60, d=2, p=0.1, sigma=0.2, gamma=5.0, tau=0.01, seed=1)
    n2 = build_network(n=60, d=2, p=0.1, sigma=0.2, gamma=5.0, tau=0.01, seed=1)
    n3 = build_network(n=60, d=2, p=0.1, sigma=0.2, gamma=5.0, tau=0.01, seed=2)
    np.testing.assert_array_equal(n1.w_in, n2.w_in)
    assert not np.array_equal(n1.w_in, n3.w_in)
