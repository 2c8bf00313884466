import math

import numpy as np
import pandas as pd
import pytest

from nc_restriction.lie_geometry import (
    AlgebraVector,
    GroupMatrix,
    InvalidRadiusError,
    LogMapError,
    NotInGroupError,
    NotNilpotentError,
    SeriesTermsError,
    UnsupportedModelError,
    adjoint_action,
    adjoint_norm,
    ball_checks,
    bracket,
    build_model,
    centralizer_dim,
    exp_density,
    exp_map,
    is_nilpotent,
    jacobi_residual,
    kak_decomposition,
    kak_log_profile,
    load_group_matrices_csv,
    load_vectors_csv,
    log_map,
    max_nilpotent_dim,
    nilcone_tube_membership,
    nilpotent_orbit_dim,
    orbit_min_norm,
    random_sl_element,
    regular_nilpotent,
    sl2_density,
    sl2_tube_mask,
    sl2_tube_volume,
    split_rank_formula,
)

sl2 = build_model("sl:2")
sl3 = build_model("sl:3")
heisenberg = build_model("heisenberg3")
rng = np.random.default_rng(29)

H = AlgebraVector(sl2, [1.0, 0.0, 0.0])
E = AlgebraVector(sl2, [0.0, 1.0, 0.0])
F = AlgebraVector(sl2, [0.0, 0.0, 1.0])


def test_models():
    assert (sl2.dim, sl3.dim, build_model("sl:5").dim, heisenberg.dim) == (3, 8, 24, 3)
    for model in [sl2, sl3, heisenberg]:
        assert jacobi_residual(model) <= 1e-12


def test_UnsupportedModelError():
    for name in ["sl:1", "sl:6", "so:3", "sl:x"]:
        with pytest.raises(UnsupportedModelError):
            build_model(name)


def test_sl2_brackets():
    assert np.allclose(bracket(H, E).coords, [0.0, 2.0, 0.0])
    assert np.allclose(bracket(H, F).coords, [0.0, 0.0, -2.0])
    assert np.allclose(bracket(E, F).coords, [1.0, 0.0, 0.0])


def test_heisenberg_center():
    X = AlgebraVector(heisenberg, [1.0, 0.0, 0.0])
    Y = AlgebraVector(heisenberg, [0.0, 1.0, 0.0])
    assert np.allclose(bracket(X, Y).coords, [0.0, 0.0, 1.0])


def test_orthonormal_coordinates():
    points = rng.standard_normal((5, 3))
    coords = sl2.from_orthonormal(points)
    assert np.allclose(coords[:, 0], points[:, 0] / math.sqrt(2.0))
    assert np.allclose(sl2.to_orthonormal(coords), points)
    assert np.allclose(np.linalg.norm(sl2.to_matrix(coords), axis=(-2, -1)), np.linalg.norm(points, axis=1))


def test_adjoint_norm_of_diagonal():
    g = GroupMatrix(sl2, np.diag([3.0, 1.0 / 3.0]))
    assert adjoint_norm(g) == pytest.approx(9.0)
    assert np.allclose(adjoint_action(g, E).coords, [0.0, 9.0, 0.0])
    profile = kak_log_profile(g)
    assert profile.max_root == pytest.approx(2.0 * math.log(3.0))
    assert profile.in_polygon(9.0)
    assert not profile.in_polygon(8.0)


def test_ball_checks():
    for model in [sl2, sl3]:
        g = random_sl_element(model, rng)
        check = ball_checks(g, 1e6, rng)
        assert check.passed
        assert check.member
        assert kak_log_profile(g).root_residual <= 1e-9


def test_InvalidRadiusError():
    with pytest.raises(InvalidRadiusError):
        ball_checks(GroupMatrix(sl2, np.eye(2)), 0.5)
    with pytest.raises(InvalidRadiusError):
        sl2_tube_volume(0.0, 1.0)
    with pytest.raises(InvalidRadiusError):
        nilcone_tube_membership(E, 0.1, -1.0)


def test_kak_decomposition():
    g = random_sl_element(sl3, rng)
    k1, a, k2 = kak_decomposition(g)
    assert np.allclose(k1 @ a @ k2, g.mat)
    assert np.linalg.det(k1) == pytest.approx(1.0)
    assert np.linalg.det(k2) == pytest.approx(1.0)
    assert np.all(np.diff(np.diag(a)) <= 0)


def test_NotInGroupError():
    with pytest.raises(NotInGroupError):
        GroupMatrix(sl2, np.diag([2.0, 2.0]))
    with pytest.raises(NotInGroupError):
        GroupMatrix(heisenberg, np.eye(3) + np.eye(3, k=-1))


def test_nilpotent_orbits():
    assert nilpotent_orbit_dim(regular_nilpotent(sl2)) == 2
    assert nilpotent_orbit_dim(regular_nilpotent(sl3)) == 6
    assert centralizer_dim(regular_nilpotent(sl3)) == 2
    assert split_rank_formula(sl3) == 6
    assert is_nilpotent(E)
    assert not is_nilpotent(H)
    with pytest.raises(NotNilpotentError):
        nilpotent_orbit_dim(H)


def test_max_nilpotent_dim():
    result = max_nilpotent_dim(sl3, samples=25, seed=1)
    assert result.d == 6
    assert result.sweep_max <= 6
    assert max_nilpotent_dim(heisenberg).d is None


def test_exp_log_roundtrip():
    for model in [sl2, sl3, heisenberg]:
        x = AlgebraVector(model, rng.uniform(-0.5, 0.5, size=model.dim))
        assert np.allclose(log_map(exp_map(x)).coords, x.coords, atol=1e-9)


def test_LogMapError():
    with pytest.raises(LogMapError):
        log_map(GroupMatrix(sl2, np.diag([-2.0, -0.5])))


def test_density_closed_form():
    for _ in range(20):
        x = AlgebraVector(sl2, rng.uniform(-2.0, 2.0, size=3))
        assert exp_density(x) == pytest.approx(float(sl2_density(x.matrix)), rel=1e-10)
    assert exp_density(AlgebraVector(sl2, np.zeros(3))) == 1.0
    assert exp_density(AlgebraVector(heisenberg, [1.0, 2.0, 3.0])) == 1.0


def test_density_series_matches_eigenvalues():
    x = AlgebraVector(sl3, rng.uniform(-0.2, 0.2, size=8))
    assert exp_density(x, method="series") == pytest.approx(exp_density(x, method="eigen"), rel=1e-10)
    with pytest.raises(SeriesTermsError):
        exp_density(x, series_terms=5)


def test_orbit_min_norm():
    assert orbit_min_norm(E) == 0.0
    assert orbit_min_norm(H) == pytest.approx(math.sqrt(2.0))
    assert orbit_min_norm(H, method="descent") == pytest.approx(math.sqrt(2.0), rel=1e-4)
    with pytest.raises(UnsupportedModelError):
        orbit_min_norm(regular_nilpotent(sl3))
    with pytest.raises(UnsupportedModelError):
        orbit_min_norm(AlgebraVector(heisenberg, [1.0, 0.0, 0.0]))


def test_tube_membership():
    assert nilcone_tube_membership(AlgebraVector(sl2, [0.0, 0.1, 0.0]), 0.05, 1.0)
    assert not nilcone_tube_membership(H, 0.05, 10.0)
    points = rng.uniform(-1.0, 1.0, size=(50, 3))
    mask = sl2_tube_mask(points, 0.3, 1.0)
    expected = [nilcone_tube_membership(AlgebraVector(sl2, sl2.from_orthonormal(point)), 0.3, 1.0) for point in points]
    assert mask.tolist() == expected


def test_tube_volume():
    assert sl2_tube_volume(2.0, 1.0) == pytest.approx(4.0 * math.pi / 3.0)
    assert sl2_tube_volume(1.0 - 1e-9, 1.0) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-6)
    assert sl2_tube_volume(0.1, 2.0) == pytest.approx(8.0 * sl2_tube_volume(0.05, 1.0))
    assert sl2_tube_volume(0.05, 1.0) < sl2_tube_volume(0.1, 1.0)


def test_load_csv(tmp_path):
    vectors = tmp_path / "vectors.csv"
    pd.DataFrame({"x0": [1.0, 0.0], "x1": [0.0, 1.0], "x2": [0.5, 0.0]}).to_csv(vectors, index=False)
    loaded = load_vectors_csv(sl2, str(vectors))
    assert np.allclose(loaded[0].coords, [1.0, 0.0, 0.5])

    matrices = tmp_path / "matrices.csv"
    pd.DataFrame({"m00": [2.0], "m01": [0.0], "m10": [0.0], "m11": [0.5]}).to_csv(matrices, index=False)
    assert adjoint_norm(load_group_matrices_csv(sl2, str(matrices))[0]) == pytest.approx(4.0)
    with pytest.raises(UnsupportedModelError):
        load_vectors_csv(sl3, str(vectors))
