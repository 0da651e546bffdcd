import math

import numpy as np
import pytest

from oracles import jacobi_eigh
from streampca.errors import (
    InfiniteAngleError,
    InvalidArgumentError,
    RankDeficiencyError,
)
from streampca.metrics import (
    ReferenceSubspace,
    analytic_reference,
    reference_oracle,
    residual_error,
    spectral_error,
    subspace_distance,
    tan_error,
)
from streampca.streams import (
    SyntheticSpec,
    SyntheticStream,
    load_bag_of_words,
    synthetic_basis,
)


def _random_basis(rng, d, k):
    return np.linalg.qr(rng.normal(size=(d, k)))[0]


def _ref(basis):
    basis = np.ascontiguousarray(basis, dtype=np.float64)
    return ReferenceSubspace(
        basis=basis,
        eigenvalues=np.full(basis.shape[1], 0.5),
        provenance="test",
    )


# ---------------------------------------------------------------------------
# the two error routes and their hand values


def test_plane_rotation_gives_sin_squared():
    theta = math.radians(30.0)
    ref = _ref(np.array([[1.0], [0.0]]))
    q = np.array([[math.cos(theta)], [math.sin(theta)]])
    assert spectral_error(ref, q) == pytest.approx(0.25, abs=1e-15)
    assert residual_error(ref, q) == pytest.approx(0.25, abs=1e-15)
    assert tan_error(ref, q) == pytest.approx(math.tan(theta), abs=1e-15)


def test_error_is_zero_on_the_same_span():
    # axis-aligned case is exact; a random basis only to rounding
    axis = _ref(np.eye(4)[:, :2])
    assert spectral_error(axis, axis.basis.copy()) == 0.0
    rng = np.random.default_rng(0)
    u = _random_basis(rng, 7, 3)
    ref = _ref(u)
    assert spectral_error(ref, u.copy()) <= 1e-14
    # any rotation of the basis spans the same subspace
    rot = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    assert spectral_error(ref, u @ rot) <= 1e-14
    assert residual_error(ref, u @ rot) <= 1e-14


def test_error_is_one_on_the_orthogonal_complement():
    ref = _ref(np.array([[1.0], [0.0]]))
    q = np.array([[0.0], [1.0]])
    assert spectral_error(ref, q) == 1.0
    assert residual_error(ref, q) == 1.0
    with pytest.raises(InfiniteAngleError):
        tan_error(ref, q)


@pytest.mark.parametrize("d, k", [(5, 1), (12, 3), (30, 10)])
def test_both_routes_agree_on_random_pairs(d, k):
    rng = np.random.default_rng(d * 100 + k)
    for _ in range(25):
        ref = _ref(_random_basis(rng, d, k))
        q = _random_basis(rng, d, k)
        assert abs(spectral_error(ref, q) - residual_error(ref, q)) <= 1e-10


def test_error_is_invariant_to_estimate_rotation():
    rng = np.random.default_rng(3)
    ref = _ref(_random_basis(rng, 9, 4))
    q = _random_basis(rng, 9, 4)
    base = spectral_error(ref, q)
    for _ in range(5):
        rot = np.linalg.qr(rng.normal(size=(4, 4)))[0]
        assert spectral_error(ref, q @ rot) == pytest.approx(base, abs=1e-12)


def test_partial_overlap_hand_case():
    # Q shares e1 with the reference and replaces e2 by e3
    ref = _ref(np.eye(4)[:, :2])
    q = np.ascontiguousarray(np.eye(4)[:, [0, 2]])
    assert spectral_error(ref, q) == 1.0
    assert subspace_distance(ref.basis, q) == 1.0


def test_tan_error_small_angle():
    theta = 1e-4
    ref = _ref(np.array([[1.0], [0.0]]))
    q = np.array([[math.cos(theta)], [math.sin(theta)]])
    assert tan_error(ref, q) == pytest.approx(math.tan(theta), rel=1e-8)


def test_rounding_slip_is_clamped_but_gross_violation_raises():
    ref = _ref(np.array([[1.0], [0.0]]))
    # norm slightly above 1: sigma_min^2 overshoots 1 by ~1e-15
    q = np.array([[1.0 + 5e-16], [0.0]])
    assert spectral_error(ref, q) == 0.0
    # norm 2 is not a rounding slip and must be reported
    with pytest.raises(InvalidArgumentError, match="outside"):
        spectral_error(ref, np.array([[2.0], [0.0]]))


def test_shape_and_finiteness_checks():
    ref = _ref(np.eye(3)[:, :2])
    with pytest.raises(InvalidArgumentError, match="shape"):
        spectral_error(ref, np.eye(3))
    bad = np.eye(3)[:, :2].copy()
    bad[0, 0] = np.nan
    with pytest.raises(InvalidArgumentError, match="finite"):
        residual_error(ref, bad)


def test_reference_subspace_properties():
    ref = _ref(np.eye(5)[:, :2])
    assert ref.dim == 5
    assert ref.k == 2


def test_subspace_distance_is_symmetric():
    rng = np.random.default_rng(8)
    a = _random_basis(rng, 8, 3)
    b = _random_basis(rng, 8, 3)
    assert subspace_distance(a, b) == pytest.approx(subspace_distance(b, a), abs=1e-14)
    assert subspace_distance(a, a) <= 1e-15


# ---------------------------------------------------------------------------
# analytic reference for synthetic sources


def test_analytic_reference_axis_aligned():
    spec = SyntheticSpec(dim=5, eigenvalues=(0.4, 0.3, 0.1, 0.1, 0.05))
    ref = analytic_reference(spec, 2)
    np.testing.assert_array_equal(ref.basis, np.eye(5)[:, :2])
    np.testing.assert_array_equal(ref.eigenvalues, [0.4, 0.3])
    assert ref.provenance == "analytic"


def test_analytic_reference_rotated_spans_leading_eigenvectors():
    spec = SyntheticSpec(dim=6, eigenvalues=(0.3, 0.25, 0.2, 0.1, 0.1, 0.05), rotation_seed=5)
    ref = analytic_reference(spec, 3)
    v = synthetic_basis(spec)
    assert subspace_distance(ref.basis, v[:, :3]) <= 1e-15
    np.testing.assert_allclose(ref.basis.T @ ref.basis, np.eye(3), rtol=0, atol=1e-12)


def test_analytic_reference_rejects_tied_gap():
    spec = SyntheticSpec(dim=6, eigenvalues=(0.3, 0.25, 0.2, 0.1, 0.1, 0.05), rotation_seed=5)
    with pytest.raises(InvalidArgumentError, match="tied"):
        analytic_reference(spec, 4)  # eigenvalues 4 and 5 are both 0.1
    assert analytic_reference(spec, 5).k == 5  # 0.1 > 0.05 is fine


def test_analytic_reference_k_range():
    spec = SyntheticSpec(dim=4, eigenvalues=(0.4, 0.3, 0.2, 0.1))
    with pytest.raises(InvalidArgumentError):
        analytic_reference(spec, 0)
    with pytest.raises(InvalidArgumentError):
        analytic_reference(spec, 5)
    assert analytic_reference(spec, 4).k == 4  # full space needs no gap


# ---------------------------------------------------------------------------
# streaming reference oracle


def test_oracle_matches_dense_eigendecomposition():
    rng = np.random.default_rng(17)
    xs = rng.normal(size=(400, 8)) @ np.diag([1.0, 0.8, 0.6, 0.4, 0.1, 0.1, 0.05, 0.02])
    xs /= np.max(np.linalg.norm(xs, axis=1))
    ref = reference_oracle(xs, 3)
    evals, evecs = jacobi_eigh(xs.T @ xs / xs.shape[0])
    assert subspace_distance(ref.basis, evecs[:, :3]) <= 1e-10
    # Rayleigh estimates align per column slower than the subspace does
    np.testing.assert_allclose(ref.eigenvalues, evals[:3], rtol=1e-5)


def test_oracle_recovers_synthetic_subspace():
    spec = SyntheticSpec(dim=6, eigenvalues=(0.3, 0.25, 0.2, 0.1, 0.1, 0.05), rotation_seed=9)
    xs = SyntheticStream(spec, seed=21).take(5000)
    ref = reference_oracle(xs, 3)
    exact = analytic_reference(spec, 3)
    assert subspace_distance(ref.basis, exact.basis) <= 1e-9
    assert spectral_error(exact, ref.basis) <= 1e-9


def test_oracle_is_deterministic_and_orthonormal():
    xs = np.random.default_rng(2).normal(size=(120, 7)) * 0.1
    a = reference_oracle(xs, 2, seed=5)
    b = reference_oracle(xs, 2, seed=5)
    np.testing.assert_array_equal(a.basis, b.basis)
    np.testing.assert_array_equal(a.eigenvalues, b.eigenvalues)
    np.testing.assert_allclose(a.basis.T @ a.basis, np.eye(2), rtol=0, atol=1e-12)
    assert "converged=True" in a.provenance


def test_oracle_warns_when_pass_budget_is_too_small():
    xs = np.random.default_rng(4).normal(size=(300, 10)) * 0.1
    with pytest.warns(RuntimeWarning, match="did not converge"):
        ref = reference_oracle(xs, 2, max_passes=1)
    assert "converged=False" in ref.provenance


def test_oracle_reports_rank_deficiency():
    xs = np.tile(np.array([[0.3, 0.4, 0.0]]), (50, 1))
    with pytest.raises(RankDeficiencyError, match="rank"):
        reference_oracle(xs, 2)


def test_oracle_validation():
    xs = np.random.default_rng(0).normal(size=(10, 4))
    with pytest.raises(InvalidArgumentError):
        reference_oracle(xs, 0)
    with pytest.raises(InvalidArgumentError):
        reference_oracle(xs, 5)
    with pytest.raises(InvalidArgumentError):
        reference_oracle(xs, 2, max_passes=0)
    with pytest.raises(InvalidArgumentError):
        reference_oracle(np.empty((0, 4)), 2)


def test_oracle_accepts_dataset_and_matches_dense_rows(corpus_path):
    ds = load_bag_of_words(corpus_path)
    dense = np.zeros((ds.n_points, ds.dim))
    for i in range(ds.n_points):
        p = ds.point(i)
        dense[i, p.indices] = p.values
    a = reference_oracle(ds, 3, seed=11)
    b = reference_oracle(dense, 3, seed=11)
    assert subspace_distance(a.basis, b.basis) <= 1e-12
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10)
