import numpy as np
import pytest

from streampca import _kernels_nb as nb
from streampca import _kernels_np as knp
from streampca import backend
from streampca.errors import InvalidArgumentError
from streampca.rng import RngState


@pytest.fixture(autouse=True)
def restore_backend():
    yield
    backend.set_backend("auto")


def test_available_backends_lists_numpy_last():
    names = backend.available_backends()
    assert names[-1] == "numpy"
    assert "numba" in names


def test_set_backend_roundtrip():
    assert backend.set_backend("numpy") == "numpy"
    assert backend.backend_name() == "numpy"
    assert backend.set_backend("auto") == "numba"
    with pytest.raises(InvalidArgumentError):
        backend.set_backend("fortran")


def test_uint64_stream_identical_across_backends():
    seed = np.uint64(123456789)
    for start in (0, 5, 1000):
        a = np.empty(257, dtype=np.uint64)
        b = np.empty(257, dtype=np.uint64)
        knp.fill_uint64(seed, np.uint64(start), a)
        nb.fill_uint64(seed, np.uint64(start), b)
        assert np.array_equal(a, b)


def test_normals_identical_across_backends():
    a = np.empty(2048, dtype=np.float64)
    b = np.empty(2048, dtype=np.float64)
    knp.fill_normals(np.uint64(7), np.uint64(0), a)
    nb.fill_normals(np.uint64(7), np.uint64(0), b)
    assert np.abs(a - b).max() <= 1e-15


def test_qr_factor_parity_and_codes():
    m = RngState(42).normals(60).reshape(12, 5)
    qa = np.empty((12, 5))
    ra = np.empty((5, 5))
    qb = np.empty((12, 5))
    rb = np.empty((5, 5))
    # qr_factor destroys its input, so each backend gets a private copy
    assert knp.qr_factor(m.copy(), qa, ra, 1e-12) == 0
    assert nb.qr_factor(m.copy(), qb, rb, 1e-12) == 0
    assert np.abs(qa - qb).max() <= 1e-13
    assert np.abs(ra - rb).max() <= 1e-13

    dup = np.ascontiguousarray(np.column_stack([m[:, 0], m[:, 0]]))
    q2 = np.empty((12, 2))
    r2 = np.empty((2, 2))
    code_np = knp.qr_factor(dup.copy(), q2, r2, 1e-12)
    code_nb = nb.qr_factor(dup.copy(), q2, r2, 1e-12)
    assert code_np == code_nb == 2


def test_sgd_chunk_parity():
    d, k, steps = 20, 3, 200
    rng = RngState(11)
    q0 = np.linalg.qr(rng.normals(d * k).reshape(d, k))[0]
    xs = rng.normals(steps * d).reshape(steps, d)
    xs /= np.maximum(1.0, np.linalg.norm(xs, axis=1))[:, None]
    gammas = 5.0 / (10.0 + np.arange(1.0, steps + 1.0))

    out = []
    for mod in (knp, nb):
        q = np.ascontiguousarray(q0.copy())
        s = np.empty_like(q)
        r = np.empty((k, k))
        code = mod.sgd_chunk_dense(q, np.ascontiguousarray(xs), gammas, 1e-12, s, r)
        assert code == 0
        out.append(q)
    assert np.abs(out[0] - out[1]).max() <= 1e-12
    assert np.abs(out[0].T @ out[0] - np.eye(k)).max() <= 1e-13


def test_block_accum_parity():
    d, k, n = 16, 4, 500
    rng = RngState(13)
    q = np.linalg.qr(rng.normals(d * k).reshape(d, k))[0]
    xs = rng.normals(n * d).reshape(n, d)
    sa = np.zeros((d, k))
    sb = np.zeros((d, k))
    knp.block_accum_dense(sa, np.ascontiguousarray(q), np.ascontiguousarray(xs), 1.0 / n)
    nb.block_accum_dense(sb, np.ascontiguousarray(q), np.ascontiguousarray(xs), 1.0 / n)
    assert np.abs(sa - sb).max() <= 1e-13


def test_jacobi_sv_parity():
    m = RngState(17).normals(48 * 6).reshape(48, 6)
    sva = np.empty(6)
    svb = np.empty(6)
    knp.jacobi_sv(np.ascontiguousarray(m.copy()), sva)
    nb.jacobi_sv(np.ascontiguousarray(m.copy()), svb)
    assert np.abs(np.sort(sva) - np.sort(svb)).max() <= 1e-13


def test_shuffle_identical_across_backends():
    for n in (1, 2, 17, 1000):
        pa = np.arange(n, dtype=np.int64)
        pb = np.arange(n, dtype=np.int64)
        da = knp.shuffle(np.uint64(99), np.uint64(3), pa)
        db = nb.shuffle(np.uint64(99), np.uint64(3), pb)
        assert da == db
        assert np.array_equal(pa, pb)
        assert np.array_equal(np.sort(pa), np.arange(n))


def test_synthetic_fill_identical_across_backends():
    d = 12
    lam = np.array([0.3, 0.2, 0.1] + [0.04] * 9)
    cum_p = np.minimum(np.cumsum(lam) / lam.sum(), 1.0)
    cum_p[-1] = 1.0
    dirs = np.ascontiguousarray(np.eye(d) * np.sqrt(lam.sum()))
    outa = np.empty((64, d))
    outb = np.empty((64, d))
    knp.synthetic_fill(np.uint64(5), np.uint64(0), cum_p, dirs, outa)
    nb.synthetic_fill(np.uint64(5), np.uint64(0), cum_p, dirs, outb)
    assert np.array_equal(outa, outb)


def test_rngstate_works_on_forced_numpy_backend():
    backend.set_backend("numpy")
    a = RngState(21).uint64(32)
    backend.set_backend("numba")
    b = RngState(21).uint64(32)
    assert np.array_equal(a, b)
