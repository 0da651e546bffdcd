import math

import numpy as np
import pytest

from conftest import make_corpus_text
from streampca.errors import InvalidArgumentError, ParseError
from streampca.rng import RngState
from streampca.streams import (
    BagOfWordsDataset,
    DatasetStream,
    SyntheticSpec,
    SyntheticStream,
    load_bag_of_words,
    make_stream,
    sample_synthetic,
    synthetic_basis,
)

SPEC6 = SyntheticSpec(dim=6, eigenvalues=(0.3, 0.25, 0.2, 0.1, 0.1, 0.05))


def test_spec_validation():
    with pytest.raises(InvalidArgumentError):
        SyntheticSpec(dim=2, eigenvalues=(0.5,))
    with pytest.raises(InvalidArgumentError):
        SyntheticSpec(dim=2, eigenvalues=(0.5, 0.6))
    with pytest.raises(InvalidArgumentError):
        SyntheticSpec(dim=2, eigenvalues=(0.5, 0.0))
    with pytest.raises(InvalidArgumentError):
        SyntheticSpec(dim=2, eigenvalues=(1.2, 0.1))
    with pytest.raises(InvalidArgumentError):
        SyntheticSpec(dim=3, eigenvalues=(0.6, 0.4, 0.3))
    SyntheticSpec(dim=2, eigenvalues=(0.5, 0.5))


def test_identity_rotation_axes():
    v = synthetic_basis(SPEC6)
    assert np.array_equal(v, np.eye(6))


def test_rotated_basis_is_orthonormal_and_deterministic():
    spec = SyntheticSpec(dim=10, eigenvalues=(0.1,) * 10, rotation_seed=5)
    v = synthetic_basis(spec)
    assert np.abs(v.T @ v - np.eye(10)).max() <= 1e-12
    again = synthetic_basis(SyntheticSpec(dim=10, eigenvalues=(0.1,) * 10, rotation_seed=5))
    assert np.array_equal(v, again)
    other = synthetic_basis(SyntheticSpec(dim=10, eigenvalues=(0.1,) * 10, rotation_seed=6))
    assert not np.array_equal(v, other)


def test_samples_are_signed_scaled_eigenvectors():
    rng = RngState(17)
    v = synthetic_basis(SPEC6)
    r = math.sqrt(sum(SPEC6.eigenvalues))
    for _ in range(50):
        x = sample_synthetic(SPEC6, rng)
        overlaps = v.T @ x
        hits = np.flatnonzero(np.abs(overlaps) > 1e-9)
        assert hits.size == 1
        assert abs(abs(overlaps[hits[0]]) - r) <= 1e-12


def test_empirical_covariance_matches_spec():
    n = 200_000
    stream = SyntheticStream(SPEC6, seed=4)
    xs = stream.take(n)
    cov = xs.T @ xs / n
    target = np.diag(SPEC6.eigenvalues)
    assert np.abs(cov - target).max() <= 5.0 / math.sqrt(n)


def test_component_frequencies_match_probabilities():
    n = 100_000
    xs = SyntheticStream(SPEC6, seed=9).take(n)
    v = synthetic_basis(SPEC6)
    comp = np.argmax(np.abs(xs @ v), axis=1)
    freq = np.bincount(comp, minlength=6) / n
    p = np.array(SPEC6.eigenvalues) / sum(SPEC6.eigenvalues)
    assert np.abs(freq - p).max() <= 5.0 / math.sqrt(n)


def test_signs_are_balanced():
    xs = SyntheticStream(SPEC6, seed=2).take(50_000)
    v = synthetic_basis(SPEC6)
    overlaps = xs @ v
    signs = np.sign(overlaps[np.abs(overlaps) > 1e-9])
    assert abs(signs.mean()) <= 0.02


def test_stream_chunks_equal_one_shot():
    a = SyntheticStream(SPEC6, seed=31)
    parts = np.vstack([a.take(7), a.take(13), a.take(80)])
    b = SyntheticStream(SPEC6, seed=31).take(100)
    assert np.array_equal(parts, b)
    assert a.position == 100


def test_distinct_seeds_give_distinct_streams():
    differing = 0
    for s in range(20):
        xa = SyntheticStream(SPEC6, seed=1000 + s).take(8)
        xb = SyntheticStream(SPEC6, seed=2000 + s).take(8)
        if not np.array_equal(xa, xb):
            differing += 1
    assert differing >= 19


def test_unit_norm_exact_at_full_mass():
    spec = SyntheticSpec(dim=3, eigenvalues=(0.5, 0.3, 0.2), rotation_seed=11)
    xs = SyntheticStream(spec, seed=1).take(10_000)
    norms = np.sqrt(np.einsum("ij,ij->i", xs, xs))
    assert norms.max() <= 1.0


# --- bag-of-words corpus ---


def test_load_small_example(tmp_path):
    text = "2\n3\n4\n1 1 2\n1 3 1\n2 2 4\n2 3 2\n"
    path = tmp_path / "docword.txt"
    path.write_text(text)
    ds = load_bag_of_words(path)
    assert ds.n_points == 2
    assert ds.dim == 3
    # feature maxima: word1 -> 2, word2 -> 4, word3 -> 2
    p0 = ds.point(0)
    assert np.array_equal(p0.indices, [0, 2])
    # scaled values [1.0, 0.5] have norm sqrt(1.25) > 1, so the guard rescales
    assert p0.values == pytest.approx([2.0 / math.sqrt(5.0), 1.0 / math.sqrt(5.0)])
    p1 = ds.point(1)
    assert np.array_equal(p1.indices, [1, 2])
    assert p1.values == pytest.approx([1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)])


def test_norm_guard_applies_per_document(tmp_path):
    # one doc hitting every feature maximum: raw scaled norm sqrt(3) > 1
    text = "1\n3\n3\n1 1 5\n1 2 7\n1 3 9\n"
    path = tmp_path / "docword.txt"
    path.write_text(text)
    ds = load_bag_of_words(path)
    vals = ds.point(0).values
    assert math.sqrt(float(vals @ vals)) <= 1.0
    assert vals == pytest.approx([1.0 / math.sqrt(3.0)] * 3)


@pytest.mark.parametrize(
    "text,lineno,fragment",
    [
        ("x\n3\n1\n1 1 1\n", 1, "document count"),
        ("2\ny\n1\n1 1 1\n", 2, "vocabulary size"),
        ("2\n3\nz\n1 1 1\n", 3, "entry count"),
        ("2\n3\n2\n1 1 1\n1 2\n", 5, "expected 'docID wordID count'"),
        ("2\n3\n2\n1 1 1\n1 2 1 9\n", 5, "expected 'docID wordID count'"),
        ("2\n3\n2\n1 1 1\n3 2 1\n", 5, "document id 3 out of range"),
        ("2\n3\n2\n1 1 1\n2 4 1\n", 5, "word id 4 out of range"),
        ("2\n3\n2\n1 1 1\n2 2 0\n", 5, "count must be positive"),
        ("2\n3\n3\n1 1 1\n2 2 1", 6, "unexpected end of file"),
        ("2\n3\n1\n1 1 1\n2 2 2\n", 5, "unexpected content"),
        ("2\n3\n3\n1 1 1\n2 2 1\n1 1 4\n", 6, "duplicate entry for document 1, word 1"),
    ],
)
def test_parse_errors_carry_line_numbers(tmp_path, text, lineno, fragment):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ParseError) as exc:
        load_bag_of_words(path)
    assert exc.value.line == lineno
    assert fragment in str(exc.value)


def test_empty_corpus_loads_but_cannot_stream(tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("0\n0\n0\n")
    ds = load_bag_of_words(path)
    assert ds.n_points == 0
    with pytest.raises(InvalidArgumentError):
        DatasetStream(ds, seed=1)


def test_each_pass_is_a_permutation(corpus_path):
    ds = load_bag_of_words(corpus_path)
    stream = DatasetStream(ds, seed=77)
    n = ds.n_points

    def doc_ids(rows):
        # identify each row by its first feature id and value
        out = []
        for t in range(rows.n_rows):
            lo, hi = int(rows.indptr[t]), int(rows.indptr[t + 1])
            out.append((rows.indices[lo], round(float(rows.values[lo]), 12), hi - lo))
        return out

    ref = {}
    for i in range(n):
        p = ds.point(i)
        key = (p.indices[0], round(float(p.values[0]), 12), p.indices.size)
        ref[key] = ref.get(key, 0) + 1

    for _pass in range(3):
        seen = {}
        rows = stream.take(n)
        for key in doc_ids(rows):
            seen[key] = seen.get(key, 0) + 1
        assert seen == ref


def test_passes_are_reshuffled(corpus_path):
    ds = load_bag_of_words(corpus_path)
    stream = DatasetStream(ds, seed=3)
    n = ds.n_points
    a = stream.take(n)
    b = stream.take(n)
    assert not (
        np.array_equal(a.indices, b.indices) and np.array_equal(a.values, b.values)
    )


def test_take_crossing_pass_boundary(corpus_path):
    ds = load_bag_of_words(corpus_path)
    n = ds.n_points
    a = DatasetStream(ds, seed=5)
    chunk = a.take(n + 25)
    assert chunk.n_rows == n + 25
    assert a.position == n + 25

    b = DatasetStream(ds, seed=5)
    first = b.take(n)
    second = b.take(25)
    assert np.array_equal(chunk.indices, np.concatenate([first.indices, second.indices]))
    assert np.array_equal(chunk.values, np.concatenate([first.values, second.values]))


def test_dataset_stream_deterministic(corpus_path):
    ds = load_bag_of_words(corpus_path)
    a = DatasetStream(ds, seed=123).take(50)
    b = DatasetStream(ds, seed=123).take(50)
    assert np.array_equal(a.indptr, b.indptr)
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.values, b.values)


def test_row_slice_windows_share_storage(corpus_path):
    ds = load_bag_of_words(corpus_path)
    rows = ds.rows(10, 20)
    window = rows.row_slice(2, 5)
    assert window.n_rows == 3
    assert window.indices is rows.indices
    lo = int(window.indptr[0])
    assert np.array_equal(window.indices[lo : lo + 2], ds.point(12).indices[:2])


def test_make_stream_dispatch(corpus_path):
    assert isinstance(make_stream(SPEC6, 1), SyntheticStream)
    assert isinstance(make_stream(load_bag_of_words(corpus_path), 1), DatasetStream)
    with pytest.raises(InvalidArgumentError):
        make_stream("nope", 1)


def test_take_validation(corpus_path):
    with pytest.raises(InvalidArgumentError):
        SyntheticStream(SPEC6, 1).take(0)
    with pytest.raises(InvalidArgumentError):
        DatasetStream(load_bag_of_words(corpus_path), 1).take(0)


def test_corpus_fixture_sane(corpus_path):
    text = make_corpus_text()
    assert (corpus_path.read_text()) == text
    ds = load_bag_of_words(corpus_path)
    assert ds.n_points == 400
    assert ds.dim == 60
    for i in range(ds.n_points):
        p = ds.point(i)
        assert math.sqrt(float(p.values @ p.values)) <= 1.0
