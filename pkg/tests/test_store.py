import struct

import numpy as np
import pytest

from urlsift.errors import CorruptionError, FormatError, StoreError
from urlsift.store import MAGIC, encode_bundle, load_bundle, save_bundle


@pytest.fixture(params=["nb", "logreg", "mlp"])
def run(request, trained_runs):
    return trained_runs[request.param]


def random_urls(dataset, n=1000, seed=0):
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(dataset), size=n, replace=False)
    return [dataset.urls[i] for i in idx]


def test_round_trip_predictions_identical(tmp_path, run, fixture_dataset):
    path = tmp_path / "m.usft"
    save_bundle(run.bundle, path)
    loaded = load_bundle(path)
    assert loaded == run.bundle
    urls = random_urls(fixture_dataset) + ["www.seas.gwu.edu/~mfeldman?", "totally-new-token.zz"]
    np.testing.assert_array_equal(loaded.predict_proba(urls), run.bundle.predict_proba(urls))


def test_file_layout(tmp_path, run):
    path = tmp_path / "m.usft"
    save_bundle(run.bundle, path)
    data = path.read_bytes()
    assert data[:4] == MAGIC
    assert data[4] == 1
    # atomic write leaves no temp files behind
    assert [p.name for p in tmp_path.iterdir()] == ["m.usft"]


def test_bad_magic(tmp_path):
    p = tmp_path / "x.usft"
    p.write_bytes(b"NOPE\x01\x00")
    with pytest.raises(FormatError, match="magic"):
        load_bundle(p)


def test_unsupported_version(tmp_path, trained_runs):
    data = bytearray(encode_bundle(trained_runs["nb"].bundle))
    data[4] = 255
    p = tmp_path / "v.usft"
    p.write_bytes(bytes(data))
    with pytest.raises(FormatError, match="supported versions: 1"):
        load_bundle(p)


@pytest.mark.parametrize("fraction", [0.05, 0.5, 0.9, 0.999])
def test_truncated_file(tmp_path, trained_runs, fraction):
    data = encode_bundle(trained_runs["mlp"].bundle)
    p = tmp_path / "t.usft"
    p.write_bytes(data[: int(len(data) * fraction)])
    with pytest.raises(FormatError) as err:
        load_bundle(p)
    assert err.value.offset is not None
    assert "offset" in str(err.value)


def test_trailing_bytes_rejected(tmp_path, trained_runs):
    p = tmp_path / "t.usft"
    p.write_bytes(encode_bundle(trained_runs["nb"].bundle) + b"\x00")
    with pytest.raises(FormatError, match="trailing"):
        load_bundle(p)


def test_dimension_mismatch_is_corruption(tmp_path, trained_runs):
    import copy

    from urlsift.linear import LogRegModel

    bundle = copy.copy(trained_runs["logreg"].bundle)
    V = bundle.featurizer.dim
    bundle.model = LogRegModel(np.zeros((4, V - 1)), np.zeros(4))  # bypasses the constructor check
    p = tmp_path / "c.usft"
    p.write_bytes(encode_bundle(bundle))
    with pytest.raises(CorruptionError, match="features"):
        load_bundle(p)


def test_missing_file(tmp_path):
    with pytest.raises(StoreError):
        load_bundle(tmp_path / "absent.usft")


def test_unwritable_destination(tmp_path, trained_runs):
    with pytest.raises(StoreError):
        save_bundle(trained_runs["nb"].bundle, tmp_path / "no" / "such" / "dir" / "m.usft")


def test_float_encoding_is_little_endian(trained_runs):
    bundle = trained_runs["nb"].bundle
    data = encode_bundle(bundle)
    first_idf = bundle.featurizer.idf.weights[0]
    assert struct.pack("<d", first_idf) in data


def test_corruption_error_class():
    assert issubclass(CorruptionError, FormatError)
