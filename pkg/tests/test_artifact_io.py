import numpy as np
import pytest

from seiznet.artifact import VERSION_TAG, load_artifact, save_artifact
from seiznet.errors import DataError
from seiznet.model import init_params, param_names, toy_config
from seiznet.preprocess import ScalerParams


def make_artifact(tmp_path, seed=0, policy="universal", metadata=None):
    cfg = toy_config()
    params = init_params(cfg, seed)
    rng = np.random.default_rng(seed + 50)
    scaler = ScalerParams(rng.standard_normal(cfg.input_len),
                          rng.uniform(0.5, 2.0, cfg.input_len))
    path = tmp_path / "model.bin"
    save_artifact(path, cfg, params, scaler, policy,
                  metadata or {"seed": "0", "epochs_run": "3"})
    return path, cfg, params, scaler


def test_round_trip_is_bitwise(tmp_path):
    path, cfg, params, scaler = make_artifact(tmp_path)
    cfg2, params2, scaler2, policy, meta = load_artifact(path)
    assert cfg2 == cfg
    assert policy == "universal"
    assert meta["epochs_run"] == "3"
    assert np.array_equal(scaler2.mean, scaler.mean)
    assert np.array_equal(scaler2.std, scaler.std)
    assert set(params2) == set(param_names(cfg))
    for name in params:
        assert np.array_equal(params2[name], params[name]), name


def test_save_load_save_identical_bytes(tmp_path):
    path, cfg, params, scaler = make_artifact(tmp_path)
    cfg2, params2, scaler2, policy, meta = load_artifact(path)
    path2 = tmp_path / "again.bin"
    save_artifact(path2, cfg2, params2, scaler2, policy, meta)
    assert path.read_bytes() == path2.read_bytes()


def test_fixed_policy_round_trip(tmp_path):
    path, *_ = make_artifact(tmp_path, policy="fixed:2.5")
    _, _, _, policy, _ = load_artifact(path)
    assert policy == "fixed:2.5"


def test_corrupted_version_tag(tmp_path):
    path, *_ = make_artifact(tmp_path)
    blob = path.read_bytes().replace(VERSION_TAG.encode(), b"seiznet-model v9")
    path.write_bytes(blob)
    with pytest.raises(DataError, match="version"):
        load_artifact(path)


def test_truncated_file(tmp_path):
    path, *_ = make_artifact(tmp_path)
    blob = path.read_bytes()
    path.write_bytes(blob[:len(blob) - 64])
    with pytest.raises(DataError, match="truncat"):
        load_artifact(path)


def test_trailing_garbage(tmp_path):
    path, *_ = make_artifact(tmp_path)
    path.write_bytes(path.read_bytes() + b"extra")
    with pytest.raises(DataError, match="trailing"):
        load_artifact(path)


def test_not_an_artifact(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"hello world")
    with pytest.raises(DataError):
        load_artifact(path)


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_artifact(tmp_path / "absent.bin")


def test_failed_save_leaves_no_file(tmp_path):
    cfg = toy_config()
    params = init_params(cfg, 0)
    scaler = ScalerParams(np.zeros(cfg.input_len), np.ones(cfg.input_len))
    target = tmp_path / "missing-dir" / "model.bin"
    with pytest.raises(OSError):
        save_artifact(target, cfg, params, scaler, "off")
    assert not target.exists()


def test_no_tmp_residue_after_save(tmp_path):
    path, *_ = make_artifact(tmp_path)
    assert list(tmp_path.glob("*.tmp")) == []
