import json

import numpy as np
import pytest

import scenerag as sr


@pytest.fixture
def model():
    return sr.TwoTowerModel.initialize(seed=11, embedder=sr.HashEmbedder(dimension=32, seed=2), hidden=8, embed=4)


def test_round_trip_is_bit_identical(tmp_path, model):
    path = str(tmp_path / "model.json")
    checksum = sr.save_model(model, path)
    loaded = sr.load_model(path, checksum=checksum, expected_dimension=32)

    for a, b in zip(model.parameters(), loaded.parameters()):
        assert np.array_equal(a, b)
    assert loaded.embedder == model.embedder
    assert loaded.checkpoint_id == model.checkpoint_id

    # save -> load -> save reproduces the same bytes
    again = str(tmp_path / "again.json")
    assert sr.save_model(loaded, again) == checksum
    with open(path, 'rb') as f1, open(again, 'rb') as f2:
        assert f1.read() == f2.read()


def test_checkpoint_layout(tmp_path, model):
    path = str(tmp_path / "model.json")
    sr.save_model(model, path)
    with open(path, 'r', encoding='utf-8') as f:
        doc = json.load(f)
    assert doc['format'] == sr.CHECKPOINT_FORMAT
    assert doc['version'] == sr.CHECKPOINT_VERSION
    assert doc['dimensions'] == {'D' : 32, 'H' : 8, 'E' : 4}
    assert doc['embedder'] == {'type' : 'hash', 'dimension' : 32, 'seed' : 2}
    tower = doc['parameters']['question']
    assert len(tower['W1']) == 8 * 32
    assert len(tower['b1']) == 8
    assert len(tower['W2']) == 4 * 8
    assert len(tower['b2']) == 4


def test_encrypted_checkpoint(tmp_path, model):
    path = str(tmp_path / "model.enc")
    checksum = sr.save_model(model, path, passwd="hunter2")
    loaded = sr.load_model(path, passwd="hunter2", checksum=checksum)
    assert loaded.checkpoint_id == model.checkpoint_id

    with pytest.raises(sr.CheckpointError):
        sr.load_model(path, passwd="wrong")
    with pytest.raises(sr.CheckpointError):
        sr.load_model(path)


def test_checksum_mismatch(tmp_path, model):
    path = str(tmp_path / "model.json")
    sr.save_model(model, path)
    with pytest.raises(sr.CheckpointError):
        sr.load_model(path, checksum="0" * 64)


def test_dimension_mismatch(tmp_path, model):
    path = str(tmp_path / "model.json")
    sr.save_model(model, path)
    with pytest.raises(sr.CheckpointError):
        sr.load_model(path, expected_dimension=256)


def test_corrupted_checkpoints(tmp_path, model):
    doc = model.to_dict()

    bad_version = dict(doc, version=99)
    with pytest.raises(sr.CheckpointError):
        sr.TwoTowerModel.from_dict(bad_version)

    short = json.loads(json.dumps(doc))
    short['parameters']['question']['W1'] = short['parameters']['question']['W1'][:-1]
    with pytest.raises(sr.CheckpointError):
        sr.TwoTowerModel.from_dict(short)

    path = tmp_path / "truncated.json"
    path.write_bytes( sr.model_to_bytes(model)[:100] )
    with pytest.raises(sr.CheckpointError):
        sr.load_model(str(path))
