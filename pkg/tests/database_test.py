import threading

import numpy as np
import pytest

import scenerag as sr

VOCAB = ['chair', 'desk', 'lamp', 'printer', 'clock', 'plant', 'monitor', 'sofa', 'door', 'window']


@pytest.fixture(scope='module')
def small_model():
    return sr.TwoTowerModel.initialize(seed=0, embedder=sr.HashEmbedder(dimension=64), hidden=16, embed=8)


def _printer_room():
    objects = (
        sr.ObjectRecord("room", "printer", "printer_1", (1.0, 2.0, 0.0), color="white", material="plastic"),
        sr.ObjectRecord("room", "printer", "printer_2", (-3.0, 1.0, 0.0), color="gray", material="metal"),
        sr.ObjectRecord("room", "chair", "chair_1", (0.0, 4.0, 0.0), color="red", material="wooden"),
        sr.ObjectRecord("room", "chair", "chair_2", (2.0, -1.0, 0.0), color="blue", material="fabric"),
        sr.ObjectRecord("room", "lamp", "lamp_1", (5.0, 5.0, 1.0), interactive=True, color="yellow"),
        )
    return sr.Scene("room", objects)


def _brute_force(db, question, k):
    q = db.model.forward_question(question)
    scored = [(inst, sr.cosine_sim(q, vec)) for inst,vec in db.index_items()]
    return sorted(scored, key=lambda pair: (-pair[1], pair[0]))[:k]


################################################################################
def test_retrieval_equals_brute_force(small_model):
    rng = np.random.default_rng(0)
    questions = ["where is the {}?".format(c) for c in VOCAB]
    for trial in range(100):
        n_categories = int(rng.integers(2, len(VOCAB) + 1))
        n_instances = int(rng.integers(n_categories, 51))
        scene = sr.generate_synthetic_scene(trial, n_categories, n_instances, VOCAB)
        db = sr.KnowledgeDatabase.from_scene(scene, small_model)
        # hide a few objects
        for inst in rng.choice(scene.instances, size=min(3, n_instances - 1), replace=False):
            db.set_visibility(str(inst), False)

        for question in questions:
            k = int(rng.integers(1, 12))
            result = db.retrieve(question, k)
            assert list(result.ranked) == _brute_force(db, question, k)
            assert len(result) == min(k, len(db))


def test_ties_break_by_instance_id(small_model):
    scene = _printer_room()
    db = sr.KnowledgeDatabase.from_scene(scene, small_model)
    # re-insert chair_2 with chair_1's key vector to force an exact tie
    db._index['chair_2'] = db._index['chair_1']
    result = db.retrieve("Where is chair_1?", k=5)
    ranked = result.instances
    assert ranked.index('chair_1') + 1 == ranked.index('chair_2')


def test_result_expansion_and_spatial_facts(small_model):
    pose = sr.UserPose(position=(1.0, 0.0, 0.0))
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model, user=pose)
    result = db.retrieve("What color is printer_2?", k=3)
    for (record, rel, score), (inst, s) in zip(result, result.ranked):
        assert record.instance == inst
        assert score == s
        assert rel == sr.relative_position(record.position, pose)
    assert result.user == pose


def test_k_and_empty_index(small_model):
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model)
    with pytest.raises(sr.InvalidParameterError):
        db.retrieve("anything", k=0)
    assert len(db.retrieve("anything", k=100)) == 5

    for inst in list(db.scene().instances):
        db.set_visibility(inst, False)
    with pytest.raises(sr.EmptyIndexError):
        db.retrieve("anything", k=3)


################################################################################
#                                   updates
################################################################################
def _ask(db, question, k=5):
    result = db.retrieve(question, k)
    return sr.TemplateAnswerer().answer( sr.render_prompt(question, result) )


def test_hiding_a_printer_changes_the_count(small_model):
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model)
    assert _ask(db, "How many printers can be found?") == "2"
    db.set_visibility("printer_2", False)
    assert _ask(db, "How many printers can be found?") == "1"


def test_hidden_objects_leave_the_index(small_model):
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model)
    before = db.index_vector("chair_1").copy()

    db.set_visibility("chair_1", False)
    assert "chair_1" not in db.retrieve("Where is chair_1?", k=5).instances
    assert "chair_1" in db
    assert len(db) == 4
    with pytest.raises(sr.UnknownInstanceError):
        db.index_vector("chair_1")

    db.set_visibility("chair_1", True)
    assert np.array_equal(db.index_vector("chair_1"), before)
    assert "chair_1" in db.retrieve("Where is chair_1?", k=5).instances


def test_attribute_updates_keep_the_index(small_model):
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model)
    vector = db.index_vector("lamp_1")
    revision = db.revision

    moved = db.get("lamp_1").replace(position=(9.0, 9.0, 0.0), color="green")
    assert db.upsert_object(moved) == revision + 1
    assert db.index_vector("lamp_1") is vector
    assert db.get("lamp_1").color == "green"
    assert _ask(db, "What color is the lamp?") == "green"


def test_unknown_instance(small_model):
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model)
    with pytest.raises(sr.UnknownInstanceError):
        db.set_visibility("printer_9", False)
    with pytest.raises(sr.UnknownInstanceError):
        db.get("printer_9")


def test_pose_is_applied_with_the_retrieval(small_model):
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model)
    pose = sr.UserPose(position=(0.0, 4.0, 0.0))
    result = db.retrieve("Where is the closest chair to me?", k=5, pose=pose)
    assert db.user == pose
    assert result.user == pose
    assert _ask(db, "Where is the closest chair to me?") == "chair_1"


################################################################################
#                                  snapshots
################################################################################
def test_snapshot_round_trip(tmp_path, small_model):
    pose = sr.UserPose(position=(1.0, 1.0, 0.0), orientation=(0.0, 0.0, 1.0, 1.0))
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model, user=pose)
    db.set_visibility("chair_2", False)

    path = str(tmp_path / "snapshot.json")
    db.save_snapshot(path)
    restored = sr.KnowledgeDatabase.load_snapshot(path, small_model)

    assert restored.scene() == db.scene()
    assert restored.user == db.user
    assert [i for i,_ in restored.index_items()] == [i for i,_ in db.index_items()]
    for (_, a), (_, b) in zip(restored.index_items(), db.index_items()):
        assert np.array_equal(a, b)


################################################################################
#                                 concurrency
################################################################################
def test_concurrent_readers_and_writers(small_model):
    db = sr.KnowledgeDatabase.from_scene(_printer_room(), small_model)
    errors = []

    def _reader():
        try:
            for _ in range(50):
                result = db.retrieve("Where is printer_1?", k=5)
                # a result never mixes index states
                assert len(set(result.instances)) == len(result)
        except Exception as e:
            errors.append(e)

    def _writer():
        try:
            for i in range(50):
                db.set_visibility("printer_2", i % 2 == 0)
        except Exception as e:
            errors.append(e)

    threads = [threading.Thread(target=_reader) for _ in range(4)] + [threading.Thread(target=_writer)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert not errors
    assert db.revision >= 51
