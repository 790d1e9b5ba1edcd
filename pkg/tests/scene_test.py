import json

import pytest

import scenerag as sr


def _office_document():
    return {"name" : "tiny office",
            "objects" : [
                {"category" : "clock", "instance" : "clock_1", "position" : [1, 2, 2],
                    "orientation" : [0, 0, 0, 2], "interactive" : False,
                    "color" : "Black", "material" : "Metal", "visible" : True},
                {"category" : "printer", "instance" : "printer_1", "position" : [3, 0, 1],
                    "orientation" : [0, 0, 0, 1], "interactive" : True,
                    "color" : "white", "material" : None},
                ]}


def test_load_scene_normalizes(tmp_path):
    path = tmp_path / "scene.json"
    path.write_text( json.dumps(_office_document()) )

    scene = sr.load_scene(str(path))
    assert scene.name == "tiny office"
    assert scene.statistics() == (2, 2)
    assert scene.get("clock_1").orientation == (0.0, 0.0, 0.0, 1.0)
    # null material and missing visibility take their defaults
    assert scene.get("printer_1").material == sr.UNKNOWN_MATERIAL
    assert scene.get("printer_1").visible


def test_save_load_round_trip(tmp_path):
    scene = sr.generate_preset_scene('restaurant', seed=3)
    path = str(tmp_path / "restaurant.json")
    sr.save_scene(scene, path)
    assert sr.load_scene(path) == scene


def test_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(sr.SceneParseError):
        sr.load_scene(str(path))


def test_missing_fields():
    doc = _office_document()
    del doc["objects"][0]["position"]
    with pytest.raises(sr.SceneParseError):
        sr.Scene.from_dict(doc)


def test_duplicate_instance():
    doc = _office_document()
    doc["objects"][1]["category"] = "clock"
    doc["objects"][1]["instance"] = "clock_1"
    with pytest.raises(sr.SceneValidationError):
        sr.Scene.from_dict(doc)


def test_instance_must_carry_category():
    doc = _office_document()
    doc["objects"][0]["instance"] = "watch_1"
    with pytest.raises(sr.SceneValidationError):
        sr.Scene.from_dict(doc)


def test_degenerate_orientation_is_a_validation_error():
    doc = _office_document()
    doc["objects"][0]["orientation"] = [0, 0, 0, 0]
    with pytest.raises(sr.SceneValidationError):
        sr.Scene.from_dict(doc)


@pytest.mark.parametrize("field,value", [
    ("instance", 7),
    ("position", ["one", 2, 3]),
    ("position", {"x" : 1, "y" : 2, "z" : 3}),
    ("position", [1, 2]),
    ("orientation", [0, 0, "w", 1]),
    ("color", ["red"]),
])
def test_malformed_object_fields(tmp_path, field, value):
    doc = _office_document()
    doc["objects"][0][field] = value
    path = tmp_path / "malformed.json"
    path.write_text( json.dumps(doc) )
    with pytest.raises(sr.SceneError):
        sr.load_scene(str(path))


def test_unknown_instance():
    scene = sr.Scene.from_dict(_office_document())
    assert "clock_1" in scene
    with pytest.raises(sr.UnknownInstanceError):
        scene.get("clock_9")


def test_by_category_sorts_serials():
    objects = [sr.ObjectRecord("s", "chair", "chair_{}".format(i), (i, 0, 0)) for i in (3, 1, 2)]
    objects[0] = objects[0].replace(visible=False)
    scene = sr.Scene("s", tuple(objects))
    assert scene.by_category() == {"chair" : ["chair_1", "chair_2", "chair_3"]}
    assert scene.by_category(visible_only=True) == {"chair" : ["chair_1", "chair_2"]}


################################################################################
#                               synthetic scenes
################################################################################
@pytest.mark.parametrize("preset", sorted(sr.SCENE_PRESETS))
def test_preset_statistics(preset):
    info = sr.SCENE_PRESETS[preset]
    scene = sr.generate_preset_scene(preset, seed=0)
    assert scene.statistics() == (info['n_categories'], info['n_instances'])
    assert set(scene.categories) <= set(info['vocab'])


def test_generation_is_reproducible():
    a = sr.generate_preset_scene('office', seed=2, n_instances=34)
    b = sr.generate_preset_scene('office', seed=2, n_instances=34)
    c = sr.generate_preset_scene('office', seed=5, n_instances=34)
    assert a == b
    assert a != c
    assert a.statistics() == (18, 34)


def test_generation_parameters():
    with pytest.raises(sr.InvalidParameterError):
        sr.generate_synthetic_scene(0, 5, 3, ['a', 'b', 'c', 'd', 'e'])
    with pytest.raises(sr.InvalidParameterError):
        sr.generate_synthetic_scene(0, 6, 10, ['a', 'b', 'c', 'd', 'e'])
    with pytest.raises(sr.InvalidParameterError):
        sr.generate_preset_scene('moon base', seed=0)
