import json

import numpy as np
import pytest

from tl2la.io import (
    FormatError,
    iter_scene_file,
    map_from_record,
    map_to_record,
    read_map,
    read_predictions,
    scene_from_record,
    scene_to_record,
    write_map,
    write_predictions,
    write_scenes,
)
from tl2la.methods import Method, predict_rejection
from tl2la.model import RoadMap
from tl2la.simulator import build_map, iter_scenes, preset


def test_map_round_trip(tmp_path):
    for name in ("Basic4Way", "ProtectedLeft"):
        road_map = build_map(preset(name))
        write_map(road_map, tmp_path / "map.json")
        assert read_map(tmp_path / "map.json") == road_map
    bare = RoadMap(road_map.lanes, road_map.lights, None)
    assert map_from_record(map_to_record(bare)) == bare


def test_map_file_layout(tmp_path):
    write_map(build_map(preset("Basic4Way")), tmp_path / "map.json")
    record = json.loads((tmp_path / "map.json").read_text())
    assert record["format_version"] == 1
    assert set(record) == {"format_version", "lanes", "lights", "ground_truth"}
    assert set(record["lanes"][0]) == {"id", "left_boundary", "right_boundary", "turn_type",
                                       "successor_ids", "entry_point"}


def test_scene_round_trip(tmp_path):
    cfg = preset("RedRunners").with_(scene_count=4, detection_noise=0.1, ego_driver=True)
    scenes = list(iter_scenes(cfg))
    with open(tmp_path / "s.ndjson", "w") as stream:
        assert write_scenes(scenes, stream) == 4
    assert list(iter_scene_file(tmp_path / "s.ndjson")) == scenes


def test_split_tracks_are_joined():
    record = {
        "format_version": 1, "scene_id": "x", "sample_period": 0.1,
        "tracks": [{"vehicle_id": "ego", "is_ego": True,
                    "past": [[0.0, 1.0, 2.0], [0.1, 1.0, 2.5]], "future": [[0.2, 1.0, 3.0]]}],
        "light_observations": [{"light_id": "s", "timestamp": 0.1, "state": "green"}],
    }
    scene = scene_from_record(record)
    assert np.array_equal(scene.ego.timestamps, [0.0, 0.1, 0.2])
    assert scene_from_record(scene_to_record(scene)) == scene


@pytest.mark.parametrize("line,message", [
    ("{not json", "line 2"),
    ('{"format_version": 2, "scene_id": "x", "sample_period": 0.1, "tracks": []}', "format_version"),
    ('{"format_version": 1, "sample_period": 0.1, "tracks": []}', "malformed"),
    ('{"format_version": 1, "scene_id": "x", "sample_period": 0.1, "tracks": [], '
     '"light_observations": [{"light_id": "s", "timestamp": 0, "state": "amber"}]}', "malformed"),
    ("[1, 2]", "JSON object"),
])
def test_bad_scene_lines(tmp_path, line, message):
    good = json.dumps(scene_to_record(next(iter_scenes(preset("Basic4Way").with_(scene_count=1)))))
    path = tmp_path / "bad.ndjson"
    path.write_text(good + "\n" + line + "\n")
    with pytest.raises(FormatError, match=message):
        list(iter_scene_file(path))


def test_bad_map(tmp_path):
    path = tmp_path / "map.json"
    path.write_text('{"format_version": 1, "lanes": [{"id": "a"}], "lights": []}')
    with pytest.raises(FormatError):
        read_map(path)
    path.write_text("[]")
    with pytest.raises(FormatError):
        read_map(path)


def test_prediction_round_trip(tmp_path, basic_prepared):
    from tl2la.methods import extract_corpus

    road_map, scenes = basic_prepared
    preds = predict_rejection(extract_corpus(scenes, road_map))
    with open(tmp_path / "p.ndjson", "w") as stream:
        write_predictions(preds, stream)
    again = read_predictions(tmp_path / "p.ndjson")
    assert again == preds and again[0].method is Method.REJECTION
    (tmp_path / "bad.ndjson").write_text('{"light_id": "x"}\n')
    with pytest.raises(FormatError, match="line 1"):
        read_predictions(tmp_path / "bad.ndjson")
