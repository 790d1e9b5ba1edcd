from concurrent.futures import ThreadPoolExecutor
import json
import socket

import pytest

import scenerag as sr


@pytest.fixture(scope='module')
def scene():
    return sr.generate_preset_scene('office', seed=2, n_instances=34)


@pytest.fixture(scope='module')
def server(scene):
    model = sr.TwoTowerModel.initialize(seed=0)
    db = sr.KnowledgeDatabase.from_scene(scene, model)
    with sr.QueryServer(db, bind="127.0.0.1:0") as srv:
        yield srv


def _requests(scene, n):
    questions = sr.generate_questions(scene, sr.random_user_poses(seed=3, n=2))
    step = max(1, len(questions) // n)
    return [sr.QueryRequest(q.text, q.user, request_id="q{}".format(i))
                for i,q in enumerate(questions[::step][:n])]


################################################################################
#                                   messages
################################################################################
def test_request_round_trip():
    request = sr.QueryRequest("Where is the clock?", sr.UserPose(position=(1, 2, 3)), k=4, request_id="a")
    assert sr.QueryRequest.decode(request.encode()) == request
    assert request.encode().endswith(b'\n')


def test_request_validation():
    with pytest.raises(sr.ServiceError):
        sr.QueryRequest.decode(b"not json\n")
    with pytest.raises(sr.ServiceError):
        sr.QueryRequest.decode(json.dumps({"question" : "q", "k" : 0}))
    with pytest.raises(sr.ServiceError):
        sr.QueryRequest.decode(json.dumps({"question" : 3}))
    with pytest.raises(sr.ServiceError):
        sr.QueryRequest.decode(json.dumps({"question" : "q", "user_pose" : {"position" : [0, 0, 0],
                                                                            "orientation" : [0, 0, 0, 0]}}))


def test_response_forms():
    ok = sr.QueryResponse("a", "black", (("clock_1", 0.5),), {"retrieval_ms" : 1.0})
    assert sr.QueryResponse.decode(ok.encode()) == ok
    err = sr.QueryResponse("b", error="empty question")
    assert json.loads(err.encode()) == {"request_id" : "b", "error" : "empty question"}
    assert not sr.QueryResponse.decode(err.encode()).ok


def test_parse_address():
    assert sr.parse_address("127.0.0.1:7077") == ("127.0.0.1", 7077)
    assert sr.parse_address(":80") == ("127.0.0.1", 80)
    with pytest.raises(sr.InvalidParameterError):
        sr.parse_address("localhost")


################################################################################
#                                 query pipeline
################################################################################
def test_query_pipeline_outputs(scene):
    db = sr.KnowledgeDatabase.from_scene(scene, sr.TwoTowerModel.initialize(seed=0))
    pipeline = sr.query_pipeline(db)
    pose = sr.UserPose(position=(1.0, 1.0, 0.0))
    outputs, timings = pipeline.process("How many clocks can be found?", pose, 3, topic=None)

    assert len(outputs['result']) == 3
    assert isinstance(outputs['bundle'], sr.PromptBundle)
    assert isinstance(outputs['answer'], str)
    assert db.user == pose
    assert set(timings) == {'result', 'bundle', 'answer'}
    retrieval_ms, generation_ms = sr.stage_times(timings)
    assert retrieval_ms == timings['result']
    assert generation_ms == timings['bundle'] + timings['answer']


def test_in_context_pipeline(scene):
    db = sr.KnowledgeDatabase.from_scene(scene, sr.TwoTowerModel.initialize(seed=0))
    outputs, _ = sr.query_pipeline(db).process("anything", sr.UserPose(), None, topic=None)
    assert outputs['result'].instances == scene.instances
    assert all(score is None for _,score in outputs['result'].ranked)


################################################################################
#                                   round trips
################################################################################
def test_round_trip_latency(server, scene):
    requests = _requests(scene, 20)
    assert len(requests) == 20
    e2e = []
    with sr.QueryClient(server.address, timeout=5.0) as client:
        for request in requests:
            response, communication_ms, end_to_end_ms = client.query(request)
            assert response.ok
            assert response.request_id == request.request_id
            assert len(response.retrieved) == sr.DEFAULT_K
            assert set(response.timings) == {'retrieval_ms', 'generation_ms', 'server_total_ms'}
            assert response.timings['server_total_ms'] <= end_to_end_ms
            assert communication_ms >= 0
            e2e.append(end_to_end_ms)
    assert sum(e2e) / len(e2e) < 50.0


def test_answers_match_direct_evaluation(server, scene):
    db = sr.KnowledgeDatabase.from_scene(scene, sr.TwoTowerModel.initialize(seed=0))
    pipeline = sr.query_pipeline(db)
    for request in _requests(scene, 5):
        response, _, _ = sr.client_query(server.address, request)
        outputs, _ = pipeline.process(request.question, request.user_pose, sr.DEFAULT_K, topic=None)
        assert response.answer == outputs['answer']
        assert [list(p) for p in response.retrieved] == [list(p) for p in outputs['result'].ranked]


def test_request_k(server, scene):
    request = sr.QueryRequest("Where is the clock?", sr.UserPose(), k=2, request_id="k2")
    response, _, _ = sr.client_query(server.address, request)
    assert len(response.retrieved) == 2


def test_errors_keep_the_connection_open(server):
    host, port = server.address
    with socket.create_connection((host, port), timeout=5.0) as sock:
        f = sock.makefile('rwb')
        f.write(b'{"request_id": "x", "question": "   "}\n')
        f.write(b'this is not json\n')
        f.write(b'{"request_id": "y", "question": "Where is the clock?"}\n')
        f.flush()
        first = json.loads(f.readline())
        second = json.loads(f.readline())
        third = json.loads(f.readline())

    assert first == {"request_id" : "x", "error" : "empty question"}
    assert set(second) == {"request_id", "error"}
    assert third["request_id"] == "y"
    assert "answer" in third


def test_profile_latency(server, scene):
    report = sr.profile_latency(server.address, _requests(scene, 5))
    assert len(report.rows) == 5
    means = report.means
    assert set(means) == {'communication_ms', 'generation_ms', 'server_total_ms', 'end_to_end_ms'}
    assert means['server_total_ms'] <= means['end_to_end_ms']
    assert report.table().splitlines()[-1].startswith("mean")


def test_connection_refused():
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    sock.close()
    with pytest.raises(sr.ServiceError):
        sr.client_query(("127.0.0.1", port), sr.QueryRequest("Where is the clock?"), timeout=1.0)


def test_bind_failure(server):
    db = server.db
    with pytest.raises(sr.ServiceError):
        sr.QueryServer(db, bind="{}:{}".format(*server.address))


def test_request_id_survives_invalid_fields(server):
    for body in ({"request_id" : "abc", "question" : 5},
                 {"request_id" : "abc", "question" : "Where is the clock?", "k" : 0},
                 {"request_id" : "abc", "question" : "Where is the clock?",
                    "user_pose" : {"position" : [0, 0, 0], "orientation" : [0, 0, 0, 0]}}):
        response = server.handle_line( json.dumps(body).encode('utf-8') + b'\n' )
        assert response.request_id == "abc"
        assert not response.ok
    assert server.handle_line(b'[1, 2]\n').request_id == ""


def test_unicode_round_trip():
    request = sr.QueryRequest("Où est la lampe bleue ☕?", sr.UserPose(), request_id="ß-1")
    assert sr.QueryRequest.decode(request.encode()) == request
    response = sr.QueryResponse("ß-1", "la lampe est à gauche ☕", (("lamp_1", 0.25),), {"retrieval_ms" : 0.5})
    assert sr.QueryResponse.decode(response.encode()) == response


def test_oversized_line_gets_one_error(server):
    host, port = server.address
    with socket.create_connection((host, port), timeout=5.0) as sock:
        f = sock.makefile('rwb')
        f.write(b'{"request_id": "big", "question": "' + b'a' * (sr.MAX_LINE + 10) + b'"}\n')
        f.write(b'{"request_id": "after", "question": "Where is the clock?"}\n')
        f.flush()
        first = json.loads(f.readline())
        second = json.loads(f.readline())

    assert first["request_id"] == ""
    assert "exceeds" in first["error"]
    assert second["request_id"] == "after"
    assert "answer" in second


################################################################################
#                                 concurrency
################################################################################
@pytest.fixture(scope='module')
def room_server():
    objects = (
        sr.ObjectRecord("room", "printer", "printer_1", (1.0, 2.0, 0.0), color="white"),
        sr.ObjectRecord("room", "clock", "clock_1", (0.0, -4.0, 2.0), color="black"),
        sr.ObjectRecord("room", "lamp", "lamp_1", (4.0, 4.0, 0.0), color="green"),
        )
    model = sr.TwoTowerModel.initialize(seed=0, embedder=sr.HashEmbedder(dimension=64), hidden=16, embed=8)
    with sr.QueryServer(sr.KnowledgeDatabase.from_scene(sr.Scene("room", objects), model),
                        bind="127.0.0.1:0") as srv:
        yield srv


def test_concurrent_clients_keep_their_own_pose(room_server):
    clock = room_server.db.get("clock_1")
    poses = sr.random_user_poses(seed=11, n=8)

    def _ask(i):
        pose = poses[i % len(poses)]
        request = sr.QueryRequest("How far is the clock from me?", pose, k=3, request_id=str(i))
        response, _, _ = sr.client_query(room_server.address, request, timeout=5.0)
        return pose, response

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list( pool.map(_ask, range(64)) )

    for pose, response in results:
        assert response.ok
        assert response.answer == sr.format_number( sr.euclidean_distance(clock.position, pose.position) )
