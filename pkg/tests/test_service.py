"""HTTP service contract and the command line tools.

The engine's conversational behavior is pinned elsewhere; these tests care
about the transport: status codes, payload shapes, the per-session request
queue, and that a freshly built app can resume conversations written to an
external store by another app instance. CLI tests run the click commands
in-process through CliRunner.
"""

import threading
import time
from concurrent.futures import ThreadPoolExecutor

import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from conftest import FIXED_NOW, config_path, load_fixture_bot
from taskbot.backends import BackendRegistry, BackendResult
from taskbot.cli import main
from taskbot.dialogue.orchestrator import Engine
from taskbot.kvserver import start_server
from taskbot.service import QUEUE_DEPTH, QueueFull, SessionGate, build_app
from taskbot.store import KvStore, MemoryStore, make_store
from test_engine_transcripts import (
    IDENTITY_OK,
    NTIC_GREETING,
    ORDER_ACK_A,
    ORDER_DONE,
    SWITCH_SCRIPT,
    make_engine,
)


def make_client(bot="order_bot_a", store=None):
    return TestClient(build_app(make_engine(bot, store)))


def create(client):
    resp = client.post("/sessions")
    assert resp.status_code == 200
    return resp.json()


def say(client, sid, text):
    resp = client.post("/sessions/%s/messages" % sid, json={"text": text})
    assert resp.status_code == 200
    return resp.json()


@pytest.fixture()
def kv_server():
    server = start_server("127.0.0.1", 0)
    yield server
    server.shutdown()


class TestSessionEndpoint:
    def test_create_returns_the_greeting(self):
        data = create(make_client())
        assert data["greeting"] == NTIC_GREETING
        assert data["session_id"]

    def test_session_ids_are_unique(self):
        client = make_client()
        ids = {create(client)["session_id"] for _ in range(5)}
        assert len(ids) == 5


class TestMessageEndpoint:
    def test_order_status_conversation(self):
        client = make_client()
        sid = create(client)["session_id"]
        first = say(client, sid, "Hi, I would like to check my order status.")
        assert first == {
            "reply": ORDER_ACK_A,
            "session_id": sid,
            "turn": 1,
            "finished_tasks": [],
            "active_task": "verify_identity",
        }
        second = say(client, sid, "jane.doe@example.com")
        assert (second["reply"], second["turn"]) == (IDENTITY_OK, 2)
        assert second["finished_tasks"] == ["verify_identity"]
        third = say(client, sid, "123456")
        assert (third["reply"], third["turn"]) == (ORDER_DONE, 3)
        assert third["finished_tasks"] == ["check_order", "verify_identity"]
        assert third["active_task"] is None

    def test_unknown_session_is_404(self):
        resp = make_client().post("/sessions/nope/messages", json={"text": "hi"})
        assert resp.status_code == 404
        assert resp.json()["detail"] == "unknown session"

    def test_empty_text_is_an_ordinary_clarify_turn(self):
        client = make_client()
        sid = create(client)["session_id"]
        resp = client.post("/sessions/%s/messages" % sid, json={})
        assert resp.status_code == 200
        data = resp.json()
        assert data["turn"] == 1
        assert data["reply"] == "I'm sorry, I don't quite understand. Could you rephrase that?"

    def test_malformed_payload_is_422(self):
        client = make_client()
        sid = create(client)["session_id"]
        resp = client.post("/sessions/%s/messages" % sid, json={"text": ["not", "a", "string"]})
        assert resp.status_code == 422


class TestTreeEndpoint:
    def test_fresh_session_has_a_bare_root(self):
        client = make_client("health_bot")
        sid = create(client)["session_id"]
        snap = client.get("/sessions/%s/tree" % sid).json()
        assert snap["cursor"] is None
        assert snap["stack"] == []
        (root,) = snap["nodes"]
        assert root["kind"] == "Root"
        assert root["children"] == []
        assert not root["success"] and not root["exhausted"]

    def test_intent_grows_the_tree_and_sets_the_cursor(self):
        client = make_client("health_bot")
        sid = create(client)["session_id"]
        say(client, sid, "I want to see a doctor")
        snap = client.get("/sessions/%s/tree" % sid).json()
        cursor = snap["cursor"]
        assert cursor["task"] == "health_appointment"
        assert cursor["entity"] == "appt_date"
        (task_root,) = [n for n in snap["nodes"] if n["kind"] == "TaskRoot"]
        assert task_root["label"] == "health_appointment"
        (current,) = [n for n in snap["nodes"] if n["current"]]
        assert current["id"] == cursor["leaf"]
        assert current["kind"] == "Leaf"
        assert current["label"] == "INSERT date_time_group"
        # every edge points at a node that is actually in the snapshot
        ids = {node["id"] for node in snap["nodes"]}
        assert all(child in ids for node in snap["nodes"] for child in node["children"])
        assert {"Root", "TaskRoot", "And", "Or", "Leaf"} <= {n["kind"] for n in snap["nodes"]}

    def test_unknown_session_is_404(self):
        assert make_client().get("/sessions/missing/tree").status_code == 404


class TestSessionGate:
    def test_waiting_count_tracks_acquire_and_release(self):
        gate = SessionGate()
        gate.acquire("s")
        assert gate.waiting("s") == 1
        gate.release("s")
        assert gate.waiting("s") == 0

    def test_sessions_do_not_share_a_queue(self):
        gate = SessionGate(depth=1)
        gate.acquire("a")
        gate.acquire("b")
        gate.release("a")
        gate.release("b")

    def test_overflowing_the_queue_raises(self):
        gate = SessionGate(depth=2)
        gate.acquire("s")
        passed_through = []

        def wait_then_release():
            gate.acquire("s")
            passed_through.append(True)
            gate.release("s")

        helper = threading.Thread(target=wait_then_release, daemon=True)
        helper.start()
        deadline = time.time() + 5
        while gate.waiting("s") < 2 and time.time() < deadline:
            time.sleep(0.005)
        assert gate.waiting("s") == 2  # the holder counts against the depth
        with pytest.raises(QueueFull):
            gate.acquire("s")
        gate.release("s")
        helper.join(timeout=5)
        assert passed_through == [True]
        assert gate.waiting("s") == 0


class TestQueueBound:
    def test_fifth_concurrent_post_is_rejected(self):
        hold = threading.Event()
        registry = BackendRegistry()
        registry.register("verify_email", lambda request: (hold.wait(10), BackendResult(success=True))[1])
        registry.register("verify_zip", lambda request: BackendResult(success=True))
        engine = Engine(
            load_fixture_bot("order_bot_a"),
            MemoryStore(),
            registry,
            backend_timeout=30.0,
            clock=lambda: FIXED_NOW,
        )
        app = build_app(engine)
        client = TestClient(app)
        sid = create(client)["session_id"]
        say(client, sid, "Hi, I would like to check my order status.")

        statuses = []

        def post_email():
            resp = TestClient(app).post("/sessions/%s/messages" % sid, json={"text": "jane.doe@example.com"})
            statuses.append(resp.status_code)

        threads = [threading.Thread(target=post_email, daemon=True) for _ in range(QUEUE_DEPTH)]
        for thread in threads:
            thread.start()
        # one request is parked inside the backend call, three more queue up
        deadline = time.time() + 5
        while app.state.gate.waiting(sid) < QUEUE_DEPTH and time.time() < deadline:
            time.sleep(0.005)
        assert app.state.gate.waiting(sid) == QUEUE_DEPTH

        rejected = client.post("/sessions/%s/messages" % sid, json={"text": "jane.doe@example.com"})
        assert rejected.status_code == 409

        hold.set()
        for thread in threads:
            thread.join(timeout=10)
        assert statuses == [200, 200, 200, 200]
        # the rejected request never consumed a turn
        assert engine.store.load(sid).multi_turn.global_turn == 5


class TestStoreOutage:
    def test_all_endpoints_report_503_when_the_store_goes_away(self):
        server = start_server("127.0.0.1", 0)
        host, port = server.address.split(":")
        store = KvStore(host, int(port), timeout=1.0)
        client = TestClient(build_app(make_engine("order_bot_a", store)))
        sid = create(client)["session_id"]

        server.shutdown()
        server.server_close()
        store.close()  # drop the pooled socket so the next command reconnects

        assert client.post("/sessions").status_code == 503
        assert client.post("/sessions/%s/messages" % sid, json={"text": "hi"}).status_code == 503
        assert client.get("/sessions/%s/tree" % sid).status_code == 503


class TestRestartDurability:
    def test_a_new_app_resumes_mid_conversation(self, kv_server):
        reference = make_engine("travel_bot")
        sid_ref, _ = reference.start_session()
        expected = [reference.process_turn(sid_ref, text).response for text in SWITCH_SCRIPT]

        first = TestClient(build_app(make_engine("travel_bot", make_store("kv", kv_server.address))))
        sid = create(first)["session_id"]
        replies = [say(first, sid, text)["reply"] for text in SWITCH_SCRIPT[:3]]

        # a brand-new engine and app; only the store is shared
        second = TestClient(build_app(make_engine("travel_bot", make_store("kv", kv_server.address))))
        replies += [say(second, sid, text)["reply"] for text in SWITCH_SCRIPT[3:]]
        assert replies == expected


class TestConcurrentSessions:
    def test_fifty_parallel_sessions_stay_isolated(self):
        app = build_app(make_engine("travel_bot"))
        baseline_client = TestClient(app)
        baseline_sid = create(baseline_client)["session_id"]
        baseline = [say(baseline_client, baseline_sid, text)["reply"] for text in SWITCH_SCRIPT]

        def play(_):
            client = TestClient(app)
            sid = create(client)["session_id"]
            return sid, [say(client, sid, text)["reply"] for text in SWITCH_SCRIPT]

        with ThreadPoolExecutor(max_workers=10) as pool:
            outcomes = list(pool.map(play, range(50)))

        assert len({sid for sid, _ in outcomes}) == 50
        for _, replies in outcomes:
            assert replies == baseline


def _config_flags(bot):
    return [
        "--task-config",
        config_path(bot, "tasks.yaml"),
        "--entity-config",
        config_path(bot, "entities.yaml"),
    ]


CYCLIC_TASKS = """
Bot:
  text_bot: true
  bot_name: Loop Labs
Task:
  first_thing:
    description: handle the first thing
    samples:
      - do the first thing
    entities:
      alpha:
        prompt:
          - What is alpha?
        response:
    entity_groups:
      alpha_group:
        - alpha
    success:
      AND:
        - INSERT:
          - alpha_group
        - TASK:
          - second_thing
    finish_response:
      success:
        - First thing done.
      failure:
        - First thing failed.
    repeat: false
    max_turns: 10
  second_thing:
    description: handle the second thing
    samples:
      - do the second thing
    entities:
      beta:
        prompt:
          - What is beta?
        response:
    entity_groups:
      beta_group:
        - beta
    success:
      AND:
        - INSERT:
          - beta_group
        - TASK:
          - first_thing
    finish_response:
      success:
        - Second thing done.
      failure:
        - Second thing failed.
    repeat: false
    max_turns: 10
"""
CYCLIC_ENTITIES = """
Entity:
  alpha:
    type: CARDINAL
    methods:
      ner:
  beta:
    type: CARDINAL
    methods:
      ner:
"""


class TestValidateCommand:
    def test_good_config_reports_counts(self, health_config):
        result = CliRunner().invoke(main, ["validate"] + _config_flags("health_bot"))
        assert result.exit_code == 0
        expected = "configuration OK: %d tasks, %d entities, %d FAQs" % (
            len(health_config.tasks),
            len(health_config.entities),
            len(health_config.faqs),
        )
        assert expected in result.output

    def test_task_reference_cycle_fails(self, tmp_path):
        (tmp_path / "tasks.yaml").write_text(CYCLIC_TASKS)
        (tmp_path / "entities.yaml").write_text(CYCLIC_ENTITIES)
        result = CliRunner().invoke(
            main,
            [
                "validate",
                "--task-config",
                str(tmp_path / "tasks.yaml"),
                "--entity-config",
                str(tmp_path / "entities.yaml"),
            ],
        )
        assert result.exit_code == 1
        assert "task reference cycle" in result.stderr

    def test_missing_file_is_a_usage_error(self):
        result = CliRunner().invoke(
            main,
            ["validate", "--task-config", "/no/such.yaml", "--entity-config", "/no/such.yaml"],
        )
        assert result.exit_code == 2


class TestVizCommand:
    def test_dot_structure_for_the_appointment_task(self):
        result = CliRunner().invoke(main, ["viz"] + _config_flags("health_bot") + ["health_appointment"])
        assert result.exit_code == 0
        out = result.output
        assert out.splitlines()[0] == "digraph health_appointment {"
        assert '  task [label="health_appointment", shape=folder];' in out
        assert '  n0 [label="AND", shape=ellipse];' in out
        assert "  task -> n0;" in out
        assert out.count("  n0 -> n") == 4  # four branches under the root AND
        assert '[label="INSERT date_time_group", shape=box];' in out
        assert '[label="OR", shape=ellipse];' in out
        assert '[label="TASK get_health_insurance_info", shape=box];' in out
        assert out.rstrip().endswith("}")

    def test_unknown_task_lists_the_known_ones(self):
        result = CliRunner().invoke(main, ["viz"] + _config_flags("health_bot") + ["dentistry"])
        assert result.exit_code == 1
        assert "unknown task 'dentistry'" in result.stderr
        assert "health_appointment" in result.stderr


class TestChatCommand:
    def test_scripted_exchange(self):
        result = CliRunner().invoke(
            main,
            ["chat"] + _config_flags("order_bot_a"),
            input="Hello!\n/tree\n/quit\n",
        )
        assert result.exit_code == 0
        # once for the session greeting, once as the reply to "Hello!"
        assert result.output.count("bot> " + NTIC_GREETING) == 2
        assert "(/quit to leave, /tree to dump the task tree)" in result.output
        assert "#0 Root" in result.output

    def test_eof_ends_the_session(self):
        result = CliRunner().invoke(main, ["chat"] + _config_flags("order_bot_a"), input="")
        assert result.exit_code == 0
