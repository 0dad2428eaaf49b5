"""Record UI test fixtures from the running engine.

Writes two JSON files under frontend/tests/fixtures/:

  snapshots.json           named tree snapshots covering the shapes the
                           tree pane must render
  health_conversation.json a full appointment conversation as served over
                           HTTP, message payloads and the tree after each
                           turn

Run from the repository root:  python frontend/scripts/record_fixtures.py
"""

import datetime
import json
import os
import sys

from fastapi.testclient import TestClient

REPO = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
FIXTURES = os.path.join(REPO, "frontend", "tests", "fixtures")

from taskbot.config import load_bot_config
from taskbot.demo import build_demo_registry
from taskbot.dialogue.orchestrator import Engine
from taskbot.service import build_app
from taskbot.store import MemoryStore

FIXED_NOW = datetime.datetime(2023, 3, 14, 9, 0, 0)

APPT_PREFIX = [
    "I want to make an appointment",
    "March 20",
    "10:30am",
    "Nutrition and Dietetics",
    "Angela Martin",
]
INSURANCE_TAIL = ["Yes, I do", "1234", "January 5, 1990"]


def make_engine(bot):
    base = os.path.join(REPO, "configs", bot)
    template_path = os.path.join(base, "templates.yaml")
    config = load_bot_config(
        os.path.join(base, "tasks.yaml"),
        os.path.join(base, "entities.yaml"),
        template_path if os.path.exists(template_path) else None,
    )
    return Engine(config, MemoryStore(), build_demo_registry(), clock=lambda: FIXED_NOW)


def snapshots():
    out = {}

    engine = make_engine("health_bot")
    sid, _ = engine.start_session()
    out["fresh_root_only"] = engine.tree_snapshot(sid)

    engine = make_engine("health_bot")
    sid, _ = engine.start_session()
    engine.process_turn(sid, "I want to see a doctor")
    out["appointment_first_prompt"] = engine.tree_snapshot(sid)

    engine = make_engine("health_bot")
    sid, _ = engine.start_session()
    for text in APPT_PREFIX + ["Yes, I do"]:
        engine.process_turn(sid, text)
    out["appointment_insurance_descent"] = engine.tree_snapshot(sid)
    for text in ["1234", "January 5, 1990"]:
        engine.process_turn(sid, text)
    out["appointment_booked"] = engine.tree_snapshot(sid)
    engine.process_turn(sid, "Yes please")
    out["appointment_repeat_reset"] = engine.tree_snapshot(sid)

    engine = make_engine("travel_bot")
    sid, _ = engine.start_session()
    engine.process_turn(sid, "I'd like to book a round-trip flight.")
    engine.process_turn(sid, "Oh wait, could you please help me check tomorrow's weather first?")
    out["travel_switch_stacked"] = engine.tree_snapshot(sid)

    engine = make_engine("travel_bot")
    sid, _ = engine.start_session()
    engine.process_turn(
        sid, "I'd like to book a round trip flight from San Francisco to Los Angeles for 2 people."
    )
    out["travel_disambiguation"] = engine.tree_snapshot(sid)

    engine = make_engine("order_bot_b")
    sid, _ = engine.start_session()
    engine.process_turn(sid, "Hi, I would like to check my order status.")
    out["order_subtask_cursor"] = engine.tree_snapshot(sid)
    engine.process_turn(sid, "I don't want to check order status anymore")
    out["order_failed_email"] = engine.tree_snapshot(sid)

    engine = make_engine("health_bot")
    sid, _ = engine.start_session()
    engine.process_turn(sid, "I want to make an appointment")
    for _ in range(10):
        engine.process_turn(sid, "I would like to make an appointment")
    engine.process_turn(sid, "qwerty asdf")
    out["appointment_turn_limit_quit"] = engine.tree_snapshot(sid)

    return out


def conversation():
    client = TestClient(build_app(make_engine("health_bot")))
    created = client.post("/sessions").json()
    sid = created["session_id"]
    turns = []
    for text in APPT_PREFIX + INSURANCE_TAIL:
        message = client.post("/sessions/%s/messages" % sid, json={"text": text}).json()
        tree = client.get("/sessions/%s/tree" % sid).json()
        turns.append({"user": text, "message": message, "tree": tree})
    return {"greeting": created["greeting"], "turns": turns}


def main():
    os.makedirs(FIXTURES, exist_ok=True)
    with open(os.path.join(FIXTURES, "snapshots.json"), "w") as fh:
        json.dump(snapshots(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(FIXTURES, "health_conversation.json"), "w") as fh:
        json.dump(conversation(), fh, indent=2)
        fh.write("\n")
    print("wrote fixtures to %s" % FIXTURES)


if __name__ == "__main__":
    sys.exit(main())
