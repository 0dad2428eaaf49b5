"""End-to-end conversations against the bundled example bots.

Every test drives the real engine through the store, so a passing script
pins the full pipeline: intent and polarity, entity extraction, tree
traversal, backend calls, and template rendering. Bot lines are asserted
verbatim; they are part of the fixture configs' contract.
"""

import os

import pytest

from conftest import FIXED_NOW, load_fixture_bot
from taskbot.backends import BackendRegistry, BackendResult
from taskbot.config import load_bot_config
from taskbot.demo import build_demo_registry
from taskbot.dialogue import orchestrator
from taskbot.dialogue.orchestrator import Engine
from taskbot.kvserver import start_server
from taskbot.store import MemoryStore, make_store


def make_engine(bot, store=None, registry=None):
    return Engine(
        load_fixture_bot(bot),
        store if store is not None else MemoryStore(),
        registry if registry is not None else build_demo_registry(),
        clock=lambda: FIXED_NOW,
    )


def run(engine, sid, *turns):
    return [engine.process_turn(sid, text) for text in turns]


NTIC_GREETING = (
    "Hi there, I am the digital assistant for Northern Trail Information Center. "
    "What can I do for you?"
)
ORDER_ACK_A = (
    "Oh sure, I'd be happy to help you check your order status. "
    "First, I need to pull up your account. Could you please tell me your email address?"
)
IDENTITY_OK = "I have verified your identity. Please provide your order id for your order status."
# the zip fallback line keeps its quirky wording; it is config text, not a template
EMAIL_FAILED_ASK_ZIP = (
    "I am sorry, but I could not recognize your email address. "
    "Could your please tell me your zip code?"
)
ORDER_DONE = "Thanks! Your order is on its way. Is there anything else I can help you with?"


class TestOrderStatus:
    """The two order-status trajectories, plus session book-ends."""

    def test_greeting_on_session_start(self):
        engine = make_engine("order_bot_a")
        sid, greeting = engine.start_session()
        assert greeting == NTIC_GREETING
        assert engine.tree_snapshot(sid)["cursor"] is None

    def test_trajectory_correct_email(self):
        engine = make_engine("order_bot_a")
        sid, _ = engine.start_session()
        results = run(
            engine,
            sid,
            "Hi, I would like to check my order status.",
            "jane.doe@example.com",
            "123456",
        )
        assert [r.response for r in results] == [ORDER_ACK_A, IDENTITY_OK, ORDER_DONE]
        assert [r.action for r in results] == ["new_task", "continue_task", "continue_task"]
        # the identity sub-task runs on top of the order task, then pops
        assert results[0].active_task == "verify_identity"
        assert results[1].active_task == "check_order"
        assert results[1].finished_tasks == ["verify_identity"]
        assert results[2].active_task is None
        assert results[2].finished_tasks == ["check_order", "verify_identity"]

    def test_trajectory_failed_email_falls_to_zip(self):
        engine = make_engine("order_bot_a")
        sid, _ = engine.start_session()
        results = run(
            engine,
            sid,
            "Hi, I would like to check my order status.",
            "I don't remember it.",
            "94301",
            "123456",
        )
        assert [r.response for r in results] == [
            ORDER_ACK_A,
            EMAIL_FAILED_ASK_ZIP,
            IDENTITY_OK,
            ORDER_DONE,
        ]
        # the non-answer is treated as a failed entity answer, not a cancel
        assert results[1].action == "fallback_clarify"
        assert results[1].active_task == "verify_identity"
        assert results[3].finished_tasks == ["check_order", "verify_identity"]

    def test_stack_trail_through_subtask(self):
        engine = make_engine("order_bot_a")
        sid, _ = engine.start_session()
        engine.process_turn(sid, "Hi, I would like to check my order status.")
        snap = engine.tree_snapshot(sid)
        assert snap["stack"] == ["check_order"]
        assert snap["cursor"]["entity"] == "email_address"
        engine.process_turn(sid, "jane.doe@example.com")
        snap = engine.tree_snapshot(sid)
        assert snap["stack"] == []
        assert snap["cursor"]["entity"] == "order_id"

    def test_goodbye(self):
        engine = make_engine("order_bot_a")
        sid, _ = engine.start_session()
        result = engine.process_turn(sid, "Bye")
        assert result.action == "goodbye"
        assert result.response == "Thank you, goodbye!"

    def test_greeting_turn(self):
        engine = make_engine("order_bot_a")
        sid, _ = engine.start_session()
        result = engine.process_turn(sid, "Hello!")
        assert result.action == "greeting"
        assert result.response == NTIC_GREETING

    def test_finished_task_is_not_restarted(self):
        engine = make_engine("order_bot_a")
        sid, _ = engine.start_session()
        run(engine, sid, "I would like to check my order status", "jane.doe@example.com", "123456")
        result = engine.process_turn(sid, "I would like to check my order status")
        assert result.action == "new_task"
        assert result.response == (
            "It looks like we already took care of that. Is there anything else I can help you with?"
        )
        assert result.active_task is None


VELOCITY_GREETING = "Hi there, I am the digital assistant for Velocity Air. What can I do for you?"
FLIGHT_ACK = "I'd be happy to help you book a flight. Where will you depart from?"
WEATHER_SWITCH = "I'd be happy to help you check the weather. What is the zip code of your area?"
WEATHER_DONE_RESUME = (
    "The weather in San Francisco is sunny. That's all I have about the weather. "
    "Where will you depart from?"
)
ASK_DESTINATION = "Got it. Where is your destination?"
FAQ_BAGS = "All frequent flyer program members will have one free checked bag. Where is your destination?"
ORIGIN_AMBIGUOUS = (
    "I got multiple possible answers for origin: San Francisco and Los Angeles, "
    "which one did you mean? Could you walk me through the details?"
)


class TestTaskSwitching:
    """Flight booking interrupted by a weather query, then FAQs."""

    def test_switch_and_resume(self):
        engine = make_engine("travel_bot")
        sid, greeting = engine.start_session()
        assert greeting == VELOCITY_GREETING
        results = run(
            engine,
            sid,
            "I'd like to book a round-trip flight.",
            "Oh wait, could you please help me check tomorrow's weather first?",
            "94105",
        )
        assert [r.response for r in results] == [FLIGHT_ACK, WEATHER_SWITCH, WEATHER_DONE_RESUME]
        assert [r.action for r in results] == ["new_task", "switch_task", "continue_task"]
        assert results[1].active_task == "weather_query"
        # back on the flight task, at the question the switch interrupted
        assert results[2].active_task == "flight_booking"
        assert results[2].finished_tasks == ["weather_query"]
        snap = engine.tree_snapshot(sid)
        assert snap["stack"] == []
        assert snap["cursor"]["entity"] == "origin"

    def test_interrupted_task_is_stacked(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        engine.process_turn(sid, "I'd like to book a round-trip flight.")
        engine.process_turn(sid, "Oh wait, could you please help me check tomorrow's weather first?")
        snap = engine.tree_snapshot(sid)
        assert snap["stack"] == ["flight_booking"]
        assert snap["cursor"]["task"] == "weather_query"
        assert snap["cursor"]["entity"] == "zip_code"

    def test_turns_are_attributed_to_the_active_task(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        run(
            engine,
            sid,
            "I'd like to book a round-trip flight.",
            "Oh wait, could you please help me check tomorrow's weather first?",
            "94105",
            "San Francisco.",
        )
        counts = engine.store.load(sid).tree.per_task_turns
        # the weather turn does not count against the flight budget
        assert counts == {"flight_booking": 2, "weather_query": 1}

    def test_filled_slots_survive_a_switch(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        results = run(
            engine,
            sid,
            "I'd like to book a flight.",
            "I depart from San Francisco",
            "check the weather please",
            "94105",
        )
        assert results[1].response == ASK_DESTINATION
        # after the detour the bot needs the destination, not the origin again
        assert results[3].response == (
            "The weather in San Francisco is sunny. That's all I have about the weather. "
            "Where is your destination?"
        )
        record = engine.store.load(sid).entity_history.lookup("origin")
        assert record is not None and record.value == "San Francisco"

    def test_faq_mid_task_keeps_the_question_pending(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        run(
            engine,
            sid,
            "I'd like to book a round-trip flight.",
            "Oh wait, could you please help me check tomorrow's weather first?",
            "94105",
            "San Francisco.",
        )
        before = engine.tree_snapshot(sid)
        result = engine.process_turn(sid, "Do I have free checked bags?")
        assert result.action == "answer_faq"
        assert result.response == FAQ_BAGS
        assert result.active_task == "flight_booking"
        after = engine.tree_snapshot(sid)
        assert after["cursor"] == before["cursor"]
        assert after["stack"] == before["stack"]

    def test_task_with_info_can_finish_in_one_turn(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        result = engine.process_turn(sid, "What's the weather in 94105?")
        assert result.action == "new_task_with_info"
        assert result.response == (
            "I'd be happy to help you check the weather. The weather in San Francisco is sunny. "
            "That's all I have about the weather. Is there anything else I can help you with?"
        )
        assert result.active_task is None
        assert result.finished_tasks == ["weather_query"]


class TestSameTypeAmbiguity:
    """Two locations in one utterance hit the first location slot."""

    def test_both_cities_are_offered(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        result = engine.process_turn(
            sid, "I'd like to book a round trip flight from San Francisco to Los Angeles for 2 people."
        )
        assert result.action == "new_task_with_info"
        assert result.response == "I'd be happy to help you book a flight. " + ORIGIN_AMBIGUOUS
        assert engine.tree_snapshot(sid)["cursor"]["entity"] == "origin"

    def test_choice_by_name(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        engine.process_turn(
            sid, "I'd like to book a round trip flight from San Francisco to Los Angeles for 2 people."
        )
        result = engine.process_turn(sid, "San Francisco")
        assert result.response == ASK_DESTINATION
        record = engine.store.load(sid).entity_history.lookup("origin")
        assert record.value == "San Francisco"

    def test_choice_by_ordinal_after_a_mushy_answer(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        engine.process_turn(
            sid, "I'd like to book a round trip flight from San Francisco to Los Angeles for 2 people."
        )
        mushy = engine.process_turn(sid, "whichever is fine")
        assert mushy.response == ORIGIN_AMBIGUOUS  # options repeated, nothing lost
        picked = engine.process_turn(sid, "the first one")
        assert picked.response == ASK_DESTINATION
        assert engine.store.load(sid).entity_history.lookup("origin").value == "San Francisco"

    def test_fresh_entity_beats_the_stale_options(self):
        engine = make_engine("travel_bot")
        sid, _ = engine.start_session()
        engine.process_turn(
            sid, "I'd like to book a round trip flight from San Francisco to Los Angeles for 2 people."
        )
        result = engine.process_turn(sid, "I will leave from New York")
        assert result.response == ASK_DESTINATION
        assert engine.store.load(sid).entity_history.lookup("origin").value == "New York"


ORDER_ACK_B = (
    "Oh sure, I'd be happy to help you check your order status. "
    "First, I need to pull up your account. What is your email address?"
)
NO_CANCEL_LINE = "I am sorry, but I could not recognize your email address. What is your zip code?"


class TestSubTaskReuse:
    """One identity sub-task shared by two order tasks."""

    def test_cancel_attempt_reads_as_failed_answer(self):
        engine = make_engine("order_bot_b")
        sid, _ = engine.start_session()
        results = run(
            engine,
            sid,
            "I want to check order status",
            "I don't want to check order status anymore",
        )
        assert results[0].response == ORDER_ACK_B
        assert results[1].response == NO_CANCEL_LINE
        # still inside the task: cancel is not supported, the tree marches on
        assert results[1].active_task == "verify_identity"
        assert engine.tree_snapshot(sid)["cursor"]["entity"] == "zip_code"

    def test_identity_is_verified_only_once(self):
        engine = make_engine("order_bot_b")
        sid, _ = engine.start_session()
        run(engine, sid, "I want to check order status", "jane.doe@example.com", "123456")
        result = engine.process_turn(sid, "I want to update my order")
        assert result.response == (
            "Oh sure, I'd be happy to help you update your order. What is the new shipping address?"
        )
        assert result.active_task == "update_order"
        # no second pass through the identity questions
        assert "email" not in result.response
        assert engine.tree_snapshot(sid)["stack"] == []


NANCY_GREETING = "Hi there, I am the digital assistant for Nurse Nancy. What can I do for you?"
APPT_ACK = (
    "I'd be happy to help you make an appointment at Nurse Nancy. "
    "What date do you prefer for the appointment?"
)
ASK_DEPARTMENT = (
    "Which department do you want to make the appointment with? You can choose from: "
    "ICU, Elderly services, Diagnostic Imaging, General Surgery, Neurology, Microbiology, "
    "Nutrition and Dietetics."
)
INSURANCE_DESCENT = (
    "Great, let me look up your insurance record. First, I need to get health insurance info. "
    "May I have the last four digits of your social security number?"
)
BOOKED_WITH_INSURANCE = (
    "I have found your health insurance record. Please wear a mask when you come to the clinic. "
    "I have booked an appointment for you. Would you like to make another appointment?"
)
ASK_NAME_NO_INSURANCE = (
    "Since you don't have health insurance, let me create a profile for you. What's your name?"
)
BOOKED_WITH_PROFILE = (
    "I have created a profile for you. Please wear a mask when you come to the clinic. "
    "I have booked an appointment for you. Would you like to make another appointment?"
)
APPT_QUIT = "Sorry, I can't help you book an appointment. Is there anything else I can help you with?"

APPT_PREFIX = [
    "I want to make an appointment",
    "March 20",
    "10:30am",
    "Nutrition and Dietetics",
    "Angela Martin",
]


class TestHealthAppointment:
    """The appointment bot: both insurance branches, repetition, turn limits."""

    def test_insurance_branch(self):
        engine = make_engine("health_bot")
        sid, greeting = engine.start_session()
        assert greeting == NANCY_GREETING
        results = run(engine, sid, *APPT_PREFIX, "Yes, I do", "1234", "January 5, 1990")
        assert [r.response for r in results] == [
            APPT_ACK,
            "At what time?",
            ASK_DEPARTMENT,
            "May I have your preferred doctor name?",
            "Do you have health insurance?",
            INSURANCE_DESCENT,
            "And your birthday?",
            BOOKED_WITH_INSURANCE,
        ]
        assert results[5].active_task == "get_health_insurance_info"
        assert results[7].finished_tasks == ["get_health_insurance_info", "health_appointment"]

    def test_no_insurance_branch(self):
        engine = make_engine("health_bot")
        sid, _ = engine.start_session()
        results = run(engine, sid, *APPT_PREFIX, "No I don't", "John Smith", "January 5, 1990")
        # the insurance check fails quietly and the profile branch takes over
        assert results[5].response == ASK_NAME_NO_INSURANCE
        assert results[6].response == "What is your birthday?"
        assert results[7].response == BOOKED_WITH_PROFILE
        assert results[7].finished_tasks == ["health_appointment"]

    def test_repeat_resets_slots_but_keeps_the_subtask(self):
        engine = make_engine("health_bot")
        sid, _ = engine.start_session()
        run(engine, sid, *APPT_PREFIX, "Yes, I do", "1234", "January 5, 1990")

        accepted = engine.process_turn(sid, "Yes please")
        assert accepted.action == "handle_yes"
        # every appointment slot is re-asked from the top
        assert accepted.response == "What date do you prefer for the appointment?"
        assert accepted.active_task == "health_appointment"
        # the insurance sub-task kept its finished state through the reset
        assert accepted.finished_tasks == ["get_health_insurance_info"]

        round_two = run(
            engine, sid, "March 21", "11:00am", "ICU", "Angela Martin", "Yes, I do"
        )
        transcript = " ".join(r.response for r in round_two)
        assert "social security" not in transcript
        assert "birthday" not in transcript
        assert round_two[-1].response == (
            "Great, let me look up your insurance record. "
            "Please wear a mask when you come to the clinic. "
            "I have booked an appointment for you. Would you like to make another appointment?"
        )
        declined = engine.process_turn(sid, "No thanks")
        assert declined.action == "handle_no"
        assert declined.response == "Is there anything else I can help you with?"

    def test_repeat_prefills_entities_recorded_by_the_subtask(self):
        engine = make_engine("health_bot")
        sid, _ = engine.start_session()
        run(engine, sid, *APPT_PREFIX, "Yes, I do", "1234", "January 5, 1990")
        run(engine, sid, "Yes please", "March 21", "11:00am", "ICU", "Angela Martin")
        engine.process_turn(sid, "No I don't")  # this time take the profile branch
        result = engine.process_turn(sid, "John Smith")
        # birthday was recorded by the insurance sub-task; it is not asked again
        assert result.response == BOOKED_WITH_PROFILE.replace(
            "I have created a profile for you. ", ""
        )
        assert result.active_task is None

    def test_turn_limit_quits_the_task(self):
        engine = make_engine("health_bot")
        sid, _ = engine.start_session()
        engine.process_turn(sid, "I want to make an appointment")
        for _ in range(10):
            result = engine.process_turn(sid, "I would like to make an appointment")
            assert result.action == "continue_task"  # restating the intent never quits
        result = engine.process_turn(sid, "qwerty asdf")
        assert result.action == "quit_task_turn_limit"
        assert result.response == APPT_QUIT
        assert result.active_task is None
        snap = engine.tree_snapshot(sid)
        assert snap["stack"] == [] and snap["cursor"] is None
        roots = {n["label"]: n for n in snap["nodes"] if n["kind"] == "TaskRoot"}
        assert roots["health_appointment"]["exhausted"]
        assert not roots["health_appointment"]["success"]
        assert engine.store.load(sid).tree.per_task_turns["health_appointment"] == 11

    def test_garbage_below_the_limit_is_an_ordinary_retry(self):
        engine = make_engine("health_bot")
        sid, _ = engine.start_session()
        engine.process_turn(sid, "I want to make an appointment")
        result = engine.process_turn(sid, "qwerty asdf")
        assert result.action == "fallback_clarify"
        assert result.response == (
            "Sorry, I didn't catch your appt date. What date do you prefer for the appointment?"
        )


WIDGET_TASKS = """
Bot:
  text_bot: true
  bot_name: Widget Works
Task:
  positive:
    description: polarity
    samples:
      - "Yes"
      - "Sure"
      - "correct"
      - "yes please"
  negative:
    description: polarity
    samples:
      - "No"
      - "Nope"
      - "Not exactly"
  order_widget:
    description: order a widget
    samples:
      - I want to order a widget
      - order a widget please
    entities:
      quantity:
        function: check_quantity
        confirm: yes
        prompt:
          - How many widgets do you need?
        response:
    entity_groups:
      quantity_group:
        - quantity
    success:
      INSERT:
        - quantity_group
    finish_response:
      success:
        - Your widgets are on the way.
      failure:
        - I could not place the widget order.
    repeat: false
    max_turns: 10
"""
WIDGET_ENTITIES = """
Entity:
  quantity:
    type: CARDINAL
    methods:
      ner:
"""


@pytest.fixture(scope="module")
def widget_config(tmp_path_factory):
    root = tmp_path_factory.mktemp("widget_bot")
    (root / "tasks.yaml").write_text(WIDGET_TASKS)
    (root / "entities.yaml").write_text(WIDGET_ENTITIES)
    return load_bot_config(str(root / "tasks.yaml"), str(root / "entities.yaml"))


def widget_engine(widget_config):
    registry = BackendRegistry()
    registry.register("check_quantity", lambda request: BackendResult(success=True))
    return Engine(widget_config, MemoryStore(), registry, clock=lambda: FIXED_NOW)


class TestConfirmFlow:
    """Slots marked confirm: yes ask before committing."""

    def test_confirmation_accepted(self, widget_config):
        engine = widget_engine(widget_config)
        sid, _ = engine.start_session()
        results = run(engine, sid, "I want to order a widget", "5", "yes")
        assert results[1].response == "Just to confirm, your quantity is 5, correct?"
        assert results[2].action == "handle_yes"
        assert results[2].response == (
            "Your widgets are on the way. Is there anything else I can help you with?"
        )
        record = engine.store.load(sid).entity_history.lookup("quantity")
        assert record.value == 5

    def test_confirmation_rejected_then_retried(self, widget_config):
        engine = widget_engine(widget_config)
        sid, _ = engine.start_session()
        results = run(engine, sid, "I want to order a widget", "5", "no", "7", "yes")
        assert results[2].action == "handle_no"
        assert results[2].response == (
            "Sorry, I didn't catch your quantity. How many widgets do you need?"
        )
        assert results[3].response == "Just to confirm, your quantity is 7, correct?"
        assert results[4].response == (
            "Your widgets are on the way. Is there anything else I can help you with?"
        )
        assert engine.store.load(sid).entity_history.lookup("quantity").value == 7


class TestIdleSmallTalk:
    def test_idle_faq(self):
        engine = make_engine("order_bot_b")
        sid, _ = engine.start_session()
        result = engine.process_turn(sid, "What are your business hours?")
        assert result.action == "answer_faq"
        assert result.response == "We are open 24/7. Is there anything else I can help you with?"

    def test_unintelligible_idle_turn(self):
        engine = make_engine("order_bot_a")
        sid, _ = engine.start_session()
        result = engine.process_turn(sid, "flibbertigibbet")
        assert result.action == "fallback_clarify"
        assert result.response == (
            "I'm sorry, I don't quite understand. Could you rephrase that?"
        )


SWITCH_SCRIPT = (
    "I'd like to book a round-trip flight.",
    "Oh wait, could you please help me check tomorrow's weather first?",
    "94105",
    "San Francisco.",
    "Do I have free checked bags?",
)


@pytest.fixture(scope="module")
def kv_server():
    server = start_server("127.0.0.1", 0)
    yield server
    server.shutdown()


class TestDurability:
    """The engine is stateless between turns; the store carries everything."""

    def test_memory_and_kv_stores_give_identical_transcripts(self, kv_server):
        reference = make_engine("travel_bot", MemoryStore())
        kv_engine = make_engine("travel_bot", make_store("kv", kv_server.address))
        sid_a, greet_a = reference.start_session()
        sid_b, greet_b = kv_engine.start_session()
        assert greet_a == greet_b
        for text in SWITCH_SCRIPT:
            a = reference.process_turn(sid_a, text)
            b = kv_engine.process_turn(sid_b, text)
            assert (a.response, a.action, a.active_task) == (b.response, b.action, b.active_task)

    def test_engine_restart_resumes_the_conversation(self, kv_server):
        reference = make_engine("travel_bot", MemoryStore())
        sid_ref, _ = reference.start_session()
        expected = [reference.process_turn(sid_ref, text) for text in SWITCH_SCRIPT]

        first = make_engine("travel_bot", make_store("kv", kv_server.address))
        sid, _ = first.start_session()
        for text in SWITCH_SCRIPT[:3]:
            first.process_turn(sid, text)
        del first  # nothing in memory survives; a new process would look the same

        second = make_engine("travel_bot", make_store("kv", kv_server.address))
        for text, want in zip(SWITCH_SCRIPT[3:], expected[3:]):
            got = second.process_turn(sid, text)
            assert got.response == want.response
            assert got.action == want.action


class TestDegradedTurn:
    def test_crash_mid_turn_keeps_the_context_intact(self, monkeypatch):
        engine = make_engine("order_bot_a")
        sid, _ = engine.start_session()
        engine.process_turn(sid, "I would like to check my order status")
        before = engine.store.load(sid)

        def boom(action, rt):
            raise RuntimeError("simulated crash")

        monkeypatch.setattr(orchestrator, "execute_action", boom)
        result = engine.process_turn(sid, "jane.doe@example.com")
        monkeypatch.undo()

        assert result.response == (
            "I'm sorry, something went wrong on my end. Could you try that again?"
        )
        after = engine.store.load(sid)
        assert after.tree.to_dict() == before.tree.to_dict()
        assert after.multi_turn.asked_entity == before.multi_turn.asked_entity
        assert after.multi_turn.global_turn == before.multi_turn.global_turn + 1

        # the pending question still works once the fault clears
        recovered = engine.process_turn(sid, "jane.doe@example.com")
        assert recovered.response == IDENTITY_OK

    def test_backend_fault_apologizes_but_keeps_the_slot_open(self):
        registry = BackendRegistry()
        calls = {"n": 0}

        def flaky_verify(request):
            calls["n"] += 1
            if calls["n"] == 1:
                raise ConnectionResetError("transient")
            return BackendResult(success=str(request.value).lower() == "jane.doe@example.com")

        registry.register("verify_zip", lambda request: BackendResult(success=True))
        registry.register("verify_email", flaky_verify)
        engine = make_engine("order_bot_a", registry=registry)
        sid, _ = engine.start_session()
        engine.process_turn(sid, "I would like to check my order status")
        faulted = engine.process_turn(sid, "jane.doe@example.com")
        assert faulted.response == (
            "I'm sorry, something went wrong on my end. Could you try that again?"
        )
        retried = engine.process_turn(sid, "jane.doe@example.com")
        assert retried.response == IDENTITY_OK


class TestDeterminism:
    def test_same_script_twice_is_identical(self):
        transcripts = []
        for _ in range(2):
            engine = make_engine("travel_bot")
            sid, greeting = engine.start_session(session_id="fixed")
            lines = [greeting] + [engine.process_turn(sid, t).response for t in SWITCH_SCRIPT]
            transcripts.append(lines)
        assert transcripts[0] == transcripts[1]
