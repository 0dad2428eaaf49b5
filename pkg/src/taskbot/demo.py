"""Canned backend handlers for demos and tests.

Every fixture config under configs/ names its backend functions from this
module. The handlers are deterministic: identity checks accept one fixed
value each, lookups return a fixed sentence. Real deployments register
their own callables (or point the config at an HTTP endpoint) instead.
"""

from typing import Dict, List

from taskbot.backends import BackendRegistry, BackendRequest, BackendResult

# values the verification stubs accept
DEMO_EMAIL = "jane.doe@example.com"
DEMO_ZIP = "94301"

_WEATHER_CITIES = {
    "94105": "San Francisco",
    "94301": "Palo Alto",
    "10001": "New York",
}

_NEGATIVE_TOKENS = {"no", "not", "dont", "don't", "nope", "never", "nothing"}


def verify_email(request: BackendRequest) -> BackendResult:
    ok = str(request.value).strip().lower() == DEMO_EMAIL
    return BackendResult(success=ok)


def verify_zip(request: BackendRequest) -> BackendResult:
    ok = str(request.value).strip() == DEMO_ZIP
    return BackendResult(success=ok)


def verify_ssn(request: BackendRequest) -> BackendResult:
    """Accept any ssn/birthday pair; a real service would hit a directory."""
    return BackendResult(success=True)


def collect_info(request: BackendRequest) -> BackendResult:
    return BackendResult(success=True)


def check_condition(request: BackendRequest) -> BackendResult:
    """Read a yes/no out of a free-text answer.

    Negated answer -> failure (the Or branch falls through to the profile
    questions); anything else counts as a yes.
    """
    words = str(request.value).lower().replace(",", " ").replace(".", " ").split()
    if any(w in _NEGATIVE_TOKENS or w.endswith("n't") for w in words):
        return BackendResult(success=False)
    return BackendResult(success=True, message="Great, let me look up your insurance record.")


def covid_protocol(request: BackendRequest) -> BackendResult:
    return BackendResult(success=True, message="Please wear a mask when you come to the clinic.")


def create_appointment(request: BackendRequest) -> BackendResult:
    return BackendResult(success=True)


def weather_lookup(request: BackendRequest) -> BackendResult:
    city = _WEATHER_CITIES.get(str(request.value).strip(), "your area")
    return BackendResult(success=True, message="The weather in %s is sunny." % city)


def build_demo_registry() -> BackendRegistry:
    registry = BackendRegistry()
    for handler in (
        verify_email,
        verify_zip,
        verify_ssn,
        collect_info,
        check_condition,
        covid_protocol,
        create_appointment,
        weather_lookup,
    ):
        registry.register(handler.__name__, handler)
    return registry


def transcript_lines(turns: List[Dict[str, str]]) -> List[str]:
    """Flatten [{'user':..., 'bot':...}] pairs for readable demo output."""
    lines = []
    for turn in turns:
        if "user" in turn:
            lines.append("User: %s" % turn["user"])
        if "bot" in turn:
            lines.append("Bot:  %s" % turn["bot"])
    return lines
