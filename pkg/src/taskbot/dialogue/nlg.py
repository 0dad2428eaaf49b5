"""Template-based response rendering.

A turn's output is an ordered list of response events. Each event either
names a shared template or carries its own task-specific variant list
(prompts and responses from the task config). Variants rotate per session
so repeated prompts vary deterministically; ``{slot}`` placeholders come
from the event's bindings and the ``<info>`` token is replaced by the
backend message.
"""

import re
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Sequence, Tuple

from taskbot.errors import MissingTemplate, UnboundSlot

_SLOT_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")
INFO_TOKEN = "<info>"


@dataclass(frozen=True)
class ResponseEvent:
    key: str  # rotation key; also the template name when variants is empty
    variants: Tuple[str, ...] = ()
    bindings: Mapping[str, str] = field(default_factory=dict)


def _substitute(text: str, bindings: Mapping[str, str], key: str) -> str:
    if INFO_TOKEN in text:
        if "info" not in bindings:
            raise UnboundSlot("info", key)
        text = text.replace(INFO_TOKEN, str(bindings["info"]))

    def fill(match: "re.Match") -> str:
        name = match.group(1)
        if name not in bindings:
            raise UnboundSlot(name, key)
        return str(bindings[name])

    return _SLOT_RE.sub(fill, text)


def render_response(
    events: Sequence[ResponseEvent],
    templates: Mapping[str, Tuple[str, ...]],
    rotation: Dict[str, int],
) -> str:
    """Render events in order and join with single spaces.

    Mutates ``rotation`` in place: each rendered event advances its key's
    counter, so the next use of the same prompt picks the next variant.
    """
    parts: List[str] = []
    for event in events:
        variants = event.variants
        if not variants:
            if event.key not in templates:
                raise MissingTemplate(event.key)
            variants = tuple(templates[event.key])
        if not variants:
            raise MissingTemplate(event.key)
        count = rotation.get(event.key, 0)
        rotation[event.key] = count + 1
        text = variants[count % len(variants)]
        rendered = _substitute(text, event.bindings, event.key).strip()
        if rendered:
            parts.append(rendered)
    return " ".join(parts)
