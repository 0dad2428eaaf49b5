"""Exception hierarchy for the dialogue engine.

Config and policy errors are raised at load time; runtime errors raised by
the tree and dialogue layers are caught by the orchestrator, which degrades
to an apology response instead of crashing the turn.
"""


class TaskbotError(Exception):
    """Base class for all engine errors."""


# --- configuration ---------------------------------------------------------

class ParseError(TaskbotError):
    """Malformed config document (bad YAML, unreadable file)."""

    def __init__(self, path, message):
        self.path = str(path)
        self.message = message
        super().__init__(f"{path}: {message}")


class SchemaError(TaskbotError):
    """Structurally valid document with unknown keys or wrong value kinds."""

    def __init__(self, location, message):
        self.location = location
        self.message = message
        super().__init__(f"{location}: {message}")


class UnknownOperator(SchemaError):
    """Success expression uses a key outside AND/OR/VERIFY/INSERT/API/INFORM/TASK."""


class ArityError(SchemaError):
    """Success operator leaf names zero or several groups."""


# --- task tree -------------------------------------------------------------

class TreeError(TaskbotError):
    pass


class UnknownTask(TreeError):
    pass


class UnresolvedTask(TreeError):
    """A TASK reference points at a task absent from the config."""


class TaskAlreadyComplete(TreeError):
    """Task finished earlier this session and is not repeatable."""


class TaskNotRepeatable(TreeError):
    pass


class NoActiveTask(TreeError):
    pass


class NotCurrentLeaf(TreeError):
    """Slot outcome recorded against a leaf the cursor is not on."""


# --- policy / conditions ---------------------------------------------------

class ConditionSyntaxError(TaskbotError):
    """Condition DSL text does not parse; carries the offending position."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} (at position {position})")


class UnknownPath(TaskbotError):
    """Condition references a state field that does not exist."""


class NoActionReached(TaskbotError):
    """Policy tree has no always-true fallback path to a leaf."""


class UnknownAction(TaskbotError):
    pass


# --- NLG -------------------------------------------------------------------

class MissingTemplate(TaskbotError):
    pass


class UnboundSlot(TaskbotError):
    """A response template references a slot with no binding."""


# --- backends --------------------------------------------------------------

class BackendError(TaskbotError):
    pass


class DuplicateHandler(BackendError):
    pass


class UnknownHandler(BackendError):
    pass


# --- context store ---------------------------------------------------------

class StoreError(TaskbotError):
    pass


class NotFound(StoreError):
    pass


class ConnectionError_(StoreError):
    """Distributed store unreachable. Named with a trailing underscore to
    avoid shadowing the builtin."""


class VersionMismatch(StoreError):
    pass


class CorruptPayload(StoreError):
    pass
