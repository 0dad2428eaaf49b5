from taskbot.config.loader import load_bot_config, load_yaml
from taskbot.config.model import (
    And,
    BotConfig,
    EntityDef,
    EntitySlotSpec,
    FaqEntry,
    FinishResponse,
    GroupLeaf,
    Or,
    SuccessExpr,
    TaskDef,
    TaskRef,
    ValidationReport,
    compile_success_expression,
    serialize_success_expression,
)
from taskbot.config.validate import validate_config

__all__ = [
    "And",
    "BotConfig",
    "EntityDef",
    "EntitySlotSpec",
    "FaqEntry",
    "FinishResponse",
    "GroupLeaf",
    "Or",
    "SuccessExpr",
    "TaskDef",
    "TaskRef",
    "ValidationReport",
    "compile_success_expression",
    "serialize_success_expression",
    "load_bot_config",
    "load_yaml",
    "validate_config",
]
