"""Task-oriented dialogue engine driven by and-or task trees.

Bots are described in YAML (tasks, entities, templates, optional policy),
compiled into an immutable config, and served over a small HTTP API or the
bundled CLI. See the README for the config format and wire contracts.
"""

__version__ = "0.1.0"

from taskbot.config.loader import load_bot_config
from taskbot.config.validate import validate_config

__all__ = ["load_bot_config", "validate_config", "__version__"]
