import datetime
import os

import pytest

from taskbot.config import load_bot_config

CONFIG_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "configs")

FIXED_NOW = datetime.datetime(2023, 3, 14, 9, 0, 0)


def config_path(bot: str, name: str) -> str:
    return os.path.join(CONFIG_DIR, bot, name)


def load_fixture_bot(bot: str, templates: bool = True):
    template_path = config_path(bot, "templates.yaml")
    if not (templates and os.path.exists(template_path)):
        template_path = None
    return load_bot_config(
        config_path(bot, "tasks.yaml"),
        config_path(bot, "entities.yaml"),
        template_path,
    )


@pytest.fixture
def fixed_clock():
    return lambda: FIXED_NOW


@pytest.fixture(scope="session")
def health_config():
    return load_fixture_bot("health_bot")


@pytest.fixture(scope="session")
def order_a_config():
    return load_fixture_bot("order_bot_a")


@pytest.fixture(scope="session")
def order_b_config():
    return load_fixture_bot("order_bot_b")


@pytest.fixture(scope="session")
def travel_config():
    return load_fixture_bot("travel_bot")
