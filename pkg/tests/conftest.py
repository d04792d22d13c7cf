import pytest

from mutinv.dsl import Declarations, parse
from mutinv.experiment import package_data
from mutinv.plant import default_config


@pytest.fixture(scope="session")
def plant():
    return default_config()


@pytest.fixture(scope="session")
def declarations(plant):
    return Declarations.from_plant(plant)


@pytest.fixture(scope="session")
def controller(declarations):
    return parse(package_data("controller.ctl").read_text(encoding="utf-8"), declarations)
