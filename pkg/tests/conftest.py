import sys
from pathlib import Path

import pytest

sys.path.append(str(Path(__file__).parent.parent))

from src.lesions import default_sampling_params
from src.utils.logging_utils import configure_logging
from tests.phantoms import liver_phantom, stomach_phantom, template_from


def pytest_configure(config):
    configure_logging(send_to_logfire=False, console=False)


@pytest.fixture(scope="session")
def sampling_params():
    return default_sampling_params()


@pytest.fixture
def liver_template():
    return template_from(*liver_phantom(), scan_id="liver-phantom")


@pytest.fixture
def stomach_template():
    return template_from(*stomach_phantom(), scan_id="stomach-phantom")
