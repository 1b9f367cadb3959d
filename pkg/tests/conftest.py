import pytest

from asvsim.mmg import ShipModel


@pytest.fixture(scope="session")
def model():
    return ShipModel.default_kcs()
