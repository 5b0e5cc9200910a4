import pytest

from vdatalog.pcbdd import BddManager
from vdatalog.syntax import parse_pc, pc_to_bdd

from helpers import TRAVEL_FM_TEXT


@pytest.fixture
def mgr():
    return BddManager()


@pytest.fixture
def travel_mgr():
    """Manager with Sea, Air, Land registered in fact-file order."""
    m = BddManager()
    for name in ("Sea", "Air", "Land"):
        m.mk_var(name)
    return m


@pytest.fixture
def travel_fm(travel_mgr):
    return pc_to_bdd(parse_pc(TRAVEL_FM_TEXT), travel_mgr)
