from pathlib import Path

import pytest

from inertol import allocation as al
from inertol.config import load_mechanism

CASE_STUDY = Path(__file__).resolve().parent.parent / "configs" / "case-study.cfg"


@pytest.fixture(scope="session")
def mech():
    return load_mechanism(CASE_STUDY)


@pytest.fixture(scope="session")
def tols(mech):
    return al.allocate(mech)
