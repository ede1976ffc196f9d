import pytest
from hypothesis import settings

from shadowcast.geometry import GripperPose
from shadowcast.legibility import ObserverModel
from shadowcast.asd_planner import RateConstraint
from shadowcast.trajectory import Scene

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

# filled in by test_acceptance.py: number -> (title, passed, seconds, limit)
ACCEPTANCE = {}


@pytest.fixture
def two_cups():
    return Scene(
        start=GripperPose(0.0, 40.0, 20.0),
        goals={"right": GripperPose(11.5, 0.0, 5.0), "left": GripperPose(-11.5, 0.0, 5.0)},
        table_height=5.0,
        duration=10.0,
        intended="right",
    )


@pytest.fixture
def single_goal():
    return Scene(GripperPose(0.0, 40.0, 20.0), {"cup": GripperPose(5.0, 0.0, 5.0)}, 5.0, 10.0)


@pytest.fixture
def observer():
    return ObserverModel()


@pytest.fixture
def constraint():
    return RateConstraint(15.0, 3.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, passed, seconds, limit = ACCEPTANCE[n]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}  ({seconds:.2f} s, limit {limit:g} s)")
