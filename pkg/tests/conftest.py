from pathlib import Path

import pytest

from treetrace.graph_of_groups import AmalgamSpec
from treetrace.groups import cyclic_group, identity_hom, subgroup_generated, symmetric_group
from treetrace.scenario import parse_scenario
from treetrace.tree import BassSerreTree

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="session")
def scenario_dir():
    return SCENARIOS


@pytest.fixture(scope="session")
def S3():
    return symmetric_group(3)


@pytest.fixture(scope="session")
def amalgam():
    return parse_scenario(SCENARIOS / "s3_c2_s3.json").spec


@pytest.fixture(scope="session")
def hnn():
    return parse_scenario(SCENARIOS / "hnn_s3_c3.json").spec


@pytest.fixture(scope="session")
def dihedral():
    """C2 * C2 over the trivial group: the infinite dihedral group."""
    C2 = cyclic_group(2)
    U, inc = subgroup_generated(C2, []).as_group()
    return AmalgamSpec(C2, C2, U, inc, inc, C2, identity_hom(C2), identity_hom(C2), name="D_inf")


@pytest.fixture(scope="session")
def amalgam_tree(amalgam):
    return BassSerreTree(amalgam)


@pytest.fixture(scope="session")
def hnn_tree(hnn):
    return BassSerreTree(hnn)


@pytest.fixture(params=["amalgam", "hnn"], scope="session")
def spec_and_tree(request, amalgam, hnn, amalgam_tree, hnn_tree):
    return (amalgam, amalgam_tree) if request.param == "amalgam" else (hnn, hnn_tree)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
