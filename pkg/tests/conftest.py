import pytest

from sejbasket.basket import run_scenario
from sejbasket.domain import validate_study
from sejbasket.fileio import parse_scenario, resolve_data


def make_study(experts, realizations, answers, targets=None):
    """``answers[expert]`` lists triples, calibration questions first, then targets."""
    targets = targets or []
    questions = [{"id": f"C{i}", "kind": "calibration", "realization": r} for i, r in enumerate(realizations)]
    questions += [{"id": f"T{i}", "kind": "target"} for i in range(len(targets))]
    ids = [q["id"] for q in questions]
    assessments = {e: dict(zip(ids, answers[e])) for e in experts}
    return validate_study({"experts": experts, "questions": questions, "assessments": assessments})


@pytest.fixture(scope="session")
def deal_config():
    return parse_scenario(resolve_data("brexit_deal"))


@pytest.fixture(scope="session")
def nodeal_config():
    return parse_scenario(resolve_data("brexit_nodeal"))


@pytest.fixture(scope="session")
def reports(deal_config, nodeal_config):
    """Full-size runs shared by the basket and acceptance tests."""
    return {
        "deal": run_scenario(deal_config, keep_samples=True),
        "nodeal": run_scenario(nodeal_config, keep_samples=True),
        "deal_meat05": run_scenario(deal_config.with_options(condition=("Meat", 0.05))),
        "nodeal_meat95": run_scenario(nodeal_config.with_options(condition=("Meat", 0.95))),
    }


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
