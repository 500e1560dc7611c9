import pytest

from main_logic.config import RunConfig
from view_models.verify_view_model import SUITES, SuiteResult, VerifyViewModel


@pytest.fixture
def view_model():
    return VerifyViewModel(RunConfig(seed=3), max_crossings=6, pairs=8, words=5)


def test_suite_result():
    result = SuiteResult("demo")
    assert result.check(True, "a")
    assert not result.check(False, "b", "detail")
    payload = result.to_dict()
    assert payload["passed"] is False
    assert payload["checks"] == 2
    assert payload["failures"] == [{"case": "b", "detail": "detail"}]


@pytest.mark.parametrize("suite", SUITES)
def test_each_suite_passes(view_model, suite):
    report = view_model.run([suite])
    assert report["seed"] == 3
    (result,) = report["suites"]
    assert result["suite"] == suite
    assert result["failures"] == []
    assert result["checks"] > 0


def test_unknown_suite(view_model):
    with pytest.raises(ValueError):
        view_model.run(["nope"])


def test_max_crossings_capped_by_limit():
    view_model = VerifyViewModel(RunConfig(crossing_limit=4), max_crossings=12)
    assert view_model.max_crossings == 4


@pytest.mark.slow
def test_full_run():
    report = VerifyViewModel(RunConfig(), max_crossings=10, pairs=40, words=20).run()
    assert report["passed"]
    assert [suite["suite"] for suite in report["suites"]] == list(SUITES)
