from __future__ import annotations

import json

import pytest

from fracvar import suites as S

EXPECTED_IDS = [
    "duality", "inversion", "composition", "ftc", "ftc_delta", "leibniz_grad", "leibniz_div",
    "mollifier_commute", "translation", "mollifier_distance", "homogeneity", "scaling_sets",
    "sobolev_bound", "sup_bound", "gns", "isoperimetric", "embedding", "coarea", "strict_interval",
    "atom_pairing", "ibp_ball", "approximation", "decay_density",
]  # fmt: skip


def test_registry_is_complete_and_ordered():
    assert S.suite_ids() == EXPECTED_IDS


@pytest.mark.parametrize(
    "measured, expected, tol, kind, status",
    [
        ([1.0], [1.0 + 1e-13], 1e-12, "equality", "pass"),
        ([1.0], [1.1], 1e-12, "equality", "fail"),
        ([1.0, 2.0], [1.0, 2.0], 0.0, "inequality", "pass"),
        ([1.0, 2.1], [1.0, 2.0], 0.05, "inequality", "fail"),
        ([float("nan")], [1.0], 1.0, "inequality", "fail"),
        ([], [], 1.0, "inequality", "fail"),
    ],
)
def test_status_rule(measured, expected, tol, kind, status):
    assert S.decide(measured, expected, tol, kind) == status


def test_report_rejects_unknown_status_and_kind():
    with pytest.raises(ValueError):
        S.SuiteReport("x", {}, [], [], 0.0, "equality", "maybe")
    with pytest.raises(ValueError):
        S.SuiteReport("x", {}, [], [], 0.0, "approximate", "pass")


def test_unknown_suite_raises():
    with pytest.raises(KeyError):
        S.run_suite("no_such_suite")


def test_inadmissible_configurations_skip_with_reason():
    rep = S.run_suite("gns", {"n": 1})
    assert rep.status == "skip" and "n = 1" in rep.reason
    rep = S.run_suite("strict_interval", {"alpha": 1.5})
    assert rep.status == "skip" and "alpha" in rep.reason
    rep = S.run_suite("strict_interval", {"n": 2})
    assert rep.status == "skip" and "n=2" in rep.reason


def test_configuration_errors_become_failures():
    # h = 0.5 cannot resolve the unit interval
    rep = S.run_suite("strict_interval", {"h": 0.5})
    assert rep.status == "fail" and rep.reason


def test_strict_interval_report_values():
    rep = S.run_suite("strict_interval", {"alpha": 0.5})
    assert rep.status == "pass"
    assert rep.measured[0] == pytest.approx(2.2568, abs=1e-4)
    assert rep.expected_or_bound[0] == pytest.approx(3.1915, abs=1e-4)
    assert rep.constants["mu"] == pytest.approx(0.19947114020071635)


def test_scaling_sets_one_dimensional_ratio():
    rep = S.run_suite("scaling_sets", {"n": 1})
    assert rep.status == "pass"
    assert rep.measured[0] == pytest.approx(2**0.5, rel=0.01)


def test_duality_has_exact_and_budgeted_checks():
    rep = S.run_suite("duality")
    assert rep.status == "pass"
    exact = [m for lab, m in zip(rep.labels, rep.measured) if lab.startswith("adjoint")]
    assert len(exact) == 10 and max(exact) <= 1e-12


@pytest.mark.parametrize("suite_id", ["inversion", "composition", "ftc", "leibniz_grad", "leibniz_div", "translation", "homogeneity"])
def test_two_dimensional_variants(suite_id):
    rep = S.run_suite(suite_id, {"n": 2})
    assert rep.status == "pass", rep.labels


@pytest.mark.parametrize("alpha", [0.25, 0.75])
def test_other_orders_pass(alpha):
    for suite_id in ("duality", "strict_interval", "atom_pairing", "ftc"):
        assert S.run_suite(suite_id, {"alpha": alpha}).status == "pass", suite_id


def test_reports_embed_constants_and_serialize():
    reps = S.run_all(only=["strict_interval", "atom_pairing"])
    text = S.reports_to_json(reps)
    assert text.endswith("\n")
    doc = json.loads(text)
    assert [d["suite_id"] for d in doc] == ["strict_interval", "atom_pairing"]
    assert all({"mu", "mu_neg"} <= set(d["constants"]) for d in doc)
    csv_text = S.reports_to_csv(reps)
    assert csv_text.splitlines()[0] == "suite_id,measured,expected,status"


def test_empty_filter_gives_empty_list():
    assert S.run_all(only=[]) == []


def test_threads_do_not_change_reports():
    ids = ["strict_interval", "atom_pairing", "homogeneity", "coarea"]
    one = S.reports_to_json(S.run_all({"threads": 1}, only=ids))
    many = S.reports_to_json(S.run_all({"threads": 4}, only=ids))
    assert one == many
