"""
驗證套件：檢查清單、種子語料與故障注入
"""
import json

import numpy as np
import pytest

from thomson_lab.errors import LabValidationError, ResolutionLimitError
from thomson_lab.verification import (
    VerificationConfig,
    VerificationCorpus,
    VerificationSuite,
    run_verify_suite,
)
from thomson_lab.verification.config import CheckConfig

FAST = ["closed_form_distance", "bergman_identity", "embedding_audit", "frostman_postconditions"]


@pytest.fixture
def small_config(lab_config):
    lab_config.update_config("verify", "corpus_size", "3")
    return lab_config


class TestVerificationConfig:
    def test_slow_checks_excluded(self):
        config = VerificationConfig()
        names = {c.name for c in config.enabled_checks(include_slow=False)}
        assert "gk_suite" not in names and "fn_suite" not in names
        assert "herglotz_quadrature" in names
        assert len(config.enabled_checks()) == 16

    def test_select(self):
        config = VerificationConfig()
        config.select(["bergman_identity"])
        assert [c.name for c in config.enabled_checks()] == ["bergman_identity"]

    def test_select_unknown(self):
        with pytest.raises(LabValidationError):
            VerificationConfig().select(["no_such_check"])

    def test_dict_round_trip(self):
        config = VerificationConfig()
        config.get_check("p2mu", "gram_quadrature").enabled = False
        restored = VerificationConfig.from_dict(config.to_dict())
        assert not restored.get_check("p2mu", "gram_quadrature").enabled
        assert restored.get_check("p2mu", "gram_quadrature").tolerance == 1e-8


class TestCorpus:
    def test_same_seed_same_corpus(self):
        a = VerificationCorpus(seed=7, size=5).dyadic_unions()
        b = VerificationCorpus(seed=7, size=5).dyadic_unions()
        assert a == b

    def test_different_seed(self):
        a = VerificationCorpus(seed=1, size=5).coefficient_vectors()
        b = VerificationCorpus(seed=2, size=5).coefficient_vectors()
        assert any(x.shape != y.shape or not np.allclose(x, y) for x, y in zip(a, b))

    def test_streams_are_independent(self):
        corpus = VerificationCorpus(seed=3, size=4)
        first = corpus.open_sets()
        corpus.carleson_pairs()
        assert corpus.open_sets() == first

    def test_open_set_depths(self):
        for U, depth in VerificationCorpus(size=10).open_sets():
            assert 8 <= depth <= 12
            assert all((b * 2 ** (depth - 2)).denominator == 1 for _, b in U.intervals)

    def test_named_sets(self):
        corpus = VerificationCorpus()
        assert set(corpus.named) >= {"benchmark", "residual_target", "arc_target"}

    def test_herglotz_cases_inside_disk(self):
        cases = VerificationCorpus(size=2).herglotz_cases(count=20)
        assert len(cases) == 20
        assert all(abs(z) <= 0.9 for _, z in cases)


class TestSuite:
    def test_fast_checks_pass(self, small_config):
        report = run_verify_suite(small_config, checks=FAST, include_slow=False)
        assert [r.name for r in report.results] == [
            "frostman_postconditions",
            "bergman_identity",
            "closed_form_distance",
            "embedding_audit",
        ]
        assert report.passed
        data = json.loads(report.to_json())
        assert data["summary"]["total"] == 4
        assert data["settings"]["corpus_size"] == 3

    def test_injected_fault_is_reported(self, small_config):
        report = run_verify_suite(
            small_config, checks=["frostman_postconditions"], inject_fault="frostman-cap"
        )
        assert not report.passed
        failure = report.failures[0]
        assert failure.status == "fail"
        assert failure.witness["interval"] is not None
        assert failure.details["inject_fault"] == "frostman-cap"

    def test_unknown_fault(self, small_config):
        with pytest.raises(LabValidationError):
            VerificationSuite(small_config, inject_fault="everything")

    def test_missing_runner_is_error(self, small_config):
        suite = VerificationSuite(small_config)
        result = suite.run_check(CheckConfig(name="orphan"))
        assert result.status == "error"
        assert not result.passed

    def test_gk_suite_incomplete_when_budget_exhausted(self, small_config, mocker):
        small_config.update_config("verify", "gk_k_max", "2")
        build = mocker.patch(
            "thomson_lab.verification.suite.build_gk",
            side_effect=ResolutionLimitError("超出代數預算", {"budget": 11}),
        )
        result = VerificationSuite(small_config).run_check(CheckConfig(name="gk_suite"))
        assert build.call_count == 2
        assert not result.passed
        assert result.status == "incomplete"
        assert result.details["complete"] is False
        assert result.details["resolution_limited"] == [1, 2]
        assert result.witness == {"resolution_limited": [1, 2]}

    def test_incomplete_counted_in_summary(self, small_config, mocker):
        small_config.update_config("verify", "gk_k_max", "1")
        mocker.patch(
            "thomson_lab.verification.suite.build_gk",
            side_effect=ResolutionLimitError("超出代數預算", {"budget": 11}),
        )
        report = run_verify_suite(small_config, checks=["gk_suite"])
        assert not report.passed
        data = json.loads(report.to_json())
        assert data["summary"]["incomplete"] == ["gk_suite"]
        assert data["checks"][0]["status"] == "incomplete"

    def test_fn_level_bound_passes(self, small_config):
        result = VerificationSuite(small_config).run_check(CheckConfig(name="fn_level_bound"))
        assert result.passed, result.witness
        rows = result.details["generations"]
        assert [r["n"] for r in rows] == [1, 2, 3, 4]
        assert all(-r["residual_sup"] >= r["level_bound"] - 1e-12 for r in rows)

    def test_fn_level_bound_reports_shortfall(self, small_config, mocker):
        mocker.patch("thomson_lab.khrushchev_construction.MASS_DIVISOR", 1e-3)
        result = VerificationSuite(small_config).run_check(CheckConfig(name="fn_level_bound"))
        assert result.status == "fail"
        assert result.witness["n"] == 1
        assert result.witness["gauge"] == "entropy"
        assert not result.witness["mass_ok"]
