"""
集合描述 JSON 的解析與輸出
"""
import json
from fractions import Fraction

import pytest

from thomson_lab.circle_sets import HarmonicRule, StructuredSet, measure
from thomson_lab.errors import LabValidationError
from thomson_lab.set_spec import (
    describe,
    dump_set_spec,
    load_named_sets,
    load_set_spec,
    parse_set_spec,
)

BENCHMARK_JSON = json.dumps(
    {
        "plain": [["0", "1/4"]],
        "cantor": [
            {"host": ["1/2", "1/2"], "rule": {"kind": "harmonic", "a": "3/10", "p": 2}}
        ],
    }
)


class TestParse:
    def test_benchmark(self, benchmark):
        S = parse_set_spec(BENCHMARK_JSON)
        assert S == benchmark
        assert S.cantor_parts[0].rule == HarmonicRule(Fraction(3, 10), 2)
        assert S.cantor_parts[0].max_depth_hint == 12

    def test_plain_only(self):
        S = parse_set_spec('{"plain": [["3/4", "1/2"], [[3, 8], 0.125]]}')
        assert S.is_plain
        assert measure(S) == Fraction(1, 2) + Fraction(1, 8)

    def test_empty_object(self):
        assert parse_set_spec("{}") == StructuredSet.empty()

    @pytest.mark.parametrize(
        "text",
        [
            "not json",
            "[]",
            '{"arcs": []}',
            '{"plain": [["0"]]}',
            '{"plain": [["0", "0"]]}',
            '{"plain": "0,1/4"}',
            '{"cantor": [{"host": ["0", "1/2"]}]}',
            '{"cantor": [{"host": ["0", "1/2"], "rule": {"kind": "geometric", "a": "1/8",'
            ' "q": "1/3"}, "depth": -1}]}',
            '{"cantor": [{"host": ["0", "1/2"], "rule": {"kind": "geometric", "a": "1/8",'
            ' "q": "1/3"}, "colour": "red"}]}',
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(LabValidationError):
            parse_set_spec(text)

    def test_removed_mass_too_large(self):
        text = json.dumps(
            {"cantor": [{"host": ["1/2", "1/2"], "rule": {"kind": "harmonic", "a": "10", "p": 2}}]}
        )
        with pytest.raises(LabValidationError):
            parse_set_spec(text)

    def test_host_overlapping_plain(self):
        text = json.dumps(
            {
                "plain": [["0", "3/4"]],
                "cantor": [
                    {"host": ["1/2", "1/2"], "rule": {"kind": "harmonic", "a": "3/10", "p": 2}}
                ],
            }
        )
        with pytest.raises(LabValidationError, match="重疊"):
            parse_set_spec(text)


class TestFiles:
    def test_dump_reads_back(self, benchmark):
        assert parse_set_spec(dump_set_spec(benchmark)) == benchmark

    def test_dump_keeps_clip(self):
        text = json.dumps(
            {
                "cantor": [
                    {
                        "host": ["0", "1"],
                        "rule": {"kind": "geometric", "a": "1/2", "q": "1/3"},
                        "clip": ["0", "1/2"],
                    }
                ]
            }
        )
        S = parse_set_spec(text)
        assert measure(S) == Fraction(1, 4)
        assert parse_set_spec(dump_set_spec(S)) == S

    def test_load_from_file(self, tmp_path, benchmark):
        path = tmp_path / "E.json"
        path.write_text(BENCHMARK_JSON, encoding="utf-8")
        assert load_set_spec(path) == benchmark

    def test_missing_file(self, tmp_path):
        with pytest.raises(LabValidationError):
            load_set_spec(tmp_path / "missing.json")

    def test_named_sets(self, named_sets):
        assert set(named_sets) >= {"benchmark", "residual_target", "arc_target", "full_circle"}
        assert named_sets["full_circle"] == StructuredSet.full()

    def test_named_sets_must_be_object(self, tmp_path):
        path = tmp_path / "corpus.json"
        path.write_text("[1, 2]", encoding="utf-8")
        with pytest.raises(LabValidationError):
            load_named_sets(path)

    def test_describe(self, benchmark):
        lines = describe(benchmark)
        assert lines[0] == "arc ['0', '1/4']"
        assert lines[1].startswith("cantor harmonic(")
