from __future__ import annotations

import pytest

from wiser.frames import FrameArgument, parse_catalog_lines
from wiser.rules import (
    RULE_TARGETS,
    OverrideTable,
    REIFIED_OVERRIDES,
    RuleError,
    compile_rules,
    coverage_lines,
    map_argument,
    map_catalog,
    noncore_relabel,
)


def arg(n, tag, roles, description, predicate="pred", sense="01"):
    return FrameArgument(predicate, sense, n, tag, frozenset(roles), description)


# One positive fixture per built-in rule: argument features and the rule
# index expected to claim it (no earlier rule may match).
POSITIVE_FIXTURES = [
    (1, "actor", arg(0, "PAG", (), "the teller")),
    (2, "actor", arg(0, "CAU", ("cause",), "thing causing the outcome")),
    (3, "theme", arg(1, "PPT", ("theme",), "thing broken")),
    (4, "theme", arg(1, "PAG", (), "entity stepping down")),
    (5, "instrument", arg(2, "MNR", ("instrument",), "tool used for cutting")),
    (6, "manner", arg(2, "MNR", (), "style of singing")),
    (7, "end", arg(2, "GOL", ("destination",), "place arrived at")),
    (8, "end", arg(2, "GOL", (), "attached surface")),
    (9, "benefactive", arg(2, "GOL", ("recipient",), "hearer of the telling")),
    (10, "benefactive", arg(3, "GOL", (), "to whom payment is made")),
    (11, "end", arg(2, "LOC", ("destination",), "final resting place")),
    (12, "start", arg(2, "LOC", ("initial_location",), "place moved away")),
    (13, "start", arg(2, "LOC", ("source",), "emerged out of")),
    (14, "end", arg(2, "LOC", (), "end point of landing")),
    (15, "start", arg(2, "LOC", (), "starting point of departure")),
    (16, "location", arg(1, "LOC", ("location",), "place of residence")),
    (17, "start", arg(1, "DIR", ("initial_location",), "place departed")),
    (18, "start", arg(2, "DIR", ("source",), "dislodged from")),
    (19, "start", arg(1, "DIR", (), "fled away from")),
    (20, "accompanier", arg(1, "COM", (), "other party at the meeting")),
    (21, "benefactive", arg(2, "COM", ("recipient",), "one receiving a share")),
    (22, "theme", arg(1, "VSP", ("asset",), "amount totaled")),
    (23, "asset", arg(3, "VSP", (), "price paid for the goods")),
    (24, "purpose", arg(2, "PRP", (), "purpose of preparation")),
    (25, "cause", arg(2, "CAU", (), "reason for dying")),
    (26, "start", arg(2, "VSP", ("material",), "made out of")),
    (27, "start", arg(2, "VSP", (), "source of origin")),
    (28, "domain", arg(2, "VSP", (), "aspect pertained to")),
]

# Arguments no rule covers; two recover a role through the override table.
NEGATIVE_FIXTURES = [
    arg(2, "REC", (), "bowed to each other", predicate="bow", sense="02"),
    arg(2, "GOL", ("goal",), "goal of the motion"),
    arg(2, "VSP", (), "specific aspect of the deal"),
    arg(1, "TMP", (), "time of the event", predicate="linger", sense="01"),
    arg(2, "PRD", (), "secondary predication"),
]

NEGATIVE_OVERRIDES = OverrideTable((
    (("bow", "02", 2), "accompanier"),
    (("linger", "01", 1), "time"),
))


class TestCompile:
    def test_builtin_count_and_first_rule(self, builtin_rules):
        assert len(builtin_rules) == 28
        first = builtin_rules[0]
        assert first.arg_cond == (0, True)
        assert first.ftag_cond == "PAG"
        assert first.target == "actor"

    def test_priorities_total_ordered(self, builtin_rules):
        assert [r.priority for r in builtin_rules] == list(range(1, 29))

    def test_rule_text_parsing(self):
        (rule,) = compile_rules("+ARG1 +VSP +asset -> Theme")
        assert rule.arg_cond == (1, True)
        assert rule.ftag_cond == "VSP"
        assert len(rule.vnrole_conds) == 1
        assert rule.vnrole_conds[0].roles == ("asset",)
        assert rule.vnrole_conds[0].required
        assert rule.target == "theme"

    def test_negated_arg_condition(self):
        (rule,) = compile_rules("-ARG1 & +CAU -> cause")
        assert rule.arg_cond == (1, False)

    def test_description_pattern(self):
        (rule,) = compile_rules("+GOL & +(end point|target) -> end")
        assert rule.desc_conds[0].phrases == ("end point", "target")

    def test_unknown_target_rejected(self):
        with pytest.raises(RuleError, match="unknown target role"):
            compile_rules("+ARG0 & +PAG -> Widget")

    def test_missing_function_tag_rejected(self):
        with pytest.raises(RuleError, match="function tag"):
            compile_rules("+ARG0 & +asset -> actor")

    def test_comments_ignored(self):
        rules = compile_rules("# comment\n+ARG0 & +PAG -> actor\n")
        assert len(rules) == 1


class TestMapArgument:
    @pytest.mark.parametrize("expected_index,expected_role,fixture", POSITIVE_FIXTURES,
                             ids=[f"rule{idx:02d}" for idx, _, _ in POSITIVE_FIXTURES])
    def test_positive_fixture_maps_by_intended_rule(self, builtin_rules, expected_index,
                                                    expected_role, fixture):
        result = map_argument(fixture, builtin_rules)
        assert result.provenance == "rule"
        assert result.rule_index == expected_index
        assert result.role == expected_role

    @pytest.mark.parametrize("fixture", NEGATIVE_FIXTURES,
                             ids=[f.function_tag for f in NEGATIVE_FIXTURES])
    def test_negative_fixture_unmapped_without_overrides(self, builtin_rules, fixture):
        result = map_argument(fixture, builtin_rules)
        assert result.role is None
        assert result.provenance == "unmapped"

    def test_override_path(self, builtin_rules):
        rec, _, _, tmp, _ = NEGATIVE_FIXTURES
        assert map_argument(rec, builtin_rules, NEGATIVE_OVERRIDES).role == "accompanier"
        assert map_argument(rec, builtin_rules, NEGATIVE_OVERRIDES).provenance == "override"
        assert map_argument(tmp, builtin_rules, NEGATIVE_OVERRIDES).role == "time"

    def test_worked_example_entity_thing(self, builtin_rules):
        result = map_argument(arg(1, "PAG", (), "entity stepping down"), builtin_rules)
        assert result.role == "theme"
        assert result.rule_index == 4

    def test_mnr_instrument_contrast(self, builtin_rules):
        with_role = map_argument(arg(2, "MNR", ("instrument",), "tool used"), builtin_rules)
        without = map_argument(arg(2, "MNR", (), "style"), builtin_rules)
        assert with_role.role == "instrument"
        assert without.role == "manner"

    def test_first_match_wins(self, builtin_rules):
        # Satisfies rules 3 (ARG1+PPT) and would satisfy 22 under VSP; 3 cited.
        result = map_argument(arg(1, "PPT", ("asset",), "amount"), builtin_rules)
        assert result.rule_index == 3

    def test_word_boundary_matching(self, builtin_rules):
        # 'send' must not satisfy the LOC description row through 'end'.
        result = map_argument(arg(2, "LOC", (), "place to send goods"), builtin_rules)
        assert result.role == "location"
        assert result.rule_index == 16

    def test_multiword_phrase_is_contiguous(self, builtin_rules):
        split = map_argument(arg(2, "GOL", (), "end of the point"), builtin_rules)
        assert split.role is None
        together = map_argument(arg(2, "GOL", (), "the end point"), builtin_rules)
        assert together.rule_index == 8

    def test_case_insensitive(self, builtin_rules):
        result = map_argument(arg(2, "GOL", (), "To Whom it is given"), builtin_rules)
        assert result.role == "benefactive"

    def test_deterministic(self, builtin_rules):
        fixture = arg(2, "GOL", ("recipient",), "hearer")
        results = {map_argument(fixture, builtin_rules) for _ in range(5)}
        assert len(results) == 1


class TestMapCatalog:
    def test_empty(self, builtin_rules):
        table, report = map_catalog(parse_catalog_lines([]), builtin_rules)
        assert table == {}
        assert report.total == 0

    def test_hand_evaluated_fixture(self, builtin_rules):
        lines = [
            "walk\t01\t0\tPAG\tagent\twalker",
            "walk\t01\t1\tPPT\t\tpath walked",
            "nod\t02\t1\tREC\t\tnodded to each other",
            "linger\t01\t1\tTMP\t\ttime of the event",
            "glow\t02\t2\tEXT\t\tintensity",
        ]
        table, report = map_catalog(parse_catalog_lines(lines), builtin_rules,
                                    NEGATIVE_OVERRIDES)
        assert report.total == 5
        assert report.rule_mapped == 2
        assert report.override_mapped == 1
        assert report.unmapped == 2
        assert set(report.unmapped_keys) == {("nod", "02", 1), ("glow", "02", 2)}
        assert table[("linger", "01", 1)].provenance == "override"

    def test_roles_stay_in_closed_union(self, fixture_catalog, builtin_rules):
        table, _ = map_catalog(fixture_catalog, builtin_rules, REIFIED_OVERRIDES)
        allowed = RULE_TARGETS | set(REIFIED_OVERRIDES.by_key.values())
        for result in table.values():
            if result.role is not None:
                assert result.role in allowed

    def test_coverage_lines_machine_readable(self, builtin_rules):
        table, _ = map_catalog(
            parse_catalog_lines(["walk\t01\t0\tPAG\tagent\twalker"]), builtin_rules)
        assert coverage_lines(table) == ["walk\t01\t0\trule:1\tactor"]


class TestNoncoreRelabel:
    @pytest.mark.parametrize("given,expected", [
        (":source", ":start"),
        (":destination", ":end"),
        (":beneficiary", ":benefactive"),
        (":medium", ":manner"),
        (":beneficiary-of", ":benefactive-of"),
        (":time", ":time"),
        (":ARG0", ":ARG0"),
    ])
    def test_mapping(self, given, expected):
        assert noncore_relabel(given) == expected

    def test_idempotent_and_injective(self):
        domain = [":source", ":destination", ":beneficiary", ":medium"]
        images = [noncore_relabel(r) for r in domain]
        assert len(set(images)) == len(domain)
        for label in images:
            assert noncore_relabel(label) == label
