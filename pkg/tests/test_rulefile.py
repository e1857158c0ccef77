from pathlib import Path

import numpy as np
import pytest

from lattice_entropy.automata import LocalRule, and_rule
from lattice_entropy.errors import InvalidInputError, ParseError
from lattice_entropy.rulefile import format_rule_file, parse_rule_file

RULES = Path(__file__).resolve().parent.parent / "rules"


@pytest.mark.parametrize("name", ["xor2d", "cross", "ledrappier", "and1d"])
def test_shipped_rule_files_round_trip(name):
    rule = parse_rule_file((RULES / f"{name}.rule").read_text())
    again = parse_rule_file(format_rule_file(rule))
    assert again.same_function(rule)
    assert again.is_algebraic == rule.is_algebraic


def test_xor_file_contents():
    rule = parse_rule_file((RULES / "xor2d.rule").read_text())
    assert rule.dim == 2 and rule.q == 2
    assert rule.as_mapping() == {(1, 0): 1, (0, 1): 1}


def test_table_file_matches_and_rule():
    rule = parse_rule_file((RULES / "and1d.rule").read_text())
    assert rule.same_function(and_rule(1))


def test_large_alphabet_words_are_separated():
    rule = LocalRule.from_table(1, 11, [(0,)], (np.arange(11) + 1) % 11)
    text = format_rule_file(rule)
    assert "map 10 -> 0" in text
    assert parse_rule_file(text).same_function(rule)


def test_comments_and_blank_lines_are_ignored():
    text = "# header\n\ndim = 1\nalphabet = 3\ntype = algebraic\nprime = 3\n  # note\ncell (0) = 2\n"
    assert parse_rule_file(text).as_mapping() == {(0,): 2}


def _error(text):
    with pytest.raises(ParseError) as info:
        parse_rule_file(text)
    return info.value


def test_missing_key_is_reported():
    assert "alphabet" in str(_error("dim = 1\ntype = algebraic\nprime = 2\ncell (0) = 1\n"))


def test_bad_integer_has_a_line_number():
    err = _error("dim = x\nalphabet = 2\ntype = algebraic\nprime = 2\ncell (0) = 1\n")
    assert err.line == 1


def test_unknown_line_is_rejected():
    err = _error("dim = 1\nalphabet = 2\nfoo bar\n")
    assert err.line == 3


def test_incomplete_table_is_rejected():
    with pytest.raises((ParseError, InvalidInputError)):
        parse_rule_file("dim = 1\nalphabet = 2\ntype = table\ndomain = (0),(1)\nmap 00 -> 0\n")


def test_table_symbol_out_of_range():
    with pytest.raises((ParseError, InvalidInputError)):
        parse_rule_file("dim = 1\nalphabet = 2\ntype = table\ndomain = (0)\nmap 0 -> 1\nmap 2 -> 0\n")


def test_composite_prime_rejected():
    with pytest.raises((ParseError, InvalidInputError)):
        parse_rule_file("dim = 1\nalphabet = 4\ntype = algebraic\nprime = 4\ncell (0) = 1\n")


def test_origin_outside_convex_hull_is_fine():
    rule = parse_rule_file("dim = 1\nalphabet = 2\ntype = algebraic\nprime = 2\ncell (2) = 1\ncell (3) = 1\n")
    assert rule.hull.vertices == ((0,), (3,))
