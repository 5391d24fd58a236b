from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from horm.errors import TaxonomyError, UnknownItemError
from horm.taxonomy import (
    ClassificationTree,
    ancestors,
    balanced_tree,
    dit,
    is_descendant,
    metrics_report,
    noc,
    parse_code,
    parse_taxonomy,
    serialize_taxonomy,
)


def test_parse_small_tree():
    tree = parse_taxonomy("0\tA\n1\tB\n0.0\tA0\n0.1\tA1\n")
    assert len(tree) == 4
    assert tree.depth == 2
    assert tree.top_level == ((0,), (1,))


def test_index_beyond_fanout_bound():
    with pytest.raises(TaxonomyError, match="index exceeds fanout") as err:
        parse_taxonomy("0\tA\n0.5\tA5\n", fanout_bound=4)
    assert err.value.lineno == 2


@pytest.mark.parametrize(
    "text, message, line",
    [
        ("0\tA\n0\tB\n", "duplicate path", 2),
        ("0\tA\n1.0\tX\n", "missing parent", 2),
        ("0\tA\nnot a line\n", "malformed", 2),
        ("0\tA\n0.x\tB\n", "malformed path", 2),
        ("0\tA\n0.0\tK\n0.1\tK\n", "duplicate sibling label", 3),
    ],
)
def test_parse_errors_carry_line_numbers(text, message, line):
    with pytest.raises(TaxonomyError, match=message) as err:
        parse_taxonomy(text)
    assert err.value.lineno == line


def test_fanout_directive_is_honoured():
    tree = parse_taxonomy("# fanout_bound: 3\n0\tA\n0.2\tC\n")
    assert tree.fanout_bound == 3
    with pytest.raises(TaxonomyError):
        parse_taxonomy("# fanout_bound: 3\n0\tA\n0.3\tD\n")


def test_clothing_fixture_shape(clothing):
    assert len(clothing) == 7
    assert clothing.depth == 3
    assert len(clothing.top_level) == 2


def test_ancestors():
    tree = balanced_tree(3, 3)
    assert ancestors(tree, (0, 1, 2)) == [(0, 1), (0,)]
    assert ancestors(tree, (0,)) == []


def test_ancestors_in_clothing(clothing):
    boots = clothing.resolve("Hiking Boots")
    assert ancestors(clothing, boots) == [clothing.resolve("Footwear")]


def test_is_descendant():
    tree = balanced_tree(3, 3)
    assert is_descendant(tree, (0, 1, 2), (0, 1))
    assert not is_descendant(tree, (0, 1), (0, 1))
    assert not is_descendant(tree, (1, 0), (0,))


def test_dit_and_noc(clothing):
    tree = balanced_tree(3, 3)
    assert dit(tree, (0,)) == 0
    assert dit(tree, (0, 1, 2)) == 2
    four_levels = balanced_tree(2, 4)
    assert {dit(four_levels, leaf) for leaf in four_levels.leaves()} == {3}
    assert noc(tree, (0, 1, 2)) == 0
    a = parse_taxonomy("0\tA\n" + "".join(f"0.{i}\tA{i}\n" for i in range(4)))
    assert noc(a, (0,)) == 4
    assert noc(clothing, clothing.resolve("Footwear")) == 2


def test_unknown_code_raises():
    tree = balanced_tree(2, 2)
    for fn in (ancestors, dit, noc):
        with pytest.raises(UnknownItemError):
            fn(tree, (5,))
    with pytest.raises(UnknownItemError):
        is_descendant(tree, (0,), (9, 9))


def test_metrics_single_root_three_leaves():
    tree = parse_taxonomy("0\tR\n0.0\ta\n0.1\tb\n0.2\tc\n")
    report = metrics_report(tree)
    assert report.max_dit == 1
    assert report.max_noc == 3
    assert report.mean_dit == Fraction(3, 4)
    assert report.flagged == ()


def test_metrics_empty_tree():
    report = metrics_report(parse_taxonomy(""))
    assert (report.max_dit, report.max_noc, report.mean_dit) == (0, 0, 0)
    assert report.flagged == ()


def test_metrics_flags_deep_nodes(clothing):
    report = metrics_report(clothing, dit_warn_threshold=1)
    assert set(report.flagged) == {c for c in clothing if len(c) >= 2}


def test_balanced_binary_noc_identity():
    tree = balanced_tree(2, 3)
    report = metrics_report(tree)
    assert sum(report.noc.values()) == len(tree) - len(tree.top_level)


def test_resolve_prefers_paths_then_labels(clothing, flat_items):
    assert clothing.resolve("1.1") == (1, 1)
    assert clothing.resolve("HikingBoots") == (1, 1)
    assert flat_items.resolve("3") == (3,)
    with pytest.raises(UnknownItemError):
        clothing.resolve("Socks")


def test_parse_code_rejects_garbage():
    with pytest.raises(ValueError):
        parse_code("1..2")


@st.composite
def random_trees(draw):
    labels = {}
    frontier = [()]
    count = draw(st.integers(0, 40))
    for k in range(count):
        parent = draw(st.sampled_from(frontier))
        used = {c[-1] for c in labels if c[:-1] == parent}
        free = [i for i in range(6) if i not in used]
        if not free:
            continue
        code = parent + (draw(st.sampled_from(free)),)
        labels[code] = f"n{k}"
        frontier.append(code)
    return ClassificationTree(labels, 6)


@settings(max_examples=150, deadline=None)
@given(random_trees())
def test_tree_invariants(tree):
    report = metrics_report(tree)
    for code in tree:
        assert len(ancestors(tree, code)) == dit(tree, code)
        if len(code) > 1:
            assert dit(tree, code) == dit(tree, code[:-1]) + 1
        for other in tree:
            if is_descendant(tree, code, other):
                assert dit(tree, code) > dit(tree, other)
        assert report.noc[code] >= 0
        if tree.is_leaf(code):
            assert report.noc[code] == 0
    assert sum(report.noc.values()) == len(tree) - len(tree.top_level)
    again = parse_taxonomy(serialize_taxonomy(tree))
    assert again == tree
    assert serialize_taxonomy(again) == serialize_taxonomy(tree)
