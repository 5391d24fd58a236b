import pytest

from horm.stream import Transaction, new_state, process_horm
from horm.taxonomy import parse_taxonomy

CLOTHING = """\
# clothing taxonomy used throughout the tests
0\tClothes
0.0\tOuterwear
0.0.0\tJackets
0.0.1\tSki Pants
1\tFootwear
1.0\tShoes
1.1\tHiking Boots
"""


def two_class_taxonomy_text():
    """Classes A and B, sub-classes A1..A4 / B1..B4, then P/Q, then items 6/7."""
    lines = []
    for ci, c in enumerate("AB"):
        lines.append(f"{ci}\t{c}")
        for si in range(4):
            lines.append(f"{ci}.{si}\t{c}{si + 1}")
            for gi, g in enumerate("PQ"):
                lines.append(f"{ci}.{si}.{gi}\t{c}{si + 1}{g}")
                for li, leaf in enumerate("67"):
                    lines.append(f"{ci}.{si}.{gi}.{li}\t{c}{si + 1}{g}{leaf}")
    return "\n".join(lines) + "\n"


FLAT_ITEMS = "".join(f"{i}\t{i}\n" for i in range(1, 6))

CLASS_A = "0\tA\n0.0\tA1\n0.1\tA2\n0.2\tA3\n0.3\tA4\n"


@pytest.fixture
def clothing():
    return parse_taxonomy(CLOTHING)


@pytest.fixture
def ab_tree():
    return parse_taxonomy(two_class_taxonomy_text())


@pytest.fixture
def flat_items():
    return parse_taxonomy(FLAT_ITEMS)


@pytest.fixture
def class_a():
    return parse_taxonomy(CLASS_A)


FOUR_TXNS = [
    [(0, 0), (0, 1)],
    [(0, 0)],
    [(0, 0), (0, 1), (0, 2)],
    [],
]


@pytest.fixture
def four_state(class_a):
    """Class A after {A1,A2}, {A1}, {A1,A2,A3}, {}."""
    state = new_state(class_a, [(0,)])
    for seq, items in enumerate(FOUR_TXNS):
        process_horm(state, Transaction.of(items, seq))
    return state


FIVE_TXNS = [{1, 2, 3}, {1, 2}, {3, 4}, {1, 3}, {2, 3, 5}]


@pytest.fixture
def five_data():
    return [Transaction.of([(i,) for i in t], seq) for seq, t in enumerate(FIVE_TXNS)]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
