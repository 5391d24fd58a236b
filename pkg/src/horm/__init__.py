"""Single-pass hierarchical association rule mining over transaction streams."""

from .constraints import (
    ConstraintExpr,
    Literal,
    SupportTable,
    complete_subset_supports,
    mine_constrained,
    parse_constraint,
    satisfies,
    selected_items,
)
from .rulegen import AssociationRule, prune_redundant, rules_for_state, rules_from_class, rules_from_table
from .snapshot import restore, snapshot
from .stream import (
    StreamState,
    Transaction,
    frequent_subsets,
    new_state,
    process_horm,
    process_mhorm,
    project,
    support,
)
from .taxonomy import (
    ClassificationTree,
    ancestors,
    dit,
    format_code,
    is_descendant,
    metrics_report,
    noc,
    parse_code,
    parse_taxonomy,
    serialize_taxonomy,
)
from .temporal import Event, TemporalRule, eval_pattern, load_events, mine_temporal

__version__ = "0.1.0"
