"""Declarative metamorphic testing for driving models.

Thin wrapper over the compiled core: rules written in controlled natural
language are parsed into metamorphic relations, follow-up driving scenes are
generated from semantic label maps, and model predictions are checked against
the relation.
"""

import json

from rmt._core import (  # noqa: F401
    LabelMap,
    Mask,
    RmtError,
    apply_add,
    apply_remove,
    apply_replace,
    dump_dependencies,
    evaluate_rule,
    extract_mask,
    match_element,
    place_mask_add,
    wup_similarity,
)
from rmt import _core


def parse_rule(rule_text, config_yaml=""):
    """Parse a testing rule; returns the metamorphic relation as a dict."""
    return json.loads(_core.parse_rule_json(rule_text, config_yaml))


def run_campaign(config_path, rule_text, dataset_dir, out_dir):
    """Generate, predict, and evaluate; returns the violation report as a dict."""
    return json.loads(_core.run_campaign(config_path, rule_text, dataset_dir, out_dir))


__all__ = [
    "LabelMap",
    "Mask",
    "RmtError",
    "apply_add",
    "apply_remove",
    "apply_replace",
    "dump_dependencies",
    "evaluate_rule",
    "extract_mask",
    "match_element",
    "parse_rule",
    "place_mask_add",
    "run_campaign",
    "wup_similarity",
]
