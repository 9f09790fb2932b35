"""Smoke tests for the python bindings."""

import os
import subprocess
import sys

import pytest

import rmt

RULE1 = "If: a pedestrian appears on the roadside, Then: the ego-vehicle should slow down."
RULE5 = (
    "If: lane lines are removed from the road, "
    "Then: the steering angle of ego-vehicle should keep the same."
)


def test_parse_rule():
    mr = rmt.parse_rule(RULE1)
    assert len(mr["blocks"]) == 1
    block = mr["blocks"][0]
    assert block["proposition"]["kind"] == "add"
    assert block["proposition"]["target"]["element"] == "pedestrian"
    assert block["proposition"]["reference"]["element"] == "sidewalk"
    assert block["formula"]["conjuncts"] == [{"lhs": "x1-x2", "op": ">", "rhs": 0}]


def test_parse_error():
    with pytest.raises(rmt.RmtError, match="MalformedRule"):
        rmt.parse_rule("Then: slow down")


def test_dump_dependencies():
    lines = rmt.dump_dependencies(RULE1).strip().splitlines()
    assert '{"relation":"NSUBJ","dependent":"pedestrian","head":"appears"}' in lines


def test_wup_similarity():
    assert rmt.wup_similarity("pedestrian", "pedestrian") == 1.0
    assert abs(rmt.wup_similarity("person", "pedestrian") - 0.89) <= 0.02
    match = rmt.match_element("roadside")
    assert match["element"] == "sidewalk"
    assert rmt.match_element("happiness") is None


def test_label_map_placement():
    # 8x8 scene, bottom two rows: columns 0-4 road, 5-7 sidewalk
    grid = bytearray([2] * 64)
    for y in (0, 1):
        for x in range(8):
            grid[y * 8 + x] = 0 if x <= 4 else 1
    palette = {0: "road", 1: "sidewalk", 2: "sky", 3: "pedestrian"}
    scene = rmt.LabelMap(8, 8, bytes(grid), palette)

    blob = rmt.LabelMap(8, 8, bytes(grid), palette)
    blob_grid = bytearray(grid)
    for y in (2, 3):
        for x in (1, 2):
            blob_grid[y * 8 + x] = 3
    blob = rmt.LabelMap(8, 8, bytes(blob_grid), palette)

    mask = rmt.extract_mask(blob, "pedestrian")
    assert mask is not None
    assert (mask.width, mask.height) == (2, 2)

    pos = rmt.place_mask_add(scene, mask, "sidewalk")
    assert pos == (5, 1)

    added = rmt.apply_add(scene, mask, *pos)
    assert added.count("pedestrian") == mask.solid_pixels()

    removed = rmt.apply_remove(blob, "pedestrian")
    assert removed.count("pedestrian") == 0


def test_evaluate_rule():
    assert not rmt.evaluate_rule(RULE5, 3.0, 4.0)["violation"]
    verdict = rmt.evaluate_rule(RULE5, 3.0, 5.0)
    assert verdict["violation"]
    assert verdict["failed_conjunct"] == "|x1-x2|<=1.39"


def test_cli_available():
    cli = os.environ.get("RMT_CLI")
    if not cli:
        pytest.skip("RMT_CLI not set")
    result = subprocess.run(
        [cli, "parse", "--rule", RULE1], capture_output=True, text=True, check=True
    )
    assert '"kind":"add"' in result.stdout
