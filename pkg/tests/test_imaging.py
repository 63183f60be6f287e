"""Tests for ASCII image parsing, mask handling, and intensity extraction."""

from __future__ import annotations

import numpy as np
import pytest

from hexwalk.graphs import path_graph
from hexwalk.imaging import (
    DegenerateImageError,
    ImageParseError,
    MaskEntry,
    MaskError,
    MaskSpec,
    PixelImage,
    SpotWidthWarning,
    extract_probabilities,
    format_image,
    mask_csv,
    parse_image,
    parse_mask,
    render_synthetic,
)


def three_spot_mask(radius: float = 6.0) -> MaskSpec:
    return MaskSpec(
        [
            MaskEntry(0, 10.0, 10.0, radius),
            MaskEntry(1, 30.0, 10.0, radius),
            MaskEntry(2, 50.0, 10.0, radius),
        ]
    )


# ---------------------------------------------------------------------------
# image parsing and formatting
# ---------------------------------------------------------------------------


def test_parse_small_matrix():
    img = parse_image("1 2\n3 4")
    assert img.rows == 2
    assert img.cols == 2
    assert np.array_equal(img.intensities, [[1.0, 2.0], [3.0, 4.0]])
    assert img.total == 10.0


def test_parse_accepts_trailing_newlines_and_extra_spaces():
    img = parse_image("0   1.5\t2\n3 4 5\n\n")
    assert img.rows == 2
    assert img.cols == 3


def test_parse_rejects_ragged_rows_with_line_number():
    with pytest.raises(ImageParseError, match="line 2"):
        parse_image("1 2 3\n4 5")


def test_parse_rejects_non_numeric_token():
    with pytest.raises(ImageParseError, match="bright"):
        parse_image("1 2\n3 bright")


def test_parse_rejects_negative_and_non_finite_values():
    with pytest.raises(ImageParseError, match="line 1"):
        parse_image("-3 2\n1 1")
    with pytest.raises(ImageParseError):
        parse_image("1 inf\n1 1")
    with pytest.raises(ImageParseError):
        parse_image("nan 1\n1 1")


def test_parse_rejects_blank_interior_line_and_empty_text():
    with pytest.raises(ImageParseError, match="line 2"):
        parse_image("1 2\n\n3 4")
    with pytest.raises(ImageParseError):
        parse_image("")


def test_format_parse_round_trip():
    img = PixelImage(np.array([[0.0, 1.25], [3.5, 10.0]]))
    again = parse_image(format_image(img))
    assert np.array_equal(again.intensities, img.intensities)


def test_pixel_image_validation():
    with pytest.raises(ValueError):
        PixelImage(np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        PixelImage(np.array([[1.0, -2.0]]))


# ---------------------------------------------------------------------------
# masks
# ---------------------------------------------------------------------------


def test_mask_entries_are_sorted_by_node_id():
    mask = MaskSpec([MaskEntry(2, 50.0, 10.0, 5.0), MaskEntry(0, 10.0, 10.0, 5.0), MaskEntry(1, 30.0, 10.0, 5.0)])
    assert mask.node_ids == (0, 1, 2)
    assert len(mask) == 3


def test_mask_rejects_duplicates_and_bad_fields():
    with pytest.raises(MaskError):
        MaskSpec([MaskEntry(0, 10.0, 10.0, 5.0), MaskEntry(0, 30.0, 10.0, 5.0)])
    with pytest.raises(MaskError):
        MaskSpec([MaskEntry(-1, 10.0, 10.0, 5.0)])
    with pytest.raises(MaskError):
        MaskSpec([MaskEntry(0, 10.0, 10.0, 0.0)])
    with pytest.raises(MaskError):
        MaskSpec([MaskEntry(0, float("nan"), 10.0, 5.0)])


def test_mask_overlap_rejected_tangency_allowed():
    image = PixelImage(np.ones((21, 61)))
    touching = MaskSpec([MaskEntry(0, 10.0, 10.0, 5.0), MaskEntry(1, 20.0, 10.0, 5.0)])
    touching.validate_for(image)  # distance 10 equals r1+r2, allowed
    overlapping = MaskSpec([MaskEntry(0, 10.0, 10.0, 5.0), MaskEntry(1, 19.0, 10.0, 5.0)])
    with pytest.raises(MaskError, match="overlap"):
        overlapping.validate_for(image)


def test_mask_out_of_bounds_rejected():
    image = PixelImage(np.ones((21, 21)))
    sticking_out = MaskSpec([MaskEntry(0, 2.0, 10.0, 5.0)])
    with pytest.raises(MaskError, match="outside"):
        sticking_out.validate_for(image)


def test_mask_checked_against_graph_node_set():
    g = path_graph(3)
    good = three_spot_mask()
    good.validate_against(g)
    missing = MaskSpec([MaskEntry(0, 10.0, 10.0, 5.0), MaskEntry(2, 30.0, 10.0, 5.0)])
    with pytest.raises(MaskError):
        missing.validate_against(g)


def test_parse_mask_and_csv_round_trip():
    text = "node_id,cx,cy,radius\n0,10,10,6\n1,30,10.5,6\n2,50,10,6\n"
    mask = parse_mask(text)
    assert mask.node_ids == (0, 1, 2)
    assert mask.entries[1].cy == 10.5
    again = parse_mask(mask_csv(mask))
    assert again.entries == mask.entries


def test_parse_mask_errors_carry_line_numbers():
    with pytest.raises(MaskError, match="header"):
        parse_mask("id,x,y,r\n0,1,1,1\n")
    with pytest.raises(MaskError, match="line 2"):
        parse_mask("node_id,cx,cy,radius\n0,10,10\n")
    with pytest.raises(MaskError, match="line 3"):
        parse_mask("node_id,cx,cy,radius\n0,10,10,5\nx,30,10,5\n")


# ---------------------------------------------------------------------------
# extraction
# ---------------------------------------------------------------------------


def test_uniform_image_gives_equal_shares():
    image = PixelImage(np.ones((21, 61)))
    result = extract_probabilities(image, three_spot_mask())
    assert np.allclose(result.probabilities, 1.0 / 3.0)
    assert np.array_equal(result.node_ids, [0, 1, 2])


def test_all_intensity_at_exit_gives_unit_efficiency():
    pixels = np.zeros((21, 61))
    pixels[10, 50] = 7.0
    result = extract_probabilities(PixelImage(pixels), three_spot_mask())
    assert result.efficiency == 1.0
    assert np.array_equal(result.probabilities, [0.0, 0.0, 1.0])


def test_extraction_is_linear_in_the_image():
    mask = three_spot_mask()
    a = np.zeros((21, 61))
    a[10, 10] = 1.0
    b = np.zeros((21, 61))
    b[10, 30] = 1.0
    combined = extract_probabilities(PixelImage(3.0 * a + 1.0 * b), mask)
    assert np.allclose(combined.probabilities, [0.75, 0.25, 0.0])


def test_extraction_ignores_light_outside_every_circle():
    mask = three_spot_mask()
    pixels = np.zeros((21, 61))
    pixels[10, 10] = 2.0
    pixels[0, 0] = 50.0  # far corner, inside no circle
    result = extract_probabilities(PixelImage(pixels), mask)
    assert np.array_equal(result.probabilities, [1.0, 0.0, 0.0])


def test_mask_entry_order_does_not_matter():
    pixels = np.random.default_rng(0).random((21, 61))
    image = PixelImage(pixels)
    forward = extract_probabilities(image, three_spot_mask())
    shuffled = MaskSpec(list(reversed(three_spot_mask().entries)))
    backward = extract_probabilities(image, shuffled)
    assert np.array_equal(forward.probabilities, backward.probabilities)
    assert np.array_equal(forward.node_ids, backward.node_ids)


def test_exit_node_defaults_to_highest_id_and_can_be_overridden():
    image = PixelImage(np.ones((21, 61)))
    mask = three_spot_mask()
    default = extract_probabilities(image, mask)
    named = extract_probabilities(image, mask, exit_node=0)
    assert abs(default.efficiency - 1.0 / 3.0) < 1e-12
    assert abs(named.efficiency - 1.0 / 3.0) < 1e-12
    with pytest.raises(MaskError):
        extract_probabilities(image, mask, exit_node=9)


def test_dark_image_is_degenerate():
    image = PixelImage(np.zeros((21, 61)))
    with pytest.raises(DegenerateImageError):
        extract_probabilities(image, three_spot_mask())


# ---------------------------------------------------------------------------
# synthetic rendering and the round trip
# ---------------------------------------------------------------------------


def test_indicator_probability_renders_one_spot():
    mask = three_spot_mask()
    img = render_synthetic(np.array([0.0, 1.0, 0.0]), mask, (21, 61), sigma=2.0)
    assert img.intensities[10, 30] == img.intensities.max()
    assert img.intensities[10, 10] == 0.0
    assert img.intensities[10, 50] == 0.0


def test_uniform_probabilities_render_equal_mass():
    mask = three_spot_mask()
    img = render_synthetic(np.full(3, 1.0 / 3.0), mask, (21, 61), sigma=2.0)
    result = extract_probabilities(img, mask)
    assert np.allclose(result.probabilities, 1.0 / 3.0, atol=1e-12)


def test_rendering_is_deterministic():
    mask = three_spot_mask()
    p = np.array([0.2, 0.5, 0.3])
    one = format_image(render_synthetic(p, mask, (21, 61), sigma=2.0))
    two = format_image(render_synthetic(p, mask, (21, 61), sigma=2.0))
    assert one == two


def test_wide_spot_warns():
    mask = three_spot_mask(radius=6.0)
    with pytest.warns(SpotWidthWarning):
        render_synthetic(np.array([0.2, 0.5, 0.3]), mask, (21, 61), sigma=6.0)


def test_render_validation():
    mask = three_spot_mask()
    with pytest.raises(ValueError):
        render_synthetic(np.array([0.5, 0.5]), mask, (21, 61), sigma=2.0)
    with pytest.raises(ValueError):
        render_synthetic(np.array([0.2, -0.1, 0.9]), mask, (21, 61), sigma=2.0)
    with pytest.raises(ValueError):
        render_synthetic(np.full(3, 1.0 / 3.0), mask, (21, 61), sigma=0.0)


@pytest.mark.parametrize("radius", [6.0, 9.0])
def test_round_trip_recovers_probabilities(radius):
    spacing = 4.0 * radius
    entries = [MaskEntry(i, 20.0 + spacing * i, 20.0, radius) for i in range(4)]
    mask = MaskSpec(entries)
    shape = (41, int(40 + spacing * 3 + 1))
    p = np.array([0.05, 0.45, 0.30, 0.20])
    img = render_synthetic(p, mask, shape, sigma=radius / 3.0)
    result = extract_probabilities(img, mask)
    assert np.max(np.abs(result.probabilities - p)) < 1e-3


def test_large_synthetic_file_parses_with_matching_total():
    rng = np.random.default_rng(12)
    entries = []
    for i in range(16):
        row, col = divmod(i, 4)
        entries.append(MaskEntry(i, 64.0 + 128.0 * col, 64.0 + 128.0 * row, 8.0))
    mask = MaskSpec(entries)
    p = rng.random(16)
    p /= p.sum()
    img = render_synthetic(p, mask, (512, 512), sigma=8.0 / 3.0)
    parsed = parse_image(format_image(img))
    assert parsed.rows == 512
    assert parsed.cols == 512
    assert abs(parsed.total - img.total) < 1e-6 * img.total
