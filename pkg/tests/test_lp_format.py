import pytest

from bhca.lp_format import export_lp, model_canonical_rows, parse_lp, round_trip_matches
from bhca.baseline import build_bh_model
from bhca.linkbudget import compute_rate_table
from bhca.scenario import adjacency_pairs, generate_scenario

from conftest import make_bundle, tiny_config


def test_export_is_byte_stable(tiny_bundle):
    _, _, _, model = tiny_bundle
    assert export_lp(model) == export_lp(model)


def test_export_sections_in_order(tiny_bundle):
    _, _, _, model = tiny_bundle
    text = export_lp(model)
    positions = [text.index(s) for s in ("Maximize", "Subject To", "Bounds", "Binaries", "End")]
    assert positions == sorted(positions)


def test_variable_naming_convention(tiny_bundle):
    _, _, _, model = tiny_bundle
    text = export_lp(model)
    for name in ("a_1_1_1", "beta_2_2_2", "q_1_2_1_2", "z_2_2", "tU_1", "tL", "theta"):
        assert name in text


def test_round_trip_on_five_fixture_models(modcod):
    for seed in range(1, 6):
        _, _, _, model = make_bundle(tiny_config(seed), modcod)
        parsed = parse_lp(export_lp(model))
        assert round_trip_matches(model, parsed), f"seed {seed}"
        assert parsed.constraint_order == tuple(r.tag for r in model.constraints)


def test_single_binary_model_binaries_section(modcod):
    # Baseline model on a single-slot scenario keeps exactly L binaries; cut
    # to one cluster pattern and check the single-binary rendering.
    scenario = generate_scenario(tiny_config(3, slots_per_window=1))
    rates = compute_rate_table(scenario, modcod)
    model = build_bh_model(scenario, rates, adjacency_pairs(scenario))
    text = export_lp(model)
    parsed = parse_lp(text)
    assert parsed.binaries == ("z_1_1", "z_2_1")
    assert "Binaries" in text


def test_parsed_numbers_round_trip_exactly(tiny_bundle):
    _, _, _, model = tiny_bundle
    parsed = parse_lp(export_lp(model))
    rows = model_canonical_rows(model)
    for name, (terms, sense, rhs) in parsed.canonical_rows().items():
        want_terms, want_sense, want_rhs = rows[name]
        assert terms == want_terms
        assert sense == want_sense
        assert rhs == want_rhs


def test_parser_handles_folded_lines():
    text = (
        "Maximize\n"
        " obj: + 1 x\n"
        "Subject To\n"
        " wide: + 1 x + 2 y\n"
        "  + 3 z <= 4\n"
        "Bounds\n"
        " 0 <= y <= 2\n"
        " x >= 1\n"
        "Binaries\n"
        " z\n"
        "End\n"
    )
    parsed = parse_lp(text)
    assert parsed.constraints["wide"] == ((("x", 1.0), ("y", 2.0), ("z", 3.0)), "<=", 4.0)
    assert parsed.bounds["y"] == (0.0, 2.0)
    assert parsed.bounds["x"] == (1.0, float("inf"))
    assert parsed.binaries == ("z",)


def test_parser_rejects_malformed_rows():
    with pytest.raises(ValueError):
        parse_lp("Maximize\n obj: x\nSubject To\n r1: + 1 x 4\nEnd\n")
    with pytest.raises(ValueError):
        parse_lp("Maximize\n obj: + 2 + 3 x\nSubject To\nEnd\n")


def test_export_mentions_constraint_tags(tiny_bundle):
    _, _, _, model = tiny_bundle
    text = export_lp(model)
    for tag in ("C1_l1_u1", "C4_l2_u2", "C7b_l1_c1_u1", "C8b", "C9d_l2_c2_u2_t2"):
        assert f" {tag}:" in text
