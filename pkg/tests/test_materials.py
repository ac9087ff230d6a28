"""Material table: power laws, band warnings, type assignment."""

import logging

import pytest

from cityrt.errors import NotFoundError, SchemaError
from cityrt.scene import Material, assign_material, load_materials

F_C = 12.7e9


@pytest.fixture(scope="module")
def table():
    return load_materials()


def test_packaged_table_names(table):
    assert {"itu_concrete", "itu_brick", "itu_medium_dry_ground"} <= set(table)


def test_concrete_at_carrier(table):
    m = table["itu_concrete"]
    assert m.eps_r(F_C) == 5.31
    assert m.sigma(F_C) == pytest.approx(0.2551212958548211, rel=1e-12)
    eta = m.eta(F_C)
    assert eta.real == pytest.approx(5.31)
    assert eta.imag == pytest.approx(-0.3610891117801559, rel=1e-9)


def test_brick_is_frequency_flat(table):
    m = table["itu_brick"]
    assert m.eps_r(1e9) == m.eps_r(10e9) == 3.75
    assert m.sigma(5e9) == 0.038


def test_ground_power_laws(table):
    m = table["itu_medium_dry_ground"]
    assert m.eps_r(3e9) == pytest.approx(13.439376897611432, rel=1e-12)
    assert m.sigma(3e9) == pytest.approx(0.20978560738629892, rel=1e-12)


def test_all_materials_physical_at_carrier(table):
    # carrier sits above two validity bands; values must stay physical anyway
    for m in table.values():
        assert m.eps_r(F_C) >= 1.0
        assert m.sigma(F_C) > 0.0
        assert m.eta(F_C).imag < 0.0


def test_band_warning_out_of_band(table, caplog):
    brick = Material("brick_w", 3.75, 0.0, 0.038, 0.0, 1e9, 10e9)
    with caplog.at_level(logging.WARNING, logger="cityrt.scene.materials"):
        brick.eta(F_C)
        brick.eta(F_C)  # second call must not log again
    hits = [r for r in caplog.records if "outside fitted band" in r.message]
    assert len(hits) == 1
    caplog.clear()
    with caplog.at_level(logging.WARNING, logger="cityrt.scene.materials"):
        table["itu_concrete"].eta(F_C)  # in band up to 100 GHz
    assert not [r for r in caplog.records if "outside fitted band" in r.message]


def test_assignment(table):
    assert assign_material("Building", table).name == "itu_concrete"
    assert assign_material("Wall", table).name == "itu_brick"
    assert assign_material("Ground", table).name == "itu_medium_dry_ground"
    assert assign_material("building", table).name == "itu_concrete"


def test_assignment_unknown_type_warns(table, caplog):
    with caplog.at_level(logging.WARNING, logger="cityrt.scene.materials"):
        m = assign_material("Gazebo", table)
    assert m.name == "itu_concrete"
    assert any("Gazebo" in r.message for r in caplog.records)


def test_assignment_custom_mapping(table):
    m = assign_material("Wall", table, {"wall": "itu_concrete"})
    assert m.name == "itu_concrete"


def test_assignment_mapping_to_missing_material(table):
    with pytest.raises(NotFoundError, match="itu_gold"):
        assign_material("Wall", table, {"wall": "itu_gold"})


def test_custom_table_file(tmp_path):
    p = tmp_path / "mats.yaml"
    p.write_text(
        "version: 3\n"
        "materials:\n"
        "  metal: {a: 1.0, b: 0.0, c: 1.0e7, d: 0.0, f_min_ghz: 1, f_max_ghz: 100}\n"
    )
    table = load_materials(p)
    assert table["metal"].sigma(F_C) == 1e7


def test_table_schema_errors(tmp_path):
    missing_version = tmp_path / "nover.yaml"
    missing_version.write_text("materials: {m: {a: 1, b: 0, c: 1, d: 0, f_min_ghz: 1, f_max_ghz: 2}}\n")
    with pytest.raises(SchemaError, match="version"):
        load_materials(missing_version)
    missing_key = tmp_path / "nokey.yaml"
    missing_key.write_text("version: 1\nmaterials: {m: {a: 1, b: 0, c: 1, d: 0}}\n")
    with pytest.raises(SchemaError, match="f_min_ghz"):
        load_materials(missing_key)
    with pytest.raises(NotFoundError):
        load_materials(tmp_path / "absent.yaml")
