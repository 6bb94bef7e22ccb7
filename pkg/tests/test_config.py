import pytest

from nanofiber_orbit.config import Config
from nanofiber_orbit.errors import ConfigError


def test_round_trip():
    c = Config().with_overrides(fiber__trap_power_W=0.015, packet__delta_m=4.5, output__format="json")
    again = Config.from_text(c.to_text())
    assert again == c
    assert again.hash() == c.hash()


def test_comments_and_blanks(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# trap\n\nfiber.trap_power_W = 0.025  # W\npacket.m0 = 470\n")
    c = Config.from_file(p)
    assert c.fiber.trap_power_W == 0.025 and c.packet.m0 == 470
    assert c.fiber.radius_m == Config().fiber.radius_m


@pytest.mark.parametrize("text, key", [
    ("fiber.colour = red", "fiber.colour"),
    ("laser.power = 1", "laser.power"),
    ("packet.m0 = 4.5", "packet.m0"),
    ("fiber.radius_m = wide", "fiber.radius_m"),
    ("fiber.radius_m = -1e-7", "fiber.radius_m"),
    ("packet.m0 = 900", "packet.m0"),
    ("numerics.n_points = 100", "numerics.n_points"),
    ("output.format = xml", "output.format"),
    ("numerics.peak_threshold = 1.5", "numerics.peak_threshold"),
])
def test_rejects_bad_input(text, key):
    with pytest.raises(ConfigError) as info:
        Config.from_text(text)
    assert info.value.key == key
    assert key in str(info.value)


def test_malformed_line_and_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        Config.from_text("fiber.radius_m 2e-7")
    with pytest.raises(ConfigError):
        Config.from_file(tmp_path / "absent.cfg")


def test_dispersion_key_tracks_physics_only():
    base = Config()
    assert base.with_overrides(packet__delta_m=3.0).dispersion_key() == base.dispersion_key()
    assert base.with_overrides(output__format="json").dispersion_key() == base.dispersion_key()
    assert base.with_overrides(numerics__probe_dt_s=2e-8).dispersion_key() == base.dispersion_key()
    for k, v in [("fiber__trap_power_W", 0.03), ("atom__c3_J_m3", 1e-49), ("numerics__n_points", 8000),
                 ("numerics__m_scan_max", 620)]:
        assert base.with_overrides(**{k: v}).dispersion_key() != base.dispersion_key()


def test_physics_specs():
    c = Config()
    assert c.fiber_spec().radius == c.fiber.radius_m
    a = c.atom_spec()
    assert a.mass == c.atom.mass_kg and a.vdw_C3 == c.atom.c3_J_m3
