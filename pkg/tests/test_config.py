import math

import pytest

from tunnel2d.config import parse_config
from tunnel2d.errors import ConfigError


def test_empty_document_yields_reference_scenario():
    c = parse_config("")
    assert c.mu1 == 1.4 and c.mu2 == 0.3
    assert math.isinf(c.beta1) and math.isinf(c.beta2)
    assert c.contacts == (((0, 0), (0, 0), 1.0), ((1, 0), (20, 0), 1.0))
    assert c.window is None
    w = c.resolved_window()
    assert (w.x1_min, w.x1_max, w.x2_min, w.x2_max) == (-9, 30, -19, 20)


def test_comments_and_blank_lines_ignored():
    c = parse_config("# comment\n\nmu1 = 0.9  # trailing\n")
    assert c.mu1 == 0.9
    assert c.overrides == {"mu1"}


def test_shorthand_keys():
    c = parse_config("t1 = 0.5\nd1 = 20\n")
    assert c.contacts == (((0, 0), (0, 0), 0.5), ((20, 0), (20, 0), 1.0))


def test_explicit_contacts():
    c = parse_config("contacts = 0,0:0,0:1.0; 2,0:20,0:0.25\n")
    assert c.contacts == (((0, 0), (0, 0), 1.0), ((2, 0), (20, 0), 0.25))


def test_contacts_conflict_with_shorthand():
    with pytest.raises(ConfigError, match="shorthand"):
        parse_config("contacts = 0,0:0,0:1.0\nt1 = 0.5\n")


def test_non_integer_contact_coordinates_rejected():
    with pytest.raises(ConfigError, match="contacts"):
        parse_config("contacts = 0.5,0:0,0:1.0\n")


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="mu3"):
        parse_config("mu3 = 1.0\n")


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config("mu1 = 1.0\nmu1 = 1.2\n")


def test_out_of_band_mu_rejected():
    with pytest.raises(ConfigError, match="mu1"):
        parse_config("mu1 = 4.5\n")


def test_window_parsing_and_validation():
    c = parse_config("window = -2,2,-3,3\n")
    w = c.resolved_window()
    assert (w.x1_min, w.x1_max, w.x2_min, w.x2_max) == (-2, 2, -3, 3)
    with pytest.raises(ConfigError, match="window"):
        parse_config("window = 2,-2,0,0\n")


def test_beta_must_be_positive():
    with pytest.raises(ConfigError, match="beta1"):
        parse_config("beta1 = -3\n")
    c = parse_config("beta1 = inf\nbeta2 = 50\n")
    assert math.isinf(c.beta1) and c.beta2 == 50.0


def test_equal_potentials_are_valid():
    c = parse_config("mu1 = 0.3\nmu2 = 0.3\n")
    assert c.mu1 == c.mu2 == 0.3


def test_outputs_list():
    c = parse_config("outputs = density:total, current:transmitted\n")
    assert c.outputs == ("density:total", "current:transmitted")
