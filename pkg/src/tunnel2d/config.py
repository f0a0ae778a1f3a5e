"""Plain-text key-value scenario configuration.

The document format is one ``key = value`` pair per line; ``#`` starts a
comment; blank lines are ignored.  Every key is optional — an empty
document yields the reference scenario (mu1=1.4, mu2=0.3, zero
temperature, contact pairs ((0,0),(0,0),t1) and ((d1,0),(20,0),t2) with
d1=1 and t1=t2=1, a 40x40 observation window around the reservoir-2
contacts).

Recognized keys::

    mu1, mu2          chemical potentials in [0, 4]
    beta1, beta2      inverse temperatures, positive or "inf"
    t1, t2, d1, d2    pairwise junction shorthand (amplitudes, offsets)
    contacts          explicit pair list "x1,y1:x2,y2:amp; ..."
                      (overrides the t/d shorthand)
    window            "x1_min,x1_max,x2_min,x2_max" (inclusive)
    energy_nodes      Gauss nodes per energy panel (default 10)
    tol               quadrature tolerance (default 1e-7)
    bound_tol         bound-state residual tolerance (default 1e-10)
    outputs           comma-separated product names (default "summary")
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import lattice
from .errors import ConfigError
from .fields import Window
from .scattering import Junction

_FLOAT_KEYS = ("mu1", "mu2", "beta1", "beta2", "t1", "t2", "tol", "bound_tol")
_INT_KEYS = ("d1", "d2", "energy_nodes")
_ALL_KEYS = _FLOAT_KEYS + _INT_KEYS + ("contacts", "window", "outputs")

DEFAULTS = {
    "mu1": 1.4, "mu2": 0.3, "beta1": math.inf, "beta2": math.inf,
    "t1": 1.0, "t2": 1.0, "d1": 1, "d2": 20,
    "energy_nodes": 10, "tol": 1e-7, "bound_tol": 1e-10,
    "outputs": ("summary",),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario parameters with defaults filled in."""

    mu1: float = DEFAULTS["mu1"]
    mu2: float = DEFAULTS["mu2"]
    beta1: float = DEFAULTS["beta1"]
    beta2: float = DEFAULTS["beta2"]
    contacts: tuple = ()  # ((site1, site2, amplitude), ...)
    window: Window | None = None
    energy_nodes: int = DEFAULTS["energy_nodes"]
    tol: float = DEFAULTS["tol"]
    bound_tol: float = DEFAULTS["bound_tol"]
    outputs: tuple = DEFAULTS["outputs"]
    overrides: frozenset = field(default_factory=frozenset)

    def junction(self) -> Junction:
        return Junction.paired(self.contacts)

    def states(self):
        from .observables import ReservoirState
        return (ReservoirState(self.beta1, self.mu1),
                ReservoirState(self.beta2, self.mu2))

    def resolved_window(self) -> Window:
        if self.window is not None:
            return self.window
        return Window.around(tuple(p[1] for p in self.contacts))


def _parse_site(text, key):
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected 'x,y', got {text!r}", field=key)
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"non-numeric coordinate in {text!r}", field=key)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"non-integer coordinates in {text!r}", field=key)
    return int(vals[0]), int(vals[1])


def _parse_contacts(text):
    pairs = []
    for i, chunk in enumerate(s for s in text.split(";") if s.strip()):
        key = f"contacts[{i}]"
        parts = [p.strip() for p in chunk.split(":")]
        if len(parts) != 3:
            raise ConfigError(
                f"expected 'x1,y1:x2,y2:amp', got {chunk.strip()!r}", field=key)
        s1 = _parse_site(parts[0], key)
        s2 = _parse_site(parts[1], key)
        try:
            amp = float(parts[2])
        except ValueError:
            raise ConfigError(f"non-numeric amplitude {parts[2]!r}", field=key)
        pairs.append((s1, s2, amp))
    if not pairs:
        raise ConfigError("empty contact list", field="contacts")
    return tuple(pairs)


def _parse_window(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ConfigError("expected 'x1_min,x1_max,x2_min,x2_max'",
                          field="window")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"non-integer bound in {text!r}", field="window")
    if vals[0] > vals[1] or vals[2] > vals[3]:
        raise ConfigError("empty window", field="window")
    return Window(*vals)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a key-value scenario document."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: missing '=' in {body!r}")
        key, _, value = body.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError("unknown key", field=key)
        if key in raw:
            raise ConfigError("duplicate key", field=key)
        raw[key] = value

    values = dict(DEFAULTS)
    for key in _FLOAT_KEYS:
        if key in raw:
            try:
                values[key] = float(raw[key])
            except ValueError:
                raise ConfigError(f"not a number: {raw[key]!r}", field=key)
    for key in _INT_KEYS:
        if key in raw:
            try:
                values[key] = int(raw[key])
            except ValueError:
                raise ConfigError(f"not an integer: {raw[key]!r}", field=key)

    for key in ("mu1", "mu2"):
        if not lattice.BAND_MIN <= values[key] <= lattice.BAND_MAX:
            raise ConfigError(
                f"chemical potential {values[key]} outside the band "
                f"[{lattice.BAND_MIN}, {lattice.BAND_MAX}]", field=key)
    for key in ("beta1", "beta2"):
        if not values[key] > 0.0:
            raise ConfigError("inverse temperature must be positive",
                              field=key)
    if values["tol"] <= 0.0 or values["bound_tol"] <= 0.0:
        raise ConfigError("tolerances must be positive", field="tol")
    if values["energy_nodes"] < 2:
        raise ConfigError("need at least 2 nodes per panel",
                          field="energy_nodes")

    if "contacts" in raw:
        contacts = _parse_contacts(raw["contacts"])
        shorthand = [k for k in ("t1", "t2", "d1", "d2") if k in raw]
        if shorthand:
            raise ConfigError(
                "explicit contact list conflicts with shorthand keys "
                + ", ".join(shorthand), field="contacts")
    else:
        contacts = (((0, 0), (0, 0), values["t1"]),
                    ((values["d1"], 0), (values["d2"], 0), values["t2"]))

    window = _parse_window(raw["window"]) if "window" in raw else None
    outputs = DEFAULTS["outputs"]
    if "outputs" in raw:
        outputs = tuple(p.strip() for p in raw["outputs"].split(",")
                        if p.strip())
        if not outputs:
            raise ConfigError("empty output list", field="outputs")

    return ScenarioConfig(
        mu1=values["mu1"], mu2=values["mu2"],
        beta1=values["beta1"], beta2=values["beta2"],
        contacts=contacts, window=window,
        energy_nodes=values["energy_nodes"],
        tol=values["tol"], bound_tol=values["bound_tol"],
        outputs=outputs, overrides=frozenset(raw),
    )
