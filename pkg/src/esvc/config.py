"""INI run configuration: schema, validation and typed access.

Every key is declared below with its type and default; anything else is an
error naming ``section.key``.  Units: meters, radians, seconds.
"""

from __future__ import annotations

import configparser
import hashlib
from dataclasses import dataclass
from pathlib import Path

from .design import REFERENCE_AXES, DesignSpec
from .ellipse import make_arc


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def _pos(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _choice(*options):
    def check(x):
        return x in options
    check.options = options
    return check


# section -> key -> (type, default, check or None); default None means required
SCHEMA = {
    "design": {
        "mid": (str, "", None),
        "mid_r_a": (float, 0.0, _nonneg),
        "mid_r_b": (float, 0.0, _nonneg),
        "h_foot": (float, 0.06, _pos),
        "theta_m_star": (float, 0.15, _pos),
        "w_foot_nominal": (float, 0.12, _pos),
        "w1": (float, 10.0, _pos),
        "w2": (float, 1.0, _nonneg),
        "w3": (float, 1.0, _nonneg),
        "w4": (float, 100.0, _nonneg),
        "d_f_max": (float, 0.5, _pos),
        "w_foot_max": (float, 0.2, _pos),
        "l_foot": (float, 0.2, _pos),
        "K_e": (float, 1.0, _pos),
        "grid_n": (int, 1024, lambda n: n >= 256),
        "profile_n": (int, 256, lambda n: n >= 16),
        "starts": (int, 5, lambda n: n >= 1),
    },
    "sweep": {
        "arcs": (str, "EA1, EA2, EA3", None),
        "n": (int, 1024, lambda n: n >= 128),
        "K_e": (float, 1.0, _pos),
        "grid_n": (int, 1024, lambda n: n >= 256),
    },
    "walk": {
        "foot": (str, "esvc", _choice("esvc", "line", "circle")),
        "line_h_foot": (float, 0.06, _pos),
        "circle_r": (float, 0.06, _pos),
        "v_des": (float, 0.0, None),
        "horizon": (float, 30.0, _pos),
        "n_steps": (int, 0, _nonneg),
        "z0": (float, 0.70, _pos),
        "T_ssp": (float, 0.38, _pos),
        "g": (float, 9.81, _pos),
        "u_max": (float, 0.25, _pos),
        "v_max": (float, 0.5, _pos),
        "K_swa": (float, 0.3, lambda k: 0.0 <= k <= 1.0),
        "z_clear": (float, 0.03, _pos),
        "samples_per_step": (int, 20, lambda n: n >= 2),
        "p0": (float, float("nan"), None),
        "v0": (float, float("nan"), None),
        "noise_p": (float, 0.0, _nonneg),
        "noise_v": (float, 0.0, _nonneg),
        "noise_swing": (float, 0.0, _nonneg),
        "seed": (int, 0, _nonneg),
    },
    "profile": {
        "n": (int, 256, lambda n: n >= 16),
        "dump_n": (int, 181, lambda n: n >= 2),
    },
}

REQUIRED_SECTIONS = {
    "design": ("design",),
    "sweep": ("sweep",),
    "walk": ("walk",),
    "profile": ("design",),
}


@dataclass
class RunConfig:
    path: Path
    sections: dict
    digest: str

    def __getitem__(self, section: str) -> dict:
        return self.sections[section]

    def has(self, section: str) -> bool:
        return section in self.sections


def _parse_value(section: str, key: str, raw: str):
    typ, _, check = SCHEMA[section][key]
    try:
        val = typ(raw.strip())
    except ValueError:
        raise ConfigError(f"{section}.{key}", f"expected {typ.__name__}, got {raw!r}") from None
    if check is not None and not check(val):
        opts = getattr(check, "options", None)
        msg = f"must be one of {opts}" if opts else "value out of range"
        raise ConfigError(f"{section}.{key}", f"{msg} (got {raw!r})")
    return val


def load(path, command: str | None = None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_bytes()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc.strerror}") from None
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text.decode("utf-8"), source=str(path))
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ConfigError("<file>", f"malformed config: {exc}") from None

    sections = {}
    for name in parser.sections():
        if name not in SCHEMA:
            raise ConfigError(name, "unknown section")
        vals = {k: d for k, (_, d, _) in SCHEMA[name].items()}
        for key, raw in parser.items(name):
            if key not in SCHEMA[name]:
                raise ConfigError(f"{name}.{key}", "unknown key")
            vals[key] = _parse_value(name, key, raw)
        sections[name] = vals
    if command is not None:
        for need in REQUIRED_SECTIONS[command]:
            if need not in sections:
                raise ConfigError(need, f"section required by '{command}'")
    if "design" in sections:
        _check_design(sections["design"])
    if "sweep" in sections:
        sections["sweep"]["arcs"] = parse_arcs(sections["sweep"]["arcs"])
    return RunConfig(path, sections, hashlib.sha256(text).hexdigest()[:16])


def _check_design(d: dict) -> None:
    if d["mid"]:
        if d["mid"] not in REFERENCE_AXES:
            raise ConfigError("design.mid", f"unknown reference arc {d['mid']!r}")
        if d["mid_r_a"] or d["mid_r_b"]:
            raise ConfigError("design.mid", "give either mid or mid_r_a/mid_r_b, not both")
    elif not (d["mid_r_a"] > 0 and d["mid_r_b"] > 0):
        raise ConfigError("design.mid_r_a", "mid axes required (or a reference id in design.mid)")
    elif d["mid_r_b"] > d["mid_r_a"]:
        raise ConfigError("design.mid_r_b", "minor axis exceeds major axis")


def parse_arcs(raw: str) -> list[tuple[str, float, float]]:
    """``EA1, EA2, mine:0.05:0.03`` -> [(id, r_a, r_b), ...]."""
    out = []
    for item in (s.strip() for s in raw.split(",")):
        if not item:
            continue
        if item in REFERENCE_AXES:
            out.append((item, *REFERENCE_AXES[item]))
            continue
        parts = item.split(":")
        if len(parts) != 3:
            raise ConfigError("sweep.arcs", f"cannot parse arc {item!r}; use ID or name:r_a:r_b")
        try:
            r_a, r_b = float(parts[1]), float(parts[2])
        except ValueError:
            raise ConfigError("sweep.arcs", f"non-numeric axes in {item!r}") from None
        if not (r_a >= r_b > 0):
            raise ConfigError("sweep.arcs", f"axes of {item!r} must satisfy r_a >= r_b > 0")
        out.append((parts[0], r_a, r_b))
    if not out:
        raise ConfigError("sweep.arcs", "at least one arc required")
    return out


def design_spec(d: dict) -> DesignSpec:
    r_a, r_b = REFERENCE_AXES[d["mid"]] if d["mid"] else (d["mid_r_a"], d["mid_r_b"])
    try:
        return DesignSpec(
            make_arc(r_a, r_b), d["h_foot"], d["theta_m_star"], d["w_foot_nominal"],
            d["w1"], d["w2"], d["w3"], d["w4"], d["d_f_max"], d["w_foot_max"], d["K_e"], d["grid_n"],
        )
    except ValueError as exc:
        raise ConfigError("design", str(exc)) from None
