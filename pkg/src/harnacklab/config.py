"""Experiment configuration: flat INI-style key-value text with sections.

Unknown sections or keys are rejected so experiment files stay diff-clean.
Each subcommand declares which sections it needs; values are parsed with
typed getters that surface the section/key in error messages.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import disk_grid, rectangle_grid
from .nonlinearity import NonlinearityPair, ScalarFunction

ALLOWED_KEYS = {
    "pair": {"f_family", "f_c", "f_gamma", "f_odd", "f_knots", "f_file",
             "g_family", "g_c", "g_gamma", "g_odd", "g_knots", "g_file", "q"},
    "domain": {"kind", "x0", "y0", "x1", "y1", "center_x", "center_y", "radius"},
    "grid": {"n", "band", "rho_mult", "directions"},
    "solver": {"tol", "max_iter", "damping", "method"},
    "conditions": {"theta", "window_lo", "window_hi", "samples", "margin",
                   "c4_cap", "eps_list", "dif_grid_lo", "dif_grid_hi",
                   "dif_grid_points"},
    "profile": {"quadrature_tol", "t_lo", "t_hi", "nodes_per_decade", "cap"},
    "radial": {"a_list", "phi_cap", "r_max", "rtol", "max_step", "bracket_width"},
    "boundary": {"kind", "value", "values", "cone_x", "cone_y"},
    "balls": {"list", "slack_coeff", "residual_tol", "a0", "b0"},
    "chain": {"region", "center_x", "center_y", "r_inner", "r_outer",
              "ball_r", "k_const", "pairs", "eps", "ap2_r_lo", "ap2_points"},
    "globalbound": {"m_list", "slack_coeff", "tol", "profile_margin"},
    "compare": {"offsets", "tol"},
}

SECTIONS_BY_COMMAND = {
    "check-conditions": ("pair", "conditions"),
    "profile": ("pair", "profile"),
    "radial": ("pair", "radial", "profile"),
    "solve": ("pair", "domain", "grid", "solver", "boundary"),
    "compare": ("pair", "domain", "grid", "solver", "boundary", "compare"),
    "global-bound": ("pair", "domain", "grid", "solver", "boundary",
                     "globalbound", "profile"),
    "harnack": ("pair", "domain", "grid", "solver", "boundary", "balls"),
    "chain": ("pair", "domain", "grid", "solver", "boundary", "chain", "profile"),
}

# sections that must be present (the rest fall back to defaults)
REQUIRED_SECTIONS = {
    "check-conditions": ("pair",),
    "profile": ("pair",),
    "radial": ("pair", "radial"),
    "solve": ("pair", "domain", "boundary"),
    "compare": ("pair", "domain", "boundary", "compare"),
    "global-bound": ("pair", "domain", "boundary", "globalbound"),
    "harnack": ("pair", "domain", "boundary", "balls"),
    "chain": ("pair", "domain", "boundary", "chain"),
}


@dataclass
class ExperimentConfig:
    parser: configparser.ConfigParser
    path: str

    # -- typed getters ------------------------------------------------------
    def _raw(self, section, key, default=None, required=False):
        if not self.parser.has_section(section):
            if required:
                raise ConfigError(f"missing section [{section}]")
            return default
        if not self.parser.has_option(section, key):
            if required:
                raise ConfigError(f"missing key {key!r} in [{section}]")
            return default
        return self.parser.get(section, key)

    def get_float(self, section, key, default=None, required=False):
        raw = self._raw(section, key, None, required)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: not a number") from exc

    def get_int(self, section, key, default=None, required=False):
        raw = self._raw(section, key, None, required)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: not an integer") from exc

    def get_str(self, section, key, default=None, required=False):
        raw = self._raw(section, key, None, required)
        return default if raw is None else raw.strip()

    def get_bool(self, section, key, default=False):
        raw = self._raw(section, key)
        if raw is None:
            return default
        val = raw.strip().lower()
        if val in ("1", "true", "yes", "on"):
            return True
        if val in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"[{section}] {key} = {raw!r}: not a boolean")

    def get_floats(self, section, key, default=(), required=False):
        raw = self._raw(section, key, None, required)
        if raw is None:
            return list(default)
        try:
            return [float(tok) for tok in raw.replace(",", " ").split()]
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: bad number list") from exc

    # -- builders -----------------------------------------------------------
    def scalar_function(self, prefix: str) -> ScalarFunction:
        family = self.get_str("pair", f"{prefix}_family", required=True)
        odd = self.get_bool("pair", f"{prefix}_odd", False)
        if family == "zero":
            return ScalarFunction.zero()
        if family == "power":
            return ScalarFunction.power(self.get_float("pair", f"{prefix}_c", 1.0),
                                        self.get_float("pair", f"{prefix}_gamma", 1.0),
                                        odd=odd)
        if family == "exp_minus_one":
            return ScalarFunction.exp_minus_one(
                self.get_float("pair", f"{prefix}_c", 1.0), odd=odd)
        if family == "log_plus_one":
            return ScalarFunction.log_plus_one(
                self.get_float("pair", f"{prefix}_c", 1.0), odd=odd)
        if family == "piecewise_linear":
            knots = self.get_str("pair", f"{prefix}_knots", required=True)
            pts = []
            for tok in knots.split(";"):
                t, v = tok.split(",")
                pts.append((float(t), float(v)))
            return ScalarFunction.piecewise_linear(pts, odd=odd)
        if family == "tabulated":
            path = self.get_str("pair", f"{prefix}_file", required=True)
            data = np.loadtxt(path)
            if data.ndim != 2 or data.shape[1] != 2:
                raise ConfigError(f"{path}: expected two-column numeric text")
            return ScalarFunction.tabulated(data[:, 0], data[:, 1], odd=odd)
        raise ConfigError(f"[pair] {prefix}_family = {family!r}: unknown family")

    def pair(self) -> NonlinearityPair:
        q = self.get_float("pair", "q", required=True)
        return NonlinearityPair(self.scalar_function("f"),
                                self.scalar_function("g"), q)

    def grid(self):
        kind = self.get_str("domain", "kind", required=True)
        n = self.get_int("grid", "n", 128)
        band = self.get_int("grid", "band", self.get_int("grid", "rho_mult", 3))
        if kind in ("square", "rectangle"):
            x0 = self.get_float("domain", "x0", 0.0)
            y0 = self.get_float("domain", "y0", 0.0)
            x1 = self.get_float("domain", "x1", 1.0)
            y1 = self.get_float("domain", "y1", 1.0)
            return rectangle_grid((x0, y0), (x1, y1), n, band)
        if kind == "disk":
            cx = self.get_float("domain", "center_x", 0.0)
            cy = self.get_float("domain", "center_y", 0.0)
            radius = self.get_float("domain", "radius", required=True)
            return disk_grid((cx, cy), radius, n, band)
        raise ConfigError(f"[domain] kind = {kind!r}: unknown kind")

    def boundary_data(self):
        kind = self.get_str("boundary", "kind", "constant")
        if kind == "constant":
            value = self.get_float("boundary", "value", required=True)
            return value
        if kind == "linear_x":
            return lambda X, Y: X
        if kind == "cone":
            cx = self.get_float("boundary", "cone_x", required=True)
            cy = self.get_float("boundary", "cone_y", required=True)
            return lambda X, Y: np.hypot(X - cx, Y - cy)
        raise ConfigError(f"[boundary] kind = {kind!r}: unknown kind")

    def items(self):
        out = []
        for section in sorted(self.parser.sections()):
            for key in sorted(self.parser.options(section)):
                out.append((section, key, self.parser.get(section, key)))
        return out


def load_config(path: str, command: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        read = parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    for section in parser.sections():
        if section not in ALLOWED_KEYS:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser.options(section):
            if key not in ALLOWED_KEYS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    cfg = ExperimentConfig(parser, path)
    for section in REQUIRED_SECTIONS.get(command, ()):
        if not parser.has_section(section):
            raise ConfigError(f"subcommand {command!r} needs section [{section}]")
    return cfg
