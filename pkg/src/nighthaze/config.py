"""Pipeline configuration and its plain-text ``key = value`` file format."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, NamedTuple

from .errors import ConfigError

CONFIG_ENV_VAR = "NIGHTHAZE_CONFIG"


class FilterParams(NamedTuple):
    """Window half-size and regularizer of a guided filter."""

    radius: int
    epsilon: float

    def validate(self) -> "FilterParams":
        if int(self.radius) != self.radius or self.radius < 1:
            raise ConfigError(f"filter radius must be an integer >= 1, got {self.radius}")
        if not self.epsilon > 0:
            raise ConfigError(f"filter epsilon must be > 0, got {self.epsilon}")
        return self


@dataclass(frozen=True)
class PipelineConfig:
    """Every tunable of the three-stage restoration pipeline.

    Defaults follow the published parameter settings where they exist
    (gamma 1/3, patch radius 5, guided filter radius 32 / eps 0.01,
    5%/95% stretch anchors). ``omega``, ``t_floor``, ``eta_floor`` and
    ``log_floor`` are numerical guards chosen for this implementation.
    """

    gamma: float = 1.0 / 3.0
    gamma0: float = 1.0 / 1.2
    patch_radius: int = 5
    gf_radius: int = 32
    gf_epsilon: float = 0.01
    omega: float = 0.95
    t_floor: float = 0.1
    eta_floor: float = 0.05
    stretch_lo: float = 5.0
    stretch_hi: float = 95.0
    log_floor: float = 1.0 / 255.0
    stretch_enabled: bool = True
    # stretch the color-corrected image rather than the gamma-corrected one
    stretch_after_color: bool = True
    # fidelity / diagnostic switches
    two_pass_reflectance: bool = False
    eta_amplify_global: bool = False
    force_unit_eta: bool = False

    def __post_init__(self):
        bad = []
        if not 0 < self.gamma <= 1:
            bad.append(f"gamma must lie in (0, 1], got {self.gamma}")
        if not self.gamma0 > 0:
            bad.append(f"gamma0 must be > 0, got {self.gamma0}")
        if int(self.patch_radius) != self.patch_radius or self.patch_radius < 1:
            bad.append(f"patch_radius must be an integer >= 1, got {self.patch_radius}")
        if not 0 <= self.omega <= 1:
            bad.append(f"omega must lie in [0, 1], got {self.omega}")
        if not 0 < self.t_floor < 1:
            bad.append(f"t_floor must lie in (0, 1), got {self.t_floor}")
        if not 0 < self.eta_floor < 1:
            bad.append(f"eta_floor must lie in (0, 1), got {self.eta_floor}")
        if not 0 < self.log_floor < 1:
            bad.append(f"log_floor must lie in (0, 1), got {self.log_floor}")
        if not 0 <= self.stretch_lo < self.stretch_hi <= 100:
            bad.append(
                f"need 0 <= stretch_lo < stretch_hi <= 100, got {self.stretch_lo}, {self.stretch_hi}"
            )
        if bad:
            raise ConfigError("; ".join(bad))
        try:
            self.guided_params.validate()
        except ConfigError as exc:
            raise ConfigError(str(exc), keys=("gf_radius", "gf_epsilon")) from None

    @property
    def guided_params(self) -> FilterParams:
        return FilterParams(self.gf_radius, self.gf_epsilon)

    def replace(self, **changes: Any) -> "PipelineConfig":
        return dataclasses.replace(self, **coerce_values(changes))

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def to_text(self) -> str:
        """Serialize in the same format :func:`load_config` reads."""
        return "".join(f"{k} = {format_value(v)}\n" for k, v in self.as_dict().items())


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_number(text: str) -> float:
    # allow simple fractions such as 1/3 so config files can mirror the published values
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def coerce_values(raw: Mapping[str, Any]) -> dict[str, Any]:
    """Convert strings (or loosely typed values) into field types.

    Raises ConfigError naming every unknown key.
    """
    unknown = sorted(k for k in raw if k not in _FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}", keys=unknown)
    out = {}
    for key, value in raw.items():
        kind = _FIELD_TYPES[key]
        try:
            if kind == "bool":
                out[key] = value if isinstance(value, bool) else _parse_bool(str(value))
            elif kind == "int":
                number = _parse_number(str(value)) if isinstance(value, str) else value
                if int(number) != number:
                    raise ValueError(f"not an integer: {value!r}")
                out[key] = int(number)
            else:
                out[key] = _parse_number(value) if isinstance(value, str) else float(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", keys=[key]) from None
    return out


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def load_config(
    path: str | os.PathLike | None = None,
    overrides: Mapping[str, Any] | None = None,
    use_env: bool = True,
) -> PipelineConfig:
    """Build a config from defaults, an optional file and explicit overrides.

    When ``path`` is None and ``use_env`` is set, the file named by the
    NIGHTHAZE_CONFIG environment variable is used if present.
    """
    if path is None and use_env:
        path = os.environ.get(CONFIG_ENV_VAR) or None
    values: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
        values.update(coerce_values(parse_config_text(text)))
    if overrides:
        values.update(coerce_values(overrides))
    return PipelineConfig(**values)


@dataclass(frozen=True)
class SynthConfig:
    """Parameters of the synthetic nighttime haze generator."""

    beta: float = 0.8
    alpha: float = 0.5
    light_color: tuple[float, float, float] = (1.0, 1.0, 0.3)
    env_patch_radius: int = 16
    env_gf_epsilon: float = 0.1
    focal_scale: float = 1.0
    transmission_scale: float = 0.8
    log_floor: float = 1.0 / 255.0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ConfigError(f"beta must lie in (0, 1), got {self.beta}")
        if len(self.light_color) != 3 or not all(0 < c <= 1 for c in self.light_color):
            raise ConfigError(f"light_color needs three values in (0, 1], got {self.light_color}")
        if self.env_patch_radius < 1 or not self.env_gf_epsilon > 0:
            raise ConfigError("env_patch_radius must be >= 1 and env_gf_epsilon > 0")
        if not self.focal_scale > 0:
            raise ConfigError(f"focal_scale must be > 0, got {self.focal_scale}")
