"""Training configuration and the flat ``key = value`` config file format."""

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class TrainConfig:
    algo: str = "ddpg"
    method: str = "clip"
    seed: int = 0
    output_dir: str = ""

    # environment
    episode_len: int = 200
    max_torque: float = 2.0

    # DDPG
    max_episodes: int = 200
    ddpg_actor_lr: float = 1e-3
    ddpg_critic_lr: float = 2e-3
    ddpg_gamma: float = 0.99
    tau: float = 0.005
    ddpg_batch_size: int = 64
    replay_size: int = 20000
    updates_per_step: int = 1
    noise: str = "ou"
    ou_theta: float = 0.15
    ou_sigma_frac: float = 0.2
    ou_dt: float = 0.01
    gauss_sigma_frac: float = 0.1
    solve_window: int = 10
    strict_solve: bool = False

    # PPO
    max_seasons: int = 40
    ppo_actor_lr: float = 1e-4
    ppo_critic_lr: float = 2e-4
    ppo_gamma: float = 0.9
    lambda_gae: float = 0.95
    beta: float = 0.5
    epsilon: float = 0.2
    kl_target: float = 0.01
    kl_upper_factor: float = 1.5
    kl_lower_divisor: float = 1.5
    beta_min: float = 1e-4
    beta_max: float = 10.0
    epochs: int = 20
    ppo_batch_size: int = 200
    buffer_size: int = 10000
    entropy_coeff: float = 0.01
    normalize_adv: bool = True
    bootstrap_truncation: bool = True

    solve_threshold: float = -200.0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.algo not in ("ddpg", "ppo"):
            raise ConfigError(f"algo must be 'ddpg' or 'ppo', got {self.algo!r}")
        if self.method not in ("clip", "penalty"):
            raise ConfigError(f"method must be 'clip' or 'penalty', got {self.method!r}")
        if self.noise not in ("ou", "gaussian"):
            raise ConfigError(f"noise must be 'ou' or 'gaussian', got {self.noise!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigError("epsilon must lie in (0, 1)")
        if not 0.0 <= self.tau <= 1.0:
            raise ConfigError("tau must lie in [0, 1]")
        for name in ("beta", "kl_target", "max_torque"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("episode_len", "max_episodes", "max_seasons", "ddpg_batch_size",
                     "replay_size", "epochs", "ppo_batch_size", "buffer_size", "solve_window"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.updates_per_step < 0:
            raise ConfigError("updates_per_step must be >= 0")

    def replace(self, **changes) -> "TrainConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {format_value(getattr(self, f.name))}\n" for f in fields(self))


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _convert(name: str, raw: str, kind):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


_FIELD_TYPES = {f.name: {"int": int, "float": float, "bool": bool, "str": str}[f.type]
                if isinstance(f.type, str) else f.type for f in fields(TrainConfig)}


def parse_overrides(pairs: dict) -> dict:
    """Convert raw string values to typed ones; unknown keys are rejected."""
    out = {}
    for key, raw in pairs.items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = _convert(key, raw, _FIELD_TYPES[key])
    return out


def parse_config_text(text: str, source="<config>") -> dict:
    pairs = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        pairs[key.strip()] = value
    return parse_overrides(pairs)


def load_config(path=None, **overrides) -> TrainConfig:
    """Defaults, then file values, then explicit overrides (already typed)."""
    values = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except OSError as exc:
            raise OSError(f"cannot read config {p}: {exc}") from exc
        values.update(parse_config_text(text, str(p)))
    values.update({k: v for k, v in overrides.items() if v is not None})
    unknown = set(values) - set(_FIELD_TYPES)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    return TrainConfig(**values)
