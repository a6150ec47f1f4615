"""Flat ``key=value`` experiment configuration.

Blank lines and ``#`` comments are ignored.  Every key has a default; each
command may override some defaults, and the user file overrides both.  Unknown
keys and unparsable values raise :class:`ConfigError`.
"""
from __future__ import annotations

from pathlib import Path
from typing import Any, Callable


class ConfigError(ValueError):
    pass


def _real(text: str) -> float:
    return float(text)


def _auto_real(text: str):
    return "auto" if text == "auto" else float(text)


def _reals(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.split(",") if t.strip()) if text else ()


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t.strip()) if text else ()


def _choice(*allowed: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in allowed:
            raise ValueError(f"expected one of {', '.join(allowed)}")
        return text
    return parse


# key -> (parser, default text)
KEYS: dict[str, tuple[Callable[[str], Any], str]] = {
    "scheme": (_choice("graph2", "graphp", "graphinf", "game", "hyper"), "hyper"),
    "p": (_auto_real, "auto"),
    "k": (_real, "1"),
    "lambda": (_real, "1"),
    "kernel": (_choice("constant", "gaussian", "tabulated"), "constant"),
    "kernel.sigma": (_real, "1"),
    "kernel.table": (str, ""),
    "n": (int, "1000"),
    "d": (int, "2"),
    "seed": (int, "0"),
    "domain": (_choice("unit_box", "unit_ball"), "unit_box"),
    "density": (_choice("uniform", "ramp"), "uniform"),
    "epsilon": (_auto_real, "auto"),
    "epsilon.amplitude": (_real, "1.5"),
    "epsilon.exponent": (_real, "0.4"),
    "labels": (str, ""),
    "labels.positions": (_reals, ""),
    "labels.values": (_reals, ""),
    "cloud": (str, "generate"),
    "tol": (_real, "1e-8"),
    "max_iter": (int, "200000"),
    "sweep": (_choice("jacobi", "gauss_seidel"), "gauss_seidel"),
    "damping": (_real, "1"),
    "init": (_choice("label_mean", "zeros"), "label_mean"),
    "out": (str, "out"),
    "ladder": (_ints, "250,500,1000,2000,4000"),
    "replicates": (int, "1"),
    "alpha": (_auto_real, "auto"),
    "phi": (_choice("linear", "quadratic"), "quadratic"),
    "consistency.epsilons": (_reals, "0.4,0.2,0.1,0.05"),
    "grid.max_side": (int, "8001"),
    "figure1.neighbors": (int, "72"),
}


def parse_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw ``key -> text`` pairs, validated against :data:`KEYS`."""
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key '{key}'")
        try:
            KEYS[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for '{key}': {exc}") from None
        raw[key] = value
    return raw


class ExperimentConfig:
    """Typed view over defaults, command defaults and user values."""

    def __init__(self, user: dict[str, str], command_defaults: dict[str, str] | None = None):
        self.user = dict(user)
        self.raw = {key: default for key, (_, default) in KEYS.items()}
        self.raw.update(command_defaults or {})
        self.raw.update(user)

    @classmethod
    def load(cls, path, command_defaults=None, overrides=None) -> "ExperimentConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        user = parse_text(text, str(path))
        user.update(overrides or {})
        return cls(user, command_defaults)

    def __getitem__(self, key: str):
        return KEYS[key][0](self.raw[key])

    def given(self, key: str) -> bool:
        return key in self.user

    def set(self, key: str, value) -> None:
        """Record a resolved value, formatted so that it parses back exactly."""
        if isinstance(value, float):
            text = repr(value)
        elif isinstance(value, (tuple, list)):
            text = ",".join(repr(v) for v in value)
        else:
            text = str(value)
        KEYS[key][0](text)
        self.raw[key] = text
        self.user[key] = text

    def dump(self) -> str:
        return "".join(f"{key}={self.raw[key]}\n" for key in KEYS)

    def write(self, directory) -> Path:
        path = Path(directory) / "config.resolved"
        path.write_text(self.dump(), encoding="utf-8")
        return path
