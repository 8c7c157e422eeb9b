"""Built-in example configurations shipped as package data."""

from __future__ import annotations

from importlib import resources

from .config import RunConfig, parse_config
from .errors import ConfigError

__all__ = ["fixture_names", "fixture_text", "load_fixture"]

_FIXTURES = (
    "srw-f2",
    "semidirect-linear",
    "semidirect-mixed",
    "direct-product",
    "free-acting",
    "lattice-rank2",
    "fibonacci",
)


def fixture_names() -> tuple[str, ...]:
    return _FIXTURES


def fixture_text(name: str) -> str:
    if name not in _FIXTURES:
        raise ConfigError(
            f"unknown fixture {name!r}; available: {', '.join(_FIXTURES)}"
        )
    path = resources.files("walkbound").joinpath("fixtures", f"{name}.cfg")
    return path.read_text(encoding="utf-8")


def load_fixture(name: str) -> RunConfig:
    return parse_config(fixture_text(name))
