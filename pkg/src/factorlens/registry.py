"""Factor registry: ordered factor names and their type assignment.

The bundled default registry (``factors.toml``) lists 56 factors split
17/5/8/11/8/7 across the six types. Custom registries use the same
``name = type`` plain-text format.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import MalformedRow, UnknownFactor

FACTOR_TYPES = (
    "TransactionFriction",
    "Momentum",
    "Value",
    "Growth",
    "Profitability",
    "Liquidity",
)


@dataclass(frozen=True)
class FactorRegistry:
    """Ordered factor names with a type for each name."""

    names: tuple[str, ...]
    types: dict[str, str]
    _order: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise MalformedRow("duplicate factor names in registry")
        for name in self.names:
            if name not in self.types:
                raise UnknownFactor(f"factor {name!r} has no type")
            if self.types[name] not in FACTOR_TYPES:
                raise MalformedRow(
                    f"factor {name!r} has unknown type {self.types[name]!r}"
                )
        object.__setattr__(self, "_order", {n: i for i, n in enumerate(self.names)})

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._order

    def order(self, name: str) -> int:
        """Registry position of a factor, used as the canonical tie-break."""
        try:
            return self._order[name]
        except KeyError:
            raise UnknownFactor(f"unknown factor {name!r}") from None

    def type_of(self, name: str) -> str:
        if name not in self._order:
            raise UnknownFactor(f"unknown factor {name!r}")
        return self.types[name]

    def type_counts(self) -> dict[str, int]:
        counts = {t: 0 for t in FACTOR_TYPES}
        for name in self.names:
            counts[self.types[name]] += 1
        return counts

    def subset(self, names) -> "FactorRegistry":
        """Sub-registry restricted to ``names``, keeping this registry's order."""
        wanted = set(names)
        unknown = wanted - set(self.names)
        if unknown:
            raise UnknownFactor(f"unknown factors: {sorted(unknown)}")
        kept = tuple(n for n in self.names if n in wanted)
        return FactorRegistry(names=kept, types={n: self.types[n] for n in kept})


def parse_registry(text: str) -> FactorRegistry:
    """Parse ``name = type`` lines; ``#`` comments and blank lines ignored."""
    names: list[str] = []
    types: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedRow(f"registry line {lineno}: expected 'name = type'")
        name, _, type_name = line.partition("=")
        name, type_name = name.strip(), type_name.strip()
        if not name or not type_name:
            raise MalformedRow(f"registry line {lineno}: expected 'name = type'")
        if name in types:
            raise MalformedRow(f"registry line {lineno}: duplicate factor {name!r}")
        names.append(name)
        types[name] = type_name
    return FactorRegistry(names=tuple(names), types=types)


def load_registry(path: str | Path) -> FactorRegistry:
    return parse_registry(Path(path).read_text(encoding="utf-8"))


def format_registry(registry: FactorRegistry) -> str:
    return "".join(f"{n} = {registry.types[n]}\n" for n in registry.names)


def default_registry() -> FactorRegistry:
    """The bundled 56-factor registry (17/5/8/11/8/7 across the six types)."""
    text = resources.files(__package__).joinpath("factors.toml").read_text("utf-8")
    return parse_registry(text)


DEFAULT_REGISTRY = default_registry()
