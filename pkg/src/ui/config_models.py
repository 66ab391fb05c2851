"""
Configuration models for CLI commands
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from ..models.errors import ValidationError
from ..utils.config import Config


@dataclass
class CommonOptions:
    """Options every subcommand shares"""
    seed: int
    timestamp: bool = True
    output: Optional[str] = None
    workers: int = 4

    @classmethod
    def from_args(cls, args) -> "CommonOptions":
        seed = Config.get_default_seed() if getattr(args, "seed", None) is None else args.seed
        if seed < 0:
            raise ValidationError(f"must be nonnegative, got {seed}", field="seed")
        return cls(
            seed=seed,
            timestamp=not getattr(args, "no_timestamp", False),
            output=getattr(args, "output", None),
            workers=Config.get_workers(),
        )


@dataclass
class FitRequest:
    model: str
    data: str
    format: str = "csv"
    grouped: bool = False
    bins: int = 10
    start: Dict[str, float] = field(default_factory=dict)
    variant: str = ""
    fit_extras: bool = False
    curve: Optional[str] = None
    grid_points: int = 50


@dataclass
class SelectRequest:
    models: List[str]
    data: str
    criterion: str = "aic"
    format: str = "csv"
    ic_weights: Optional[List[float]] = None
    ic_flags: Dict[str, List[bool]] = field(default_factory=dict)


def parse_assignments(text: Optional[str], what: str) -> Dict[str, float]:
    """'a=1.5,g=0.1' -> {'a': 1.5, 'g': 0.1}"""
    if not text:
        return {}
    values = {}
    for item in text.split(","):
        name, sep, raw = item.partition("=")
        if not sep or not name.strip():
            raise ValidationError(f"expected name=value, got {item!r}", field=what)
        try:
            values[name.strip()] = float(raw)
        except ValueError:
            raise ValidationError(f"not a number: {raw!r}", field=what) from None
    return values


def parse_floats(text: Optional[str], what: str) -> List[float]:
    if not text:
        return []
    try:
        return [float(item) for item in text.split(",")]
    except ValueError:
        raise ValidationError(f"expected comma-separated numbers, got {text!r}", field=what) from None
