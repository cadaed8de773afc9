"""Construction parameters and their text manifest."""

from dataclasses import asdict, dataclass, fields, replace

from ..errors import InvalidInputError

ALGORITHMS = ("incremental", "local", "kde", "kmeans", "tracebundle")

# proximity means different things per family; these are the usual values
DEFAULT_PROXIMITY = {"local": 20.0, "kmeans": 50.0, "tracebundle": 25.0}


@dataclass(frozen=True)
class ConstructParams:
    algorithm: str = "incremental"
    # incremental Frechet insertion
    epsilon: float = 80.0
    # local insertion / k-means / TraceBundle share a proximity radius
    proximity: float = None
    bearing: float = 45.0
    # attraction-based track clarification ahead of local insertion
    clarify: bool = True
    attraction_radius: float = 30.0
    iterations: int = 5
    damping: float = 0.5
    # KDE
    cell: float = 16.0
    blur: float = 1.0
    threshold: float = 5.0
    multi_threshold: bool = False
    # k-means
    seed_spacing: float = 50.0
    # TraceBundle
    turn_angle: float = 15.0
    speed_max: float = 40.0
    min_support: int = 2

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidInputError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.proximity is None:
            object.__setattr__(self, "proximity", DEFAULT_PROXIMITY.get(self.algorithm, 25.0))
        for name in ("epsilon", "proximity", "attraction_radius", "cell", "blur", "threshold", "seed_spacing"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        for name in ("bearing", "turn_angle"):
            if not 0 < getattr(self, name) < 180:
                raise InvalidInputError(f"{name} must lie in (0, 180) degrees")
        if self.speed_max <= 0:
            raise InvalidInputError("speed_max must be positive")
        if self.iterations < 1:
            raise InvalidInputError("iterations must be at least 1")
        if not 0 < self.damping <= 1:
            raise InvalidInputError("damping must lie in (0, 1]")

    def with_(self, **changes):
        return replace(self, **changes)

    def relevant(self):
        """The subset of fields the chosen algorithm actually reads."""
        keys = {
            "incremental": ["epsilon"],
            "local": ["proximity", "bearing", "clarify", "attraction_radius", "iterations", "damping"],
            "kde": ["cell", "blur", "threshold", "multi_threshold"],
            "kmeans": ["seed_spacing", "bearing", "proximity"],
            "tracebundle": ["turn_angle", "speed_max", "proximity", "min_support"],
        }[self.algorithm]
        d = asdict(self)
        return {"algorithm": self.algorithm, **{k: d[k] for k in keys}}

    def to_manifest(self, extra=None):
        lines = [f"{k}={_fmt(v)}" for k, v in asdict(self).items()]
        for k, v in (extra or {}).items():
            lines.append(f"{k}={_fmt(v)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_manifest(cls, text):
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for raw in text.splitlines():
            if not raw.strip() or "=" not in raw:
                continue
            k, v = raw.split("=", 1)
            if k not in types:
                continue
            kwargs[k] = _parse(v, types[k])
        return cls(**kwargs)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(text, typ):
    if typ in ("bool", bool):
        return text.strip().lower() == "true"
    if typ in ("int", int):
        return int(text)
    if typ in ("str", str):
        return text.strip()
    return float(text)
