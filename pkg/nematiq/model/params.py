# params.py
"""
Physical and scheme constants of the non-dimensional Q-tensor flow model.

The defaults are the parameter set used for the accuracy and defect experiments;
beta is zero because the cubic bulk term vanishes identically for 2x2 tensors.
"""
from dataclasses import dataclass, asdict, replace


@dataclass(frozen=True)
class ModelParams:
    alpha: float = -0.2
    beta: float = 0.0
    gamma: float = 1.0
    K: float = 0.001
    M: float = 1.0
    eta: float = 1.0
    a: float = 1.0
    S_Q: float = 30.0
    C0: float = 10.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            object.__setattr__(self, name, float(value))
        self.validate()

    def validate(self) -> None:
        """Raise ValueError naming the first parameter outside its admissible range."""
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not -1.0 <= self.a <= 1.0:
            raise ValueError(f"a must lie in [-1, 1], got {self.a}")
        for name in ('K', 'M', 'eta', 'C0'):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.S_Q >= 0:
            raise ValueError(f"S_Q must be >= 0, got {self.S_Q}")

    def with_changes(self, **changes) -> 'ModelParams':
        return replace(self, **changes)

    def as_dict(self) -> dict[str, float]:
        return asdict(self)
