# trawlkit/models/model_spec.py
#
# ModelSpec bundles everything that identifies one periodic trawl model on a
# sampling grid: the Levy seed, the trawl function g, the periodic kernel p,
# the step delta and the grid count n.

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from trawlkit.core.errors import ConfigurationError, DomainError
from trawlkit.models.kernels import PeriodicFunction, TrawlFunction, parse_periodic, parse_trawl
from trawlkit.models.levy import LevySeed, parse_seed


class ModelSpec(BaseModel):
    """One simulation / estimation target."""

    model_config = ConfigDict(frozen=True)

    seed: LevySeed
    g: TrawlFunction
    p: PeriodicFunction
    delta: float = Field(default=1.0, gt=0.0)
    n: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def _check_integrable(self) -> "ModelSpec":
        mass = self.g.total_mass
        if not math.isfinite(mass):
            raise DomainError(f"trawl {self.g.describe()} has infinite mass")
        return self

    @classmethod
    def from_strings(
        cls, levy: str, trawl: str, p: str = "one", delta: float = 1.0, n: int = 1000
    ) -> "ModelSpec":
        """Build from the config-string forms used by the CLI."""
        seed = parse_seed(levy)
        g = parse_trawl(trawl)
        kernel = parse_periodic(p)
        try:
            return cls(seed=seed, g=g, p=kernel, delta=delta, n=n)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc

    def describe(self) -> str:
        return (
            f"levy={self.seed.describe()} trawl={self.g.describe()} "
            f"p={self.p.describe()} delta={self.delta:g} n={self.n}"
        )
