from __future__ import annotations

from typing import Annotated, Literal

from pydantic import BaseModel, ConfigDict, Field, StrictInt, StrictStr, field_validator

from storage_shape.netmodel.rational import parse_rational


Load = Annotated[StrictInt, Field(ge=0)]


def _exact(value: str) -> str:
    parse_rational(value)
    return value


class NetworkFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: StrictInt = Field(ge=1)
    neighborhoods: list[list[StrictInt]]
    rates: list[StrictStr]

    @field_validator("rates")
    @classmethod
    def rates_are_exact(cls, value: list[str]) -> list[str]:
        return [_exact(v) for v in value]


class PolicySpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    policy: Literal["jsq", "erp", "serp", "pserp", "table"]
    epsilon: StrictStr | None = None
    seed: StrictInt | None = None
    rows: list[list[StrictStr]] | None = None
    clip: StrictInt = Field(default=32, ge=1)

    @field_validator("epsilon")
    @classmethod
    def epsilon_is_exact(cls, value: str | None) -> str | None:
        return None if value is None else _exact(value)

    @field_validator("rows")
    @classmethod
    def rows_are_exact(cls, value: list[list[str]] | None) -> list[list[str]] | None:
        if value is None:
            return None
        return [[_exact(v) for v in row] for row in value]


class SweepSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    seed: StrictInt = 0
    cases: StrictInt = Field(default=100, ge=1)
    max_load: StrictInt = Field(default=20, ge=0)


class DriftCheckFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    policy: PolicySpec
    configurations: list[list[Load]] | None = None
    sweep: SweepSpec | None = None
    include_g: bool = False
    fit: bool = False


class CertifyFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    policy: PolicySpec = Field(default_factory=lambda: PolicySpec(policy="jsq"))
    samples: StrictInt = Field(default=100, ge=1)
    seed: StrictInt = 0
    max_load: StrictInt = Field(default=20, ge=0)
    random_policies: StrictInt = Field(default=0, ge=0)


class SimConfigFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    network: NetworkFile | None = None
    network_file: StrictStr | None = None
    policy: PolicySpec
    initial: list[Load] | None = None
    max_steps: StrictInt = Field(ge=0)
    replicas: StrictInt = Field(default=1, ge=1)
    seed: StrictInt | None = None
    record_every: StrictInt = Field(default=100, ge=1)
    tau_cutoff: StrictInt | None = Field(default=None, ge=1)
    continuous_time: bool = False
    workers: StrictInt = Field(default=1, ge=1)
    mgf_grid: list[float] | None = None
