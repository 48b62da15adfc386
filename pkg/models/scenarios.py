from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from env import REPORT_SCHEMA, SCENARIO_SCHEMA


class CheckSpec(BaseModel):
    name: str
    params: Dict[str, Any] = Field(default_factory=dict)


class TensorData(BaseModel):
    p: int = Field(ge=1)
    entries: List[List[Any]] = Field(default_factory=list)


class Scenario(BaseModel):
    """Raw scenario document; literals are parsed when the spec is built."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_: str = Field(default=SCENARIO_SCHEMA, alias="schema")
    name: str
    n: int = Field(ge=1)
    projective: bool = True
    poles: List[List[List[Any]]]
    tensor: TensorData
    checks: List[CheckSpec] = Field(default_factory=list)
    seed: Optional[int] = None
    tolerances: Dict[str, float] = Field(default_factory=dict)

    def to_document(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


class CheckResult(BaseModel):
    name: str
    passed: bool
    counts: Dict[str, Any] = Field(default_factory=dict)
    witnesses: Dict[str, Any] = Field(default_factory=dict)
    error: Optional[str] = None
    error_type: Optional[str] = None
    seconds: float = 0.0


class Report(BaseModel):
    schema_: str = Field(default=REPORT_SCHEMA, alias="schema")
    scenario: str
    seed: int
    tolerances: Dict[str, float]
    checks: List[CheckResult]
    passed: bool

    model_config = ConfigDict(populate_by_name=True)
