from typing import List, Optional, Tuple

from pydantic import BaseModel, Field, field_validator


class TorusCycle(BaseModel):
    """z(t) = m + Σ_k ε e^{i t_k} v_k, linking the poles of ``index`` once each."""

    index: Tuple[int, ...]
    base_point: List[complex]
    directions: List[List[complex]]
    radius: float = Field(gt=0)
    nodes: int = Field(default=64, ge=4)
    winding: Optional[List[List[complex]]] = None

    @field_validator("directions")
    @classmethod
    def _check_directions(cls, directions, info):
        base = info.data.get("base_point")
        if base is not None and any(len(v) != len(base) for v in directions):
            raise ValueError("every direction must have as many coordinates as the base point")
        return directions


class ResidueRow(BaseModel):
    """One recovered λ_I; ``index`` is 1-based."""

    index: Tuple[int, ...]
    exact: str
    recovered: complex
    coarse: complex
    error: float
    radius: float
    nodes: int
    seed: int
    accepted: bool
