from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.tensors import ResidueTensor
from util.polyring_utils import MultiPoly, are_proportional, homogeneous_degree


class PoleSystem(BaseModel):
    """The divisor f_1...f_r = 0 on P^n, each f_j homogeneous in n+1 variables."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(ge=1)
    polys: List[MultiPoly] = Field(default_factory=list)
    degrees: List[int] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _fill_degrees(cls, data):
        if isinstance(data, dict) and not data.get("degrees") and data.get("polys"):
            data = dict(data)
            data["degrees"] = [homogeneous_degree(f) for f in data["polys"]]
        return data

    @model_validator(mode="after")
    def _check_polys(self):
        if len(self.degrees) != len(self.polys):
            raise ValueError(f"{len(self.polys)} poles but {len(self.degrees)} degrees")
        for j, (f, d) in enumerate(zip(self.polys, self.degrees)):
            if f.nvars != self.n + 1:
                raise ValueError(f"pole {j + 1} has {f.nvars} variables, expected {self.n + 1}")
            if homogeneous_degree(f) != d:
                raise ValueError(f"pole {j + 1} has degree {homogeneous_degree(f)}, declared {d}")
        for i in range(len(self.polys)):
            for j in range(i + 1, len(self.polys)):
                if are_proportional(self.polys[i], self.polys[j]):
                    raise ValueError(f"pairwise non-proportional violated by poles {i + 1} and {j + 1}")
        return self

    @property
    def r(self) -> int:
        return len(self.polys)

    @property
    def nvars(self) -> int:
        return self.n + 1

    def product(self, skip=()) -> MultiPoly:
        acc = MultiPoly.constant(self.nvars, 1)
        for j, f in enumerate(self.polys):
            if j not in skip:
                acc = acc * f
        return acc


class LogFoliationSpec(BaseModel):
    """Pole system plus residue tensor: η = Σ_I λ_I df_I / f_I."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    poles: PoleSystem
    tensor: ResidueTensor
    projective: bool = True

    @model_validator(mode="after")
    def _check_tensor(self):
        if self.tensor.r != self.poles.r:
            raise ValueError(f"tensor has r={self.tensor.r} but there are {self.poles.r} poles")
        if self.tensor.p < 1:
            raise ValueError("a foliation spec needs a tensor of degree at least 1")
        if self.projective:
            radial = self.tensor.interior(self.poles.degrees)
            if not radial.is_zero():
                raise ValueError("tensor is not in the radial kernel (i_R η != 0)")
        return self

    @property
    def n(self) -> int:
        return self.poles.n

    @property
    def p(self) -> int:
        return self.tensor.p

    @property
    def r(self) -> int:
        return self.poles.r

    @property
    def degrees(self) -> List[int]:
        return self.poles.degrees

    def with_tensor(self, tensor: ResidueTensor, projective: bool = True) -> "LogFoliationSpec":
        return LogFoliationSpec(poles=self.poles, tensor=tensor, projective=projective)
