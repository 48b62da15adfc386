import json
from pathlib import Path
from typing import Any, List, Sequence, Union
import logging

from models.tensors import ResidueTensor
from util.exactnum_utils import GaussianRational, parse_scalar
from util.polyring_utils import MultiPoly

logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)


def load_json(path: Union[str, Path]) -> Any:
    """Read a JSON document; unreadable files and bad JSON both raise ValueError."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ValueError(f"cannot read {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"{path} is not valid JSON: {e}") from e


def parse_literal(value: Any) -> GaussianRational:
    """Literal strings ("3/4", "-1+2i") or plain integers."""
    if isinstance(value, bool):
        raise ValueError(f"not a scalar literal: {value!r}")
    if isinstance(value, int):
        return GaussianRational(value)
    if isinstance(value, str):
        return parse_scalar(value)
    raise ValueError(f"not a scalar literal: {value!r}")


def parse_complex(value: Any) -> complex:
    """A float pair [re, im], a number, or an exact literal."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    return complex(parse_literal(value))


def parse_poly(nvars: int, terms: Sequence[Sequence[Any]], label: str = "polynomial") -> MultiPoly:
    """[[exponents], literal] pairs; repeated exponents add up."""
    out = {}
    for k, term in enumerate(terms):
        if not isinstance(term, (list, tuple)) or len(term) != 2:
            raise ValueError(f"{label}, term {k + 1}: expected [exponents, coefficient]")
        exp, literal = term
        if not isinstance(exp, (list, tuple)) or len(exp) != nvars:
            raise ValueError(f"{label}, term {k + 1}: exponent vector must have {nvars} entries")
        if any(not isinstance(e, int) or isinstance(e, bool) or e < 0 for e in exp):
            raise ValueError(f"{label}, term {k + 1}: exponents must be non-negative integers")
        key = tuple(exp)
        try:
            value = parse_literal(literal)
        except ValueError as e:
            raise ValueError(f"{label}, term {k + 1}: {e}") from e
        out[key] = out[key] + value if key in out else value
    return MultiPoly(nvars, out)


def parse_tensor(r: int, p: int, entries: Sequence[Sequence[Any]]) -> ResidueTensor:
    """[[1-based increasing indices], literal] pairs."""
    parsed = {}
    for k, entry in enumerate(entries):
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise ValueError(f"tensor entry {k + 1}: expected [indices, value]")
        idx, literal = entry
        if not isinstance(idx, (list, tuple)) or len(idx) != p:
            raise ValueError(f"tensor entry {k + 1}: index tuple must have {p} entries")
        if any(not isinstance(i, int) or not 1 <= i <= r for i in idx):
            raise ValueError(f"tensor entry {k + 1}: indices must lie in 1..{r}")
        if list(idx) != sorted(set(idx)):
            raise ValueError(f"tensor entry {k + 1}: indices must be strictly increasing")
        key = tuple(i - 1 for i in idx)
        if key in parsed:
            raise ValueError(f"tensor entry {k + 1}: index {list(idx)} repeated")
        parsed[key] = parse_literal(literal)
    return ResidueTensor(r, p, parsed)


def parse_index(text: str) -> List[int]:
    """'1,3' -> [0, 2]."""
    try:
        return [int(part) - 1 for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ValueError(f"bad index tuple {text!r}") from e
