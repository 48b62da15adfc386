from fractions import Fraction

import numpy as np
from pydantic import BaseModel

from models.tensors import Covector, ResidueTensor
from util.exactnum_utils import GaussianRational, format_scalar
from util.polyring_utils import MultiPoly


def custom_encoder(obj):
    """
    Recursively turns models and algebraic values into JSON-ready data.

    Exact scalars become literals, complex numbers [re, im], tensors carry
    1-based index tuples.
    """
    if isinstance(obj, BaseModel):
        obj_dict = {(field.alias or k): getattr(obj, k) for k, field in type(obj).model_fields.items()}
        return {k: custom_encoder(v) for k, v in obj_dict.items() if v is not None}
    elif isinstance(obj, GaussianRational):
        return format_scalar(obj)
    elif isinstance(obj, Fraction):
        return format_scalar(GaussianRational(obj))
    elif isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    elif isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    elif isinstance(obj, np.integer):
        return int(obj)
    elif isinstance(obj, np.floating):
        return float(obj)
    elif isinstance(obj, np.ndarray):
        return [custom_encoder(v) for v in obj.tolist()]
    elif isinstance(obj, ResidueTensor):
        return {"r": obj.r, "p": obj.p,
                "entries": [[[i + 1 for i in idx], format_scalar(v)] for idx, v in obj.sorted_entries()]}
    elif isinstance(obj, Covector):
        return [format_scalar(c) for c in obj.coords]
    elif isinstance(obj, MultiPoly):
        return [[list(exp), format_scalar(c)] for exp, c in obj.sorted_terms()]
    elif isinstance(obj, dict):
        return {str(k): custom_encoder(v) for k, v in obj.items()}
    elif isinstance(obj, (list, tuple, set)):
        return [custom_encoder(v) for v in obj]
    else:
        return obj
