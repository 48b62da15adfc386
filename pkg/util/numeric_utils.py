"""Batched float evaluation of polynomial systems (values and Jacobians)."""
from typing import List, Sequence

import numpy as np

from util.polyring_utils import MultiPoly, partial_derivative

CHUNK = 20000


class NumericPolySystem:
    """K polynomials on nvars variables, evaluated at S points at once."""

    def __init__(self, polys: Sequence[MultiPoly]):
        if not polys:
            raise ValueError("empty polynomial system")
        self.polys: List[MultiPoly] = list(polys)
        self.nvars = self.polys[0].nvars
        self._arrays = [p.numeric_arrays() for p in self.polys]
        self._grad_arrays = [[partial_derivative(p, j).numeric_arrays() for j in range(self.nvars)]
                             for p in self.polys]
        self._abs_arrays = [(e, np.abs(c)) for e, c in self._arrays]
        self.l1_norms = np.array([float(np.sum(np.abs(c))) for _, c in self._arrays])

    @staticmethod
    def _eval(arrays, pts: np.ndarray) -> np.ndarray:
        exps, coeffs = arrays
        if not len(coeffs):
            return np.zeros(pts.shape[0], dtype=complex)
        out = np.empty(pts.shape[0], dtype=complex)
        for start in range(0, pts.shape[0], CHUNK):
            block = pts[start:start + CHUNK]
            out[start:start + CHUNK] = np.prod(block[:, None, :] ** exps[None, :, :], axis=2) @ coeffs
        return out

    def values(self, points: np.ndarray) -> np.ndarray:
        """Shape (S, K)."""
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        return np.stack([self._eval(a, pts) for a in self._arrays], axis=1)

    def jacobian(self, points: np.ndarray) -> np.ndarray:
        """Shape (S, K, nvars)."""
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        out = np.empty((pts.shape[0], len(self.polys), self.nvars), dtype=complex)
        for k, grads in enumerate(self._grad_arrays):
            for j, arrays in enumerate(grads):
                out[:, k, j] = self._eval(arrays, pts)
        return out

    def term_magnitudes(self, points: np.ndarray) -> np.ndarray:
        """Σ |c_e| |z^e| per polynomial, the natural scale of a residual; shape (S, K)."""
        pts = np.abs(np.atleast_2d(np.asarray(points, dtype=complex))).astype(complex)
        return np.stack([self._eval(a, pts).real for a in self._abs_arrays], axis=1)

    def relative_residuals(self, points: np.ndarray) -> np.ndarray:
        """max_k |p_k(z)| / Σ|terms of p_k at z|, per point."""
        vals = np.abs(self.values(points))
        scale = np.maximum(self.term_magnitudes(points), np.finfo(float).tiny)
        return np.max(vals / scale, axis=1)
