"""Estimator-style wrappers: ``fit`` a polytope, ``predict`` at dilation factors."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_is_fitted

from .angle import EnginePolicy
from .ehrhart import QuasiPolynomial, fit_ehrhart
from .polytope import DimensionError, Polytope
from .solidpoly import SolidPolynomial, fit_solid

__all__ = ["EhrhartPolynomial", "SolidAnglePolynomial", "check_polytope", "check_dilations",
           "NotFittedError"]


def check_polytope(p, require_full: bool = True) -> Polytope:
    """Accept a Polytope, a vertex list, a JSON dict or a JSON string."""
    if isinstance(p, Polytope):
        poly = p
    elif isinstance(p, str):
        poly = Polytope.from_json(p)
    elif isinstance(p, dict):
        poly = Polytope.from_json_dict(p)
    elif isinstance(p, (list, tuple, np.ndarray)):
        poly = Polytope([tuple(v) for v in p])
    else:
        raise TypeError(f"cannot interpret {type(p).__name__} as a polytope")
    if require_full and not poly.is_full_dimensional:
        raise DimensionError("expected a full-dimensional polytope")
    return poly


def check_dilations(t) -> np.ndarray:
    """Integer dilation factors as a 1-D int array; rejects negatives and non-integers."""
    arr = np.atleast_1d(np.asarray(t))
    if arr.ndim != 1:
        raise ValueError("dilation factors must be a scalar or 1-D array")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
            raise ValueError("dilation factors must be integers")
    elif arr.dtype.kind not in "iu":
        raise ValueError("dilation factors must be integers")
    arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValueError("dilation factors must be nonnegative")
    return arr


class _PolytopeEstimator(BaseEstimator):
    def _qp(self) -> QuasiPolynomial:
        raise NotImplementedError

    def predict(self, t) -> np.ndarray:
        check_is_fitted(self, "coef_")
        ts = check_dilations(t)
        q = self._qp()
        return np.array([float(q(int(x))) for x in ts])


class EhrhartPolynomial(_PolytopeEstimator):
    """Lattice-point counts of tP.

    After ``fit``: ``quasipolynomial_``, ``period_``, ``coef_`` (constituent
    coefficient rows, lowest degree first, as Fractions) and ``n_dims_``.
    """

    def fit(self, P, y=None):
        p = check_polytope(P)
        q = fit_ehrhart(p)
        self.quasipolynomial_ = q
        self.period_ = q.period
        self.n_dims_ = p.dim
        self.coef_ = [list(c.exact_coeffs()) for c in q.constituents]
        return self

    def _qp(self):
        return self.quasipolynomial_


class SolidAnglePolynomial(_PolytopeEstimator):
    """Solid-angle sums over integer points of tP.

    Parameters mirror :class:`EnginePolicy`. After ``fit``: ``coef_`` (float
    array c_0..c_d, or constituent rows for rational input), ``coef_error_``,
    ``exact_coef_`` (Fractions or None), ``period_`` and ``result_``.
    """

    def __init__(self, policy: str = "exact", mc_samples: int = 1_000_000, seed: int = 0,
                 tol: float = 1e-10, parity: bool = True):
        self.policy = policy
        self.mc_samples = mc_samples
        self.seed = seed
        self.tol = tol
        self.parity = parity

    def _policy(self) -> EnginePolicy:
        return EnginePolicy(mode=self.policy, mc_samples=self.mc_samples, seed=self.seed,
                            tol=self.tol)

    def fit(self, P, y=None):
        p = check_polytope(P)
        res = fit_solid(p, self._policy(), parity=self.parity)
        self.result_ = res
        self.n_dims_ = p.dim
        if isinstance(res, SolidPolynomial):
            self.period_ = 1
            self.coef_ = np.array(res.coeffs)
            self.coef_error_ = np.array(res.errors)
            self.exact_coef_ = list(res.poly.exact) if res.is_exact else None
        else:
            self.period_ = res.period
            n = p.dim + 1
            self.coef_ = np.array([[float(c.coeff(k)) for k in range(n)] for c in res.constituents])
            self.coef_error_ = np.array([[c.errors[k] if k < len(c.errors) else 0.0
                                          for k in range(n)] for c in res.constituents])
            self.exact_coef_ = None
        return self

    def _qp(self):
        res = self.result_
        return QuasiPolynomial(1, (res.poly,)) if isinstance(res, SolidPolynomial) else res
