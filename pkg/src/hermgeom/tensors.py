"""Small dense complex tensors with fixed Hermitian-geometry conventions.

``hermitian_inverse`` returns the ordinary matrix inverse ``M = H^{-1}``; the
upper-index metric is ``h^{k lbar} = M[l, k]`` so that
``sum_l h^{k lbar} h_{m lbar} = delta_km``.  All contractions below are
written against that rule.  The two normalisation anchors are
``trace_lambda(omega) == n`` and ``form_norm_sq(omega) == n``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, MetricError


@dataclass(frozen=True)
class Form10:
    """(1,0)-form ``sum_i a_i dz^i``."""

    components: np.ndarray

    def conj(self) -> "Form01":
        return Form01(np.conj(self.components))


@dataclass(frozen=True)
class Form01:
    """(0,1)-form ``sum_j b_j dzbar^j``."""

    components: np.ndarray

    def conj(self) -> Form10:
        return Form10(np.conj(self.components))


@dataclass(frozen=True)
class Form11:
    """(1,1)-form ``sqrt(-1) sum eta_{i jbar} dz^i ^ dzbar^j``; real iff ``coeff`` is Hermitian."""

    coeff: np.ndarray

    def __add__(self, other):
        return Form11(self.coeff + _coeff(other))

    def __sub__(self, other):
        return Form11(self.coeff - _coeff(other))

    def __mul__(self, s):
        s = np.asarray(s)
        return Form11(self.coeff * s[..., None, None])

    __rmul__ = __mul__

    def __neg__(self):
        return Form11(-self.coeff)

    def is_real(self, atol: float = 1e-12) -> bool:
        c = self.coeff
        return bool(np.all(np.abs(c - np.conj(np.swapaxes(c, -1, -2))) <= atol))


def _coeff(x):
    return x.coeff if isinstance(x, Form11) else np.asarray(x)


ROLES_CHERN = ("i", "jbar", "k", "lbar")
ROLES_LC = ("i", "jbar", "k", "l^")


@dataclass(frozen=True)
class Tensor4:
    """Rank-4 tensor with explicit index roles.

    Roles are labels such as ``"i"`` (lower holomorphic), ``"jbar"`` (lower
    antiholomorphic) and ``"l^"`` (upper holomorphic).
    """

    entries: np.ndarray
    roles: tuple

    def require(self, roles: tuple) -> np.ndarray:
        if tuple(self.roles) != tuple(roles):
            raise DimensionError(f"index roles {self.roles} do not match required {roles}")
        return self.entries

    def trace_pair(self, first: int, second: int, hinv: Optional[np.ndarray] = None) -> np.ndarray:
        """Contract index ``first`` with index ``second`` and return the remaining 2-tensor.

        A lower holomorphic/antiholomorphic pair is contracted with the inverse
        metric ``hinv`` (as returned by :func:`hermitian_inverse`); an upper
        index with a lower holomorphic one is a plain trace.
        """
        ra, rb = self.roles[first], self.roles[second]
        letters = "abcd"
        sub_in = list(letters)
        if ra.endswith("^") or rb.endswith("^"):
            if not ((ra.endswith("^") and _is_lower_holo(rb)) or (rb.endswith("^") and _is_lower_holo(ra))):
                raise DimensionError(f"cannot trace roles {ra!r} and {rb!r}")
            sub_in[second] = sub_in[first]
            rest = "".join(c for k, c in enumerate(letters) if k not in (first, second))
            return np.einsum(f"...{''.join(sub_in)}->...{rest}", self.entries)
        if _is_lower_holo(ra) and rb.endswith("bar"):
            hol, anti = first, second
        elif _is_lower_holo(rb) and ra.endswith("bar"):
            hol, anti = second, first
        else:
            raise DimensionError(f"cannot trace roles {ra!r} and {rb!r}")
        if hinv is None:
            raise DimensionError("metric trace needs the inverse metric")
        # h^{p qbar} = M[q, p]
        p, q = letters[hol], letters[anti]
        rest = "".join(c for k, c in enumerate(letters) if k not in (first, second))
        return np.einsum(f"...{q}{p},...{''.join(sub_in)}->...{rest}", hinv, self.entries)


def _is_lower_holo(role: str) -> bool:
    return not role.endswith("bar") and not role.endswith("^")


@dataclass
class IdentityReport:
    """Residual statistics of one identity over a point sample.

    ``tolerance`` is ``None`` for identities that are only recorded, in which
    case the verdict is ``"not-applicable"``.
    """

    identity: str
    n: int
    points: int
    max_residual: float
    mean_residual: float
    tolerance: Optional[float]
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.tolerance is None:
            return "not-applicable"
        return "pass" if self.max_residual <= self.tolerance else "fail"

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    @classmethod
    def from_residuals(cls, identity: str, n: int, residuals, tolerance, **details) -> "IdentityReport":
        r = np.asarray(residuals, dtype=float).ravel()
        if r.size == 0:
            raise ValueError("no residuals")
        return cls(identity, n, int(r.size), float(np.max(r)), float(np.sum(r) / r.size),
                   None if tolerance is None else float(tolerance), dict(details))

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "n": self.n,
            "points": self.points,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tolerance": self.tolerance,
            "verdict": self.verdict,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)


def hermitian_inverse(h, rtol: float = 1e-12) -> np.ndarray:
    """Inverse of a (batch of) Hermitian positive-definite matrices.

    Raises :class:`MetricError` for indefinite or numerically singular input,
    reporting the condition number.
    """
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] != h.shape[-2]:
        raise DimensionError("metric must be square")
    eig = np.linalg.eigvalsh(h)
    lo, hi = eig[..., 0], eig[..., -1]
    if np.any(lo <= 0):
        raise MetricError(f"matrix is not positive definite (smallest eigenvalue {float(np.min(lo)):.3e})")
    cond = hi / lo
    if np.any(cond > 1e13):
        raise MetricError(f"matrix is near-singular (condition number {float(np.max(cond)):.3e})")
    inv = np.linalg.inv(h)
    inv = 0.5 * (inv + np.conj(np.swapaxes(inv, -1, -2)))
    return inv


def trace_lambda(eta, h=None, hinv=None) -> np.ndarray:
    """``Lambda_omega eta = sum h^{i jbar} eta_{i jbar}``; equals n for eta = omega."""
    c = _coeff(eta)
    M = hermitian_inverse(h) if hinv is None else hinv
    if c.shape[-1] != M.shape[-1]:
        raise DimensionError("form and metric dimensions differ")
    return np.einsum("...ji,...ij->...", M, c)


def form_norm_sq(alpha, h=None, hinv=None) -> np.ndarray:
    """Pointwise squared norm of a (1,0)-, (0,1)- or (1,1)-form.

    ``|a|^2 = h^{i jbar} a_i conj(a_j)`` and
    ``|eta|^2 = h^{i pbar} h^{q jbar} eta_{i jbar} conj(eta_{p qbar})``.
    """
    M = hermitian_inverse(h) if hinv is None else hinv
    if isinstance(alpha, Form01):
        alpha = alpha.conj()
    if isinstance(alpha, Form10):
        a = alpha.components
        if a.shape[-1] != M.shape[-1]:
            raise DimensionError("form and metric dimensions differ")
        val = np.einsum("...ji,...i,...j->...", M, a, np.conj(a))
        return np.real(val)
    c = _coeff(alpha)
    if c.shape[-1] != M.shape[-1]:
        raise DimensionError("form and metric dimensions differ")
    val = np.einsum("...pi,...jq,...ij,...pq->...", M, M, c, np.conj(c))
    return np.real(val)


def tensor4_norm_sq(t: Tensor4, hinv) -> np.ndarray:
    """Metric norm of a tensor with roles ``(i, jbar, k, lbar)``."""
    e = t.require(ROLES_CHERN)
    M = hinv
    val = np.einsum("...pi,...jq,...rk,...ls,...ijkl,...pqrs->...", M, M, M, M, e, np.conj(e))
    return np.real(val)


def sym2_norm_sq(s, hinv) -> np.ndarray:
    """Norm of a holomorphic 2-tensor ``s_{ij}``: ``h^{i pbar} h^{j qbar} s_ij conj(s_pq)``."""
    val = np.einsum("...pi,...qj,...ij,...pq->...", hinv, hinv, s, np.conj(s))
    return np.real(val)


def hodge_star_11_surface(eta, h=None, hinv=None) -> Form11:
    """Hodge star of a (1,1)-form on a surface: ``*eta = -eta + (Lambda eta) omega``."""
    c = _coeff(eta)
    h = np.asarray(h, dtype=complex)
    if c.shape[-1] != 2 or h.shape[-1] != 2:
        raise DimensionError("the (1,1) Hodge star formula holds only in complex dimension 2")
    lam = trace_lambda(c, h=h, hinv=hinv)
    return Form11(-c + lam[..., None, None] * h)
