"""Second-order Wirtinger jets.

Every scalar is differentiated with respect to the 2n formally independent
variables ``w = (z_1, ..., z_n, conj(z_1), ..., conj(z_n))``.  A :class:`Jet`
stores the value, the gradient in ``w`` and the full Hessian in ``w``; all
arrays carry arbitrary leading batch dimensions so one jet can describe many
chart points at once.

:class:`MetricJet2` is the second-order jet of a Hermitian metric matrix and is
the single input of every curvature formula in the package.  Index layout is
documented in ``docs/conventions.md``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DimensionError, DomainError, MetricError


class Jet:
    """Forward-mode second-order jet over ``m`` independent variables.

    ``val`` has shape ``S``, ``grad`` shape ``S + (m,)`` and ``hess`` shape
    ``S + (m, m)``.  Leading shapes broadcast like numpy arrays.
    """

    __slots__ = ("val", "grad", "hess")

    def __init__(self, val, grad, hess):
        self.val = np.asarray(val, dtype=complex)
        self.grad = np.asarray(grad, dtype=complex)
        self.hess = np.asarray(hess, dtype=complex)

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    @classmethod
    def constant(cls, value, nvars: int) -> "Jet":
        return cls(value, np.zeros(nvars, complex), np.zeros((nvars, nvars), complex))

    @classmethod
    def variable(cls, values, index: int, nvars: int) -> "Jet":
        values = np.asarray(values, dtype=complex)
        grad = np.zeros(nvars, complex)
        grad[index] = 1.0
        return cls(values, grad, np.zeros((nvars, nvars), complex))

    def _chain(self, f0, f1, f2) -> "Jet":
        g = self.grad
        f1e = f1[..., None]
        hess = f1e[..., None] * self.hess + f2[..., None, None] * (g[..., :, None] * g[..., None, :])
        return Jet(f0, f1e * g, hess)

    def __add__(self, other):
        other = _as_jet(other, self.nvars)
        return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.val, -self.grad, -self.hess)

    def __sub__(self, other):
        return self + (-_as_jet(other, self.nvars))

    def __rsub__(self, other):
        return _as_jet(other, self.nvars) - self

    def __mul__(self, other):
        other = _as_jet(other, self.nvars)
        a, b = self, other
        av, bv = a.val[..., None], b.val[..., None]
        grad = av * b.grad + bv * a.grad
        outer = a.grad[..., :, None] * b.grad[..., None, :]
        hess = (av[..., None] * b.hess + bv[..., None] * a.hess
                + outer + np.swapaxes(outer, -1, -2))
        return Jet(a.val * b.val, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet":
        x = self.val
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / x
            return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        return self * _as_jet(other, self.nvars).reciprocal()

    def __rtruediv__(self, other):
        return _as_jet(other, self.nvars) * self.reciprocal()

    def __pow__(self, k: int) -> "Jet":
        if int(k) != k:
            raise ValueError("only integer powers keep jets exact")
        k = int(k)
        if k == 0:
            return Jet(np.ones_like(self.val), np.zeros_like(self.grad), np.zeros_like(self.hess))
        if k == 1:
            return Jet(self.val, self.grad, self.hess)
        if k < 0:
            return (self ** (-k)).reciprocal()
        x = self.val
        return self._chain(x**k, k * x ** (k - 1), k * (k - 1) * x ** (k - 2))

    def exp(self) -> "Jet":
        e = np.exp(self.val)
        return self._chain(e, e, e)

    def log(self) -> "Jet":
        x = self.val
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._chain(np.log(x), 1.0 / x, -1.0 / (x * x))

    def sqrt(self) -> "Jet":
        s = np.sqrt(self.val)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._chain(s, 0.5 / s, -0.25 / (s * s * s))

    def conj_swap(self) -> "Jet":
        """Jet of the complex conjugate function.

        Conjugation exchanges the roles of ``z_k`` and ``conj(z_k)``, so the
        variable axes are permuted as well as conjugated.
        """
        m = self.nvars
        n = m // 2
        perm = np.r_[np.arange(n, m), np.arange(n)]
        return Jet(np.conj(self.val), np.conj(self.grad[..., perm]),
                   np.conj(self.hess[..., perm[:, None], perm[None, :]]))

    def wirtinger(self) -> "WirtingerJet":
        n = self.nvars // 2
        g, H = self.grad, self.hess
        return WirtingerJet(self.val, g[..., :n], g[..., n:], H[..., :n, :n], H[..., :n, n:],
                            H[..., n:, n:])

    def __repr__(self):
        return f"Jet(val={self.val!r}, nvars={self.nvars})"


def _as_jet(x, nvars: int) -> Jet:
    if isinstance(x, Jet):
        return x
    return Jet.constant(x, nvars)


@dataclass(frozen=True)
class WirtingerJet:
    """Named view of a scalar jet split into holomorphic and antiholomorphic blocks."""

    value: np.ndarray
    d: np.ndarray  # d/dz^k
    dbar: np.ndarray  # d/dzbar^k
    dd: np.ndarray  # d2/dz^k dz^l
    ddbar: np.ndarray  # d2/dz^k dzbar^l
    dbardbar: np.ndarray  # d2/dzbar^k dzbar^l


@dataclass(frozen=True)
class MetricJet2:
    """Second-order jet of a Hermitian metric ``h[i, j] = h_{i jbar}``.

    Arrays (leading batch axes omitted)::

        h[i, j]                 h_{i jbar}
        dh[k, i, j]             d h_{i jbar} / d z^k
        ddh_mixed[k, l, i, j]   d2 h_{i jbar} / d z^k d zbar^l
        ddh_pure[k, l, i, j]    d2 h_{i jbar} / d z^k d z^l

    Antiholomorphic derivatives are reconstructed by conjugation, see
    :attr:`dbar_h` and :attr:`ddbar_pure`.
    """

    h: np.ndarray
    dh: np.ndarray
    ddh_mixed: np.ndarray
    ddh_pure: np.ndarray

    @property
    def n(self) -> int:
        return self.h.shape[-1]

    @property
    def batch_shape(self) -> tuple:
        return self.h.shape[:-2]

    @property
    def dbar_h(self) -> np.ndarray:
        """``[k, i, j] = d h_{i jbar} / d zbar^k = conj(d h_{j ibar} / d z^k)``."""
        return np.conj(np.swapaxes(self.dh, -1, -2))

    @property
    def ddbar_pure(self) -> np.ndarray:
        """``[k, l, i, j] = d2 h_{i jbar} / d zbar^k d zbar^l``."""
        return np.conj(np.swapaxes(self.ddh_pure, -1, -2))

    @classmethod
    def from_jet(cls, jet: Jet) -> "MetricJet2":
        """Assemble from a matrix-valued jet with value shape ``(..., n, n)``."""
        n = jet.val.shape[-1]
        if jet.nvars != 2 * n:
            raise DimensionError(f"jet has {jet.nvars} variables, expected {2 * n}")
        g = np.moveaxis(jet.grad, -1, -3)  # (..., m, n, n)
        H = np.moveaxis(jet.hess, (-2, -1), (-4, -3))  # (..., m, m, n, n)
        return cls(jet.val, g[..., :n, :, :], H[..., :n, n:, :, :], H[..., :n, :n, :, :])

    def to_jet(self) -> Jet:
        """Inverse of :meth:`from_jet`: a matrix-valued jet over ``(z, zbar)``."""
        n = self.n
        grad = np.concatenate([self.dh, self.dbar_h], axis=-3)
        mixed_bt = np.swapaxes(self.ddh_mixed, -3, -4)  # [l, k] -> d2/dzbar^l dz^k
        top = np.concatenate([self.ddh_pure, self.ddh_mixed], axis=-3)
        bottom = np.concatenate([mixed_bt, self.ddbar_pure], axis=-3)
        hess = np.concatenate([top, bottom], axis=-4)
        assert hess.shape[-4:] == (2 * n, 2 * n, n, n)
        return Jet(self.h, np.moveaxis(grad, -3, -1), np.moveaxis(hess, (-4, -3), (-2, -1)))

    def take(self, index) -> "MetricJet2":
        """Select batch entries with a numpy index."""
        return MetricJet2(self.h[index], self.dh[index], self.ddh_mixed[index], self.ddh_pure[index])

    def check(self, rtol: float = 1e-10) -> "MetricJet2":
        """Validate Hermitian symmetry and positive definiteness; return self."""
        h = self.h
        scale = np.max(np.abs(h), axis=(-2, -1), keepdims=True)
        herm = np.abs(h - np.conj(np.swapaxes(h, -1, -2)))
        if np.any(herm > rtol * np.maximum(scale, 1.0)):
            raise MetricError("metric matrix is not Hermitian")
        if not np.all(np.isfinite(h)):
            raise MetricError("metric is not finite at some point")
        eig = np.linalg.eigvalsh(h)
        bad = eig[..., 0] <= 0
        if np.any(bad):
            raise MetricError(
                f"metric is not positive definite at {int(np.sum(bad))} point(s); "
                f"smallest eigenvalue {float(np.min(eig[..., 0])):.3e}")
        for name in ("dh", "ddh_mixed", "ddh_pure"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise MetricError(f"non-finite {name} in metric jet")
        return self


@dataclass(frozen=True)
class MetricField:
    """A named metric component field with an exact jet evaluator.

    ``jet_fn`` maps complex points of shape ``(N, n)`` to a :class:`MetricJet2`
    with batch shape ``(N,)``.  ``matrix_fn`` evaluates only ``h`` and is used
    by the finite-difference oracle; it defaults to the value part of the jet.
    ``valid`` returns a boolean mask of points where the field may be
    evaluated.
    """

    n: int
    name: str
    jet_fn: Callable[[np.ndarray], MetricJet2]
    matrix_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    valid: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def matrix(self, points) -> np.ndarray:
        points = _as_points(points, self.n)
        if self.matrix_fn is not None:
            return self.matrix_fn(points)
        return self.jet_fn(points).h


def _as_points(points, n: int) -> np.ndarray:
    pts = np.asarray(points, dtype=complex)
    if pts.shape[-1] != n:
        raise DimensionError(f"point has {pts.shape[-1]} coordinates, field has dimension {n}")
    return pts


def eval_jet(field: MetricField, points, check: bool = True) -> MetricJet2:
    """Exact jet of ``field`` at ``points`` (shape ``(n,)`` or ``(N, n)``)."""
    pts = _as_points(points, field.n)
    single = pts.ndim == 1
    batch = pts.reshape(-1, field.n)
    if field.valid is not None:
        ok = np.asarray(field.valid(batch))
        if not np.all(ok):
            bad = batch[~ok][0]
            raise DomainError(f"point {bad} is outside the validity domain of {field.name}")
    with np.errstate(all="ignore"):
        jet = field.jet_fn(batch)
    if check:
        jet.check()
    if single:
        return jet.take(0)
    return MetricJet2(*(a.reshape(pts.shape[:-1] + a.shape[1:])
                        for a in (jet.h, jet.dh, jet.ddh_mixed, jet.ddh_pure)))


def fd_jet(h_fn: Callable[[np.ndarray], np.ndarray], point, step: float = 1e-4,
           richardson: bool = True, valid: Optional[Callable] = None) -> MetricJet2:
    """Finite-difference jet of a pointwise metric evaluator.

    Central differences in the 2n real coordinates ``(x, y)`` with
    ``z = x + i y``, optionally improved by one Richardson level
    (steps ``step`` and ``step / 2``), then converted to Wirtinger derivatives
    ``d/dz = (d/dx - i d/dy) / 2``.  Used only as an independent oracle.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    p = np.asarray(point, dtype=complex)
    if p.ndim != 1:
        raise DimensionError("fd_jet takes a single point")
    n = p.shape[0]
    m = 2 * n
    basis = np.concatenate([np.eye(n), 1j * np.eye(n)], axis=0).astype(complex)  # real directions

    def derivatives(s):
        # stencil: p, p +- s e_a, p +- s e_a +- s e_b (a < b)
        shifts = [np.zeros(n, complex)]
        for a in range(m):
            shifts += [s * basis[a], -s * basis[a]]
        pairs = [(a, b) for a in range(m) for b in range(a + 1, m)]
        for a, b in pairs:
            for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                shifts.append(s * (sa * basis[a] + sb * basis[b]))
        pts = p[None, :] + np.array(shifts)
        if valid is not None and not np.all(valid(pts)):
            raise DomainError("finite-difference stencil leaves the validity domain")
        vals = np.asarray(h_fn(pts), dtype=complex)
        f0 = vals[0]
        grad = np.empty((m, n, n), complex)
        hess = np.empty((m, m, n, n), complex)
        for a in range(m):
            fp, fm = vals[1 + 2 * a], vals[2 + 2 * a]
            grad[a] = (fp - fm) / (2 * s)
            hess[a, a] = (fp - 2 * f0 + fm) / (s * s)
        off = 1 + 2 * m
        for q, (a, b) in enumerate(pairs):
            fpp, fpm, fmp, fmm = vals[off + 4 * q: off + 4 * q + 4]
            hess[a, b] = hess[b, a] = (fpp - fpm - fmp + fmm) / (4 * s * s)
        return f0, grad, hess

    f0, grad, hess = derivatives(step)
    if richardson:
        _, grad2, hess2 = derivatives(step / 2)
        grad = (4 * grad2 - grad) / 3
        hess = (4 * hess2 - hess) / 3

    gx, gy = grad[:n], grad[n:]
    dz = 0.5 * (gx - 1j * gy)
    hxx, hxy, hyx, hyy = hess[:n, :n], hess[:n, n:], hess[n:, :n], hess[n:, n:]
    # d/dz^k d/dzbar^l = (dx_k - i dy_k)(dx_l + i dy_l) / 4
    mixed = 0.25 * (hxx + 1j * hxy - 1j * hyx + hyy)
    pure = 0.25 * (hxx - 1j * hxy - 1j * hyx - hyy)
    return MetricJet2(f0, dz, mixed, pure)


def jet_relative_error(a: MetricJet2, b: MetricJet2) -> dict:
    """Largest componentwise deviation per jet array, scaled by the array's magnitude."""
    out = {}
    for name in ("h", "dh", "ddh_mixed", "ddh_pure"):
        x, y = getattr(a, name), getattr(b, name)
        scale = max(float(np.max(np.abs(x))), 1.0)
        out[name] = float(np.max(np.abs(x - y))) / scale
    return out
