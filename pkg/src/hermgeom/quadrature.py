"""Integration of top-degree densities over chart domains.

Every integrand is a density against the Euclidean chart measure
``dV = prod dx_k dy_k``.  The conversions used throughout are

* ``omega^n / n! = 2^n det(h) dV``,
* ``eta^n = n! 2^n det(eta_{i jbar}) dV`` for a (1,1)-form ``eta``,
* ``dz^1 ^ dz^2 ^ dzbar^1 ^ dzbar^2 = 4 dV``.

Monte Carlo estimates carry a standard error; product-grid estimates report the
difference to a grid with half as many nodes per axis in its place.  Sample
evaluation may use a thread pool (``HERMGEOM_THREADS``), but chunks are reduced
in a fixed order so the result depends only on the seed and sample count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .connections import inverse
from .curvature import chern_ricci, det_connection
from .errors import DimensionError, HypothesisError, IntegrationError
from .identities import (adjoint_torsion_norm_sq, ddbar_omega_residual, dd_star_omega, whe_check)
from .jets import MetricField, MetricJet2, eval_jet
from .tensors import IdentityReport, form_norm_sq, trace_lambda

THREADS_ENV = "HERMGEOM_THREADS"
VOLUME_CONVENTION = "omega^n/n! = 2^n det(h) dV_euclid"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


# --------------------------------------------------------------------------
# domains

def _gauss(m: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def _product(axes):
    """Tensor product of 1-d rules ``[(nodes, weights), ...]``."""
    nodes = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    weights = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    X = np.stack([x.ravel() for x in nodes], axis=-1)
    W = np.prod(np.stack([w.ravel() for w in weights], axis=-1), axis=-1)
    return X, W


def _real_to_complex(X, n):
    return X[:, :n] + 1j * X[:, n:]


@dataclass(frozen=True)
class Box:
    """Chart box ``[lo, hi]^(2n)`` in the real coordinates ``(x, y)``."""

    n: int
    lo: float = -0.5
    hi: float = 0.5
    kind: str = field(default="box", init=False)

    def euclidean_volume(self) -> float:
        return float((self.hi - self.lo) ** (2 * self.n))

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=complex)
        re = np.concatenate([p.real, p.imag], axis=-1)
        return np.all((re >= self.lo) & (re <= self.hi), axis=-1)

    def sample_uniform(self, count: int, rng) -> np.ndarray:
        X = rng.uniform(self.lo, self.hi, size=(count, 2 * self.n))
        return _real_to_complex(X, self.n)

    def mc_sample(self, count: int, rng, sampler: Optional[str] = None):
        if sampler not in (None, "uniform"):
            raise ValueError(f"unknown sampler {sampler!r} for a box")
        return self.sample_uniform(count, rng), np.full(count, self.euclidean_volume())

    def grid(self, nodes: int):
        X, W = _product([_gauss(nodes, self.lo, self.hi)] * (2 * self.n))
        return _real_to_complex(X, self.n), W

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class TorusCell:
    """Fundamental cell of ``C^n / (sum a_k Z e_k + sum b_k Z i e_k)``.

    ``periods`` lists ``a_1..a_n`` followed by ``b_1..b_n``.
    """

    n: int
    periods: tuple = ()
    kind: str = field(default="torus", init=False)

    def __post_init__(self):
        p = tuple(float(x) for x in self.periods) or (1.0,) * (2 * self.n)
        if len(p) != 2 * self.n or min(p) <= 0:
            raise DimensionError(f"torus needs {2 * self.n} positive periods, got {self.periods!r}")
        object.__setattr__(self, "periods", p)

    def euclidean_volume(self) -> float:
        return float(math.prod(self.periods))

    def contains(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=complex)
        re = np.concatenate([p.real, p.imag], axis=-1)
        return np.all((re >= 0) & (re <= np.array(self.periods)), axis=-1)

    def sample_uniform(self, count: int, rng) -> np.ndarray:
        X = rng.uniform(0.0, 1.0, size=(count, 2 * self.n)) * np.array(self.periods)
        return _real_to_complex(X, self.n)

    def mc_sample(self, count: int, rng, sampler: Optional[str] = None):
        if sampler not in (None, "uniform"):
            raise ValueError(f"unknown sampler {sampler!r} for a torus cell")
        return self.sample_uniform(count, rng), np.full(count, self.euclidean_volume())

    def grid(self, nodes: int):
        X, W = _product([_gauss(nodes, 0.0, p) for p in self.periods])
        return _real_to_complex(X, self.n), W

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "periods": list(self.periods)}


@dataclass(frozen=True)
class HopfAnnulus:
    """Shell ``{r_min <= |z| <= factor * r_min}``, a fundamental domain for ``z ~ factor * z``.

    Monte Carlo samplers:

    ``"log-radial"`` (default)
        ``log|z|`` uniform and the direction uniform on the sphere; the sample
        weight is ``log(factor) * area(S^(2n-1)) * |z|^(2n)``, which makes any
        density homogeneous of degree ``-2n`` (such as the Hopf volume form)
        a constant.
    ``"uniform"``
        uniform in Euclidean measure on the shell.
    """

    n: int = 2
    r_min: float = 1.0
    factor: float = 2.0
    kind: str = field(default="hopf_annulus", init=False)

    def __post_init__(self):
        if self.r_min <= 0 or self.factor <= 1:
            raise ValueError("annulus needs r_min > 0 and factor > 1")

    @property
    def r_max(self) -> float:
        return self.r_min * self.factor

    def _sphere_area(self) -> float:
        return 2 * math.pi ** self.n / math.factorial(self.n - 1)

    def euclidean_volume(self) -> float:
        m = 2 * self.n
        return math.pi ** self.n / math.factorial(self.n) * (self.r_max ** m - self.r_min ** m)

    def contains(self, points) -> np.ndarray:
        r = np.linalg.norm(np.asarray(points, dtype=complex), axis=-1)
        return (r >= self.r_min) & (r <= self.r_max)

    def _directions(self, count, rng):
        g = rng.standard_normal((count, 2 * self.n))
        g /= np.linalg.norm(g, axis=-1, keepdims=True)
        return _real_to_complex(g, self.n)

    def sample_uniform(self, count: int, rng) -> np.ndarray:
        m = 2 * self.n
        u = rng.uniform(0.0, 1.0, size=count)
        r = (self.r_min ** m + u * (self.r_max ** m - self.r_min ** m)) ** (1.0 / m)
        return r[:, None] * self._directions(count, rng)

    def mc_sample(self, count: int, rng, sampler: Optional[str] = None):
        sampler = sampler or "log-radial"
        if sampler == "uniform":
            return self.sample_uniform(count, rng), np.full(count, self.euclidean_volume())
        if sampler != "log-radial":
            raise ValueError(f"unknown sampler {sampler!r} for a Hopf annulus")
        L = math.log(self.factor)
        r = self.r_min * np.exp(L * rng.uniform(0.0, 1.0, size=count))
        pts = r[:, None] * self._directions(count, rng)
        return pts, L * self._sphere_area() * r ** (2 * self.n)

    def grid(self, nodes: int):
        """Product rule in ``(log r, alpha, phi1, phi2)`` with ``z = r (cos(alpha) e^{i phi1}, sin(alpha) e^{i phi2})``."""
        if self.n != 2:
            raise DimensionError("the annulus product grid is implemented for n = 2")
        t = _gauss(nodes, math.log(self.r_min), math.log(self.r_max))
        a = _gauss(nodes, 0.0, math.pi / 2)
        phi = (2 * math.pi * (np.arange(nodes) + 0.5) / nodes, np.full(nodes, 2 * math.pi / nodes))
        X, W = _product([t, a, phi, phi])
        r = np.exp(X[:, 0])
        al = X[:, 1]
        pts = np.stack([r * np.cos(al) * np.exp(1j * X[:, 2]), r * np.sin(al) * np.exp(1j * X[:, 3])], axis=-1)
        # dV = r^3 cos(a) sin(a) dr da dphi1 dphi2 and dr = r dt
        return pts, W * r ** 4 * np.cos(al) * np.sin(al)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "r_min": self.r_min, "factor": self.factor}


Domain = Box | TorusCell | HopfAnnulus


# --------------------------------------------------------------------------
# estimates

@dataclass
class IntegralEstimate:
    value: float
    stderr: float
    samples: int
    scheme: str
    convention: str = VOLUME_CONVENTION
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"value": self.value, "stderr": self.stderr, "samples": self.samples,
             "scheme": self.scheme, "convention": self.convention}
        d.update(self.extra)
        return d


Integrand = Callable[[np.ndarray, Optional[MetricJet2]], np.ndarray]


def _as_real(vals) -> np.ndarray:
    vals = np.asarray(vals)
    if np.iscomplexobj(vals):
        scale = np.maximum(1.0, np.abs(vals.real))
        if np.any(np.abs(vals.imag) > 1e-8 * scale):
            raise IntegrationError("integrand has a non-negligible imaginary part")
        vals = vals.real
    return np.asarray(vals, dtype=float)


def _evaluate(field: Optional[MetricField], integrand: Integrand, points, chunk: int, threads: int):
    starts = range(0, len(points), chunk)

    def work(s):
        p = points[s:s + chunk]
        jet = eval_jet(field, p) if field is not None else None
        v = _as_real(integrand(p, jet))
        return v if v.ndim == 2 else v[:, None]

    if threads > 1 and len(points) > chunk:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    vals = np.concatenate(parts, axis=0)
    if not np.all(np.isfinite(vals)):
        raise IntegrationError("integrand produced non-finite values")
    return vals


def _grid_nodes(samples: int, dims: int) -> int:
    return max(2, int(round(samples ** (1.0 / dims))))


def integrate_columns(field: Optional[MetricField], domain, integrand: Integrand, samples: int = 10_000,
                      seed: int = 0, scheme: str = "mc", sampler: Optional[str] = None,
                      chunk: int = 4096, threads: Optional[int] = None):
    """Integrate one or several densities on a shared sample.

    ``integrand(points, jet)`` returns shape ``(N,)`` or ``(N, K)``.  Returns
    ``(estimates, weighted_values)`` where ``weighted_values`` holds the
    per-sample contributions (MC) or ``None`` (grid).
    """
    threads = default_threads() if threads is None else threads
    if samples < 2:
        raise ValueError("need at least two samples")
    if scheme == "mc":
        rng = np.random.default_rng(seed)
        pts, w = domain.mc_sample(samples, rng, sampler)
        vals = _evaluate(field, integrand, pts, chunk, threads) * w[:, None]
        mean = np.sum(vals, axis=0) / samples
        se = np.std(vals, axis=0, ddof=1) / math.sqrt(samples)
        label = "mc" if sampler is None else f"mc:{sampler}"
        ests = [IntegralEstimate(float(m), float(s), samples, label) for m, s in zip(mean, se)]
        return ests, vals
    if scheme == "grid":
        m = _grid_nodes(samples, 2 * domain.n)
        pts, w = domain.grid(m)
        fine = np.sum(_evaluate(field, integrand, pts, chunk, threads) * w[:, None], axis=0)
        pc, wc = domain.grid(max(2, m // 2))
        coarse = np.sum(_evaluate(field, integrand, pc, chunk, threads) * wc[:, None], axis=0)
        ests = [IntegralEstimate(float(f), float(abs(f - c)), len(pts), "grid", extra={"nodes_per_axis": m})
                for f, c in zip(fine, coarse)]
        return ests, None
    raise ValueError(f"unknown scheme {scheme!r}")


def integrate_top_form(field: Optional[MetricField], domain, integrand: Integrand, samples: int = 10_000,
                       seed: int = 0, scheme: str = "mc", sampler: Optional[str] = None,
                       chunk: int = 4096, threads: Optional[int] = None) -> IntegralEstimate:
    """Integrate a single density (against ``dV_euclid``) over ``domain``."""
    ests, _ = integrate_columns(field, domain, integrand, samples, seed, scheme, sampler, chunk, threads)
    if len(ests) != 1:
        raise ValueError("integrand returned several columns; use integrate_columns")
    return ests[0]


# --------------------------------------------------------------------------
# densities

def volume_density(jet: MetricJet2) -> np.ndarray:
    """``omega^n / n!`` against ``dV_euclid``."""
    return 2.0 ** jet.n * np.real(np.linalg.det(jet.h))


def top_power_density(coeff) -> np.ndarray:
    """``eta^n`` against ``dV_euclid`` for ``eta = sqrt(-1) coeff_{i jbar} dz^i ^ dzbar^j``."""
    c = np.asarray(coeff)
    n = c.shape[-1]
    return math.factorial(n) * 2.0 ** n * np.linalg.det(c)


def c1n_density(jet: MetricJet2) -> np.ndarray:
    r1, _, _ = chern_ricci(jet)
    return top_power_density(r1.coeff)


def l2_lemma_densities(jet: MetricJet2) -> np.ndarray:
    """Columns ``|dbar dbar^* omega|^2``, ``|Lambda dbar dbar^* omega|^2``, ``|dbar^* omega|^4`` times the volume density."""
    M = inverse(jet)
    _, bb = dd_star_omega(jet, M)
    a = form_norm_sq(bb, hinv=M)
    b = np.abs(trace_lambda(bb, hinv=M)) ** 2
    c = adjoint_torsion_norm_sq(jet, M) ** 2
    return np.stack([a, b, c], axis=-1) * volume_density(jet)[..., None]


def chern_weil_densities(jet: MetricJet2, weights=(0.5, 0.5)) -> np.ndarray:
    """Columns ``Theta1^2``, ``W^2`` and the two terms of the binomial expansion of ``W^2``.

    ``W = (a_1 F_chern + a_2 F_lc) / a`` with ``a = a_1 + a_2``, where
    ``F_chern = Theta1`` and ``F_lc = eta^{2,0} + eta^{0,2} + eta^{1,1}`` are the
    curvatures of the two connections on the determinant line.  On a surface
    ``W^2 = a^{-2} [ (sum a_i R_i)^2 + C(2,2) C(2,1) eta_0^{2,0} ^ conj(eta_0^{2,0}) ]``
    with ``R_i`` the (1,1) parts and ``eta_0^{2,0} = a_2 eta^{2,0}``.
    """
    if jet.n != 2:
        raise DimensionError("the Chern-Weil comparison is implemented for surfaces")
    a1, a2 = (float(x) for x in weights)
    a = a1 + a2
    if a == 0:
        raise ValueError("weights must not sum to zero")
    M = inverse(jet)
    r1, _, _ = chern_ricci(jet, M)
    det = det_connection(jet, M)
    mix = a1 * r1.coeff + a2 * det.eta11.coeff
    term0 = top_power_density(mix) / a ** 2
    e0 = a2 * det.eta20[..., 0, 1]
    # (E dz1^dz2) ^ (conj(E) dzbar1^dzbar2) = 4 |E|^2 dV
    term1 = math.comb(2, 2) * math.comb(2, 1) * 4.0 * np.abs(e0) ** 2 / a ** 2
    theta_sq = top_power_density(r1.coeff)
    return np.stack([theta_sq, term0 + term1, term0, term1], axis=-1)


# --------------------------------------------------------------------------
# checks

def _normalized(est: IntegralEstimate, n: int) -> dict:
    s = (2 * math.pi) ** n
    return {"normalized_value": est.value / s, "normalized_stderr": est.stderr / s,
            "normalization": f"(2 pi)^-{n}"}


def intersection_number_c1(field: MetricField, domain, samples: int = 100_000, seed: int = 0,
                           scheme: str = "mc", sampler: Optional[str] = None,
                           threads: Optional[int] = None) -> IntegralEstimate:
    """``int Theta1^n`` over the domain (un-normalized), with the ``(2 pi)^-n`` value in ``extra``.

    ``extra["max_abs_det"]`` is the largest ``|det Theta1_{i jbar}|`` over the sample.
    """
    n = field.n
    chunk_max = []

    def integrand(p, jet):
        r1, _, _ = chern_ricci(jet)
        d = np.linalg.det(r1.coeff)
        chunk_max.append(float(np.max(np.abs(d))))
        return math.factorial(n) * 2.0 ** n * d

    est = integrate_top_form(field, domain, integrand, samples, seed, scheme, sampler, threads=threads)
    max_det = max(chunk_max)
    est.convention = "int Theta1^n, Theta1^n = n! 2^n det(Theta1) dV_euclid"
    est.extra.update(_normalized(est, n))
    est.extra["max_abs_det"] = max_det
    return est


def check_l2_hypotheses(field: MetricField, domain, points: int = 64, seed: int = 0,
                        tolerance: float = 1e-8) -> dict:
    """Gauduchon and weakly Hermitian-Einstein residuals on a point sample.

    Raises :class:`HypothesisError` naming the residual that fails.
    """
    if field.n != 2:
        raise DimensionError("the L2 lemma concerns surfaces")
    pts = domain.sample_uniform(points, np.random.default_rng(seed))
    jet = eval_jet(field, pts)
    res = {
        "gauduchon": float(np.max(np.abs(ddbar_omega_residual(jet)))),
        "whe_proportionality": whe_check(jet).proportionality_residual,
    }
    bad = {k: v for k, v in res.items() if not v <= tolerance}
    if bad:
        desc = ", ".join(f"{k} residual {v:.3e} > {tolerance:.1e}" for k, v in bad.items())
        raise HypothesisError(f"{field.name} is not a Gauduchon weakly Hermitian-Einstein surface: {desc}")
    return res


def _rel(a: float, b: float, floor: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


def l2_identity_check(field: MetricField, domain, samples: int = 100_000, seed: int = 0,
                      scheme: str = "mc", sampler: Optional[str] = None, tolerance: float = 0.02,
                      hypothesis_points: int = 64, hypothesis_tolerance: float = 1e-8,
                      threads: Optional[int] = None) -> IdentityReport:
    """Three-way comparison ``||dbar dbar^* omega||^2 = ||Lambda dbar dbar^* omega||^2 = (|d^* omega|^4, 1)``.

    The verdict uses the largest pairwise relative difference.  Values below
    ``1e-12`` times the domain's metric volume count as zero.
    """
    hyp = check_l2_hypotheses(field, domain, hypothesis_points, seed, hypothesis_tolerance)

    def integrand(p, jet):
        return np.concatenate([l2_lemma_densities(jet), volume_density(jet)[:, None]], axis=-1)

    ests, _ = integrate_columns(field, domain, integrand, samples, seed, scheme, sampler, threads=threads)
    vol = abs(ests[3].value)
    floor = 1e-12 * max(vol, 1.0)
    names = ("dbar_dbarstar_sq", "lambda_dbar_dbarstar_sq", "dstar_fourth")
    v = [e.value for e in ests[:3]]
    pairs = {f"{names[i]}~{names[j]}": _rel(v[i], v[j], floor) for i, j in ((0, 1), (0, 2), (1, 2))}
    se = {f"{names[i]}~{names[j]}": math.hypot(ests[i].stderr, ests[j].stderr) for i, j in ((0, 1), (0, 2), (1, 2))}
    details = {"estimates": {k: e.to_dict() for k, e in zip(names, ests)},
               "metric_volume": ests[3].to_dict(), "pairwise_relative": pairs,
               "pairwise_combined_stderr": se, "hypotheses": hyp}
    worst = max(pairs.values())
    return IdentityReport("l2_lemma", field.n, ests[0].samples, worst, worst, tolerance, details)


def chern_weil_check(field: MetricField, domain, weights=(0.5, 0.5), samples: int = 100_000,
                     seed: int = 0, scheme: str = "mc", sampler: Optional[str] = None,
                     atol: float = 1e-12, threads: Optional[int] = None) -> IdentityReport:
    """Compare ``int Theta1^2`` with ``int W^2`` on a shared sample.

    The residual is ``|int W^2 - int Theta1^2|``; the tolerance is three
    combined standard errors plus ``atol`` times
    ``int (|Theta1|^2 + |W^{1,1}|^2) omega^2/2``.  That floor covers round-off
    when both integrands vanish identically (as on the Hopf surface) and is
    negligible otherwise.
    """
    if field.n != 2:
        raise DimensionError("the Chern-Weil comparison is implemented for surfaces")

    a1, a2 = (float(x) for x in weights)

    def integrand(p, jet):
        d = chern_weil_densities(jet, weights)
        M = inverse(jet)
        r1, _, _ = chern_ricci(jet, M)
        w11 = (a1 * r1.coeff + a2 * det_connection(jet, M).eta11.coeff) / (a1 + a2)
        size = (form_norm_sq(r1, hinv=M) + form_norm_sq(w11, hinv=M)) * volume_density(jet)
        return np.concatenate([d, size[:, None]], axis=-1)

    ests, vals = integrate_columns(field, domain, integrand, samples, seed, scheme, sampler, threads=threads)
    theta, w, t0, t1, size = ests
    combined = math.hypot(theta.stderr, w.stderr)
    scale = size.value
    tol = 3 * combined + atol * scale
    diff = abs(w.value - theta.value)
    details = {"theta1_sq": theta.to_dict(), "w_sq": w.to_dict(),
               "w_sq_terms": {"l0": t0.to_dict(), "l1": t1.to_dict()},
               "combined_stderr": combined, "curvature_scale": scale,
               "weights": [float(x) for x in weights]}
    if vals is not None:
        details["paired_stderr"] = float(np.std(vals[:, 1] - vals[:, 0], ddof=1) / math.sqrt(samples))
    details.update({"theta1_sq_" + k: v for k, v in _normalized(theta, 2).items()})
    return IdentityReport("chern_weil", field.n, theta.samples, diff, diff, tol, details)


def scaling_invariance_residual(field: MetricField, points, factor: float = 2.0) -> float:
    """Largest relative deviation of ``vol(z) = factor^(2n) vol(factor z)``.

    Zero when the volume density descends to the quotient by ``z -> factor z``.
    """
    pts = np.asarray(points, dtype=complex)
    n = field.n
    a = 2.0 ** n * np.real(np.linalg.det(field.matrix(pts)))
    b = factor ** (2 * n) * 2.0 ** n * np.real(np.linalg.det(field.matrix(factor * pts)))
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
