"""Example metrics with exact jets, integration domains and recorded facts.

Every constructor runs an analytic-versus-finite-difference jet comparison
at 20 seeded points before returning (``verify=False`` skips it).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dsl import load_metric
from .errors import DimensionError, HermGeomError, MetricError
from .jets import Jet, MetricField, MetricJet2, eval_jet, fd_jet, jet_relative_error
from .quadrature import Box, HopfAnnulus, TorusCell

JET_CHECK_POINTS = 20
JET_CHECK_TOL = 1e-6
JET_CHECK_STEP = 1e-3


@dataclass(frozen=True)
class ZooEntry:
    """A named metric with its domain, parameters and expected values.

    ``known_facts`` maps a quantity to ``{"value": ..., "source": ...}``;
    ``properties`` lists structural flags such as ``"kahler"``,
    ``"gauduchon"``, ``"whe"``, ``"skew_lee"`` and ``"compact_quotient"``.
    """

    name: str
    n: int
    params: dict
    field: MetricField
    domain: object
    known_facts: dict = field(default_factory=dict)
    properties: frozenset = frozenset()

    def sample(self, count: int, seed: int = 0) -> np.ndarray:
        return self.domain.sample_uniform(count, np.random.default_rng(seed))

    def jet(self, points) -> MetricJet2:
        return eval_jet(self.field, points)

    def summary(self) -> dict:
        return {"name": self.name, "n": self.n, "params": _jsonable(self.params),
                "known_facts": _jsonable(self.known_facts)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def _fact(value, source):
    return {"value": value, "source": source}


def jet_check(field: MetricField, points, step: float = JET_CHECK_STEP) -> np.ndarray:
    """Worst componentwise relative error between exact and finite-difference jets, per point."""
    pts = np.asarray(points, dtype=complex)
    exact = eval_jet(field, pts)
    out = np.empty(len(pts))
    for q, p in enumerate(pts):
        fd = fd_jet(field.matrix, p, step=step, valid=field.valid)
        out[q] = max(jet_relative_error(exact.take(q), fd).values())
    return out


def _register(entry: ZooEntry, verify: bool, seed: int = 12345) -> ZooEntry:
    if verify:
        err = jet_check(entry.field, entry.sample(JET_CHECK_POINTS, seed))
        if not np.max(err) <= JET_CHECK_TOL:
            raise HermGeomError(f"zoo entry {entry.name}: analytic and finite-difference jets differ "
                                f"(relative error {np.max(err):.3e})")
    return entry


# --------------------------------------------------------------------------
# Hopf surface

def _hopf_jet(points, c):
    z = np.asarray(points, dtype=complex)
    zb = np.conj(z)
    r2 = np.real(np.sum(z * zb, axis=-1))[:, None, None]
    I = np.eye(2)
    h = c * I / r2
    dh = -c * zb[:, :, None, None] * I / r2[..., None] ** 2
    r2_4 = r2[..., None, None]
    mixed = c * I * (-np.eye(2)[:, :, None, None] / r2_4 ** 2
                     + 2 * (zb[:, :, None] * z[:, None, :])[..., None, None] / r2_4 ** 3)
    pure = c * I * 2 * (zb[:, :, None] * zb[:, None, :])[..., None, None] / r2_4 ** 3
    return MetricJet2(h.astype(complex), dh, mixed, pure)


def hopf(c: float = 4.0, verify: bool = True) -> ZooEntry:
    """Diagonal Hopf surface ``(C^2 \\ 0)/(z ~ 2z)`` with ``h = c delta / |z|^2``.

    ``Theta2 = omega / c``, ``|dbar^* omega|^2 = u = 1/c`` and ``lambda = 0``;
    ``c = 4`` gives ``Theta2 = omega / 4``.
    """
    if not c > 0:
        raise ValueError("Hopf normalization c must be positive")
    c = float(c)

    def valid(p):
        return np.sum(np.abs(np.asarray(p)) ** 2, axis=-1) > 0

    def matrix(p):
        p = np.asarray(p, dtype=complex)
        r2 = np.sum(np.abs(p) ** 2, axis=-1)
        return (c / r2)[..., None, None] * np.eye(2, dtype=complex)

    fld = MetricField(2, f"hopf(c={c:g})", lambda p: _hopf_jet(p, c), matrix, valid, {"c": c})
    facts = {
        "ricci2_over_omega": _fact(1 / c, "closed form; 1/4 at c = 4"),
        "einstein_function_u": _fact(1 / c, "closed form"),
        "adjoint_torsion_norm_sq": _fact(1 / c, "closed form T_i = -conj(z_i)/|z|^2"),
        "lambda": _fact(0.0, "u - |dbar^* omega|^2"),
        "c1_squared": _fact(0.0, "Theta1 has rank one everywhere"),
        "ddbar_omega": _fact(0.0, "Gauduchon"),
    }
    props = frozenset({"gauduchon", "whe", "skew_lee", "compact_quotient"})
    return _register(ZooEntry("hopf", 2, {"c": c}, fld, HopfAnnulus(2, 1.0, 2.0), facts, props), verify)


# --------------------------------------------------------------------------
# flat and Fubini-Study

def flat_torus(n: int = 2, lattice=None, verify: bool = True) -> ZooEntry:
    """``h = I`` on the cell of a rectangular lattice (``lattice`` = 2n periods, default all 1)."""
    if n < 1:
        raise DimensionError("dimension must be positive")
    dom = TorusCell(n, tuple(lattice) if lattice is not None else ())

    def jet_fn(p):
        N = len(p)
        h = np.broadcast_to(np.eye(n, dtype=complex), (N, n, n)).copy()
        return MetricJet2(h, np.zeros((N, n, n, n), complex), np.zeros((N, n, n, n, n), complex),
                          np.zeros((N, n, n, n, n), complex))

    fld = MetricField(n, f"flat_torus(n={n})", jet_fn, None, None, {"lattice": list(dom.periods)})
    zero = _fact(0.0, "flat")
    facts = {k: zero for k in ("ricci1", "ricci2", "lc_ricci1", "q", "torsion", "einstein_function_u",
                               "lambda", "c1n")}
    props = frozenset({"kahler", "gauduchon", "whe", "skew_lee", "compact_quotient", "flat"})
    return _register(ZooEntry("flat_torus", n, {"n": n, "lattice": list(dom.periods)}, fld, dom, facts, props),
                     verify)


def fubini_study_source(n: int) -> str:
    """DSL source for ``h_{i jbar} = d_i d_jbar log(1 + |z|^2)``."""
    s = "(1 + " + " + ".join(f"z{k}*conj(z{k})" for k in range(1, n + 1)) + ")"
    lines = []
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            delta = f"1/{s} - " if i == j else "-"
            lines.append(f"h{i}{j} = {delta}conj(z{i})*z{j}/{s}^2")
    return "\n".join(lines)


def fubini_study(n: int = 2, verify: bool = True) -> ZooEntry:
    """Fubini-Study metric of ``CP^n`` in the affine chart; jets come from the DSL."""
    if n < 1:
        raise DimensionError("dimension must be positive")
    fld = load_metric(fubini_study_source(n), n, name=f"fubini_study(n={n})")
    fld = MetricField(n, fld.name, fld.jet_fn, fld.matrix_fn, None, {"n": n})
    facts = {
        "ricci1_over_omega": _fact(float(n + 1), "Kahler-Einstein constant n + 1"),
        "einstein_function_u": _fact(float(n + 1), "Kahler-Einstein"),
        "lambda": _fact(float(n + 1), "|dbar^* omega|^2 = 0"),
        "torsion": _fact(0.0, "Kahler"),
    }
    props = frozenset({"kahler", "gauduchon", "whe", "skew_lee"})
    return _register(ZooEntry("fubini_study", n, {"n": n}, fld, Box(n, -1.0, 1.0), facts, props), verify)


# --------------------------------------------------------------------------
# generated metrics

def _hermitian_jet(P: Jet, eye_shift: float, amp: float) -> MetricJet2:
    """Jet of ``I * eye_shift + amp (P + P^H)`` for a matrix jet ``P``."""
    Q = P.conj_swap()
    val = P.val + np.swapaxes(Q.val, -1, -2)
    grad = P.grad + np.swapaxes(Q.grad, -2, -3)
    hess = P.hess + np.swapaxes(Q.hess, -3, -4)
    n = val.shape[-1]
    return MetricJet2.from_jet(Jet(eye_shift * np.eye(n) + amp * val, amp * grad, amp * hess))


def _min_eig(field: MetricField, points) -> float:
    return float(np.min(np.linalg.eigvalsh(field.matrix(points))))


def random_metric(n: int = 2, seed: int = 0, amplitude: float = 0.1, half_width: float = 0.5,
                  check_points: int = 10_000, max_tries: int = 50, verify: bool = True) -> ZooEntry:
    """``h = I + amplitude (P + P^H)`` with ``P`` a seeded matrix polynomial of degree <= 2 in ``(z, conj z)``.

    Positive definiteness is checked at ``check_points`` uniform points of the
    box ``[-half_width, half_width]^(2n)``; indefinite draws are rejected and
    redrawn from the same generator.
    """
    if n < 1:
        raise DimensionError("dimension must be positive")
    if not amplitude >= 0:
        raise ValueError("amplitude must be nonnegative")
    rng = np.random.default_rng(seed)
    m = 2 * n
    dom = Box(n, -half_width, half_width)

    def cn(*shape):
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)

    for attempt in range(max_tries):
        C0 = cn(n, n)
        C1 = cn(m, n, n) / np.sqrt(m)
        G = cn(m, m, n, n) / m
        C2 = 0.5 * (G + np.swapaxes(G, 0, 1))

        def poly(p, C0=C0, C1=C1, C2=C2):
            w = np.concatenate([p, np.conj(p)], axis=-1)
            ww = (w[..., :, None] * w[..., None, :]).reshape(w.shape[:-1] + (m * m,))
            val = C0 + (w @ C1.reshape(m, n * n) + ww @ C2.reshape(m * m, n * n)).reshape(w.shape[:-1] + (n, n))
            return w, val

        def jet_fn(p, poly=poly, C1=C1, C2=C2):
            p = np.asarray(p, dtype=complex)
            w, val = poly(p)
            grad = np.moveaxis(C1, 0, -1) + 2 * np.einsum("abij,...b->...ija", C2, w)
            hess = np.broadcast_to(2 * np.moveaxis(C2, (0, 1), (-2, -1)), val.shape + (m, m))
            return _hermitian_jet(Jet(val, grad, hess), 1.0, amplitude)

        def matrix(p, poly=poly):
            _, val = poly(np.asarray(p, dtype=complex))
            return np.eye(n) + amplitude * (val + np.conj(np.swapaxes(val, -1, -2)))

        params = {"n": n, "seed": seed, "amplitude": amplitude, "half_width": half_width}
        fld = MetricField(n, f"random_metric(n={n}, seed={seed}, amplitude={amplitude:g})", jet_fn, matrix,
                          None, dict(params, attempt=attempt))
        lo = _min_eig(fld, dom.sample_uniform(check_points, rng))
        if lo > 0:
            facts = {"min_eigenvalue_on_check_sample": _fact(lo, f"{check_points} uniform points")}
            return _register(ZooEntry("random_metric", n, params, fld, dom, facts, frozenset()), verify)
    raise MetricError(f"random_metric(n={n}, seed={seed}, amplitude={amplitude:g}): no positive definite "
                      f"draw in {max_tries} attempts; lower the amplitude")


def periodic_torus(n: int = 2, seed: int = 0, epsilon: float = 0.1, modes: int = 3,
                   verify: bool = True) -> ZooEntry:
    """Non-Kahler metric on the unit torus ``C^n / (Z^n + i Z^n)``.

    ``h = I + epsilon sum_m (B_m e_m + (B_m e_m)^H)`` with
    ``e_m = exp(2 pi i (p.x + q.y))`` for small integer frequencies ``(p, q)``.
    Curvature densities are nonzero pointwise while every characteristic
    number of the torus vanishes.
    """
    if n < 1:
        raise DimensionError("dimension must be positive")
    rng = np.random.default_rng(seed)
    dom = TorusCell(n)
    freqs, coeffs = [], []
    while len(freqs) < modes:
        pq = rng.integers(-1, 2, size=2 * n)
        if np.any(pq != 0) and not any(np.array_equal(pq, f) for f in freqs):
            freqs.append(pq)
            coeffs.append((rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / (2 * n))
    F = np.array(freqs, dtype=float)
    # exp(2 pi i (p.x + q.y)) = exp(kz.z + kzb.zbar)
    kz = 1j * np.pi * F[:, :n] + np.pi * F[:, n:]
    kzb = 1j * np.pi * F[:, :n] - np.pi * F[:, n:]
    K = np.concatenate([kz, kzb], axis=-1)  # (modes, 2n)
    B = np.array(coeffs)

    def jet_fn(p):
        p = np.asarray(p, dtype=complex)
        w = np.concatenate([p, np.conj(p)], axis=-1)
        e = np.exp(w @ K.T)  # (N, modes)
        val = np.einsum("Nm,mij->Nij", e, B)
        grad = np.einsum("Nm,ma,mij->Nija", e, K, B)
        hess = np.einsum("Nm,ma,mb,mij->Nijab", e, K, K, B)
        return _hermitian_jet(Jet(val, grad, hess), 1.0, epsilon)

    def matrix(p):
        p = np.asarray(p, dtype=complex)
        w = np.concatenate([p, np.conj(p)], axis=-1)
        val = np.einsum("...m,mij->...ij", np.exp(w @ K.T), B)
        return np.eye(n) + epsilon * (val + np.conj(np.swapaxes(val, -1, -2)))

    params = {"n": n, "seed": seed, "epsilon": epsilon, "modes": modes}
    fld = MetricField(n, f"periodic_torus(n={n}, seed={seed})", jet_fn, matrix, None, params)
    lo = _min_eig(fld, dom.sample_uniform(10_000, rng))
    if lo <= 0:
        raise MetricError(f"periodic_torus(seed={seed}): indefinite metric; lower epsilon")
    facts = {"c1n": _fact(0.0, "characteristic numbers of a torus vanish")}
    props = frozenset({"compact_quotient"})
    return _register(ZooEntry("periodic_torus", n, params, fld, dom, facts, props), verify)


# --------------------------------------------------------------------------
# registry

REGISTRY: dict[str, Callable[..., ZooEntry]] = {
    "hopf": hopf,
    "flat_torus": flat_torus,
    "fubini_study": fubini_study,
    "random_metric": random_metric,
    "periodic_torus": periodic_torus,
}


def get_entry(name: str, **params) -> ZooEntry:
    try:
        ctor = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown zoo entry {name!r}; available: {', '.join(sorted(REGISTRY))}") from None
    return ctor(**params)


def list_entries(verify: bool = False) -> list[dict]:
    """Summaries of every entry at its default parameters, in registry order."""
    return [ctor(verify=verify).summary() for ctor in REGISTRY.values()]
