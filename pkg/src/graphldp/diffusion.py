"""Interacting gradient diffusions on marked networks and their path tilt.

Dynamics: ``dx_v = d_v H(x) dt + sigma dB_v`` with the Hamiltonian

    H(x) = sum over ordered adjacent (v, u) of mu_{v,u} f(x_v - x_u; w_v, w_u)
           + sum_v g(x_v; w_v).

The tilt ``F`` expresses the path law as ``exp(n F)`` times the law of
``x(0) + sigma B``; every per-vertex term reads only the root, its
neighbours and the connecting edge marks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .core import MarkedGraph, RootedBall


class DivergenceError(FloatingPointError):
    """The Euler-Maruyama state became non-finite."""


class PotentialCheckError(ValueError):
    """Supplied derivatives disagree with finite differences of the potential."""


# ------------------------------------------------------------------ network


@dataclass
class Network:
    """Graph with interaction strengths ``mu`` (per oriented edge), media
    ``omega`` and initial conditions ``theta0`` (per vertex)."""

    n: int
    src: np.ndarray  # oriented edges (src -> dst), both orientations present
    dst: np.ndarray
    mu: np.ndarray
    omega: np.ndarray
    theta0: np.ndarray

    @classmethod
    def from_graph(cls, g: MarkedGraph, mu=None, omega=None, theta0=None) -> "Network":
        """Build from a skeleton; ``mu`` may be a dict on oriented edges or a
        constant, ``omega``/``theta0`` arrays or constants (default 0, mu 1)."""
        pairs = [(u, v) for u, v in g.edges] + [(v, u) for u, v in g.edges]
        src = np.array([p[0] for p in pairs], dtype=np.int64)
        dst = np.array([p[1] for p in pairs], dtype=np.int64)
        if mu is None:
            mu = 1.0
        if isinstance(mu, dict):
            mu_arr = np.array([float(mu[p]) for p in pairs])
        else:
            mu_arr = np.full(len(pairs), float(mu))
        om = np.broadcast_to(np.asarray(0.0 if omega is None else omega, dtype=float), (g.n,)).copy()
        th = np.broadcast_to(np.asarray(0.0 if theta0 is None else theta0, dtype=float), (g.n,)).copy()
        return cls(g.n, src, dst, mu_arr, om, th)

    @classmethod
    def from_marked(cls, g: MarkedGraph) -> "Network":
        """Vertex marks ``(omega, theta0)`` and edge marks ``mu``."""
        om = [float(m[0]) for m in g.vertex_marks]
        th = [float(m[1]) for m in g.vertex_marks]
        return cls.from_graph(g, {k: float(v) for k, v in g.edge_marks.items()}, om, th)

    def to_graph(self, paths: np.ndarray | None = None) -> MarkedGraph:
        """Marked graph with vertex marks ``(omega, theta0)`` or ``(omega, path)``."""
        half = len(self.src) // 2
        edges = list(zip(self.src[:half].tolist(), self.dst[:half].tolist()))
        em = {(int(a), int(b)): float(m) for a, b, m in zip(self.src, self.dst, self.mu)}
        if paths is None:
            vm = [(float(w), float(t)) for w, t in zip(self.omega, self.theta0)]
        else:
            vm = [(float(w), paths[:, v]) for v, w in enumerate(self.omega)]
        return MarkedGraph(self.n, edges, vm, em)

    def relabel(self, perm) -> "Network":
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return Network(self.n, perm[self.src], perm[self.dst], self.mu.copy(), self.omega[inv], self.theta0[inv])


def network_from_dict(doc: dict) -> Network:
    """``{"n", "edges", "mu": number | [[u, v, mu], ...], "omega", "theta0"}``."""
    g = MarkedGraph(int(doc["n"]), [tuple(e) for e in doc.get("edges", [])])
    mu = doc.get("mu", 1.0)
    if isinstance(mu, list):
        mu = {(int(a), int(b)): float(m) for a, b, m in mu}
    return Network.from_graph(g, mu, doc.get("omega"), doc.get("theta0"))


def network_to_dict(net: Network) -> dict:
    half = len(net.src) // 2
    return {
        "n": net.n,
        "edges": [[int(a), int(b)] for a, b in zip(net.src[:half], net.dst[:half])],
        "mu": [[int(a), int(b), float(m)] for a, b, m in zip(net.src, net.dst, net.mu)],
        "omega": net.omega.tolist(),
        "theta0": net.theta0.tolist(),
    }


# --------------------------------------------------------------- potentials


Pair = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
Field = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class Potentials:
    """Pair potential ``f(x; w, w')`` and external field ``g(x; w)`` with
    first and second ``x``-derivatives, all numpy-vectorised."""

    f: Pair
    df: Pair
    d2f: Pair
    g: Field
    dg: Field
    d2g: Field
    name: str = "custom"

    def check(self, rng: np.random.Generator | None = None, n: int = 64, h: float = 1e-4,
              tol: float = 1e-5) -> float:
        """Compare derivatives with central differences at random points.

        Returns the worst relative error; raises ``PotentialCheckError`` above ``tol``.
        """
        rng = np.random.default_rng(0) if rng is None else rng
        x = rng.uniform(-2, 2, n)
        w1 = rng.uniform(-1, 1, n)
        w2 = rng.uniform(-1, 1, n)
        worst = 0.0
        pairs = [
            (self.df(x, w1, w2), (self.f(x + h, w1, w2) - self.f(x - h, w1, w2)) / (2 * h)),
            (self.d2f(x, w1, w2), (self.df(x + h, w1, w2) - self.df(x - h, w1, w2)) / (2 * h)),
            (self.dg(x, w1), (self.g(x + h, w1) - self.g(x - h, w1)) / (2 * h)),
            (self.d2g(x, w1), (self.dg(x + h, w1) - self.dg(x - h, w1)) / (2 * h)),
        ]
        for exact, approx in pairs:
            exact = np.broadcast_to(exact, x.shape)
            err = np.abs(exact - approx) / np.maximum(1.0, np.abs(exact))
            worst = max(worst, float(err.max()))
        if worst > tol:
            raise PotentialCheckError(f"derivative mismatch {worst:.3g} for potentials {self.name!r}")
        return worst

    @classmethod
    def register(cls, *args, **kw) -> "Potentials":
        """Construct and validate against finite differences."""
        pot = cls(*args, **kw)
        pot.check()
        return pot


def _zero_pair(x, a, b):
    return np.zeros_like(x)


def _zero_field(x, a):
    return np.zeros_like(x)


def zero_potentials() -> Potentials:
    return Potentials(_zero_pair, _zero_pair, _zero_pair, _zero_field, _zero_field, _zero_field, "zero")


def kuramoto(scale: float = 1.0) -> Potentials:
    """``f = -(scale/2) cos x``, ``g = 0``: with unit strengths the drift is
    ``scale * sum_u sin(x_v - x_u)``."""
    c = scale / 2
    return Potentials.register(
        lambda x, a, b: -c * np.cos(x),
        lambda x, a, b: c * np.sin(x),
        lambda x, a, b: c * np.cos(x),
        _zero_field, _zero_field, _zero_field, f"kuramoto:{scale}",
    )


def sine(scale: float = 0.1) -> Potentials:
    """Bounded ``f(x) = g(x) = scale * sin x``."""
    return Potentials.register(
        lambda x, a, b: scale * np.sin(x),
        lambda x, a, b: scale * np.cos(x),
        lambda x, a, b: -scale * np.sin(x),
        lambda x, a: scale * np.sin(x),
        lambda x, a: scale * np.cos(x),
        lambda x, a: -scale * np.sin(x),
        f"sine:{scale}",
    )


def quadratic(a: float = 1.0, b: float = 0.0) -> Potentials:
    """``f = a x^2``, ``g = b x^2 / 2`` (used for closed-form checks)."""
    return Potentials.register(
        lambda x, u, v: a * x * x,
        lambda x, u, v: 2 * a * x,
        lambda x, u, v: np.full_like(x, 2 * a),
        lambda x, u: b * x * x / 2,
        lambda x, u: b * x,
        lambda x, u: np.full_like(x, float(b)),
        f"quadratic:{a},{b}",
    )


PRESETS = {"kuramoto": kuramoto, "zero": lambda scale=1.0: zero_potentials(), "sine": sine,
           "quadratic": quadratic}


def preset(name: str, scale: float = 1.0) -> Potentials:
    try:
        return PRESETS[name](scale)
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


# ---------------------------------------------------------------- mechanics


def _check_state(net: Network, x: np.ndarray):
    if x.shape[-1] != net.n:
        raise ValueError(f"state has {x.shape[-1]} coordinates, network has {net.n} vertices")


def vertex_energy(net: Network, x, pot: Potentials) -> np.ndarray:
    """Per-vertex ``F1_v = sum_u mu_{v,u} f(x_v - x_u) + g(x_v)``; sums to ``H``."""
    x = np.asarray(x, dtype=float)
    _check_state(net, x)
    out = pot.g(x, net.omega)
    if len(net.src):
        s, d = net.src, net.dst
        pair = net.mu * pot.f(x[..., s] - x[..., d], net.omega[s], net.omega[d])
        out = out + _scatter(pair, s, net.n)
    return out


def _scatter(vals: np.ndarray, idx: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(vals.shape[:-1] + (n,))
    np.add.at(out, (..., idx), vals)
    return out


def hamiltonian(net: Network, x, pot: Potentials):
    """``H(x)``; ``x`` may carry leading batch axes."""
    return vertex_energy(net, x, pot).sum(axis=-1)


def drift_all(net: Network, x, pot: Potentials) -> np.ndarray:
    """Gradient ``d_v H`` for every vertex."""
    x = np.asarray(x, dtype=float)
    _check_state(net, x)
    out = pot.dg(x, net.omega)
    if len(net.src):
        s, d = net.src, net.dst
        # edge (s -> d) contributes +f' to s and -f' to d
        val = net.mu * pot.df(x[..., s] - x[..., d], net.omega[s], net.omega[d])
        out = out + _scatter(val, s, net.n) - _scatter(val, d, net.n)
    return out


def drift(net: Network, x, pot: Potentials, v: int) -> float:
    """``d_v H(x) = sum_u mu_{v,u} f'(x_v - x_u; w_v, w_u)
    - sum_u mu_{u,v} f'(x_u - x_v; w_u, w_v) + g'(x_v; w_v)``."""
    return float(drift_all(net, x, pot)[..., v])


def curvature_all(net: Network, x, pot: Potentials) -> np.ndarray:
    """Diagonal second derivatives ``d_v^2 H``."""
    x = np.asarray(x, dtype=float)
    out = pot.d2g(x, net.omega)
    if len(net.src):
        s, d = net.src, net.dst
        val = net.mu * pot.d2f(x[..., s] - x[..., d], net.omega[s], net.omega[d])
        out = out + _scatter(val, s, net.n) + _scatter(val, d, net.n)
    return out


# --------------------------------------------------------------- simulation


@dataclass
class PathBundle:
    """Trajectories on the uniform grid ``t_k = k dt``.

    ``x`` has shape ``(..., K + 1, n)``; ``dB`` holds the standard Brownian
    increments ``(..., K, n)`` that drove the scheme.
    """

    dt: float
    x: np.ndarray
    dB: np.ndarray | None = None
    sigma: float = 1.0

    @property
    def K(self) -> int:
        return self.x.shape[-2] - 1

    @property
    def T(self) -> float:
        return self.K * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.K + 1) * self.dt


def _steps(T: float, dt: float) -> int:
    K = T / dt
    Ki = int(round(K))
    if dt <= 0 or abs(K - Ki) > 1e-9 * max(1.0, K):
        raise ValueError("T/dt must be a positive integer")
    return Ki


def simulate(net: Network, pot: Potentials, T: float, dt: float, rng: np.random.Generator,
             sigma: float = 1.0, n_samples: int | None = None, increments: np.ndarray | None = None,
             drift_on: bool = True) -> PathBundle:
    """Euler-Maruyama for ``dx = d_v H dt + sigma dB``.

    ``sigma = 0`` gives the deterministic gradient flow; ``increments``
    (standard normal times ``sqrt(dt)``) can drive the scheme with a given
    Brownian path; ``drift_on=False`` returns the reference ``x0 + sigma B``.
    """
    K = _steps(T, dt)
    shape = (K, net.n) if n_samples is None else (n_samples, K, net.n)
    if increments is None:
        dB = rng.normal(0.0, math.sqrt(dt), size=shape)
    else:
        dB = np.asarray(increments, dtype=float)
        if dB.shape[-2:] != (K, net.n):
            raise ValueError("increments do not match the time grid")
    x = np.empty(dB.shape[:-2] + (K + 1, net.n))
    x[..., 0, :] = net.theta0
    cur = x[..., 0, :].copy()
    for k in range(K):
        step = sigma * dB[..., k, :]
        if drift_on:
            step = step + drift_all(net, cur, pot) * dt
        cur = cur + step
        if not np.all(np.isfinite(cur)):
            raise DivergenceError(f"non-finite state at step {k + 1}")
        x[..., k + 1, :] = cur
    return PathBundle(dt, x, dB, sigma)


# --------------------------------------------------------------------- tilt


@dataclass(frozen=True)
class TiltTerms:
    F1_T: np.ndarray
    F1_0: np.ndarray
    F2: np.ndarray
    F3: np.ndarray


def tilt_terms_paths(net: Network, x: np.ndarray, pot: Potentials, dt: float) -> TiltTerms:
    """Per-vertex ``(F1_T, F1_0, F2, F3)`` for paths ``x`` of shape ``(..., K+1, n)``.

    Time integrals are left-Riemann sums on the grid.
    """
    x = np.asarray(x, dtype=float)
    F1_T = vertex_energy(net, x[..., -1, :], pot)
    F1_0 = vertex_energy(net, x[..., 0, :], pot)
    left = x[..., :-1, :]
    F2 = (drift_all(net, left, pot) ** 2).sum(axis=-2) * dt
    F3 = curvature_all(net, left, pot).sum(axis=-2) * dt
    return TiltTerms(F1_T, F1_0, F2, F3)


def tilt_terms(b: RootedBall, pot: Potentials, dt: float) -> tuple[float, float, float, float]:
    """``(F1_T, F1_0, F2, F3)`` at the root of a ball with path marks.

    Vertex marks are ``(omega, path array)``, edge marks the strengths ``mu``.
    Only the root, its neighbours and the root edges are read.
    """
    g = b.graph
    w0, x0 = g.vertex_marks[0]
    x0 = np.asarray(x0, dtype=float)
    nbrs = g.adj[0]
    K = len(x0) - 1
    f1 = pot.g(x0, np.full_like(x0, w0))
    d1 = pot.dg(x0, np.full_like(x0, w0))
    c2 = pot.d2g(x0, np.full_like(x0, w0))
    for u in nbrs:
        wu, xu = g.vertex_marks[u]
        xu = np.asarray(xu, dtype=float)
        if len(xu) != K + 1:
            raise ValueError("paths on the ball do not share a time grid")
        mou, muo = float(g.edge_marks[(0, u)]), float(g.edge_marks[(u, 0)])
        a, c = np.full_like(x0, w0), np.full_like(x0, wu)
        f1 = f1 + mou * pot.f(x0 - xu, a, c)
        d1 = d1 + mou * pot.df(x0 - xu, a, c) - muo * pot.df(xu - x0, c, a)
        c2 = c2 + mou * pot.d2f(x0 - xu, a, c) + muo * pot.d2f(xu - x0, c, a)
    F2 = float((d1[:-1] ** 2).sum() * dt)
    F3 = float(c2[:-1].sum() * dt)
    return float(f1[-1]), float(f1[0]), F2, F3


def tilt_from_terms(t: TiltTerms, sigma: float, convention: str = "girsanov"):
    """Average the per-vertex terms into ``F`` (batch axes preserved).

    ``convention="girsanov"`` gives the normalised change of measure for
    ``dx = grad H dt + sigma dB`` against ``x0 + sigma B``:
    ``F = -(1/sigma^2) mean_v[-(F1_T - F1_0) + F2/2 + sigma^2 F3/2]``.
    ``convention="literal"`` evaluates
    ``-(1/sigma^2) mean_v[F1_T - F1_0 + F2/2 + F3/2]`` for comparison.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    dF1 = t.F1_T - t.F1_0
    if convention == "girsanov":
        per = -dF1 + 0.5 * t.F2 + 0.5 * sigma**2 * t.F3
    elif convention == "literal":
        per = dF1 + 0.5 * t.F2 + 0.5 * t.F3
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return -per.mean(axis=-1) / sigma**2


def tilt_F(net: Network, paths: PathBundle | np.ndarray, pot: Potentials, sigma: float = 1.0,
           dt: float | None = None, convention: str = "girsanov"):
    """Tilt functional ``F`` of the decorated network ``G (x) x``."""
    if isinstance(paths, PathBundle):
        x, dt = paths.x, paths.dt
    else:
        x = paths
        if dt is None:
            raise ValueError("dt is required for raw path arrays")
    return tilt_from_terms(tilt_terms_paths(net, x, pot, dt), sigma, convention)


@dataclass(frozen=True)
class GirsanovReport:
    mean: float
    ci: float
    std: float
    n_samples: int
    log_mean: float
    bias: float
    bias_ci: float
    level: float

    @property
    def covers_one(self) -> bool:
        return abs(self.mean - 1.0) <= self.ci

    def as_dict(self) -> dict:
        return dict(self.__dict__, covers_one=self.covers_one)


def girsanov_check(net: Network, pot: Potentials, sigma: float, T: float, dt: float, n_samples: int,
                   rng: np.random.Generator, level: float = 0.99, chunk: int = 2000,
                   convention: str = "girsanov") -> GirsanovReport:
    """Monte Carlo mean of ``exp(n F)`` over reference bundles ``x0 + sigma B``.

    Besides the plain mean and its CI, reports a discretisation-bias
    estimate: the mean of ``exp(n F) - L`` where ``L`` is the exact
    discrete-time likelihood ratio of the Euler scheme (mean exactly 1),
    which cancels most of the Monte Carlo noise.
    """
    K = _steps(T, dt)
    vals, cvs = [], []
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = np.broadcast_to(net.theta0, (m, net.n)).copy()
        F1_0 = vertex_energy(net, x, pot)
        F2 = np.zeros((m, net.n))
        F3 = np.zeros((m, net.n))
        logL = np.zeros(m)
        for _ in range(K):
            b = drift_all(net, x, pot)
            F2 += b * b * dt
            F3 += curvature_all(net, x, pot) * dt
            dB = rng.normal(0.0, math.sqrt(dt), size=(m, net.n))
            logL += (b * dB).sum(axis=-1) / sigma - (b * b).sum(axis=-1) * dt / (2 * sigma**2)
            x += sigma * dB
        terms = TiltTerms(vertex_energy(net, x, pot), F1_0, F2, F3)
        nF = net.n * tilt_from_terms(terms, sigma, convention)
        e = np.exp(nF)
        vals.append(e)
        cvs.append(e - np.exp(logL))
        done += m
    v = np.concatenate(vals)
    c = np.concatenate(cvs)
    z = stats.norm.ppf(0.5 + level / 2)
    sd = float(v.std(ddof=1)) if len(v) > 1 else math.inf
    sc = float(c.std(ddof=1)) if len(c) > 1 else math.inf
    mean = float(v.mean())
    return GirsanovReport(mean, float(z * sd / math.sqrt(len(v))), sd, len(v), math.log(mean) if mean > 0 else -math.inf,
                          float(c.mean()), float(z * sc / math.sqrt(len(c))), level)


def write_paths(path, bundle: PathBundle) -> None:
    """Flat little-endian float64: header ``n, K, dt`` then ``x`` row-major (``K+1`` rows of ``n``)."""
    x = np.asarray(bundle.x, dtype="<f8")
    if x.ndim != 2:
        raise ValueError("write one bundle at a time")
    header = np.array([x.shape[1], bundle.K, bundle.dt], dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header.tobytes())
        fh.write(x.tobytes())


def read_paths(path) -> PathBundle:
    raw = np.fromfile(path, dtype="<f8")
    n, K, dt = int(raw[0]), int(raw[1]), float(raw[2])
    x = raw[3:].reshape(K + 1, n)
    return PathBundle(dt, x)
