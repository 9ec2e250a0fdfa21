"""Weight-distribution fitting: KDE marginals coupled by a Student-t copula.

Per phase cluster, each learned weight dimension gets a Gaussian-kernel CDF
estimate (Silverman bandwidth); the probability-integral-transformed sample
is fitted with a t-copula whose correlation comes from Kendall-tau inversion
and whose degrees of freedom are chosen by grid likelihood maximization
(with a Gaussian limit endpoint). Sampling inverts the KDE CDFs by
bisection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats
from scipy.special import gammaln, ndtr, ndtri

from .errors import FitError
from .phase import FEATURES_BY_PHASE, PhaseLabel
from .sirl import WeightVector

# u-space clip and bisection tolerance for the KDE CDF inverse
_U_CLIP = 1e-12
_U_TOL = 1e-10
_BRACKET_SIGMAS = 9.0
_DOF_GRID = (2.5,) + tuple(float(v) for v in range(3, 31)) + (math.inf,)
_MIN_EIGENVALUE = 1e-8


@dataclass(frozen=True)
class KdeMarginal:
    """Gaussian-kernel distribution estimate for one weight dimension."""

    sample_points: np.ndarray
    bandwidth: float

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise FitError(f"bandwidth must be > 0, got {self.bandwidth}")

    def cdf(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape)
        pts = self.sample_points
        h = self.bandwidth
        chunk = max(1, 2_000_000 // max(1, pts.size))
        for i in range(0, x.size, chunk):
            block = x[i:i + chunk]
            out[i:i + chunk] = ndtr((block[:, None] - pts[None, :]) / h).mean(axis=1)
        return out

    def inverse_cdf(self, u) -> np.ndarray:
        """Monotone bisection inverse, accurate to ~1e-10 in u-space."""
        u = np.clip(np.atleast_1d(np.asarray(u, dtype=float)), _U_CLIP, 1.0 - _U_CLIP)
        lo = np.full(u.shape, self.sample_points.min() - _BRACKET_SIGMAS * self.bandwidth)
        hi = np.full(u.shape, self.sample_points.max() + _BRACKET_SIGMAS * self.bandwidth)
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            c = self.cdf(mid)
            right = c < u
            lo = np.where(right, mid, lo)
            hi = np.where(right, hi, mid)
            if np.abs(c - u).max() < _U_TOL:
                break
        return 0.5 * (lo + hi)


def silverman_bandwidth(values: np.ndarray) -> float:
    """0.9 * min(std, IQR/1.34) * n^(-1/5); spread-robust rule of thumb."""
    n = values.size
    std = float(values.std(ddof=1)) if n > 1 else 0.0
    q75, q25 = np.percentile(values, [75, 25])
    iqr = float(q75 - q25)
    scale = min(std, iqr / 1.34) if iqr > 0 else std
    return 0.9 * scale * n ** (-0.2)


@dataclass(frozen=True)
class CopulaModel:
    phase: PhaseLabel
    feature_names: tuple[str, ...]
    marginals: tuple[KdeMarginal, ...]
    correlation: np.ndarray
    dof: float  # > 2; inf selects the Gaussian limit

    def __post_init__(self):
        if self.feature_names != FEATURES_BY_PHASE[self.phase]:
            raise FitError(
                f"features {self.feature_names} do not match phase {self.phase.value}"
            )
        d = len(self.feature_names)
        if self.correlation.shape != (d, d):
            raise FitError(f"correlation must be {d}x{d}")
        if not np.allclose(self.correlation, self.correlation.T, atol=1e-12):
            raise FitError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(self.correlation), 1.0, atol=1e-12):
            raise FitError("correlation matrix must have a unit diagonal")
        try:
            np.linalg.cholesky(self.correlation)
        except np.linalg.LinAlgError:
            raise FitError("correlation matrix must be positive definite") from None
        if not self.dof > 2:
            raise FitError(f"degrees of freedom must exceed 2, got {self.dof}")

    @property
    def dim(self) -> int:
        return len(self.feature_names)


def kendall_tau_matrix(data: np.ndarray) -> np.ndarray:
    d = data.shape[1]
    tau = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            t, _ = stats.kendalltau(data[:, i], data[:, j])
            if not math.isfinite(t):
                t = 0.0
            tau[i, j] = tau[j, i] = t
    return tau


def nearest_positive_definite_correlation(mat: np.ndarray) -> np.ndarray:
    """Clip eigenvalues, then rescale back to a unit diagonal."""
    sym = 0.5 * (mat + mat.T)
    eigval, eigvec = np.linalg.eigh(sym)
    clipped = np.maximum(eigval, _MIN_EIGENVALUE)
    rebuilt = (eigvec * clipped) @ eigvec.T
    scale = np.sqrt(np.diag(rebuilt))
    rebuilt = rebuilt / np.outer(scale, scale)
    np.fill_diagonal(rebuilt, 1.0)
    return 0.5 * (rebuilt + rebuilt.T)


def _t_copula_loglik(u: np.ndarray, corr: np.ndarray, dof: float) -> float:
    n, d = u.shape
    chol = np.linalg.cholesky(corr)
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    if math.isinf(dof):
        x = ndtri(u)
        z = np.linalg.solve(chol, x.T)
        quad = (z * z).sum(axis=0)
        return float(-0.5 * n * logdet - 0.5 * (quad - (x * x).sum(axis=1)).sum())
    x = stats.t.ppf(u, df=dof)
    z = np.linalg.solve(chol, x.T)
    quad = (z * z).sum(axis=0)
    const = (
        gammaln((dof + d) / 2.0)
        + (d - 1) * gammaln(dof / 2.0)
        - d * gammaln((dof + 1) / 2.0)
    )
    ll = (
        n * const
        - 0.5 * n * logdet
        - (dof + d) / 2.0 * np.log1p(quad / dof).sum()
        + (dof + 1) / 2.0 * np.log1p(x * x / dof).sum()
    )
    return float(ll)


def fit_copula(weight_vectors: list[WeightVector],
               bandwidth_rule: str = "silverman") -> CopulaModel:
    """Fit one phase cluster of learned weight vectors."""
    if bandwidth_rule != "silverman":
        raise FitError(f"unknown bandwidth rule {bandwidth_rule!r}")
    if not weight_vectors:
        raise FitError("empty weight cluster")
    phase = weight_vectors[0].phase
    names = FEATURES_BY_PHASE[phase]
    if any(w.phase is not phase for w in weight_vectors):
        raise FitError("all weight vectors in a cluster must share one phase")
    n = len(weight_vectors)
    d = len(names)
    min_n = max(d + 1, 5)
    if n < min_n:
        raise FitError(f"cluster of {n} weight vectors is too small (need >= {min_n})")

    data = np.vstack([w.as_array() for w in weight_vectors])
    marginals = []
    for j, name in enumerate(names):
        bw = silverman_bandwidth(data[:, j])
        # scale-relative floor: a constant column can carry ~1e-16 of
        # accumulated rounding in its standard deviation
        if not bw > 1e-12 * max(1.0, float(np.abs(data[:, j]).max())):
            raise FitError(f"degenerate marginal for feature {name!r}: all weights identical")
        marginals.append(KdeMarginal(sample_points=np.sort(data[:, j]).copy(), bandwidth=bw))

    u = np.column_stack([m.cdf(data[:, j]) for j, m in enumerate(marginals)])
    u = np.clip(u, _U_CLIP, 1.0 - _U_CLIP)

    tau = kendall_tau_matrix(data)
    rho = np.sin(0.5 * math.pi * tau)
    np.fill_diagonal(rho, 1.0)
    corr = nearest_positive_definite_correlation(rho)

    best_dof = _DOF_GRID[-1]
    best_ll = -math.inf
    for dof in _DOF_GRID:
        ll = _t_copula_loglik(u, corr, dof)
        if ll > best_ll:
            best_ll = ll
            best_dof = dof

    return CopulaModel(
        phase=phase,
        feature_names=names,
        marginals=tuple(marginals),
        correlation=corr,
        dof=best_dof,
    )


def sample_uniforms(model: CopulaModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n copula-scale vectors in (0,1)^d."""
    chol = np.linalg.cholesky(model.correlation)
    z = rng.standard_normal((n, model.dim)) @ chol.T
    if math.isinf(model.dof):
        return ndtr(z)
    g = rng.chisquare(model.dof, size=n)
    x = z / np.sqrt(g / model.dof)[:, None]
    return stats.t.cdf(x, df=model.dof)


def sample_weights_rng(model: CopulaModel, n: int,
                       rng: np.random.Generator) -> list[WeightVector]:
    u = sample_uniforms(model, n, rng)
    cols = [model.marginals[j].inverse_cdf(u[:, j]) for j in range(model.dim)]
    w = np.column_stack(cols)
    return [WeightVector.from_array(model.phase, i, w[i]) for i in range(n)]


def sample_weights(model: CopulaModel, n: int, seed: int) -> list[WeightVector]:
    """Draw n weight vectors from the fitted distribution (seeded)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return sample_weights_rng(model, n, np.random.default_rng(seed))


def implied_kendall_tau(model: CopulaModel) -> np.ndarray:
    """Pairwise Kendall tau implied by the copula correlation."""
    tau = 2.0 / math.pi * np.arcsin(np.clip(model.correlation, -1.0, 1.0))
    np.fill_diagonal(tau, 1.0)
    return tau


def save_copula_model(model: CopulaModel, path: str | Path) -> None:
    doc = {
        "format": "drivercost-copula",
        "format_version": 1,
        "phase": model.phase.value,
        "features": list(model.feature_names),
        "dof": "inf" if math.isinf(model.dof) else model.dof,
        "correlation": [[float(v) for v in row] for row in model.correlation],
        "marginals": [
            {
                "feature": name,
                "bandwidth": m.bandwidth,
                "points": [float(v) for v in m.sample_points],
            }
            for name, m in zip(model.feature_names, model.marginals)
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_copula_model(path: str | Path) -> CopulaModel:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FitError(f"{path}: not a valid model file ({exc})") from None
    if doc.get("format") != "drivercost-copula":
        raise FitError(f"{path}: not a copula model file")
    if doc.get("format_version") != 1:
        raise FitError(f"{path}: unsupported model version {doc.get('format_version')!r}")
    phase = PhaseLabel(doc["phase"])
    names = tuple(doc["features"])
    if names != FEATURES_BY_PHASE[phase]:
        raise FitError(f"{path}: feature list {names} does not match phase {phase.value}")
    dof = math.inf if doc["dof"] == "inf" else float(doc["dof"])
    marginals = tuple(
        KdeMarginal(sample_points=np.array(m["points"], dtype=float),
                    bandwidth=float(m["bandwidth"]))
        for m in doc["marginals"]
    )
    return CopulaModel(
        phase=phase,
        feature_names=names,
        marginals=marginals,
        correlation=np.array(doc["correlation"], dtype=float),
        dof=dof,
    )
