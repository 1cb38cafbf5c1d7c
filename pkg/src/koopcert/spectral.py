"""Spectrum of the fitted operator and the stability certificate.

For a stable equilibrium homeomorphic to its linearization F, the operator
spectrum is the closed multiplicative semigroup generated by the eigenvalues
of F, so it stays inside the unit disk exactly when F is stable; upon
bifurcation it escapes. The certificate combines the learned spectral radius
with a user-supplied probabilistic learning-error budget:

    |lambda_1| + (eps + 2*normA) * eps < 1   =>   asymptotically stable
                                                  with probability >= 1 - delta.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.linalg

from .edmd import EdmdModel, SolverError, koopman_matrix
from .kernels import Kernel, gram

__all__ = [
    "SpectrumReport",
    "Verdict",
    "CertificateResult",
    "BoundConstants",
    "spectrum",
    "certify_stability",
    "sample_complexity",
    "learning_error_eps",
    "bound_constants",
    "semigroup_products",
]

EFFECTIVE_RANK_TOL = 1e-10


@dataclass
class SpectrumReport:
    """Eigenvalues of the fitted operator, sorted by modulus (descending)."""

    eigenvalues: np.ndarray
    spectral_radius: float
    effective_rank: int
    provenance: dict

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [
                {"re": float(z.real), "im": float(z.imag)} for z in self.eigenvalues
            ],
            "spectral_radius": self.spectral_radius,
            "effective_rank": self.effective_rank,
            "provenance": self.provenance,
        }

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    def save_csv(self, path) -> None:
        lines = ["re,im"]
        lines += [f"{z.real:.17g},{z.imag:.17g}" for z in self.eigenvalues]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_dict(cls, d: dict) -> "SpectrumReport":
        eig = np.array([complex(e["re"], e["im"]) for e in d["eigenvalues"]])
        return cls(
            eigenvalues=eig,
            spectral_radius=float(d["spectral_radius"]),
            effective_rank=int(d["effective_rank"]),
            provenance=d.get("provenance", {}),
        )

    @classmethod
    def load_json(cls, path) -> "SpectrumReport":
        return cls.from_dict(json.loads(Path(path).read_text()))


class Verdict(str, Enum):
    CERTIFIED_STABLE = "CertifiedStable"
    INCONCLUSIVE = "Inconclusive"
    RADIUS_EXCEEDS_ONE = "SpectralRadiusExceedsOne"


@dataclass
class CertificateResult:
    verdict: Verdict
    margin: float
    spectral_radius: float
    eps: float
    norm_a_bound: float
    delta: float

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "margin": self.margin,
            "spectral_radius": self.spectral_radius,
            "eps": self.eps,
            "norm_a_bound": self.norm_a_bound,
            "delta": self.delta,
        }

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def spectrum(model: EdmdModel, matrix: str = "operator") -> SpectrumReport:
    """Dense nonsymmetric eigendecomposition of the fitted operator.

    ``matrix="operator"`` (default) diagonalizes theta @ G_XY, the operator's
    matrix on its range basis, whose nonzero eigenvalues are the operator
    spectrum. ``matrix="coefficients"`` diagonalizes the raw coefficient
    matrix theta instead, which is not similarity-invariant but is exposed
    for comparison.
    """
    if matrix == "operator":
        k = koopman_matrix(model)
    elif matrix == "coefficients":
        k = model.theta
    else:
        raise ValueError(f"unknown matrix choice: {matrix!r}")
    try:
        eig = scipy.linalg.eigvals(k)
    except scipy.linalg.LinAlgError as exc:  # no silent fallback
        raise SolverError(f"eigensolver failed to converge: {exc}") from exc
    order = np.lexsort((eig.imag, eig.real, -np.abs(eig)))
    eig = eig[order]
    return SpectrumReport(
        eigenvalues=eig,
        spectral_radius=float(np.max(np.abs(eig))) if len(eig) else 0.0,
        effective_rank=int(np.sum(np.abs(eig) > EFFECTIVE_RANK_TOL)),
        provenance={
            "matrix": matrix,
            "kernel": model.kernel.to_dict(),
            "beta": model.beta,
            "rank": model.rank,
            "effective_rank": model.effective_rank,
            "n": model.n,
        },
    )


def certify_stability(
    report: SpectrumReport, eps: float, norm_a_bound: float, delta: float = 0.05
) -> CertificateResult:
    """Evaluate the certificate inequality for a given error budget eps.

    ``margin = 1 - (|lambda_1| + (eps + 2*normA)*eps)``; a positive margin
    certifies asymptotic stability with probability at least 1 - delta
    (under the caveat that eps bounds the operator error in the norm the
    perturbation argument needs, which the caller must supply).
    """
    if not (np.isfinite(eps) and np.isfinite(norm_a_bound)):
        raise ValueError("certificate inputs must be finite")
    if eps < 0 or norm_a_bound < 0:
        raise ValueError("certificate inputs must be nonnegative")
    radius = report.spectral_radius
    margin = 1.0 - (radius + (eps + 2.0 * norm_a_bound) * eps)
    if radius > 1.0:
        verdict = Verdict.RADIUS_EXCEEDS_ONE
    elif margin > 0.0:
        verdict = Verdict.CERTIFIED_STABLE
    else:
        verdict = Verdict.INCONCLUSIVE
    return CertificateResult(
        verdict=verdict,
        margin=margin,
        spectral_radius=radius,
        eps=eps,
        norm_a_bound=norm_a_bound,
        delta=delta,
    )


def sample_complexity(m_kappa: float, eps: float, delta: float) -> int:
    """Smallest n with n >= 8 * M^2 * eps^-2 * log(4/delta), clamped to >= 1."""
    if m_kappa <= 0 or eps <= 0 or not 0 < delta < 1:
        raise ValueError("need M > 0, eps > 0 and delta in (0, 1)")
    return max(1, math.ceil(8.0 * m_kappa**2 * eps**-2 * math.log(4.0 / delta)))


def learning_error_eps(m_kappa: float, n: int, delta: float) -> float:
    """Error budget implied by n samples: eps = M * sqrt(8 log(4/delta) / n)."""
    if m_kappa <= 0 or n < 1 or not 0 < delta < 1:
        raise ValueError("need M > 0, n >= 1 and delta in (0, 1)")
    return m_kappa * math.sqrt(8.0 * math.log(4.0 / delta) / n)


@dataclass
class BoundConstants:
    """Monte Carlo estimates of the error-bound constants for a given rank.

    ``mu`` is the full empirical covariance spectrum (Gram / n, descending);
    ``mu_distinct`` merges numerically equal values, matching the strictly
    decreasing sequence the gap constant gamma_r is defined over.
    """

    m_kappa: float
    M_kappa: float
    mu: np.ndarray
    mu_distinct: np.ndarray
    r: int
    gamma_r: float
    c_r: float

    def error_bound(self, norm_a_bound: float, eps: float) -> float:
        """Evaluate sqrt(mu_{r+1}) * normA + c_r * eps."""
        return float(np.sqrt(self.mu_distinct[self.r]) * norm_a_bound + self.c_r * eps)

    def to_dict(self) -> dict:
        return {
            "m_kappa": self.m_kappa,
            "M_kappa": self.M_kappa,
            "mu_leading": self.mu[: min(len(self.mu), 2 * self.r + 2)].tolist(),
            "r": self.r,
            "gamma_r": self.gamma_r,
            "c_r": self.c_r,
        }


def _merge_distinct(values: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Collapse a descending sequence into strictly decreasing representatives."""
    tol = rtol * max(values[0], 1e-300)
    out = [values[0]]
    for v in values[1:]:
        if out[-1] - v > tol:
            out.append(v)
    return np.array(out)


def bound_constants(
    kernel: Kernel, domain, n_mc: int, r: int, seed: int = 0
) -> BoundConstants:
    """Estimate the constants of the finite-sample error bound by Monte Carlo.

    Draws n_mc uniform points on the box: the mean of kappa(x, x) times the
    box volume estimates the integral constant, the diagonal sup is analytic
    where available (sampled max otherwise, a lower estimate), and the
    covariance spectrum is the self-Gram spectrum divided by n_mc.
    """
    box = np.asarray(domain, dtype=float)
    if n_mc < r + 1:
        raise ValueError("need n_mc >= r + 1 Monte Carlo points")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(box[:, 0], box[:, 1], size=(n_mc, box.shape[0]))
    diag = kernel.diag(pts)
    vol = float(np.prod(box[:, 1] - box[:, 0]))
    m_kappa = vol * float(np.mean(diag))
    sup = kernel.diag_sup(box)
    M_kappa = float(max(diag)) if sup is None else float(sup)

    g = gram(kernel, pts).entries
    mu = np.clip(scipy.linalg.eigvalsh(g)[::-1], 0.0, None) / n_mc
    mu_distinct = _merge_distinct(mu)
    if len(mu_distinct) < r + 1:
        raise ValueError(
            f"covariance spectrum has only {len(mu_distinct)} distinct values; "
            f"rank {r} constants are unusable"
        )
    if mu_distinct[r - 1] < 1e-12:
        raise ValueError(
            f"mu_{r} = {mu_distinct[r - 1]:.3e} is below 1e-12; "
            f"rank {r} constants are unusable"
        )
    gaps = (mu_distinct[: r] - mu_distinct[1 : r + 1]) / 2.0
    gamma_r = float(np.min(gaps))
    mu_r = mu_distinct[r - 1]
    c_r = float(
        mu_r**-0.5 + (r + 1) * mu_r**-1 * gamma_r**-1 * (1.0 + m_kappa) * m_kappa**0.5
    )
    return BoundConstants(
        m_kappa=m_kappa,
        M_kappa=M_kappa,
        mu=mu,
        mu_distinct=mu_distinct,
        r=r,
        gamma_r=gamma_r,
        c_r=c_r,
    )


def semigroup_products(
    eigenvalues, max_total_degree: int = 4, include_empty: bool = False
) -> np.ndarray:
    """Brute-force semigroup of eigenvalue products with 1 <= |alpha| <= degree.

    Enumerates all multi-index powers of the given linearization eigenvalues;
    this is the predicted operator spectrum for a system homeomorphic to a
    stable linear one.
    """
    eigenvalues = np.asarray(eigenvalues, dtype=complex)
    products = {1.0 + 0.0j} if include_empty else set()
    for degree in range(1, max_total_degree + 1):
        for combo in itertools.combinations_with_replacement(eigenvalues, degree):
            products.add(complex(np.prod(combo)))
    return np.array(sorted(products, key=lambda z: (-abs(z), z.real, z.imag)))
