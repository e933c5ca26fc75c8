"""Mode classification into the kernel blocks N1, N2 and the spectral halves
X-, X+, with the associated projections and integer counts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguousResonanceError, ConfigurationError, HypothesisError
from .spectral import GalerkinState, ProblemConfig, SpectralBasis

__all__ = ["SplitIndexSet", "CountVector", "classify", "counts", "project", "mode_mask"]

PROJECTIONS = ("P1", "P2", "Qminus", "Qplus", "Q0")


@dataclass(frozen=True)
class SplitIndexSet:
    """Partition of {1..m} x {1..J} into kernel, negative and positive modes.

    ``gap`` is the smallest |mu_j - lambda_k| over the nonkernel modes, the
    spectral-gap constant used by the a priori bounds.
    ``nonresonant_components`` lists components whose shift matched no
    eigenvalue (classification proceeds, but the standing resonance
    assumption fails there).
    """

    n1_modes: frozenset
    n2_modes: frozenset
    minus_modes: frozenset
    plus_modes: frozenset
    resonance_tolerance: float
    m: int
    J: int
    gap: float
    nonresonant_components: tuple[int, ...] = ()

    def kernel_modes(self) -> frozenset:
        return self.n1_modes | self.n2_modes

    def kernel_dim(self, component: int) -> int:
        """dim Ker(lambda_k I - A_k) within the truncation."""
        return sum(1 for (k, _) in self.kernel_modes() if k == component)


@dataclass(frozen=True)
class CountVector:
    d_inf: int
    n1: int
    n2: int


def classify(basis: SpectralBasis, config: ProblemConfig,
             tol: float = 1e-8) -> SplitIndexSet:
    """Classify every mode (k, j) by the sign of mu_j - lambda_k.

    Kernel membership is by relative tolerance; a shift falling between tol
    and 10 tol of an eigenvalue raises AmbiguousResonanceError.  Refuses
    configurations with lambda_k >= mu_J, where the negative count would be
    truncation-dependent.
    """
    mu = basis.mu
    lam = config.lam_array()
    n1, n2, minus, plus = set(), set(), set(), set()
    nonres = []
    gap = np.inf
    for k in range(1, config.m + 1):
        lk = lam[k - 1]
        scale_top = max(1.0, abs(mu[-1]), abs(lk))
        if lk >= mu[-1] - 10 * tol * scale_top:
            raise HypothesisError(
                f"lambda_{k}={lk:.6g} is not below mu_J={mu[-1]:.6g}; "
                "the negative spectral count would be under-counted at this truncation"
            )
        resonant = False
        for j in range(1, basis.J + 1):
            d = mu[j - 1] - lk
            scale = max(1.0, abs(mu[j - 1]), abs(lk))
            if abs(d) <= tol * scale:
                (n1 if k <= config.l else n2).add((k, j))
                resonant = True
            elif abs(d) < 10 * tol * scale:
                raise AmbiguousResonanceError(
                    f"lambda_{k}={lk!r} lies within ({tol:g}, {10 * tol:g}) relative "
                    f"distance of mu_{j}={mu[j - 1]!r}; adjust the kernel tolerance"
                )
            elif d < 0:
                minus.add((k, j))
                gap = min(gap, abs(d))
            else:
                plus.add((k, j))
                gap = min(gap, abs(d))
        if not resonant:
            nonres.append(k)
    return SplitIndexSet(
        n1_modes=frozenset(n1), n2_modes=frozenset(n2),
        minus_modes=frozenset(minus), plus_modes=frozenset(plus),
        resonance_tolerance=tol, m=config.m, J=basis.J,
        gap=float(gap), nonresonant_components=tuple(nonres),
    )


def counts(split: SplitIndexSet) -> CountVector:
    """Integer counts (d_inf, n1, n2) = (|X- modes|, |N1 modes|, |N2 modes|)."""
    return CountVector(d_inf=len(split.minus_modes), n1=len(split.n1_modes),
                       n2=len(split.n2_modes))


def mode_mask(split: SplitIndexSet, component: str) -> np.ndarray:
    """Boolean (m, J) mask selecting the modes of one projection."""
    if component not in PROJECTIONS:
        raise ConfigurationError(f"unknown projection {component!r}; expected one of {PROJECTIONS}")
    sets = {
        "P1": split.n1_modes,
        "P2": split.n2_modes,
        "Qminus": split.minus_modes,
        "Qplus": split.plus_modes,
    }
    mask = np.zeros((split.m, split.J), dtype=bool)
    selected = (split.n1_modes | split.n2_modes) if component == "Q0" else sets[component]
    for (k, j) in selected:
        mask[k - 1, j - 1] = True
    return mask


def project(split: SplitIndexSet, component: str, u: GalerkinState) -> GalerkinState:
    """Zero all coefficients outside the selected mode set; Q0 = P1 + P2."""
    mask = mode_mask(split, component)
    if u.coeffs.shape != mask.shape:
        raise ConfigurationError(
            f"state shape {u.coeffs.shape} inconsistent with split shape {mask.shape}"
        )
    return GalerkinState(np.where(mask, u.coeffs, 0.0))
