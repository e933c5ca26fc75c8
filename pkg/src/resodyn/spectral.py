"""Dirichlet sine spectrum on an interval, the diagonal shifted operator, its
semigroup, and the fractional norm.

The basis is analytic: phi_j(x) = sqrt(2/L) sin(j pi x / L) with eigenvalue
mu_j = (j pi / L)^2 of -d^2/dx^2.  Quadrature is Gauss-Legendre on (0, L).

Node and basis tables are built mirror-symmetrically about L/2 and all
projections are folded over mirrored node pairs, so that the odd/even parity
of a coefficient vector is preserved *bit-exactly* by evaluation and
projection.  This matters for dynamics: connecting orbits that live inside a
reflection-symmetry subspace are saddle-targeted, and any roundoff leak into
the complementary parity is exponentially amplified along the kernel
directions.  The fold is a pure reassociation of the same quadrature sum, so
accuracy is unchanged for generic data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigurationError, HypothesisError, UnboundedModeError

__all__ = [
    "Domain1D",
    "EigenPair",
    "SpectralBasis",
    "ProblemConfig",
    "GalerkinState",
    "build_basis",
    "apply_A",
    "semigroup_apply",
    "fractional_norm",
]

# exp() argument beyond which a growing semigroup factor is treated as overflow
OVERFLOW_EXPONENT = 700.0


@dataclass(frozen=True)
class Domain1D:
    """Interval (0, length) with a Gauss-Legendre node count."""

    length: float
    quad_nodes: int

    def __post_init__(self):
        if not (self.length > 0):
            raise ConfigurationError(f"length must be positive, got {self.length}")
        if self.quad_nodes < 2:
            raise ConfigurationError(f"quad_nodes must be >= 2, got {self.quad_nodes}")


@dataclass(frozen=True)
class EigenPair:
    index: int
    value: float
    normalization: float


@dataclass(frozen=True)
class SpectralBasis:
    """First J Dirichlet eigenpairs with mirror-symmetric quadrature tables.

    ``phi`` holds basis values on all nodes, shape (J, nq).  ``parity_sym``
    marks modes that are symmetric about length/2 (odd j); the remaining
    modes are antisymmetric.
    """

    domain: Domain1D
    pairs: tuple[EigenPair, ...]
    J: int
    x: np.ndarray = field(repr=False)
    w: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    dphi: np.ndarray = field(repr=False)
    parity_sym: np.ndarray = field(repr=False)
    _half: int = field(repr=False)
    _phi_h: np.ndarray = field(repr=False)
    _dphi_h: np.ndarray = field(repr=False)
    _phi_mid: np.ndarray = field(repr=False)
    _dphi_mid: np.ndarray = field(repr=False)

    @property
    def mu(self) -> np.ndarray:
        """Eigenvalues (J,)."""
        return np.array([p.value for p in self.pairs])

    @property
    def volume(self) -> float:
        return self.domain.length

    # -- nodal evaluation ---------------------------------------------------

    def values(self, coeffs: np.ndarray) -> np.ndarray:
        """Nodal values of u_k = sum_j c_{k,j} phi_j, shape (m, nq).

        The second half of the nodes is filled by the parity fold, so states
        with pure parity produce exactly (anti)symmetric nodal data.
        """
        return self._fold_values(coeffs, self._phi_h, self._phi_mid, flip=False)

    def dvalues(self, coeffs: np.ndarray) -> np.ndarray:
        """Nodal values of the spatial derivative u_k', shape (m, nq).

        Differentiation swaps the mirror parity of every mode.
        """
        return self._fold_values(coeffs, self._dphi_h, self._dphi_mid, flip=True)

    def _fold_values(self, coeffs, table_h, table_mid, flip):
        coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
        sym = self.parity_sym
        vs = coeffs[:, sym] @ table_h[sym]
        va = coeffs[:, ~sym] @ table_h[~sym]
        nq = self.x.size
        h = self._half
        out = np.empty((coeffs.shape[0], nq))
        out[:, :h] = vs + va
        mirrored = (va - vs) if flip else (vs - va)
        out[:, nq - h:] = mirrored[:, ::-1]
        if nq % 2:
            out[:, h] = coeffs @ table_mid
        return out

    def project(self, fvals: np.ndarray) -> np.ndarray:
        """Quadrature coefficients <f, phi_j>, folded over mirrored pairs.

        Equivalent to ``(phi * w) @ f`` up to reassociation; the fold makes
        the parity cancellation happen elementwise, before any reduction.
        """
        fvals = np.atleast_2d(np.asarray(fvals, dtype=float))
        h = self._half
        nq = self.x.size
        sym = self.parity_sym
        wh = self.w[:h]
        f1 = fvals[:, :h]
        f2 = fvals[:, nq - h:][:, ::-1]
        out = np.empty((fvals.shape[0], self.J))
        out[:, sym] = (f1 + f2) @ (self._phi_h[sym] * wh).T
        out[:, ~sym] = (f1 - f2) @ (self._phi_h[~sym] * wh).T
        if nq % 2:
            out += np.outer(fvals[:, h], self.w[h] * self._phi_mid)
        return out

    def gram(self) -> np.ndarray:
        """Quadrature Gram matrix of the basis (identity up to quadrature error)."""
        return self.project(self.phi)


@dataclass(frozen=True)
class ProblemConfig:
    """Scalar hypothesis data of a resonant system.

    m equations, split index l, spectral shifts lambda_k, resonance degrees
    sigma_k, fractional exponent alpha.  delta = 1 + max(lambda) is derived.
    p_note records the Lebesgue exponent of the ambient-space hypothesis; it
    plays no numerical role here.
    """

    m: int
    l: int
    lam: tuple[float, ...]
    sigma: tuple[float, ...]
    alpha: float = 0.8
    p_note: float = 2.0

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError(f"m must be >= 1, got {self.m}")
        if not (1 <= self.l <= self.m):
            raise ConfigurationError(f"l must lie in [1, m]={self.m}, got {self.l}")
        lam = tuple(float(v) for v in self.lam)
        sig = tuple(float(v) for v in self.sigma)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "sigma", sig)
        if len(lam) != self.m:
            raise ConfigurationError(f"lambda must have {self.m} entries, got {len(lam)}")
        if len(sig) != self.m:
            raise ConfigurationError(f"sigma must have {self.m} entries, got {len(sig)}")
        if any(s < 0 or s > 1 for s in sig):
            raise ConfigurationError(f"every sigma_k must lie in [0, 1], got {sig}")
        if min(sig[: self.l]) >= 1:
            raise HypothesisError(
                "min(sigma_1..sigma_l) must be < 1 (degree-of-resonance hypothesis), "
                f"got min={min(sig[:self.l])}"
            )
        if self.l < self.m and min(sig[self.l:]) >= 1:
            raise HypothesisError(
                "min(sigma_{l+1}..sigma_m) must be < 1 (degree-of-resonance hypothesis), "
                f"got min={min(sig[self.l:])}"
            )
        if not (0.75 < self.alpha < 1):
            raise ConfigurationError(f"alpha must lie in (3/4, 1), got {self.alpha}")
        if self.p_note < 2:
            raise ConfigurationError(f"p_note must be >= 2, got {self.p_note}")

    @property
    def delta(self) -> float:
        return 1.0 + max(self.lam)

    def lam_array(self) -> np.ndarray:
        return np.asarray(self.lam, dtype=float)


@dataclass(frozen=True)
class GalerkinState:
    """m x J coefficient matrix c_{k,j} = <u_k, phi_j>."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        if not np.all(np.isfinite(c)):
            raise ConfigurationError("GalerkinState coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def m(self) -> int:
        return self.coeffs.shape[0]

    @property
    def J(self) -> int:
        return self.coeffs.shape[1]

    @classmethod
    def zeros(cls, m: int, J: int) -> "GalerkinState":
        return cls(np.zeros((m, J)))

    @classmethod
    def unit(cls, m: int, J: int, component: int, mode: int, amplitude: float = 1.0) -> "GalerkinState":
        """State amplitude * phi_mode e_component (1-based indices)."""
        c = np.zeros((m, J))
        c[component - 1, mode - 1] = amplitude
        return cls(c)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.coeffs ** 2)))

    def __add__(self, other: "GalerkinState") -> "GalerkinState":
        return GalerkinState(self.coeffs + other.coeffs)

    def __sub__(self, other: "GalerkinState") -> "GalerkinState":
        return GalerkinState(self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> "GalerkinState":
        return GalerkinState(self.coeffs * float(scalar))

    __rmul__ = __mul__


def build_basis(domain: Domain1D, J: int) -> SpectralBasis:
    """Construct the first J Dirichlet sine eigenpairs with quadrature tables.

    Requires quad_nodes >= 2 J + 16 so that products of basis functions are
    integrated with margin.
    """
    if J < 1:
        raise ConfigurationError(f"J must be >= 1, got {J}")
    required = 2 * J + 16
    if domain.quad_nodes < required:
        raise ConfigurationError(
            f"quad_nodes={domain.quad_nodes} too small for J={J}; need at least {required}"
        )
    L = domain.length
    nq = domain.quad_nodes
    x0, w0 = leggauss(nq)
    # exact mirror symmetry of the rule about the midpoint
    x0 = 0.5 * (x0 - x0[::-1])
    w0 = 0.5 * (w0 + w0[::-1])
    x = 0.5 * L + (0.5 * L) * x0
    w = (0.5 * L) * w0
    h = nq // 2
    x[nq - h:] = (L - x[:h])[::-1]

    j = np.arange(1, J + 1)
    mu = (j * np.pi / L) ** 2
    norm = np.sqrt(2.0 / L)
    parity_sym = (j % 2 == 1)  # phi_j(L - x) = +phi_j(x) for odd j

    phi_h = norm * np.sin(np.outer(j, np.pi / L * x[:h]))
    dphi_h = (norm * j * np.pi / L)[:, None] * np.cos(np.outer(j, np.pi / L * x[:h]))
    # midpoint column (odd node counts): antisymmetric entries vanish exactly
    phi_mid = np.where(parity_sym, norm * np.sin(j * np.pi / 2.0), 0.0)
    dphi_mid = np.where(parity_sym, 0.0, norm * j * np.pi / L * np.cos(j * np.pi / 2.0))

    phi = np.empty((J, nq))
    phi[:, :h] = phi_h
    phi[:, nq - h:] = (np.where(parity_sym, 1.0, -1.0)[:, None] * phi_h)[:, ::-1]
    dphi = np.empty((J, nq))
    dphi[:, :h] = dphi_h
    dphi[:, nq - h:] = (np.where(parity_sym, -1.0, 1.0)[:, None] * dphi_h)[:, ::-1]
    if nq % 2:
        phi[:, h] = phi_mid
        dphi[:, h] = dphi_mid

    pairs = tuple(EigenPair(index=int(jj), value=float(m), normalization=float(norm))
                  for jj, m in zip(j, mu))
    return SpectralBasis(
        domain=domain, pairs=pairs, J=J, x=x, w=w, phi=phi, dphi=dphi,
        parity_sym=parity_sym, _half=h, _phi_h=phi_h, _dphi_h=dphi_h,
        _phi_mid=phi_mid, _dphi_mid=dphi_mid,
    )


def _check_shapes(basis: SpectralBasis, config: ProblemConfig, u: GalerkinState) -> None:
    if u.coeffs.shape != (config.m, basis.J):
        raise ConfigurationError(
            f"state shape {u.coeffs.shape} inconsistent with (m, J)=({config.m}, {basis.J})"
        )


def apply_A(basis: SpectralBasis, config: ProblemConfig, u: GalerkinState) -> GalerkinState:
    """Diagonal action (A u)_{k,j} = (mu_j - lambda_k) c_{k,j}."""
    _check_shapes(basis, config, u)
    weights = basis.mu[None, :] - config.lam_array()[:, None]
    return GalerkinState(weights * u.coeffs)


def semigroup_apply(basis: SpectralBasis, config: ProblemConfig, t: float,
                    u: GalerkinState) -> GalerkinState:
    """Coefficientwise multiplication by exp(-t (mu_j - lambda_k)).

    Exactly resonant modes (mu_j == lambda_k as floats) have factor 1 for
    every t.  Raises UnboundedModeError when a growing factor would overflow.
    """
    _check_shapes(basis, config, u)
    if not np.isfinite(t):
        raise ConfigurationError(f"t must be finite, got {t}")
    z = -t * (basis.mu[None, :] - config.lam_array()[:, None])
    overflow = z > OVERFLOW_EXPONENT
    # only modes actually present in the state can make it unbounded
    hot = overflow & (u.coeffs != 0.0)
    if np.any(hot):
        k, j = np.unravel_index(int(np.argmax(np.where(hot, z, -np.inf))), z.shape)
        raise UnboundedModeError(k + 1, j + 1, float(z[k, j]))
    return GalerkinState(np.exp(np.where(overflow, 0.0, z)) * u.coeffs)


def fractional_weights(basis: SpectralBasis, config: ProblemConfig) -> np.ndarray:
    """Mode weights delta + mu_j - lambda_k, shape (m, J); all > 0 by the
    choice delta = 1 + max(lambda)."""
    weights = config.delta + basis.mu[None, :] - config.lam_array()[:, None]
    if np.any(weights <= 0):
        raise ConfigurationError("nonpositive fractional weight; delta invariant violated")
    return weights


def fractional_norm(basis: SpectralBasis, config: ProblemConfig, u: GalerkinState) -> float:
    """Discrete graph norm ( sum (delta + mu_j - lambda_k)^{2 alpha} c^2 )^{1/2}."""
    _check_shapes(basis, config, u)
    weights = fractional_weights(basis, config)
    return float(np.sqrt(np.sum(weights ** (2.0 * config.alpha) * u.coeffs ** 2)))
