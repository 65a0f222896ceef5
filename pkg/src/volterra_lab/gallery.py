"""Constructions of finite models: nonnegative diagonals with prescribed
s-numbers, seeded random perturbations with prescribed singular profiles,
sums, and weak perturbations H(I+S).

Everything here is a pure function of (profile, N, seed), so parallel
sweeps are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, InvalidH, InvalidParameter, InvalidProfile, SingularPerturbation
from .linalg import CompactOperatorModel

PROFILE_KINDS = ("power_law", "log_power")


@dataclass(frozen=True)
class ProfileSpec:
    """Prescribed decay law: a*n^(-alpha) or a*(ln(n+1))^beta.

    a = 0 is allowed and yields the identically-zero profile.
    """

    kind: str
    a: float
    alpha_or_beta: float

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise InvalidProfile(f"unknown profile kind {self.kind!r}")
        if not (self.a >= 0) or not np.isfinite(self.a):
            raise InvalidProfile(f"coefficient a must be finite and >= 0, got {self.a}")
        if not np.isfinite(self.alpha_or_beta):
            raise InvalidProfile("exponent must be finite")


@dataclass(frozen=True)
class GallerySeed:
    """64-bit unsigned seed for reproducible randomness."""

    seed: int

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidParameter(f"seed must fit in 64 unsigned bits, got {self.seed}")


def _seed_value(seed) -> int:
    return seed.seed if isinstance(seed, GallerySeed) else int(GallerySeed(int(seed)).seed)


def profile_values(profile: ProfileSpec, n_dim: int) -> np.ndarray:
    """Evaluate the profile at ranks 1..N."""
    if n_dim < 1:
        raise InvalidParameter(f"N must be >= 1, got {n_dim}")
    n = np.arange(1, n_dim + 1, dtype=float)
    if profile.kind == "power_law":
        vals = profile.a * n ** (-profile.alpha_or_beta)
    else:
        vals = profile.a * np.log(n + 1.0) ** profile.alpha_or_beta
    if not np.all(np.isfinite(vals)) or np.any(vals < 0):
        raise InvalidProfile(f"profile {profile} produced negative or non-finite entries")
    return vals


def haar_unitary(n_dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((n_dim, n_dim)) + 1j * rng.standard_normal((n_dim, n_dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def make_nonnegative_C(profile: ProfileSpec, n_dim: int) -> CompactOperatorModel:
    """Diagonal nonnegative model whose s-numbers equal the profile exactly."""
    if n_dim < 2:
        raise InvalidParameter(f"N must be >= 2, got {n_dim}")
    vals = profile_values(profile, n_dim)
    return CompactOperatorModel.from_matrix(
        np.diag(vals).astype(complex),
        label=f"C {profile.kind}(a={profile.a}, e={profile.alpha_or_beta}) N={n_dim}",
        construction="diagonal",
    )


def _random_hermitian(vals: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Hermitian matrix whose eigenvalue magnitudes equal ``vals``."""
    n_dim = vals.size
    w = haar_unitary(n_dim, rng)
    signs = np.where(rng.random(n_dim) < 0.5, -1.0, 1.0)
    return (w * (vals * signs)) @ w.conj().T


def make_random_T(profile: ProfileSpec, n_dim: int, seed,
                  hermitian_J_profile: ProfileSpec | None = None) -> CompactOperatorModel:
    """Seeded random perturbation.

    Default: T = U diag(profile) V* with independent Haar factors, so the
    s-numbers of T equal the profile.  When ``hermitian_J_profile`` is given,
    T = T_R + i*T_J is built additively from two independent Hermitian
    matrices whose eigenvalue magnitudes follow the two profiles; the exact
    s-numbers of T are then emergent, not prescribed.
    """
    if n_dim < 2:
        raise InvalidParameter(f"N must be >= 2, got {n_dim}")
    rng = np.random.default_rng(_seed_value(seed))
    if hermitian_J_profile is None:
        u = haar_unitary(n_dim, rng)
        v = haar_unitary(n_dim, rng)
        vals = profile_values(profile, n_dim)
        entries = (u * vals) @ v.conj().T
        label = f"T svd {profile.kind}(a={profile.a}, e={profile.alpha_or_beta}) N={n_dim}"
    else:
        tr = _random_hermitian(profile_values(profile, n_dim), rng)
        tj = _random_hermitian(profile_values(hermitian_J_profile, n_dim), rng)
        entries = tr + 1j * tj
        label = f"T hermitian-split N={n_dim}"
    return CompactOperatorModel.from_matrix(entries, label=label, construction="random_svd")


def assemble_sum(c: CompactOperatorModel, t: CompactOperatorModel) -> CompactOperatorModel:
    """Entrywise sum A = C + T."""
    if c.dim != t.dim:
        raise DimMismatch(f"dims {c.dim} and {t.dim} differ")
    return CompactOperatorModel.from_matrix(
        c.entries + t.entries,
        label=f"({c.label}) + ({t.label})",
        construction="sum",
    )


def make_weak_perturbation(h: CompactOperatorModel, s: CompactOperatorModel) -> CompactOperatorModel:
    """Matsaev-Mogulskii weak perturbation H(I+S)."""
    if h.dim != s.dim:
        raise DimMismatch(f"dims {h.dim} and {s.dim} differ")
    scale = float(np.abs(h.entries).max()) or 1.0
    if float(np.abs(h.entries - h.entries.conj().T).max()) > 1e-10 * scale:
        raise InvalidH("H is not Hermitian within 1e-10")
    eigs = np.linalg.eigvalsh(h.entries)
    if eigs.min() < -1e-10 * max(scale, 1.0):
        raise InvalidH(f"H has negative eigenvalue {eigs.min():.3e}")
    i_plus_s = np.eye(s.dim) + s.entries
    smallest = np.linalg.svd(i_plus_s, compute_uv=False)[-1]
    if smallest <= 1e-10:
        raise SingularPerturbation(f"smallest singular value of I+S is {smallest:.3e}")
    return CompactOperatorModel.from_matrix(
        h.entries @ i_plus_s,
        label=f"H(I+S) from ({h.label})",
        construction="weak_perturbation",
    )
