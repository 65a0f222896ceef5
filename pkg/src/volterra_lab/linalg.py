"""Dense complex linear algebra on finite compact-operator models.

All operations are pure functions of their inputs; models are immutable
after construction, so concurrent use is safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigensolverFailure, InvalidOperator, InvalidParameter

CONSTRUCTIONS = (
    "diagonal",
    "random_svd",
    "sum",
    "weak_perturbation",
    "disk_restriction",
    "nystrom_1d",
)

# Hermitian / reconstruction tolerance for hermitian_split invariants.
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class CompactOperatorModel:
    """N x N complex matrix plus construction metadata."""

    entries: np.ndarray
    dim: int
    label: str = ""
    construction: str = "diagonal"

    def __post_init__(self):
        m = np.asarray(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidOperator(f"entries must be square, got shape {m.shape}")
        if m.shape[0] < 1:
            raise InvalidOperator("dim must be >= 1")
        if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
            raise InvalidOperator("entries contain NaN or Inf")
        if self.dim != m.shape[0]:
            raise InvalidOperator(f"dim={self.dim} does not match entries shape {m.shape}")
        if self.construction not in CONSTRUCTIONS:
            raise InvalidOperator(f"unknown construction tag {self.construction!r}")
        m = np.array(m, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_matrix(cls, entries, label: str = "", construction: str = "diagonal"):
        m = np.asarray(entries)
        return cls(entries=m, dim=(m.shape[0] if m.ndim == 2 else 0), label=label,
                   construction=construction)

    def adjoint(self) -> "CompactOperatorModel":
        return CompactOperatorModel(
            entries=self.entries.conj().T,
            dim=self.dim,
            label=f"{self.label}*" if self.label else "adjoint",
            construction=self.construction,
        )


@dataclass(frozen=True)
class SNumberSequence:
    """Nonincreasing, nonnegative singular values of a truncation."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(np.asarray(self.values), dtype=float)
        if v.ndim != 1 or v.size < 1:
            raise InvalidParameter("s-number sequence must be a nonempty 1-d array")
        if np.any(v < 0):
            raise InvalidParameter("s-numbers must be nonnegative")
        tol_order = 1e-12 * (v[0] if v[0] > 0 else 1.0)
        if np.any(np.diff(v) > tol_order):
            raise InvalidParameter("s-numbers must be nonincreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class HermitianSplit:
    """T = real_part + i * imag_part with both parts Hermitian."""

    real_part: CompactOperatorModel
    imag_part: CompactOperatorModel


def _entries(a) -> np.ndarray:
    """Accept a model or a raw matrix; validate through the model type."""
    if isinstance(a, CompactOperatorModel):
        return a.entries
    return CompactOperatorModel.from_matrix(a).entries


def s_numbers(a) -> SNumberSequence:
    """Singular values of the matrix, sorted nonincreasing."""
    m = _entries(a)
    # diagonal matrices (the C and L_D^-1 constructions) have exact
    # singular values |d_i|; skip the SVD
    if np.count_nonzero(m) == np.count_nonzero(np.diagonal(m)):
        return SNumberSequence(values=np.sort(np.abs(np.diagonal(m)))[::-1])
    try:
        sv = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(f"SVD failed at dim {m.shape[0]}") from exc
    return SNumberSequence(values=sv)


def eigenvalues(a, with_vectors: bool = False):
    """All eigenvalues with multiplicity, in solver order.

    With ``with_vectors=True`` returns ``(values, vectors)`` where column k
    of ``vectors`` is a unit eigenvector for ``values[k]``.
    """
    m = _entries(a)
    try:
        if with_vectors:
            w, v = np.linalg.eig(m)
            return w, v
        return np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(f"eigensolver failed at dim {m.shape[0]}") from exc


def spectral_radius(a) -> float:
    """max |lambda| over all eigenvalues."""
    w = eigenvalues(a)
    return float(np.abs(w).max())


def schatten_norm(a, p: float) -> float:
    """(sum_j s_j^p)^(1/p) of the truncation; p must be positive."""
    if not (p > 0):
        raise InvalidParameter(f"schatten_norm requires p > 0, got {p}")
    sv = s_numbers(a).values
    if sv[0] == 0.0:
        return 0.0
    # factor out s_1 so small p does not overflow
    return float(sv[0] * np.sum((sv / sv[0]) ** p) ** (1.0 / p))


def hermitian_split(t) -> HermitianSplit:
    """Hermitian components T_R = (T+T*)/2 and T_J = (T-T*)/(2i)."""
    m = _entries(t)
    label = t.label if isinstance(t, CompactOperatorModel) else ""
    tr = 0.5 * (m + m.conj().T)
    tj = (m - m.conj().T) / 2j
    return HermitianSplit(
        real_part=CompactOperatorModel.from_matrix(tr, label=f"{label} (T_R)", construction="sum"),
        imag_part=CompactOperatorModel.from_matrix(tj, label=f"{label} (T_J)", construction="sum"),
    )
