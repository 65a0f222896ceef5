"""Spectral model of the Dirichlet Laplacian on the unit disk.

Coordinates: everything is expressed in the orthonormal basis
e_{n,k}(r, phi) = J_{|n|}(j_{|n|,k} r) e^{i n phi} / (sqrt(pi) |J_{|n|+1}(j_{|n|,k})|),
so the inverse Dirichlet operator is exactly diagonal with entries
1/j_{|n|,k}^2, and a finite-rank map into the harmonic kernel becomes a
dense low-rank update.  Harmonic kernel elements r^{|n|} e^{i n phi} are
projected into this (incomplete) basis through the closed form

    int_0^1 r^{|n|+1} J_{|n|}(j r) dr = J_{|n|+1}(j) / j.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import (
    DimMismatch,
    InvalidParameter,
    InvalidSchmidtSpec,
    OutOfBasis,
    OutOfRange,
    RootFindFailure,
)
from .linalg import CompactOperatorModel

MAX_ORDER = 200
MAX_ZERO_INDEX = 10_000

# Minimum gap between consecutive zeros of J_n is > 3.11 for every n >= 0,
# so marching with this step cannot skip a zero.
_MARCH_STEP = 0.7
_ORTHONORMALITY_TOL = 1e-8


def bessel_j(n: int, x) -> float:
    """Bessel function J_n(x) for integer order 0 <= n <= 200, x >= 0."""
    if not (0 <= int(n) <= MAX_ORDER):
        raise OutOfRange(f"order must be in [0, {MAX_ORDER}], got {n}")
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise OutOfRange("argument must be >= 0")
    out = special.jv(int(n), xs)
    return float(out) if out.ndim == 0 else out


def _bessel_j_prime(n: int, x: float) -> float:
    if n == 0:
        return -float(special.jv(1, x))
    return 0.5 * float(special.jv(n - 1, x) - special.jv(n + 1, x))


def _refine_zero(n: int, lo: float, hi: float, flo: float) -> float:
    """Safeguarded Newton on a sign-change bracket; bisection fallback."""
    x = 0.5 * (lo + hi)
    for _ in range(200):
        fx = bessel_j(n, x)
        if fx == 0.0:
            return x
        if fx * flo > 0.0:
            lo = x
        else:
            hi = x
        d = _bessel_j_prime(n, x)
        x_new = x - fx / d if d != 0.0 else 0.5 * (lo + hi)
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 1e-15 * max(1.0, abs(x)):
            return x_new
        x = x_new
    raise RootFindFailure(f"Newton did not converge for zero of J_{n} in [{lo}, {hi}]")


def _extend_zero_list(n: int, zeros: list[float], k_target: int) -> None:
    """Append zeros of J_n up to index k_target, in order.

    The guess for the next zero sits one spacing (McMahon spacing is pi)
    past the previous one; a short march locates the sign change, so the
    bracket always contains exactly the next zero.
    """
    while len(zeros) < k_target:
        k = len(zeros)  # zeros found so far; looking for zero k+1
        if k == 0:
            t = 0.5 if n == 0 else float(n)  # J_n > 0 on (0, j_{n,1})
        else:
            t = zeros[-1] + 0.25
        sign_before = 1.0 if k % 2 == 0 else -1.0
        flo = bessel_j(n, t)
        nudges = 0
        while flo * sign_before <= 0.0:
            t += 0.05
            flo = bessel_j(n, t)
            nudges += 1
            if nudges > 200:
                raise RootFindFailure(f"could not locate start side for J_{n} zero {k + 1}")
        lo = t
        hi = lo + _MARCH_STEP
        fhi = bessel_j(n, hi)
        steps = 0
        while flo * fhi > 0.0:
            lo, flo = hi, fhi
            hi += _MARCH_STEP
            fhi = bessel_j(n, hi)
            steps += 1
            if steps > 1000:
                raise RootFindFailure(f"no sign change found for J_{n} zero {k + 1}")
        zeros.append(_refine_zero(n, lo, hi, flo))


_zero_cache: dict[int, list[float]] = {}
_zero_lock = threading.Lock()


def bessel_zero(n: int, k: int) -> float:
    """k-th positive zero j_{n,k} of J_n, accurate to 1e-10."""
    n, k = int(n), int(k)
    if not (0 <= n <= MAX_ORDER):
        raise OutOfRange(f"order must be in [0, {MAX_ORDER}], got {n}")
    if not (1 <= k <= MAX_ZERO_INDEX):
        raise OutOfRange(f"zero index must be in [1, {MAX_ZERO_INDEX}], got {k}")
    with _zero_lock:
        zeros = _zero_cache.setdefault(n, [])
        if len(zeros) < k:
            _extend_zero_list(n, zeros, k)
        return zeros[k - 1]


def save_zero_cache(path) -> int:
    """Write all in-memory zeros as text lines ``n k value`` (15 digits)."""
    lines = []
    with _zero_lock:
        for n in sorted(_zero_cache):
            for i, z in enumerate(_zero_cache[n], start=1):
                lines.append(f"{n} {i} {z:.15g}\n")
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(lines)
    return len(lines)


def load_zero_cache(path, spot_checks: int = 3) -> int:
    """Load a zero table; advisory, so a failed spot check discards the file.

    Returns the number of zeros adopted (0 when the file is rejected).
    """
    table: dict[int, dict[int, float]] = {}
    try:
        with open(path, encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                n_s, k_s, v_s = line.split()
                table.setdefault(int(n_s), {})[int(k_s)] = float(v_s)
    except (OSError, ValueError):
        return 0
    lists: dict[int, list[float]] = {}
    for n, by_k in table.items():
        if not (0 <= n <= MAX_ORDER):
            return 0
        ks = sorted(by_k)
        if ks != list(range(1, len(ks) + 1)):
            return 0  # gaps would silently shift indices
        lists[n] = [by_k[k] for k in ks]
    count = sum(len(v) for v in lists.values())
    if count == 0:
        return 0
    # spot check: recompute a few entries from scratch
    rng = np.random.default_rng(count)
    flat = [(n, k) for n, v in lists.items() for k in range(1, len(v) + 1)]
    for idx in rng.choice(len(flat), size=min(spot_checks, len(flat)), replace=False):
        n, k = flat[idx]
        fresh: list[float] = []
        _extend_zero_list(n, fresh, k)
        if abs(fresh[k - 1] - lists[n][k - 1]) > 1e-9:
            return 0
    with _zero_lock:
        for n, vals in lists.items():
            if len(vals) > len(_zero_cache.get(n, [])):
                _zero_cache[n] = list(vals)
    return count


@dataclass(frozen=True)
class DiskModeIndex:
    """Fourier-Bessel mode label: angular order n, radial index k >= 1."""

    n: int
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise InvalidParameter(f"radial index must be >= 1, got {self.k}")


@dataclass(frozen=True)
class HarmonicModeIndex:
    """Harmonic kernel mode r^|n| e^{i n phi}."""

    n: int


@dataclass(frozen=True)
class TruncatedBasis:
    """Modes |n| <= n_max, k <= k_max sorted by eigenvalue j_{|n|,k}^2."""

    n_max: int
    k_max: int
    modes: tuple[DiskModeIndex, ...]
    eigenvalues: np.ndarray

    def __post_init__(self):
        lam = np.array(np.asarray(self.eigenvalues), dtype=float)
        if lam.size != len(self.modes):
            raise InvalidParameter("eigenvalue list does not match mode list")
        if np.any(lam <= 0) or not np.all(np.isfinite(lam)):
            raise InvalidParameter("eigenvalues must be positive and finite")
        if np.any(np.diff(lam) < 0):
            raise InvalidParameter("eigenvalues must be sorted ascending")
        lam.setflags(write=False)
        object.__setattr__(self, "eigenvalues", lam)

    @property
    def dim(self) -> int:
        return len(self.modes)

    def harmonic_orders(self) -> range:
        return range(-self.n_max, self.n_max + 1)


def build_basis(n_max: int, k_max: int) -> TruncatedBasis:
    """All modes |n| <= n_max, 1 <= k <= k_max, sorted by eigenvalue."""
    if n_max < 0 or k_max < 1:
        raise InvalidParameter(f"need n_max >= 0 and k_max >= 1, got ({n_max}, {k_max})")
    entries = []
    for n in range(-n_max, n_max + 1):
        for k in range(1, k_max + 1):
            lam = bessel_zero(abs(n), k) ** 2
            entries.append((lam, n, k))
    entries.sort()
    modes = tuple(DiskModeIndex(n=n, k=k) for (_, n, k) in entries)
    eigenvalues = np.array([lam for (lam, _, _) in entries])
    return TruncatedBasis(n_max=n_max, k_max=k_max, modes=modes, eigenvalues=eigenvalues)


def inverse_dirichlet(basis: TruncatedBasis) -> CompactOperatorModel:
    """Diagonal model with entries 1/j_{|n|,k}^2 in basis order."""
    return CompactOperatorModel.from_matrix(
        np.diag(1.0 / basis.eigenvalues).astype(complex),
        label=f"inverse Dirichlet disk (n_max={basis.n_max}, k_max={basis.k_max})",
        construction="diagonal",
    )


def harmonic_inner_products(basis: TruncatedBasis, n) -> np.ndarray:
    """Coefficients of the normalized harmonic mode against the basis.

    The harmonic mode is h_n = r^{|n|} e^{i n phi} / sqrt(pi/(|n|+1)).
    Only modes with matching angular order contribute; for those,
    <h_n, e_{n,k}> = 2 sqrt(|n|+1) sign(J_{|n|+1}(j)) / j with j = j_{|n|,k}.
    """
    order = n.n if isinstance(n, HarmonicModeIndex) else int(n)
    if abs(order) > basis.n_max:
        raise OutOfBasis(f"harmonic order {order} exceeds basis n_max={basis.n_max}")
    m = abs(order)
    coeff = np.zeros(basis.dim)
    for i, mode in enumerate(basis.modes):
        if mode.n == order:
            j = np.sqrt(basis.eigenvalues[i])
            coeff[i] = 2.0 * np.sqrt(m + 1.0) * np.sign(bessel_j(m + 1, j)) / j
    return coeff


def _gram_defect(v: np.ndarray) -> float:
    g = v.conj().T @ v
    return float(np.abs(g - np.eye(g.shape[0])).max())


@dataclass(frozen=True)
class SchmidtSpec:
    """Finite-rank K as singular triples (s_j, Q_j, F_j).

    ``q_vectors`` (dim x J) hold the source functions over the
    Fourier-Bessel basis; ``f_vectors`` ((2 n_max + 1) x J) hold the
    harmonic images over orders -n_max..n_max.  Both families must be
    orthonormal; s_j >= 0 nonincreasing (zero entries are inert).
    """

    s: np.ndarray
    q_vectors: np.ndarray
    f_vectors: np.ndarray

    def __post_init__(self):
        s = np.array(np.asarray(self.s), dtype=float)
        q = np.array(np.asarray(self.q_vectors), dtype=complex)
        f = np.array(np.asarray(self.f_vectors), dtype=complex)
        if s.ndim != 1 or q.ndim != 2 or f.ndim != 2:
            raise InvalidSchmidtSpec("expected s (J,), q_vectors (dim, J), f_vectors (H, J)")
        if q.shape[1] != s.size or f.shape[1] != s.size:
            raise InvalidSchmidtSpec("rank of s, q_vectors, f_vectors must agree")
        if np.any(s < 0) or np.any(np.diff(s) > 1e-12 * max(s[0] if s.size else 0.0, 1e-300)):
            raise InvalidSchmidtSpec("singular values must be nonnegative and nonincreasing")
        if s.size:
            if _gram_defect(q) > _ORTHONORMALITY_TOL:
                raise InvalidSchmidtSpec("source vectors are not orthonormal")
            if _gram_defect(f) > _ORTHONORMALITY_TOL:
                raise InvalidSchmidtSpec("harmonic image vectors are not orthonormal")
        for arr, name in ((s, "s"), (q, "q_vectors"), (f, "f_vectors")):
            if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag if np.iscomplexobj(arr) else arr)):
                raise InvalidSchmidtSpec(f"{name} contains NaN or Inf")
            arr.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "q_vectors", q)
        object.__setattr__(self, "f_vectors", f)

    @property
    def rank(self) -> int:
        return self.s.size


def empty_schmidt_spec(basis: TruncatedBasis) -> SchmidtSpec:
    return SchmidtSpec(s=np.zeros(0), q_vectors=np.zeros((basis.dim, 0)),
                       f_vectors=np.zeros((2 * basis.n_max + 1, 0)))


def random_schmidt_spec(basis: TruncatedBasis, rank: int, seed: int,
                        s_max: float, real: bool = False) -> SchmidtSpec:
    """Haar-orthonormal random spec with s_1 = s_max, nonincreasing."""
    if rank < 1 or rank > basis.dim:
        raise InvalidParameter(f"rank must be in [1, {basis.dim}], got {rank}")
    rng = np.random.default_rng(seed)
    n_harm = 2 * basis.n_max + 1

    def frame(rows: int) -> np.ndarray:
        z = rng.standard_normal((rows, rank))
        if not real:
            z = z + 1j * rng.standard_normal((rows, rank))
        q, _ = np.linalg.qr(z)
        return q

    s = np.sort(rng.uniform(0.2, 1.0, size=rank))[::-1]
    s = s_max * s / s[0]
    return SchmidtSpec(s=s, q_vectors=frame(basis.dim), f_vectors=frame(n_harm))


def embed_schmidt_spec(spec: SchmidtSpec, coarse: TruncatedBasis,
                       fine: TruncatedBasis) -> SchmidtSpec:
    """Carry a spec to a finer basis by mode identity (zero padding).

    The underlying operator K is unchanged: coefficients move to the
    positions of the same (n, k) modes and new modes get zeros.
    """
    if spec.q_vectors.shape[0] != coarse.dim:
        raise DimMismatch("spec does not live on the coarse basis")
    if fine.n_max < coarse.n_max or fine.k_max < coarse.k_max:
        raise InvalidParameter("fine basis must contain the coarse basis")
    pos = {(mode.n, mode.k): i for i, mode in enumerate(fine.modes)}
    q = np.zeros((fine.dim, spec.rank), dtype=complex)
    for i, mode in enumerate(coarse.modes):
        q[pos[(mode.n, mode.k)], :] = spec.q_vectors[i, :]
    f = np.zeros((2 * fine.n_max + 1, spec.rank), dtype=complex)
    offset = fine.n_max - coarse.n_max
    f[offset:offset + 2 * coarse.n_max + 1, :] = spec.f_vectors
    return SchmidtSpec(s=spec.s, q_vectors=q, f_vectors=f)


def assemble_restriction(basis: TruncatedBasis, k_spec: SchmidtSpec) -> CompactOperatorModel:
    """Matrix of L_D^{-1} + sum_j s_j (., Q_j) F_j in basis coordinates."""
    if k_spec.rank and k_spec.q_vectors.shape[0] != basis.dim:
        raise DimMismatch(
            f"source vectors have length {k_spec.q_vectors.shape[0]}, basis dim is {basis.dim}")
    if k_spec.rank and k_spec.f_vectors.shape[0] != 2 * basis.n_max + 1:
        raise DimMismatch(
            f"harmonic vectors have length {k_spec.f_vectors.shape[0]}, "
            f"expected {2 * basis.n_max + 1}")
    entries = np.diag(1.0 / basis.eigenvalues).astype(complex)
    if k_spec.rank:
        harm = np.column_stack([harmonic_inner_products(basis, n)
                                for n in basis.harmonic_orders()]).astype(complex)
        f_expanded = harm @ k_spec.f_vectors               # (dim, J)
        entries = entries + (f_expanded * k_spec.s) @ k_spec.q_vectors.conj().T
    return CompactOperatorModel.from_matrix(
        entries,
        label=f"L_K^-1 rank-{k_spec.rank} (n_max={basis.n_max}, k_max={basis.k_max})",
        construction="disk_restriction",
    )
