# Dense complex Hermitian linear algebra used by the factorization engine:
# cyclic Jacobi eigensolver, PSD square roots with clamping, contraction
# extraction from PSD block matrices, 2x2-block Schur complements, and
# range-restricted minimum-norm solves.

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

DEFAULT_HERMITIAN_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-10
DEFAULT_CLAMP_TOL = 1e-9


class EigenConvergenceError(RuntimeError):
    """Jacobi sweeps did not reduce the off-diagonal mass below target."""


class NotPSDError(ValueError):
    """Matrix has an eigenvalue below the allowed negative tolerance."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class InconsistentSystemError(ValueError):
    """Linear system has no solution within the requested residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass
class EigenPair:
    """Eigenvalues (real, ascending) and a unitary basis of eigenvectors."""

    values: np.ndarray
    basis: np.ndarray


class PsdVerdict(NamedTuple):
    ok: bool
    min_eig: float


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-d complex array and reject non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or infinite entries")
    return m


def hermitian_part(a) -> np.ndarray:
    a = as_matrix(a)
    return (a + a.conj().T) / 2


def check_hermitian(h, tol: float = DEFAULT_HERMITIAN_TOL) -> np.ndarray:
    """Validate near-Hermitian input and return its exact Hermitian part.

    The deviation max|H - H*| must not exceed tol * (1 + max|H|).
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"Hermitian matrix must be square, got {h.shape}")
    dev = np.max(np.abs(h - h.conj().T))
    scale = 1.0 + np.max(np.abs(h))
    if dev > tol * scale:
        raise ValueError(
            f"matrix is not Hermitian: max|H - H*| = {dev:.3e} exceeds "
            f"{tol:.1e} * (1 + max|H|) = {tol * scale:.3e}"
        )
    return (h + h.conj().T) / 2


def _rotation_rounds(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    # Round-robin tournament schedule: n-1 rounds of disjoint index pairs
    # covering every (p, q) once per sweep.  Disjoint pairs commute, so a
    # whole round of rotations can be applied as one batched update.
    m = n if n % 2 == 0 else n + 1
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps), np.array(qs)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def eig_hermitian(h, tol: float = 1e-14, max_sweeps: int = 60) -> EigenPair:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns eigenvalues in ascending order and a unitary basis whose
    columns are the corresponding eigenvectors.  Deterministic: each sweep
    applies a fixed round-robin schedule of disjoint rotation pairs.
    """
    a = check_hermitian(h)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    if n == 1:
        return EigenPair(values=np.array([a[0, 0].real]), basis=v)

    scale = np.max(np.abs(a))
    if scale == 0.0:
        return EigenPair(values=np.zeros(n), basis=v)

    def off_norm(m):
        return np.sqrt(np.sum(np.abs(np.triu(m, 1)) ** 2))

    target = tol * scale * n
    rounds = _rotation_rounds(n)
    converged = False
    for _ in range(max_sweeps):
        if off_norm(a) <= target:
            converged = True
            break
        for ps, qs in rounds:
            apq = a[ps, qs]
            absq = np.abs(apq)
            act = absq > 0.0
            if not np.any(act):
                continue
            safe = np.where(act, absq, 1.0)
            phase = np.where(act, apq / safe, 1.0)
            app = a[ps, ps].real
            aqq = a[qs, qs].real
            tau = (aqq - app) / (2.0 * safe)
            # hypot avoids overflow for extreme diagonal/off-diagonal ratios
            t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(tau == 0.0, 1.0, t)
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            c = np.where(act, c, 1.0)
            s = np.where(act, s, 0.0)
            # Columns: A <- A J with J[p,p]=c, J[q,p]=-s*conj(phase),
            # J[p,q]=s, J[q,q]=c*conj(phase); then rows: A <- J* A.
            sc = s * np.conj(phase)
            cc = c * np.conj(phase)
            colp = a[:, ps].copy()
            colq = a[:, qs].copy()
            a[:, ps] = c * colp - sc * colq
            a[:, qs] = s * colp + cc * colq
            rowp = a[ps, :].copy()
            rowq = a[qs, :].copy()
            sp = (s * phase)[:, None]
            cp = (c * phase)[:, None]
            a[ps, :] = c[:, None] * rowp - sp * rowq
            a[qs, :] = s[:, None] * rowp + cp * rowq
            a[ps, qs] = 0.0
            a[qs, ps] = 0.0
            a[ps, ps] = a[ps, ps].real
            a[qs, qs] = a[qs, qs].real
            vcolp = v[:, ps].copy()
            vcolq = v[:, qs].copy()
            v[:, ps] = c * vcolp - sc * vcolq
            v[:, qs] = s * vcolp + cc * vcolq
    else:
        converged = off_norm(a) <= target
    if not converged:
        raise EigenConvergenceError(
            f"Jacobi sweeps did not converge for a {n}x{n} Hermitian matrix: "
            f"off-diagonal residual {off_norm(a):.3e} after {max_sweeps} sweeps"
        )

    values = np.real(np.diag(a))
    order = np.argsort(values, kind="stable")
    return EigenPair(values=values[order], basis=v[:, order])


def psd_check(h, tol: float = 0.0) -> PsdVerdict:
    """Smallest-eigenvalue nonnegativity test.

    Passes iff min eig >= -tol * (1 + max |eig|).
    """
    pair = eig_hermitian(h)
    lo = float(pair.values[0])
    hi = float(np.max(np.abs(pair.values)))
    return PsdVerdict(ok=lo >= -tol * (1.0 + hi), min_eig=lo)


def psd_sqrt(h, clamp_tol: float = DEFAULT_CLAMP_TOL) -> np.ndarray:
    """Hermitian PSD square root, clamping marginal negative eigenvalues.

    Eigenvalues in [-clamp_tol*scale, 0) are treated as zero; anything
    below that raises NotPSDError.
    """
    pair = eig_hermitian(h)
    vals = pair.values
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    floor = -clamp_tol * scale
    if vals[0] < floor:
        raise NotPSDError(
            f"matrix is not PSD: eigenvalue {vals[0]:.6e} below "
            f"-clamp_tol*scale = {floor:.6e}",
            eigenvalue=float(vals[0]),
        )
    clamped = np.where(vals < 0.0, 0.0, vals)
    root = (pair.basis * np.sqrt(clamped)) @ pair.basis.conj().T
    return (root + root.conj().T) / 2


def psd_clamp(h, clamp_tol: float = DEFAULT_CLAMP_TOL, scale: float | None = None) -> np.ndarray:
    """Project marginally-PSD Hermitian input onto the PSD cone.

    Same eigenvalue floor as psd_sqrt: genuine negativity raises.  scale
    overrides the reference magnitude (useful when the input is a small
    piece of a larger computation).
    """
    pair = eig_hermitian(h)
    vals = pair.values
    if scale is None:
        scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    if vals[0] < -clamp_tol * scale:
        raise NotPSDError(
            f"matrix is not PSD: eigenvalue {vals[0]:.6e}",
            eigenvalue=float(vals[0]),
        )
    if vals[0] >= 0.0:
        return hermitian_part(h)
    clamped = np.where(vals < 0.0, 0.0, vals)
    out = (pair.basis * clamped) @ pair.basis.conj().T
    return (out + out.conj().T) / 2


def op_norm(a) -> float:
    """Spectral norm via the Gram matrix (largest singular value)."""
    a = as_matrix(a)
    if a.shape[0] >= a.shape[1]:
        gram = a.conj().T @ a
    else:
        gram = a @ a.conj().T
    pair = eig_hermitian(gram)
    top = max(float(pair.values[-1]), 0.0)
    return float(np.sqrt(top))


def _half_powers(h, rank_tol):
    """Eigen-based H^(1/2) and pseudo-inverse H^(-1/2) of a PSD matrix."""
    pair = eig_hermitian(h)
    vals = np.maximum(pair.values, 0.0)
    top = float(vals[-1]) if vals.size else 0.0
    thresh = rank_tol * top
    keep = vals > thresh
    sq = np.where(keep, np.sqrt(vals), 0.0)
    with np.errstate(divide="ignore"):
        inv = np.where(keep, 1.0 / np.where(keep, np.sqrt(vals), 1.0), 0.0)
    half = (pair.basis * sq) @ pair.basis.conj().T
    half_pinv = (pair.basis * inv) @ pair.basis.conj().T
    return hermitian_part(half), hermitian_part(half_pinv), top


def contraction_extract(a, b, c, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Extract the contraction G with C^(1/2) G A^(1/2) = B.

    A and C are PSD; the block matrix [[A, B*], [B, C]] must be PSD for the
    reconstruction to succeed.  G maps the numerical range of A into that
    of C and is zero on the orthogonal complements; its operator norm is
    at most 1 up to rounding.
    """
    a = check_hermitian(a)
    c = check_hermitian(c)
    b = as_matrix(b)
    if b.shape != (c.shape[0], a.shape[0]):
        raise ValueError(
            f"block shapes not conformal: A {a.shape}, B {b.shape}, C {c.shape}"
        )
    a_half, a_pinv, a_top = _half_powers(a, rank_tol)
    c_half, c_pinv, c_top = _half_powers(c, rank_tol)
    g = c_pinv @ b @ a_pinv
    resid = np.max(np.abs(c_half @ g @ a_half - b))
    scale = max(np.sqrt(a_top * c_top), np.max(np.abs(b)), 1e-300)
    if resid > 1e-8 * scale:
        raise NotPSDError(
            f"block not PSD: contraction reconstruction residual {resid:.3e} "
            f"exceeds 1e-8 * scale = {1e-8 * scale:.3e}"
        )
    norm_g = op_norm(g)
    if norm_g > 1.0 + 1e-8:
        raise NotPSDError(
            f"block not PSD: extracted operator has norm {norm_g:.6e} > 1"
        )
    return g


def schur_complement(
    m,
    k: int,
    rank_tol: float = DEFAULT_RANK_TOL,
    clamp_tol: float = DEFAULT_CLAMP_TOL,
) -> np.ndarray:
    """Schur complement of a PSD matrix supported on the leading k coordinates.

    Uses A - B* C^(-1) B when the trailing block C is well conditioned
    (condition estimate below 1/rank_tol), otherwise the contraction form
    A^(1/2) (I - G*G) A^(1/2), which stays correct for singular C.
    """
    m = check_hermitian(m)
    n = m.shape[0]
    if not 1 <= k < n:
        raise ValueError(f"split index k = {k} out of range [1, {n - 1}]")
    verdict = psd_check(m, tol=1e-8)
    if not verdict.ok:
        raise NotPSDError(
            f"matrix is not PSD: smallest eigenvalue {verdict.min_eig:.6e}",
            eigenvalue=verdict.min_eig,
        )
    a = m[:k, :k]
    b = m[k:, :k]
    c = m[k:, k:]
    m_scale = 1.0 + abs(verdict.min_eig) + float(np.max(np.abs(m)))

    c_pair = eig_hermitian(c)
    c_lo = float(c_pair.values[0])
    c_hi = float(np.max(np.abs(c_pair.values)))
    if c_hi > 0 and c_lo > rank_tol * c_hi:
        # Well-conditioned C: familiar formula through the eigenbasis.
        x = (c_pair.basis * (1.0 / c_pair.values)) @ c_pair.basis.conj().T @ b
        s = a - b.conj().T @ x
    else:
        g = contraction_extract(hermitian_part(a), b, hermitian_part(c), rank_tol)
        a_half, _, _ = _half_powers(hermitian_part(a), rank_tol)
        s = a_half @ (np.eye(k) - g.conj().T @ g) @ a_half
    return psd_clamp(s, clamp_tol, scale=m_scale)


def embed_leading(s, n: int) -> np.ndarray:
    """Pad a k x k block to n x n with zeros (support on leading coordinates)."""
    s = as_matrix(s)
    k = s.shape[0]
    out = np.zeros((n, n), dtype=complex)
    out[:k, :k] = s
    return out


def svd_via_eig(a, rank_tol: float = DEFAULT_RANK_TOL):
    """Thin SVD restricted to singular values above rank_tol * sigma_max.

    Computed from the Hermitian embedding [[0, A], [A*, 0]], whose
    eigenvalues are +-sigma_i: unlike the Gram matrix route this does not
    square the condition number, so the rank threshold acts on true
    singular values.  Returns (U, sigma, V) with A ~= U diag(sigma) V*.
    """
    a = as_matrix(a)
    n, p = a.shape
    emb = np.zeros((n + p, n + p), dtype=complex)
    emb[:n, n:] = a
    emb[n:, :n] = a.conj().T
    pair = eig_hermitian(emb)
    top = float(pair.values[-1]) if pair.values.size else 0.0
    if top <= 0.0:
        return (
            np.zeros((n, 0), dtype=complex),
            np.zeros(0),
            np.zeros((p, 0), dtype=complex),
        )
    keep = pair.values > max(rank_tol * top, 0.0)
    sigma = pair.values[keep][::-1]
    vecs = pair.basis[:, keep][:, ::-1]
    # Eigenvectors split as (u; v)/sqrt(2) per singular triple.
    u = vecs[:n, :] * np.sqrt(2.0)
    v = vecs[n:, :] * np.sqrt(2.0)
    return u, sigma, v


def range_restricted_solve(
    rstar,
    b,
    rank_tol: float = DEFAULT_RANK_TOL,
    residual_rtol: float = 1e-8,
    residual_atol: float = 0.0,
) -> np.ndarray:
    """Minimum-norm solution X of Rstar X = B with ran X inside ran R.

    The numerical range of R = Rstar* is fixed by singular values above
    rank_tol times the largest one.  Raises InconsistentSystemError when
    the residual exceeds residual_rtol * ||B||_F + residual_atol, which
    signals that B was not in the range of Rstar.
    """
    rstar = as_matrix(rstar)
    b = as_matrix(b)
    if rstar.shape[0] != b.shape[0]:
        raise ValueError(
            f"Rstar and B are not conformal: {rstar.shape} vs {b.shape}"
        )
    u, sigma, v = svd_via_eig(rstar, rank_tol)
    # X = V diag(1/sigma) U* B: minimum norm, supported on ran R = ran(V).
    x = v @ ((u.conj().T @ b) / sigma[:, None]) if sigma.size else np.zeros(
        (rstar.shape[1], b.shape[1]), dtype=complex
    )
    resid = float(np.linalg.norm(rstar @ x - b))
    bnorm = float(np.linalg.norm(b))
    if resid > residual_rtol * bnorm + residual_atol:
        raise InconsistentSystemError(
            f"inconsistent system: residual {resid:.3e} exceeds "
            f"{residual_rtol:.1e} * ||B|| + {residual_atol:.3e}",
            residual=resid,
        )
    return x
