# One-variable factorization engine.  A nonnegative Laurent polynomial Q
# is factored as Q = P*P by building Schur complements of truncated block
# Toeplitz matrices: P_0 is the square root of the limiting corner
# complement, and each later coefficient is recovered from a triangular
# extension solve against the factor built so far.  A classical scalar
# root-pairing construction serves as an independent oracle.

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cholesky_banded, solveh_banded

from . import linalg, verify
from .poly import (
    MatrixAnalyticPoly1,
    MatrixLaurentPoly1,
    block_toeplitz,
    circle_grid,
    eval1_grid,
    toeplitz_psd_check,
)

DEFAULT_CONV_TOL = 1e-10
DEFAULT_RESIDUAL_TOL = 1e-8
DEFAULT_N_MAX = 4096
TRUNCATION_PSD_TOL = 1e-8


class NotNonnegativeError(ValueError):
    """Input fails a necessary condition for circle nonnegativity."""

    def __init__(self, message, min_eig=None, n_blocks=None):
        super().__init__(message)
        self.min_eig = min_eig
        self.n_blocks = n_blocks


class SchurConvergenceError(RuntimeError):
    """Truncation doubling hit the block cap before the gap closed."""

    def __init__(self, message, gap, partial):
        super().__init__(message)
        self.gap = gap
        self.partial = partial


class FactorNumericalError(RuntimeError):
    """Extension solve inconsistent with the Schur complement structure."""


class UnpairedRootError(ValueError):
    """Boundary root with odd multiplicity: no factorization exists."""


@dataclass
class SchurResult:
    """Approximated corner Schur complement with truncation metadata."""

    value: np.ndarray
    k: int
    n_used: int
    gap: float
    converged: bool


@dataclass
class FactorReport:
    residual_sup: float
    outer_verdict: str
    n_used: int
    gap: float = 0.0
    converged: bool = True
    tolerances: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "residual_sup": self.residual_sup,
            "outer_verdict": self.outer_verdict,
            "N_used": self.n_used,
            "gap": self.gap,
            "converged": self.converged,
            "tolerances": self.tolerances,
        }


def _causal_stack(q: MatrixLaurentPoly1) -> np.ndarray:
    # stack[d] = Q_d for d = 0..m, plus one trailing zero slab for clipped
    # out-of-band lookups.
    m, r = q.degree, q.size
    stack = np.zeros((m + 2, r, r), dtype=complex)
    for d in range(m + 1):
        stack[d] = q.coeff(d)
    return stack


def _banded_lower(q: MatrixLaurentPoly1, n_blocks: int, stack: np.ndarray) -> np.ndarray:
    # Lower band storage of the n_blocks-truncation: ab[i, j] = T[i+j, j].
    m, r = q.degree, q.size
    dim = n_blocks * r
    bw = min((m + 1) * r - 1, dim - 1)
    cols = np.arange(dim)
    ab = np.zeros((bw + 1, dim), dtype=complex)
    for i in range(bw + 1):
        xs = cols + i
        valid = xs < dim
        xv = xs[valid]
        cv = cols[valid]
        d = np.minimum(xv // r - cv // r, m + 1)
        ab[i, valid] = stack[d, xv % r, cv % r]
    return ab


def truncated_schur(q: MatrixLaurentPoly1, k: int, n_blocks: int) -> np.ndarray:
    """Schur complement of the N-block Toeplitz truncation on the leading
    k+1 blocks.

    An upper bound, in the PSD order, for the infinite-operator complement;
    raises NotNonnegativeError when the truncation itself is not PSD.
    """
    if k < 0:
        raise ValueError("block index k must be >= 0")
    if n_blocks < k + 1:
        raise ValueError(f"need N >= k + 1, got N = {n_blocks}, k = {k}")
    m, r = q.degree, q.size
    a = block_toeplitz(q, k + 1)
    trailing = n_blocks - (k + 1)
    if trailing == 0 or q.scale == 0.0:
        return a
    stack = _causal_stack(q)
    ab = _banded_lower(q, trailing, stack)

    dim = trailing * r
    width = (k + 1) * r
    xs = np.arange(dim)[:, None]
    ys = np.arange(width)[None, :]
    d = np.minimum((k + 1) + xs // r - ys // r, m + 1)
    b = stack[d, xs % r, ys % r]

    scale = max(q.scale, 1e-300)
    try:
        x = solveh_banded(ab, b, lower=True)
    except np.linalg.LinAlgError:
        # PSD-singular trailing blocks are legitimate; retry with a jitter
        # far below every meaningful tolerance.
        ab_j = ab.copy()
        ab_j[0, :] += 1e-13 * scale
        try:
            x = solveh_banded(ab_j, b, lower=True)
        except np.linalg.LinAlgError as exc:
            raise NotNonnegativeError(
                f"Q not nonnegative on circle (witness at truncation N = {n_blocks}: "
                f"trailing block not positive definite)",
                n_blocks=n_blocks,
            ) from exc
    s = a - b.conj().T @ x
    s = (s + s.conj().T) / 2
    verdict = linalg.psd_check(s, tol=TRUNCATION_PSD_TOL)
    if not verdict.ok:
        raise NotNonnegativeError(
            f"Q not nonnegative on circle (witness at truncation N = {n_blocks}: "
            f"corner complement eigenvalue {verdict.min_eig:.6e})",
            min_eig=verdict.min_eig,
            n_blocks=n_blocks,
        )
    return s


def _gap_norm(a: np.ndarray, b: np.ndarray) -> float:
    pair = linalg.eig_hermitian((a - b + (a - b).conj().T) / 2)
    return float(max(abs(pair.values[0]), abs(pair.values[-1])))


def schur_limit(
    q: MatrixLaurentPoly1,
    k: int,
    conv_tol: float = DEFAULT_CONV_TOL,
    n0: int | None = None,
    n_max: int = DEFAULT_N_MAX,
) -> SchurResult:
    """Approximate the infinite-operator corner Schur complement by
    doubling the truncation until the PSD-ordered gap closes.

    The truncation sequence is monotone nonincreasing in the PSD order,
    so the gap is a one-sided convergence certificate.
    """
    if n0 is None:
        n0 = 4 * (q.degree + 1)
    n0 = max(k + 1, min(n0, max(n_max // 2, k + 1)))
    scale = max(q.scale, 1e-300)
    s_prev = truncated_schur(q, k, n0)
    n = n0
    gap = math.inf
    while True:
        n_next = 2 * n
        if n_next > n_max:
            partial = SchurResult(value=s_prev, k=k, n_used=n, gap=gap, converged=False)
            raise SchurConvergenceError(
                f"slow Schur convergence: gap {gap:.3e} at block cap N = {n_max} "
                f"(expected near boundary zeros of Q)",
                gap=gap,
                partial=partial,
            )
        s_next = truncated_schur(q, k, n_next)
        gap = _gap_norm(s_prev, s_next)
        if gap <= conv_tol * scale:
            return SchurResult(value=s_next, k=k, n_used=n_next, gap=gap, converged=True)
        s_prev, n = s_next, n_next


def _block_lower_factor(coeffs: list[np.ndarray]) -> np.ndarray:
    # L[i, j] = P_{i-j} for the coefficients found so far.
    kk = len(coeffs)
    r = coeffs[0].shape[0]
    ell = np.zeros((kk * r, kk * r), dtype=complex)
    for i in range(kk):
        for j in range(i + 1):
            ell[i * r : (i + 1) * r, j * r : (j + 1) * r] = coeffs[i - j]
    return ell


def factor(
    q: MatrixLaurentPoly1,
    conv_tol: float = DEFAULT_CONV_TOL,
    residual_tol: float = DEFAULT_RESIDUAL_TOL,
    rank_tol: float = linalg.DEFAULT_RANK_TOL,
    clamp_tol: float = 1e-7,
    n0: int | None = None,
    n_max: int = DEFAULT_N_MAX,
    grid: verify.GridSpec | None = None,
) -> tuple[MatrixAnalyticPoly1, FactorReport]:
    """Factor a circle-nonnegative Laurent polynomial as Q = P*P with
    P analytic, degree <= deg Q, and P(0) Hermitian PSD.

    Near-boundary-zero inputs that exhaust the truncation budget are not
    rejected: the factorization completes with the convergence gap
    recorded in the report, and the residual is then gap-dominated.
    """
    grid = grid or verify.GridSpec(9)
    m, r = q.degree, q.size
    scale = max(q.scale, 1e-300)

    screen = toeplitz_psd_check(q, m + 1, tol=1e-9)
    if not screen.ok:
        raise NotNonnegativeError(
            f"Q not nonnegative on circle: Toeplitz truncation at N = {m + 1} "
            f"has eigenvalue {screen.min_eig:.6e}",
            min_eig=screen.min_eig,
            n_blocks=m + 1,
        )

    def corner(kk: int):
        try:
            return schur_limit(q, kk, conv_tol=conv_tol, n0=n0, n_max=n_max), True
        except SchurConvergenceError as err:
            return err.partial, False

    results = []
    converged = True
    for kk in range(m + 1):
        res, ok = corner(kk)
        results.append(res)
        converged = converged and ok
    gap_max = max((res.gap for res in results if math.isfinite(res.gap)), default=0.0)
    n_used = max(res.n_used for res in results)

    p0 = linalg.psd_sqrt(results[0].value, clamp_tol=clamp_tol)
    coeffs = [p0]
    solve_atol = 10.0 * (gap_max + conv_tol * scale) + 1e-12 * scale
    for kk in range(1, m + 1):
        sk = results[kk].value
        bcol = sk[r:, :r]
        ell = _block_lower_factor(coeffs)
        try:
            x = linalg.range_restricted_solve(
                ell.conj().T,
                bcol,
                rank_tol=rank_tol,
                residual_rtol=1e-8,
                residual_atol=solve_atol,
            )
        except linalg.InconsistentSystemError as exc:
            raise FactorNumericalError(
                f"numerical failure: S({kk}) structure violated "
                f"(solve residual {exc.residual:.3e}; tolerance too tight for "
                f"this input)"
            ) from exc
        coeffs.append(x[(kk - 1) * r :, :])

    # Range nesting: every later coefficient acts into the numerical range
    # of P_0.  A no-op when P_0 has full rank.
    pair = linalg.eig_hermitian(p0)
    lam_top = float(pair.values[-1]) if pair.values.size else 0.0
    if lam_top > 0 and float(pair.values[0]) <= rank_tol * lam_top:
        keep = pair.values > rank_tol * lam_top
        proj = pair.basis[:, keep] @ pair.basis[:, keep].conj().T
        coeffs = [coeffs[0]] + [proj @ c for c in coeffs[1:]]

    phat = MatrixAnalyticPoly1(coeffs)
    resid = verify.residual(q, phat, grid)
    outer = verify.outer_check(phat)
    report = FactorReport(
        residual_sup=resid,
        outer_verdict=outer.verdict,
        n_used=n_used,
        gap=gap_max,
        converged=converged,
        tolerances={
            "conv_tol": conv_tol,
            "residual_tol": residual_tol,
            "rank_tol": rank_tol,
            "clamp_tol": clamp_tol,
            "grid_g": grid.g1,
            "scale": scale,
        },
    )
    return phat, report


def _complete_unitary(u1: np.ndarray, n: int) -> np.ndarray:
    """Extend orthonormal columns u1 to an n x n unitary, deterministically:
    repeatedly adjoin the standard basis vector with the largest residual."""
    cols = [u1[:, i] for i in range(u1.shape[1])]
    while len(cols) < n:
        best, best_norm = None, 1e-8
        for j in range(n):
            w = np.zeros(n, dtype=complex)
            w[j] = 1.0
            for c in cols:
                w = w - c * np.vdot(c, w)
            nrm = float(np.linalg.norm(w))
            if nrm > best_norm + 1e-12:
                best, best_norm = w / nrm, nrm
        # Second orthogonalization pass for numerical cleanliness.
        for c in cols:
            best = best - c * np.vdot(c, best)
        cols.append(best / np.linalg.norm(best))
    return np.column_stack(cols)


def normalize_gauge(
    p: MatrixAnalyticPoly1, rank_tol: float = linalg.DEFAULT_RANK_TOL
) -> MatrixAnalyticPoly1:
    """Multiply P on the left by the adjoint of the unitary polar factor of
    P(0), making the constant coefficient Hermitian PSD.

    Evaluation norms P(z)*P(z) are unchanged at every point.  On the
    numerical kernel of P(0) the unitary is completed deterministically.
    """
    if not p.is_square:
        raise ValueError("gauge normalization needs square coefficients")
    n = p.rows
    p0 = p.coeffs[0]
    u1, sig, v1 = linalg.svd_via_eig(p0, rank_tol)
    if sig.size == 0:
        return p  # P(0) = 0 is already PSD.
    # Re-orthonormalize (modified Gram-Schmidt) before completing.
    for i in range(u1.shape[1]):
        for jj in range(i):
            u1[:, i] -= u1[:, jj] * np.vdot(u1[:, jj], u1[:, i])
        u1[:, i] /= np.linalg.norm(u1[:, i])
    if sig.size == n:
        w = u1 @ v1.conj().T
    else:
        u_full = _complete_unitary(u1, n)
        v_full = _complete_unitary(v1, n)
        w = u_full @ v_full.conj().T
    wh = w.conj().T
    return MatrixAnalyticPoly1([wh @ c for c in p.coeffs])


def _poly_eval(coeffs_desc: np.ndarray, z: complex) -> complex:
    acc = 0.0 + 0.0j
    for c in coeffs_desc:
        acc = acc * z + c
    return acc


def scalar_root_factor(
    q: MatrixLaurentPoly1, pairing_tol: float = 1e-6
) -> MatrixAnalyticPoly1:
    """Classical root-pairing factorization for scalar Laurent polynomials.

    The roots of z^m q(z) come in conjugate-reciprocal pairs; the factor
    takes one root per pair, chosen with modulus >= 1, and circle-adjacent
    root clusters contribute half their multiplicity.  Fully independent
    of the Schur-complement path.
    """
    if q.size != 1:
        raise ValueError("root-pairing oracle is scalar-only")
    m = q.degree
    scale = q.scale
    if scale == 0.0:
        return MatrixAnalyticPoly1([np.zeros((1, 1))])

    zs = circle_grid(10)
    vals = eval1_grid(q, zs)[:, 0, 0].real
    vmin = float(np.min(vals))
    if vmin < -1e-9 * scale:
        raise NotNonnegativeError(
            f"q not nonnegative on circle: sampled value {vmin:.6e}", min_eig=vmin
        )
    q0 = float(q.coeff(0)[0, 0].real)
    if m == 0:
        return MatrixAnalyticPoly1([np.array([[np.sqrt(max(q0, 0.0))]])])

    # Coefficients of c(z) = z^m q(z), ascending then flipped for np.roots.
    asc = np.array([q.coeff(k - m)[0, 0] for k in range(2 * m + 1)], dtype=complex)
    desc = asc[::-1]
    roots = np.roots(desc)
    deriv = (desc[:-1] * np.arange(2 * m, 0, -1)).astype(complex)
    polished = []
    for w in roots:
        dw = _poly_eval(deriv, w)
        if abs(dw) > 1e-12 * max(1.0, abs(_poly_eval(desc, w))):
            w = w - _poly_eval(desc, w) / dw
        polished.append(w)
    roots = np.array(polished)

    outside = [w for w in roots if abs(w) > 1.0 + pairing_tol]
    boundary = [w for w in roots if abs(abs(w) - 1.0) <= pairing_tol]

    selected = list(outside)
    if boundary:
        boundary.sort(key=lambda w: math.atan2(w.imag, w.real))
        clusters: list[list[complex]] = [[boundary[0]]]
        for w in boundary[1:]:
            if abs(w - clusters[-1][-1]) <= pairing_tol * (1.0 + abs(w)):
                clusters[-1].append(w)
            else:
                clusters.append([w])
        if len(clusters) > 1 and abs(clusters[0][0] - clusters[-1][-1]) <= pairing_tol * (
            1.0 + abs(clusters[0][0])
        ):
            clusters[0] = clusters.pop() + clusters[0]
        for cluster in clusters:
            if len(cluster) % 2 != 0:
                raise UnpairedRootError(
                    f"not factorable: unpaired boundary root near {np.mean(cluster):.6g}"
                )
            rep = np.mean(cluster)
            rep = rep / abs(rep)
            selected.extend([rep] * (len(cluster) // 2))

    if len(selected) != m:
        raise UnpairedRootError(
            f"not factorable: root pairing selected {len(selected)} of {m} roots "
            f"(boundary multiplicities inconsistent)"
        )

    monic_desc = np.poly(np.array(selected)) if selected else np.array([1.0 + 0j])
    u_asc = monic_desc[::-1].astype(complex)
    gamma = np.sqrt(max(q0, 0.0) / float(np.sum(np.abs(u_asc) ** 2)))
    p_asc = gamma * u_asc
    p00 = p_asc[0]
    if abs(p00) > 0:
        p_asc = p_asc * (np.conj(p00) / abs(p00))
    return MatrixAnalyticPoly1([np.array([[c]]) for c in p_asc])
