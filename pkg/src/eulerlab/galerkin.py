"""Fourier-Galerkin discretization of the curl-type operator on 1-forms.

The operator star_g d is discretized as a symmetric matrix pencil (B, M):
B_ij = integral of e_i ^ d(e_j) is metric-independent and assembled exactly
by term matching, M(g)_ij = <e_i, e_j>_g is a grid quadrature with node
counts above the Nyquist bound of the integrand.  Eigenvalue clusters are
tracked along metric families, first-order splitting is cross-checked
against the variation pairing, and the contour projector / compression
machinery reduces an operator family near a cluster to a small symmetric
matrix whose spectrum reproduces the nearby eigenvalues.

Closed forms span a large kernel of B; windows exclude it rather than
constructing a coexact complement, since coexactness is metric-dependent.
The inner product is frozen by symmetrizing the pencil as
M^{-1/2} B M^{-1/2} wherever the compression machinery needs a plain
symmetric family.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .contact import MetricFamily, MetricField, OneForm, uniform_grid
from .errors import (
    ClusterLeakage,
    DegenerateDirection,
    IllConditionedContour,
    NotPositiveDefinite,
    WindowTouchesSpectrum,
)
from .spectral import TWO_PI, VOLUME, SpectralVectorField, lex_negative
from .trig import COS, SIN, TrigPoly

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k, _s in [(0, 1, 2, 1), (1, 2, 0, 1), (2, 0, 1, 1),
                       (0, 2, 1, -1), (2, 1, 0, -1), (1, 0, 2, -1)]:
    _EPS3[_i, _j, _k] = _s


@dataclass(frozen=True)
class BasisElement:
    slot: int   # which dx_j carries the scalar
    kind: int   # COS or SIN; the k = 0 constant is a COS term
    k: tuple


class FormBasis:
    """Realified trig 1-form basis: (cos|sin)(k.x) dx_slot, |k|_inf <= K.

    Ordering is slot-major; within a slot the constant comes first, then
    cos/sin pairs over the lexicographically sorted positive half-lattice.
    Elements are L2-orthogonal under the flat metric with squared norms
    (2*pi)^3 for constants and (2*pi)^3 / 2 otherwise.
    """

    def __init__(self, K: int):
        if K < 1:
            raise ValueError("K must be at least 1")
        self.K = K
        half = []
        rng = range(-K, K + 1)
        for k1 in rng:
            for k2 in rng:
                for k3 in rng:
                    k = (k1, k2, k3)
                    if k == (0, 0, 0) or lex_negative(k):
                        continue
                    half.append(k)
        half.sort()
        self.half_lattice = half
        self.n_scalar = 1 + 2 * len(half)
        self.elements = []
        self.index = {}
        for slot in range(3):
            self.elements.append(BasisElement(slot, COS, (0, 0, 0)))
            for k in half:
                self.elements.append(BasisElement(slot, COS, k))
                self.elements.append(BasisElement(slot, SIN, k))
        for i, el in enumerate(self.elements):
            self.index[(el.slot, el.kind, el.k)] = i
        self.dimension = len(self.elements)
        self._grid_cache = {}

    def scalar_rows(self, nodes: int):
        """Scalar basis values on the uniform nodes^3 grid, shape (n_scalar, nodes^3)."""
        if nodes not in self._grid_cache:
            pts, _ = uniform_grid(nodes)
            rows = np.empty((self.n_scalar, pts.shape[0]))
            rows[0] = 1.0
            if self.half_lattice:
                kk = np.array(self.half_lattice, dtype=float)
                ph = pts @ kk.T
                rows[1::2] = np.cos(ph).T
                rows[2::2] = np.sin(ph).T
            self._grid_cache[nodes] = rows
        return self._grid_cache[nodes]

    def scalar_index(self, kind, k):
        if k == (0, 0, 0):
            return 0
        r = self.half_lattice.index(k)
        return 1 + 2 * r + (1 if kind == SIN else 0)

    def flat_gram_diagonal(self):
        d = np.full(self.dimension, 0.5 * VOLUME)
        for slot in range(3):
            d[slot * self.n_scalar] = VOLUME
        return d

    def form_to_vector(self, form: OneForm):
        """Exact coefficient vector of a trig-polynomial 1-form (must fit in K)."""
        vec = np.zeros(self.dimension)
        for slot in range(3):
            for kind, k, c in form.comps[slot].sorted_terms():
                key = (slot, kind, k)
                if key not in self.index:
                    raise ValueError(f"term {key} outside basis truncation K={self.K}")
                vec[self.index[key]] = c
        return vec

    def vector_to_form(self, vec) -> OneForm:
        comps = []
        for slot in range(3):
            p = TrigPoly()
            base = slot * self.n_scalar
            block = vec[base : base + self.n_scalar]
            if block[0] != 0.0:
                p = p + TrigPoly.const(block[0])
            for r, k in enumerate(self.half_lattice):
                c_cos = block[1 + 2 * r]
                c_sin = block[2 + 2 * r]
                if c_cos != 0.0:
                    p = p + TrigPoly.cos(k, c_cos)
                if c_sin != 0.0:
                    p = p + TrigPoly.sin(k, c_sin)
            comps.append(p)
        return OneForm(comps=tuple(comps))

    def field_to_vector(self, field: SpectralVectorField):
        """Coefficient vector of the flat metric dual of a spectral field."""
        from .contact import trig_components

        return self.form_to_vector(OneForm(comps=trig_components(field)))


def build_basis(K: int) -> FormBasis:
    return FormBasis(K)


def assemble_exterior(basis: FormBasis) -> np.ndarray:
    """Exact matrix B_ij = integral of e_i ^ d(e_j).

    Only cos/sin pairs of the same wave vector in different slots couple;
    every entry is an integer or half-integer multiple of (2*pi)^3.
    """
    D = basis.dimension
    B = np.zeros((D, D))
    half_vol = 0.5 * VOLUME
    for k in basis.half_lattice:
        ic = basis.scalar_index(COS, k)
        isn = basis.scalar_index(SIN, k)
        for a in range(3):
            for b in range(3):
                if a == b:
                    continue
                c = 3 - a - b
                sgn = _EPS3[a, c, b]
                val = sgn * k[c] * half_vol
                if val == 0.0:
                    continue
                B[a * basis.n_scalar + ic, b * basis.n_scalar + isn] += val
                B[a * basis.n_scalar + isn, b * basis.n_scalar + ic] += -val
    return B


def default_mass_nodes(K: int, degree_hint: int) -> int:
    return 2 * K + degree_hint + 1


@dataclass(frozen=True)
class GalerkinPencil:
    """The discretized operator: exterior matrix B and metric mass matrix M.

    B is metric-independent and exactly symmetric; M is symmetric positive
    definite for a positive metric.  Generalized eigenvalues of (B, M)
    discretize the spectrum of the curl-type operator on 1-forms.
    """

    basis: FormBasis
    exterior: np.ndarray
    mass: np.ndarray

    def solve(self, window):
        return solve_pencil(self.exterior, self.mass, window)


def assemble_pencil(metric: MetricField, basis: FormBasis, nodes=None) -> GalerkinPencil:
    return GalerkinPencil(
        basis=basis,
        exterior=assemble_exterior(basis),
        mass=assemble_mass(metric, basis, nodes),
    )


def assemble_mass(metric: MetricField, basis: FormBasis, nodes=None) -> np.ndarray:
    """Mass matrix M_ij = integral of g(e_i#, e_j#) vol_g by grid quadrature.

    Raises NotPositiveDefinite when the metric fails positivity on the
    quadrature grid.
    """
    if nodes is None:
        nodes = default_mass_nodes(basis.K, metric.degree_hint)
    pts, w = uniform_grid(nodes)
    G = metric.matrix(pts)
    if float(np.min(np.linalg.eigvalsh(G))) <= 1e-12:
        raise NotPositiveDefinite("metric not positive definite on the quadrature grid")
    Ginv = np.linalg.inv(G)
    sqrt_det = np.sqrt(np.linalg.det(G))
    rows = basis.scalar_rows(nodes)
    S = basis.n_scalar
    M = np.empty((basis.dimension, basis.dimension))
    for a in range(3):
        for b in range(a, 3):
            weight = Ginv[:, a, b] * sqrt_det * w
            block = (rows * weight) @ rows.T
            M[a * S : (a + 1) * S, b * S : (b + 1) * S] = block
            if b != a:
                M[b * S : (b + 1) * S, a * S : (a + 1) * S] = block.T
    return 0.5 * (M + M.T)


def mass_derivative(metric: MetricField, h, basis: FormBasis, nodes=None) -> np.ndarray:
    """Exact first-order mass matrix along the variation tensor h.

    dM_ij = -integral of [h(e_i#, e_j#) - Tr_g(h) g(e_i#, e_j#)/2] vol_g.
    """
    htensor = h.entries if hasattr(h, "entries") else h
    if nodes is None:
        nodes = default_mass_nodes(basis.K, metric.degree_hint + htensor.degree())
    pts, w = uniform_grid(nodes)
    G = metric.matrix(pts)
    Ginv = np.linalg.inv(G)
    sqrt_det = np.sqrt(np.linalg.det(G))
    H = htensor.eval_matrix(pts)
    HS = np.einsum("pij,pjk,pkl->pil", Ginv, H, Ginv)
    tr = np.einsum("pij,pij->p", Ginv, H)
    core = -HS + 0.5 * tr[:, None, None] * Ginv
    rows = basis.scalar_rows(nodes)
    S = basis.n_scalar
    M = np.empty((basis.dimension, basis.dimension))
    for a in range(3):
        for b in range(a, 3):
            weight = core[:, a, b] * sqrt_det * w
            block = (rows * weight) @ rows.T
            M[a * S : (a + 1) * S, b * S : (b + 1) * S] = block
            if b != a:
                M[b * S : (b + 1) * S, a * S : (a + 1) * S] = block.T
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class EigenCluster:
    """Eigenpairs of the pencil inside a window, M-orthonormal vectors as columns."""

    center: float
    radius: float
    eigenvalues: np.ndarray
    vectors: np.ndarray
    multiplicity: int

    @property
    def eigenpairs(self):
        return [(float(l), self.vectors[:, i]) for i, l in enumerate(self.eigenvalues)]


def solve_pencil(B: np.ndarray, M: np.ndarray, window) -> EigenCluster:
    """Generalized symmetric eigensolve; returns the pairs inside (lo, hi).

    Raises WindowTouchesSpectrum when any eigenvalue sits within 1e-8 of a
    window endpoint (the window no longer isolates a cluster).
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must be an increasing interval")
    vals, vecs = sla.eigh(B, M)
    if np.any(np.abs(vals - lo) < 1e-8) or np.any(np.abs(vals - hi) < 1e-8):
        raise WindowTouchesSpectrum(f"eigenvalue within 1e-8 of window ({lo}, {hi})")
    mask = (vals > lo) & (vals < hi)
    return EigenCluster(
        center=0.5 * (lo + hi),
        radius=0.5 * (hi - lo),
        eigenvalues=vals[mask],
        vectors=vecs[:, mask],
        multiplicity=int(np.count_nonzero(mask)),
    )


@dataclass(frozen=True)
class SplittingCurves:
    """Eigenvalue curves of the pencil along the metric family."""

    epsilons: np.ndarray
    curves: np.ndarray          # (n_eps, k), sorted per epsilon
    alpha_curve: np.ndarray     # eigenvalue matched to the contact form
    alpha_residuals: np.ndarray
    pairing_matrix: np.ndarray  # k x k first-order matrix from the variation pairing
    pairing_eigenvalues: np.ndarray
    fd_slopes: np.ndarray       # Richardson-extrapolated sorted slopes at 0
    fit_slopes: np.ndarray      # least-squares slope of each sorted curve
    window: tuple
    K: int

    def slope_gap(self):
        return float(np.max(self.fit_slopes) - np.min(self.fit_slopes))


def _match_by_overlap(cluster: EigenCluster, M: np.ndarray, target):
    overlaps = cluster.vectors.T @ (M @ target)
    idx = int(np.argmax(np.abs(overlaps)))
    return idx, float(cluster.eigenvalues[idx])


def _one_sided_slopes(lam0, levels, sorted_eigenvalues):
    """Richardson-extrapolated slopes from sorted curves at positive offsets.

    Sorting at a fixed sign of epsilon tracks branches consistently, so the
    sequence (sorted(lam(e)) - lam0)/e = s + a e + b e^2 + ... can be
    extrapolated; supports two or three levels.
    """
    f = [(sorted_eigenvalues[e] - lam0) / e for e in levels]
    e = list(levels)
    while len(f) > 1:
        g = []
        p = []
        for i in range(len(f) - 1):
            g.append((e[i] * f[i + 1] - e[i + 1] * f[i]) / (e[i] - e[i + 1]))
            p.append(e[i] * e[i + 1])
        f, e = g, p
    return f[0]


def track_splitting(family: MetricFamily, contact, window, K: int,
                    fd_epsilons=(0.04, 0.02, 0.01), nodes=None) -> SplittingCurves:
    """Eigenvalue curves of (B, M(g_eps)) near the cluster inside the window.

    The contact form's coefficient vector is matched by eigenvector overlap
    at every epsilon; finite-difference slopes at 0 are cross-checked
    against the eigenvalues of the pairing matrix Pi built from the
    variation pairing of the cluster eigenvectors.
    """
    from .contact import variation_pairing

    basis = build_basis(K)
    B = assemble_exterior(basis)
    alpha_vec = basis.form_to_vector(contact.alpha)
    lam0 = contact.lambda0

    eps_list = sorted(set(float(e) for e in family.epsilon_grid) | {0.0})
    fd_all = sorted(set(abs(float(e)) for e in fd_epsilons) - {0.0})
    solve_at = sorted(set(eps_list) | {s * e for e in fd_all for s in (1.0, -1.0)})

    clusters = {}
    masses = {}
    for eps in solve_at:
        M = assemble_mass(family.member(eps), basis, nodes)
        clusters[eps] = solve_pencil(B, M, window)
        masses[eps] = M
    k = clusters[0.0].multiplicity
    for eps, cl in clusters.items():
        if cl.multiplicity != k:
            raise ClusterLeakage(
                f"cluster size changed from {k} to {cl.multiplicity} at eps={eps}"
            )

    curves = np.array([np.sort(clusters[e].eigenvalues) for e in eps_list])
    alpha_curve = []
    alpha_residuals = []
    for e in eps_list:
        _, lam = _match_by_overlap(clusters[e], masses[e], alpha_vec)
        alpha_curve.append(lam)
        r = B @ alpha_vec - lam0 * (masses[e] @ alpha_vec)
        alpha_residuals.append(
            float(np.linalg.norm(r) / np.linalg.norm(masses[e] @ alpha_vec))
        )

    base = clusters[0.0]
    U0 = base.vectors
    forms = [basis.vector_to_form(U0[:, i]) for i in range(k)]
    Pi = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            Pi[i, j] = Pi[j, i] = variation_pairing(
                forms[i], forms[j], family.variation, family.base, lam0
            )

    lam_center = float(np.mean(base.eigenvalues))
    levels = sorted(fd_all, reverse=True)
    plus = {e: np.sort(clusters[e].eigenvalues) for e in levels}
    minus = {e: np.sort(-clusters[-e].eigenvalues) for e in levels}
    fd_plus = _one_sided_slopes(lam_center, levels, plus)
    fd_minus = _one_sided_slopes(-lam_center, levels, minus)
    fd = 0.5 * (np.sort(fd_plus) + np.sort(fd_minus))

    # fit each sorted curve on the nonnegative half of the grid, where
    # sorting is branch-consistent
    eps_arr = np.array(eps_list)
    pos = eps_arr >= 0.0
    A = np.stack([eps_arr[pos], np.ones(int(np.count_nonzero(pos)))], axis=1)
    fit = np.empty(k)
    for i in range(k):
        fit[i] = np.linalg.lstsq(A, curves[pos, i], rcond=None)[0][0]

    return SplittingCurves(
        epsilons=eps_arr,
        curves=curves,
        alpha_curve=np.array(alpha_curve),
        alpha_residuals=np.array(alpha_residuals),
        pairing_matrix=Pi,
        pairing_eigenvalues=np.sort(np.linalg.eigvalsh(Pi)),
        fd_slopes=np.sort(fd),
        fit_slopes=fit,
        window=(float(window[0]), float(window[1])),
        K=K,
    )


def hellmann_feynman(family: MetricFamily, u, lam: float, basis: FormBasis,
                     window, fd_epsilons=(0.02, 0.01), nodes=None):
    """Three routes to the eigenvalue slope along the family for direction u.

    Returns (finite-difference slope, pencil formula -lam u' dM u / u' M u,
    variation-pairing quadrature).  Requires u to be adapted to the cluster:
    it must be an eigenvector of the first-order matrix Pi, otherwise the
    slope is not well defined and DegenerateDirection is raised.
    """
    from .contact import variation_pairing

    B = assemble_exterior(basis)
    M0 = assemble_mass(family.base, basis, nodes)
    u = np.asarray(u, dtype=float)
    u = u / math.sqrt(float(u @ (M0 @ u)))

    base = solve_pencil(B, M0, window)
    U0 = base.vectors
    coeff = U0.T @ (M0 @ u)
    if abs(float(coeff @ coeff) - 1.0) > 1e-8:
        raise DegenerateDirection("vector does not lie in the requested cluster")
    dM = mass_derivative(family.base, family.variation, basis, nodes)
    Pi = -lam * (U0.T @ dM @ U0)
    resid = Pi @ coeff - (coeff @ Pi @ coeff) * coeff
    if np.linalg.norm(resid) > 1e-8 * max(1.0, np.linalg.norm(Pi)):
        raise DegenerateDirection("vector is not an eigenvector of the splitting matrix")

    pencil = -lam * float(u @ (dM @ u))

    form_u = basis.vector_to_form(u)
    pairing = variation_pairing(form_u, form_u, family.variation, family.base, lam)

    fd_all = sorted(set(abs(float(e)) for e in fd_epsilons) - {0.0})
    slopes = []
    for e in fd_all:
        lams = []
        for s in (e, -e):
            Ms = assemble_mass(family.member(s), basis, nodes)
            lams.append(_match_by_overlap(solve_pencil(B, Ms, window), Ms, u)[1])
        slopes.append((lams[0] - lams[1]) / (2 * e))
    fd = slopes[0]
    for prev, e_prev, e_cur in zip(slopes[1:], fd_all[1:], fd_all[:-1]):
        ratio = (e_prev / e_cur) ** 2
        fd = (ratio * fd - prev) / (ratio - 1.0)
    return float(fd), float(pencil), float(pairing)


# ---------------------------------------------------------------------------
# contour projector and cluster compression


def spectral_projector(A: np.ndarray, center: float, radius: float, nodes: int = 64) -> np.ndarray:
    """Contour projector (1/2*pi*i) oint (z - A)^{-1} dz on a circle.

    Trapezoidal quadrature converges exponentially for resolvents that are
    analytic near the contour; a Frobenius-norm guard flags eigenvalues
    within about 1e-6 * radius of the circle (conservatively).
    """
    A = np.asarray(A, dtype=float)
    D = A.shape[0]
    eye = np.eye(D)
    P = np.zeros((D, D), dtype=complex)
    guard = 1e6 / radius
    for j in range(nodes):
        theta = TWO_PI * j / nodes
        z = center + radius * np.exp(1j * theta)
        try:
            R = np.linalg.solve(z * eye - A, eye)
        except np.linalg.LinAlgError as exc:
            raise IllConditionedContour(f"resolvent singular at node {j}") from exc
        if np.linalg.norm(R) > guard:
            raise IllConditionedContour(
                f"resolvent norm exceeds {guard:.2e} at node {j}; eigenvalue near contour"
            )
        P += (radius * np.exp(1j * theta) / nodes) * R
    Pr = P.real
    return 0.5 * (Pr + Pr.T)


def matrix_inv_sqrt(M: np.ndarray, floor=1e-12) -> np.ndarray:
    vals, vecs = np.linalg.eigh(M)
    if np.min(vals) <= floor:
        raise NotPositiveDefinite(f"matrix eigenvalue {np.min(vals):.3e} below floor")
    return (vecs * (1.0 / np.sqrt(vals))) @ vecs.T


def matrix_sqrt(M: np.ndarray, floor=1e-12) -> np.ndarray:
    vals, vecs = np.linalg.eigh(M)
    if np.min(vals) <= floor:
        raise NotPositiveDefinite(f"matrix eigenvalue {np.min(vals):.3e} below floor")
    return (vecs * np.sqrt(vals)) @ vecs.T


def pencil_operator_family(family: MetricFamily, basis: FormBasis, nodes=None):
    """Symmetric operator family A(eps) = M(eps)^{-1/2} B M(eps)^{-1/2}.

    Shares the pencil's spectrum while keeping a fixed (Euclidean) inner
    product, which is what the compression machinery expects.
    """
    B = assemble_exterior(basis)

    def A_of(eps):
        M = assemble_mass(family.member(eps), basis, nodes)
        R = matrix_inv_sqrt(M)
        A = R @ B @ R
        return 0.5 * (A + A.T)

    return A_of


@dataclass(frozen=True)
class MatrixCluster:
    """Eigencluster of a plain symmetric matrix (Euclidean orthonormal vectors)."""

    center: float
    radius: float
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def multiplicity(self):
        return len(self.eigenvalues)


def matrix_cluster(A: np.ndarray, center: float, radius: float) -> MatrixCluster:
    vals, vecs = np.linalg.eigh(A)
    mask = np.abs(vals - center) < radius
    return MatrixCluster(
        center=float(center),
        radius=float(radius),
        eigenvalues=vals[mask],
        vectors=vecs[:, mask],
    )


@dataclass(frozen=True)
class PiMapReport:
    """Compression of an operator family onto a frozen eigencluster frame."""

    projector: np.ndarray
    pi: np.ndarray
    pi_prime: np.ndarray
    sigma_match_defect: float
    identity_deviation: float

    def projector_idempotency(self):
        P = self.projector
        return float(np.linalg.norm(P @ P - P))


def pi_map(A_of_q, q: float, q0: float, cluster: MatrixCluster,
           nodes: int = 64, fd_delta=1e-4) -> PiMapReport:
    """Symmetric compression pi(q) of A(q) onto the cluster frame at q0.

    pi(q) = S^{-1/2} V' A(q) V S^{-1/2} with V the projected frame
    P_gamma(q) U0 and S its Gram matrix, so the spectrum of pi(q) equals
    the spectrum of A(q) inside the contour.  pi_prime is the derivative
    matrix (u_m' dA u_l) with dA from Richardson finite differences at q0.
    """
    U0 = cluster.vectors
    k = U0.shape[1]
    Aq = np.asarray(A_of_q(q), dtype=float)
    P = spectral_projector(Aq, cluster.center, cluster.radius, nodes)
    tr = float(np.trace(P))
    if abs(tr - k) > 1e-6:
        raise ClusterLeakage(f"projector rank {tr:.6f} != cluster size {k}")
    V = P @ U0
    S = V.T @ V
    Sinv_half = matrix_inv_sqrt(S, floor=1e-12)
    pi = Sinv_half @ (V.T @ Aq @ V) @ Sinv_half
    pi = 0.5 * (pi + pi.T)

    vals_pi = np.sort(np.linalg.eigvalsh(pi))
    vals_A = np.linalg.eigvalsh(Aq)
    inside = np.sort(vals_A[np.abs(vals_A - cluster.center) < cluster.radius])
    if len(inside) != k:
        raise ClusterLeakage(f"{len(inside)} eigenvalues inside contour, cluster size {k}")
    sigma_defect = float(np.max(np.abs(vals_pi - inside)))

    d1 = (np.asarray(A_of_q(q0 + fd_delta)) - np.asarray(A_of_q(q0 - fd_delta))) / (2 * fd_delta)
    d2 = (np.asarray(A_of_q(q0 + fd_delta / 2)) - np.asarray(A_of_q(q0 - fd_delta / 2))) / fd_delta
    DA = (4.0 * d2 - d1) / 3.0
    pi_prime = pi_derivative(DA, U0)

    ident_dev = float(np.linalg.norm(pi - (np.trace(pi) / k) * np.eye(k)))
    return PiMapReport(
        projector=P,
        pi=pi,
        pi_prime=pi_prime,
        sigma_match_defect=sigma_defect,
        identity_deviation=ident_dev,
    )


def pi_derivative(DA_h: np.ndarray, eigenbasis: np.ndarray) -> np.ndarray:
    """First-order compression: entries <DA[h] u_m, u_l> over the cluster basis."""
    U = np.asarray(eigenbasis, dtype=float)
    out = U.T @ np.asarray(DA_h, dtype=float) @ U
    return 0.5 * (out + out.T)


def splitting_certificate(pi_prime: np.ndarray) -> float:
    """Frobenius distance of pi_prime from multiples of the identity.

    Strictly positive values certify a direction that splits the cluster.
    """
    P = np.asarray(pi_prime, dtype=float)
    k = P.shape[0]
    return float(np.linalg.norm(P - (np.trace(P) / k) * np.eye(k)))
