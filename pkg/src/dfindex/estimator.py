"""Margin evaluators, convex feasibility search, and the index estimate.

For a fixed exponent eta the boundary inequality at a site (P, Z) reads

    -i beta(Z, Zbar) + ddbar h(Z, Zbar)
        >= eta/(1-eta) |del h(Z) - alpha(Z)|^2 + C |Z|^2,

and with h = sum_i c_i phi_i over a finite basis each site imposes a concave
quadratic constraint on c, so maximizing the worst margin is a convex
program.  It is solved by Kelley cutting planes with LP subproblems
(scipy HiGHS); linearizations of concave margins over-estimate them, so the
LP value is a true upper bound and certifies infeasibility for the given
basis and sample set when it drops below the required floor.

Bisection over eta assumes feasibility is monotone, which holds whenever a
single h works across exponents (eta/(1-eta) is increasing); each stage is
seeded with the previous certificate's coefficients to keep that true in
practice, and the recorded grid is checked for violations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import linprog

from . import jets
from .boundary import frame_at, levi_data, normal_frame, point_at_depth, sample_boundary
from .fields import ScalarField, wirtinger_table
from .forms import alpha, beta_mixed
from .geometry import CTVector, curvature_contraction

__all__ = [
    "HBasis",
    "reduction_basis",
    "poly_basis",
    "MarginSite",
    "SiteSet",
    "collect_sites",
    "boundary_margin",
    "geometric_margin",
    "vectorfield_margin",
    "EtaCertificate",
    "feasibility_search",
    "DFEstimate",
    "estimate_index",
    "interior_check",
    "NO_CONSTRAINT",
]

NO_CONSTRAINT = math.inf


# ----------------------------------------------------------------------
# bases for the auxiliary function h
# ----------------------------------------------------------------------

@dataclass
class HBasis:
    """Finite real basis for h(z) = sum_i c_i phi_i(z)."""

    n: int
    fields: list
    name: str
    row_evaluator: object = None   # optional shared evaluator: zs -> [jets]

    @property
    def m(self):
        return len(self.fields)

    def eval_jets(self, zs):
        if self.row_evaluator is not None:
            return self.row_evaluator(zs)
        return [f.fn(zs) for f in self.fields]

    def h_field(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.m,):
            raise ValueError(f"basis {self.name!r} needs {self.m} coefficients")
        fns = [f.fn for f in self.fields]

        def fn(zs):
            out = jets.Jet.constant(0.0, 2 * self.n, zs[0].order)
            for c, f in zip(coeffs, fns):
                if c != 0.0:
                    out = out + c * f(zs)
            return out

        return ScalarField(self.n, fn, name=f"h[{self.name}]")


def _chebyshev_jets(u, degree):
    """T_0(u) .. T_degree(u) of a jet by the three-term recurrence."""
    out = [jets.Jet.constant(1.0, u.m, u.order), u]
    for _ in range(2, degree + 1):
        out.append(2.0 * (u * out[-1]) - out[-2])
    return out[: degree + 1]


def _soft_clamp(u, width=0.005):
    """Identity on |u| <= 1, saturating smoothly to +-(1 + width) outside.

    Twice continuously differentiable at the junction; keeps Chebyshev
    basis fields bounded on the whole chart so a certified h stays tame far
    from the constraint sites.
    """
    v = np.real(u.value)
    if abs(v) <= 1.0:
        return u
    sgn = 1.0 if v > 0 else -1.0
    return sgn * (1.0 + width * jets.tanh((u * sgn - 1.0) * (1.0 / width)))


def reduction_basis(n, coord_fn, degree=20, harmonics=(1.0,), x_scale=1.0,
                    clamp_width=0.005, name="reduction"):
    """Polynomials and trig functions of a scalar reduction coordinate.

    ``coord_fn`` maps coordinate jets to the jet of the reduction coordinate
    (for the worm family: log|z_2|^2).  The polynomial part is expressed in
    Chebyshev polynomials of the rescaled coordinate u = x / x_scale: the
    span equals plain monomials of the same degree, but smooth candidates
    have O(1) coefficients, which keeps the feasibility program well
    conditioned; cos(w x) and sin(w x) are appended for each harmonic w.
    Outside |u| <= 1 the polynomial argument saturates smoothly
    (:func:`_soft_clamp`), so the fields and their derivatives stay bounded
    on the whole chart.
    """
    inv = 1.0 / x_scale

    def argument(zs):
        return _soft_clamp(coord_fn(zs) * inv, clamp_width)

    fields = []
    for p in range(degree + 1):
        def fn(zs, p=p):
            if p == 0:
                return jets.Jet.constant(1.0, 2 * n, zs[0].order)
            return _chebyshev_jets(argument(zs), p)[p]

        fields.append(ScalarField(n, fn, name=f"T{p}(u)"))
    for w in harmonics:
        fields.append(ScalarField(n, lambda zs, w=w: jets.cos(coord_fn(zs) * w), name=f"cos({w:g}x)"))
        fields.append(ScalarField(n, lambda zs, w=w: jets.sin(coord_fn(zs) * w), name=f"sin({w:g}x)"))

    def rows(zs):
        x = coord_fn(zs)
        out = _chebyshev_jets(_soft_clamp(x * inv, clamp_width), degree)
        for w in harmonics:
            out.append(jets.cos(x * w))
            out.append(jets.sin(x * w))
        return out

    return HBasis(n=n, fields=fields, row_evaluator=rows,
                  name=f"{name}(deg={degree},harmonics={len(harmonics)},scale={x_scale:g})")


def worm_reduction_basis(gamma=None, degree=20, harmonics=(1.0,), spread=0.97, x_scale=None):
    """The reduction basis in x = log|z_2|^2 used for the worm family.

    The polynomial part is scaled to the sampled range
    ``spread * (gamma - pi/2)`` of the reduction coordinate.
    """
    if x_scale is None:
        if gamma is None:
            raise ValueError("worm_reduction_basis needs gamma (or an explicit x_scale)")
        x_scale = spread * (gamma - math.pi / 2)
    return reduction_basis(2, lambda zs: jets.log(jets.abs2(zs[1])), degree=degree,
                           harmonics=harmonics, x_scale=x_scale, name="log|z2|^2")


def poly_basis(n, degree=2):
    """Real polynomials in Re z_j, Im z_j up to total degree ``degree``."""
    fields = [ScalarField(n, lambda zs: jets.Jet.constant(1.0, 2 * n, zs[0].order), name="1")]
    coords = []
    for j in range(n):
        coords.append((f"Re z{j + 1}", lambda zs, j=j: zs[j].real()))
        coords.append((f"Im z{j + 1}", lambda zs, j=j: zs[j].imag()))
    for tag, fn in coords:
        fields.append(ScalarField(n, lambda zs, fn=fn: fn(zs), name=tag))
    if degree >= 2:
        for i, (tag_i, fn_i) in enumerate(coords):
            for tag_j, fn_j in coords[i:]:
                fields.append(ScalarField(
                    n, lambda zs, fi=fn_i, fj=fn_j: fi(zs) * fj(zs), name=f"{tag_i}*{tag_j}"))
    return HBasis(n=n, fields=fields, name=f"poly(deg={degree})")


# ----------------------------------------------------------------------
# margin sites
# ----------------------------------------------------------------------

@dataclass
class MarginSite:
    z: np.ndarray
    zvec: CTVector          # unit null (or near-null) direction
    levi_eig: float
    beta_term: float        # -i beta(Z, Zbar)
    alpha_val: complex
    basis_hess: np.ndarray  # ddbar phi_i(Z, Zbar), real
    basis_grad: np.ndarray  # del phi_i(Z), complex


@dataclass
class SiteSet:
    sites: list
    basis: HBasis
    B: np.ndarray = dc_field(init=False)
    A: np.ndarray = dc_field(init=False)
    E: np.ndarray = dc_field(init=False)
    D: np.ndarray = dc_field(init=False)

    def __post_init__(self):
        count = len(self.sites)
        self.B = np.array([s.beta_term for s in self.sites], dtype=float)
        self.E = np.array([s.alpha_val for s in self.sites], dtype=complex)
        if count:
            self.A = np.array([s.basis_hess for s in self.sites], dtype=float)
            self.D = np.array([s.basis_grad for s in self.sites], dtype=complex)
        else:
            self.A = np.zeros((0, self.basis.m))
            self.D = np.zeros((0, self.basis.m), dtype=complex)

    def __len__(self):
        return len(self.sites)

    def margins(self, coeffs, eta):
        k = eta / (1.0 - eta)
        return self.B + self.A @ coeffs - k * np.abs(self.E - self.D @ coeffs) ** 2


def _basis_rows(basis, frame, zvec):
    n = frame.n
    hess_row = np.empty(basis.m)
    grad_row = np.empty(basis.m, dtype=complex)
    from .fields import seed_coordinate_jets

    zs = seed_coordinate_jets(frame.z, 2)
    for i, jet in enumerate(basis.eval_jets(zs)):
        table = wirtinger_table(jet, n)
        grad_row[i] = zvec.h @ table.w1[:n]
        hess_row[i] = float(np.real(zvec.h @ table.mixed_hessian @ zvec.h.conj()))
    return hess_row, grad_row


def make_site(domain, frame, zvec, basis, levi_eig=0.0):
    """Assemble the eta-independent margin data of one (P, Z) site."""
    b = beta_mixed(domain, frame.z, zvec, zvec, frame=frame)
    beta_term = float(np.real(-1j * b))
    a = alpha(domain, frame.z, zvec, frame=frame)
    hess_row, grad_row = _basis_rows(basis, frame, zvec)
    return MarginSite(z=frame.z, zvec=zvec, levi_eig=float(levi_eig), beta_term=beta_term,
                      alpha_val=a, basis_hess=hess_row, basis_grad=grad_row)


def collect_sites(domain, points, basis, eps_null=1e-7, relaxed_cutoff=1e-3):
    """Null and near-null constraint sites over a boundary sample.

    Includes every (P, Z) whose Levi eigenvalue falls below the relaxed
    cutoff ``relaxed_cutoff * max_eigenvalue`` (plus the absolute null
    cutoff), with Z normalized to unit metric length.  Also returns the
    smallest strictly-pseudoconvex eigenvalue seen, for reporting when no
    site constrains the search.
    """
    sites = []
    min_pc_eig = math.inf
    for p in points:
        ld = levi_data(domain, p, eps_null=eps_null)
        lam_max = float(ld.eigenvalues[-1])
        cutoff = max(relaxed_cutoff * lam_max, eps_null * (lam_max + 1.0))
        for idx, eig in enumerate(ld.eigenvalues):
            coeffs = sum(ld.eigenvectors[j, idx] * ld.basis[j].h for j in range(len(ld.basis)))
            zvec = CTVector.holo(coeffs)
            zvec = zvec * (1.0 / math.sqrt(ld.frame.norm2(zvec)))
            if eig < cutoff:
                sites.append(make_site(domain, ld.frame, zvec, basis, levi_eig=eig))
            else:
                min_pc_eig = min(min_pc_eig, float(eig))
    return SiteSet(sites=sites, basis=basis), min_pc_eig


# ----------------------------------------------------------------------
# margin evaluators
# ----------------------------------------------------------------------

def boundary_margin(domain, p, zvec, basis, coeffs, eta, frame=None):
    """Margin of the h-form boundary inequality at (P, Z) with C = 0.

    Returns [-i beta(Z, Zbar) + ddbar h(Z, Zbar)]
    - eta/(1-eta) |del h(Z) - alpha(Z)|^2 for the given Z (every term is
    quadratic in Z, so unit-normalizing Z just rescales the margin).
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    fr = frame if frame is not None else normal_frame(domain, p)
    site = make_site(domain, fr, zvec, basis)
    coeffs = np.asarray(coeffs, dtype=float)
    k = eta / (1.0 - eta)
    return float(site.beta_term + site.basis_hess @ coeffs
                 - k * abs(site.alpha_val - site.basis_grad @ coeffs) ** 2)


def _null_checked(domain, p, zvec, frame, null_tol=1e-6):
    ld = levi_data(domain, frame if frame is not None else p)
    if not ld.null_basis:
        return ld, None
    fr = ld.frame
    scale = float(np.max(np.abs(fr.hr))) + 1.0
    resid = max(abs(fr.levi(zvec.h, b.h)) for b in ld.basis)
    if resid > null_tol * scale * max(math.sqrt(fr.norm2(zvec)), 1e-12):
        raise ValueError(f"Z is not in the Levi null space at {fr.z} (residual {resid:.2e})")
    return ld, fr


def geometric_margin(domain, p, zvec, eta, frame=None):
    """Margin of the extrinsic-curvature inequality at a null site:

    sum_j |sff(Z, W_j)|^2 + (1/2) <R(Z, Zbar) nu_C, nu_C>
        - eta/(1-eta) |sff(Z, J nu_R)|^2.

    Returns the no-constraint sentinel (+inf) where the null space is empty.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    ld, fr = _null_checked(domain, p, zvec, frame)
    if fr is None:
        return NO_CONSTRAINT
    xnorm2 = fr.norm2(fr.X)
    sff_sum = sum(abs(fr.hess_r(zvec, wj)) ** 2 for wj in ld.basis) * xnorm2
    curv = curvature_contraction(domain.metric, fr.z, zvec, fr.nu_C, frame=fr.chern(2))
    j_nu = fr.nu_R.J()
    sff_j = abs(fr.hess_r(zvec, j_nu)) ** 2 * xnorm2
    k = eta / (1.0 - eta)
    return float(sff_sum + 0.5 * curv - k * sff_j)


def vectorfield_margin(domain, p, zvec, eta, frame=None):
    """Margin of the normal-field inequality at a null site:

    (1/2) |nabla_{Zbar} nu_C - <nabla_{Zbar} nu_C, nu_C> nu_C|^2
        + (1/2) <R(Z, Zbar) nu_C, nu_C>
        - eta/(1-eta) |<nabla_{Zbar} nu_C, nu_C>|^2.

    Agrees with :func:`geometric_margin`; computed independently from jets of
    the unit normal field.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    ld, fr = _null_checked(domain, p, zvec, frame)
    if fr is None:
        return NO_CONSTRAINT
    n = domain.n
    l_jets = fr.L_jets()
    mjets = domain.metric.jets(fr.z, 2)
    len2 = sum((mjets[j][k] * l_jets[j] * l_jets[k].conj() for j in range(n) for k in range(n)),
               jets.Jet.constant(0.0, 2 * n, 2)).real()
    scale = jets.power(len2, -0.5)
    nu_jets = [l_jets[i] * scale for i in range(n)]
    w1 = np.array([wirtinger_table(j, n).w1 for j in nu_jets])
    d_nu = CTVector.holo(w1[:, n:] @ zvec.h.conj())   # nabla_{Zbar} nu_C, plain derivative
    proj = fr.inner(d_nu, fr.nu_C)
    tangential = d_nu - proj * fr.nu_C
    curv = curvature_contraction(domain.metric, fr.z, zvec, fr.nu_C, frame=fr.chern(2))
    k = eta / (1.0 - eta)
    return float(0.5 * fr.norm2(tangential) + 0.5 * curv - k * abs(proj) ** 2)


# ----------------------------------------------------------------------
# feasibility search (Kelley cutting planes over LP subproblems)
# ----------------------------------------------------------------------

@dataclass
class EtaCertificate:
    eta: float
    basis_id: str
    coeffs: np.ndarray
    min_margin: float
    upper_bound: float
    n_sites: int
    feasible: bool
    status: str
    iterations: int
    min_pc_eig: float | None = None

    def to_json_dict(self, seed=None):
        return {
            "eta": self.eta,
            "basis_id": self.basis_id,
            "coeffs": [float(c) for c in np.atleast_1d(self.coeffs)],
            "min_margin": self.min_margin,
            "n_sites": self.n_sites,
            "feasible": self.feasible,
            "status": self.status,
            "seed": seed,
        }


def feasibility_search(domain, eta, basis, sites, C_floor=1e-4, tol=1e-6,
                       c0=None, box_radius=100.0, max_iter=None):
    """Maximize the minimum site margin over the basis coefficients.

    Returns a certificate; it is feasible iff the best minimum margin
    reaches ``C_floor``.  The LP value bounds the achievable minimum margin
    from above (within the coefficient box), so ``status ==
    "infeasible_certified"`` means no h in this basis can satisfy the
    sampled constraints.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    if not isinstance(sites, SiteSet):
        sites = SiteSet(sites=list(sites), basis=basis)
    m = basis.m
    if len(sites) == 0:
        return EtaCertificate(eta=eta, basis_id=basis.name, coeffs=np.zeros(m),
                              min_margin=NO_CONSTRAINT, upper_bound=NO_CONSTRAINT,
                              n_sites=0, feasible=True, status="no_null_sites", iterations=0)
    if max_iter is None:
        max_iter = max(60, min(10 * m * len(sites), 400))
    k = eta / (1.0 - eta)
    c = np.zeros(m) if c0 is None else np.asarray(c0, dtype=float).copy()
    cuts_g, cuts_b = [], []
    best_c, best_val = c.copy(), -math.inf
    ub = math.inf
    status = "iteration_cap"
    bounds = [(-box_radius, box_radius)] * m + [(None, None)]
    cost = np.concatenate([np.zeros(m), [-1.0]])
    decision_slack = max(10.0 * C_floor, C_floor + 1e-3)
    iterations = 0

    def add_cuts(at, vals):
        worst = np.argsort(vals)[: min(8, len(vals))]
        for i in worst:
            resid = sites.E[i] - sites.D[i] @ at
            g = sites.A[i] + 2.0 * k * np.real(np.conj(resid) * sites.D[i])
            b = float(vals[i]) - float(g @ at)
            # normalize the whole row (t - g.c <= b) so the LP stays well scaled
            scale = 1.0 / max(1.0, float(np.max(np.abs(g))), abs(b))
            cuts_g.append(np.concatenate([-g * scale, [scale]]))
            cuts_b.append(b * scale)

    for iterations in range(1, max_iter + 1):
        vals = sites.margins(c, eta)
        fval = float(vals.min())
        if fval > best_val:
            best_val, best_c = fval, c.copy()
        if best_val >= decision_slack:
            status = "feasible_early_exit"
            break
        add_cuts(c, vals)
        if len(cuts_b) > 2400:
            cuts_g, cuts_b = cuts_g[-1800:], cuts_b[-1800:]
        res = linprog(cost, A_ub=np.array(cuts_g), b_ub=np.array(cuts_b),
                      bounds=bounds, method="highs")
        if not res.success:
            status = "lp_failure"
            break
        ub = float(res.x[-1])
        c_lp = res.x[:m]
        # in-out step: the margins are concave, so scan the segment from the
        # incumbent to the LP point and keep the best interpolate
        if np.isfinite(best_val):
            lam = np.linspace(0.0, 1.0, 9)[1:]
            cands = best_c[None, :] + lam[:, None] * (c_lp - best_c)[None, :]
            cand_vals = np.array([sites.margins(ci, eta).min() for ci in cands])
            pick = int(np.argmax(cand_vals))
            if float(cand_vals[pick]) > best_val:
                best_val = float(cand_vals[pick])
                best_c = cands[pick].copy()
        c = c_lp
        if ub - best_val <= tol:
            status = "converged"
            break
        if ub < C_floor - tol:
            status = "infeasible_certified"
            break
        if best_val >= decision_slack:
            status = "feasible_early_exit"
            break
    feasible = bool(best_val >= C_floor)
    if feasible:
        best_c, best_val = _shrink_certificate(sites, eta, best_c, C_floor)
    return EtaCertificate(eta=eta, basis_id=basis.name, coeffs=best_c, min_margin=best_val,
                          upper_bound=ub, n_sites=len(sites), feasible=feasible,
                          status=status, iterations=iterations)


def _shrink_certificate(sites, eta, coeffs, C_floor, steps=40):
    """Smallest multiple of the found coefficients that still certifies.

    Site margins are concave in c, so {min margin >= target} is convex and
    the feasible scalars along the ray to zero form an interval; bisection
    on true margins picks a tame certificate (half the achieved margin is
    retained), which keeps the auxiliary function h small away from the
    constraint sites.
    """
    best = float(sites.margins(coeffs, eta).min())
    target = max(C_floor, 0.5 * best)

    def value(tau):
        return float(sites.margins(tau * coeffs, eta).min())

    if value(0.0) >= target:
        return np.zeros_like(coeffs), value(0.0)
    lo, hi = 0.0, 1.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if value(mid) >= target:
            hi = mid
        else:
            lo = mid
    return hi * coeffs, value(hi)


# ----------------------------------------------------------------------
# eta bisection
# ----------------------------------------------------------------------

@dataclass
class DFEstimate:
    eta_lo: float
    eta_hi: float
    records: list
    certificates: dict
    warnings: list
    min_pc_eig: float | None = None

    def summary(self):
        if self.eta_hi >= 1.0:
            return f"DF >= {self.eta_lo:.2f} (grid cap)"
        return f"DF in [{self.eta_lo:.2f}, {self.eta_hi:.2f}]"


def estimate_index(domain, basis, sites=None, points=None, eta_cap=0.99, tol_eta=0.01,
                   C_floor=1e-4, seed=0, n_boundary=100, n_special=40, box_radius=100.0):
    """Bisection over eta with per-eta feasibility certificates.

    ``sites`` may be precomputed; otherwise boundary points are sampled
    (plus the domain's degenerate-set sampler when available) and near-null
    sites collected.  Feasibility at each eta is decided by
    :func:`feasibility_search`, seeding each stage with the previous
    certificate's coefficients.
    """
    min_pc = None
    if sites is None:
        if points is None:
            points = sample_boundary(domain, n_boundary, seed)
            if domain.special_sampler is not None and n_special > 0:
                points = points + list(domain.special_sampler(n_special, seed + 1))
        sites, min_pc = collect_sites(domain, points, basis)

    records, certificates, warnings = [], {}, []

    def run(eta, c_seed):
        cert = feasibility_search(domain, eta, basis, sites, C_floor=C_floor,
                                  c0=c_seed, box_radius=box_radius)
        records.append({"eta": float(eta), "feasible": cert.feasible,
                        "min_margin": None if cert.min_margin == NO_CONSTRAINT else float(cert.min_margin),
                        "status": cert.status})
        certificates[float(eta)] = cert
        return cert

    if len(sites) == 0:
        cert = run(eta_cap, None)
        return DFEstimate(eta_lo=eta_cap, eta_hi=1.0, records=records,
                          certificates=certificates, warnings=warnings, min_pc_eig=min_pc)

    cert_cap = run(eta_cap, None)
    if cert_cap.feasible:
        return DFEstimate(eta_lo=eta_cap, eta_hi=1.0, records=records,
                          certificates=certificates, warnings=warnings, min_pc_eig=min_pc)
    lo, hi = 0.0, eta_cap
    cert_lo = run(0.0, None)
    c_seed = cert_lo.coeffs if cert_lo.feasible else None
    if not cert_lo.feasible:
        warnings.append("eta = 0 infeasible for this basis and sample set")
    while hi - lo > tol_eta:
        mid = 0.5 * (lo + hi)
        cert = run(mid, c_seed)
        if cert.feasible:
            lo, c_seed = mid, cert.coeffs
        else:
            hi = mid

    feas_by_eta = sorted((r["eta"], r["feasible"]) for r in records)
    for (e1, f1), (e2, f2) in zip(feas_by_eta, feas_by_eta[1:]):
        if (not f1) and f2:
            warnings.append(f"non-monotone feasibility between eta = {e1} and {e2} (sampling noise)")
    return DFEstimate(eta_lo=lo, eta_hi=hi, records=records, certificates=certificates,
                      warnings=warnings, min_pc_eig=min_pc)


# ----------------------------------------------------------------------
# interior verification
# ----------------------------------------------------------------------

def interior_check(domain, h_field, eta, C=0.0, depths=None, points=None, seed=0, n_points=12):
    """Smallest eigenvalue of the rescaled complex Hessian of -(-rho)^eta.

    With rho = r e^{-h}, evaluates eta^{-1} (-rho)^{-eta} ddbar(-(-rho)^eta)
    minus C times the metric through the expanded identity

        (-r)^{-1} ddbar r + (1-eta)(-r)^{-2} dr (x) dbar r
        - eta (-r)^{-1} (dh (x) dbar r + dr (x) dbar h)
        - eta dh (x) dbar h + ddbar h,

    which stays numerically stable arbitrarily close to the boundary; for
    eta = 0 the logarithmic variant is used.  Samples lie on inward normals
    of boundary points at the requested depths.
    """
    if not 0.0 <= eta < 1.0:
        raise ValueError(f"eta must lie in [0, 1), got {eta}")
    if depths is None:
        depths = np.geomspace(1e-4, 1e-2, 7)
    if points is None:
        points = sample_boundary(domain, n_points, seed)
    n = domain.n
    rows = []
    min_eig = math.inf
    for p in points:
        for depth in depths:
            z = point_at_depth(domain, p, depth)
            fr = frame_at(domain, z, r_order=2)
            rv = float(np.real(fr.table(2).value))
            if rv >= 0.0:
                raise ValueError(f"interior sample has rho >= 0 at {z} (r = {rv})")
            hr = fr.hr
            u = fr.u.reshape(-1, 1)
            if h_field is not None:
                htab = wirtinger_table(h_field.jet(z, 2), n)
                w = htab.w1[:n].reshape(-1, 1)
                hh = htab.mixed_hessian
            else:
                w = np.zeros((n, 1), dtype=complex)
                hh = np.zeros((n, n), dtype=complex)
            if eta > 0.0:
                mat = (hr / (-rv)
                       + (1.0 - eta) / rv**2 * (u @ u.conj().T)
                       - eta / (-rv) * (w @ u.conj().T + u @ w.conj().T)
                       - eta * (w @ w.conj().T)
                       + hh)
            else:
                mat = hr / (-rv) + (u @ u.conj().T) / rv**2 + hh
            mat = mat - C * fr.G
            mat = 0.5 * (mat + mat.conj().T)
            eig = float(np.linalg.eigvalsh(mat)[0])
            min_eig = min(min_eig, eig)
            rows.append({"z": fr.z, "depth": float(depth), "min_eig": eig})
    return {"eta": float(eta), "C": float(C), "min_eig": min_eig, "rows": rows,
            "positive": bool(min_eig > 0.0)}
