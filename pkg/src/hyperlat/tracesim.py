"""Trace-estimator machinery at desk scale: the per-representation spectral
estimator, density-compliant synthetic spectra, the trace sum and its
scaling in the large radius, multidimensional Riemann-Stieltjes integration
with the product-rule expansion over faces, and the geometric kernel
diagonal computed from the enumerated lattice.

A synthetic spectrum is a finite list of atoms; each atom assigns every
factor either a principal parameter t_j >= 0 or a complementary parameter
s_j in (0, 1/2 - gap], together with a positive multiplicity.  The trivial
point s = 1/2 is excluded by construction (strong spectral gap).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import product as iter_product

import numpy as np

from .hypgeom import cartan_radius, RHO_REAL
from .latenum import CoverageError, EnumerationCache
from .spectral import RadialProfile

PRINCIPAL = "pr"
COMPLEMENTARY = "comp"


class TraceError(ValueError):
    """Invalid trace-machinery input."""


@dataclass(frozen=True)
class SpectrumAtom:
    """One spherical representation of the product group with multiplicity."""

    params: tuple[tuple[str, float], ...]
    mult: int

    def __post_init__(self) -> None:
        if self.mult < 1:
            raise TraceError("multiplicity must be a positive integer")
        for kind, val in self.params:
            if kind == PRINCIPAL:
                if val < 0:
                    raise TraceError(f"principal parameter must be >= 0, got {val}")
            elif kind == COMPLEMENTARY:
                if not 0.0 < val < 0.5:
                    raise TraceError(
                        f"complementary parameter must lie in (0, 1/2), got {val}"
                    )
            else:
                raise TraceError(f"unknown parameter kind {kind!r}")

    @property
    def ell(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class PartitionShape:
    """Principal/complementary split of the two factor blocks."""

    I_pr: frozenset[int]
    I_comp: frozenset[int]
    J_pr: frozenset[int]
    J_comp: frozenset[int]

    def validate(self, k: int, ell: int) -> None:
        first = frozenset(range(k))
        second = frozenset(range(k, ell))
        if self.I_pr | self.I_comp != first or self.I_pr & self.I_comp:
            raise TraceError("I_pr, I_comp must partition the first block")
        if self.J_pr | self.J_comp != second or self.J_pr & self.J_comp:
            raise TraceError("J_pr, J_comp must partition the second block")

    @classmethod
    def from_atom(cls, atom: SpectrumAtom, k: int) -> "PartitionShape":
        I_pr, I_comp, J_pr, J_comp = set(), set(), set(), set()
        for j, (kind, _) in enumerate(atom.params):
            if j < k:
                (I_pr if kind == PRINCIPAL else I_comp).add(j)
            else:
                (J_pr if kind == PRINCIPAL else J_comp).add(j)
        return cls(frozenset(I_pr), frozenset(I_comp),
                   frozenset(J_pr), frozenset(J_comp))


def estimator_H(
    r: float,
    R: float,
    P: PartitionShape,
    s: dict[int, float],
    t: dict[int, float],
    N: int,
    dims: tuple[int, ...],
) -> float:
    """Spectral estimator

        prod_{j<k} r^{d_j}
        * prod_{j in I_pr} (1 + r t_j)^{-N}
        * prod_{j in J_pr} (1 + R t_j)^{-N}
        * prod_{j in J_comp} e^{2 s_j (d_j - 1) R}.

    The analysis behind it requires N >= 4.
    """
    if N < 4:
        raise TraceError(f"the estimator requires N >= 4, got {N}")
    k = len(P.I_pr | P.I_comp)
    ell = len(dims)
    P.validate(k, ell)
    if set(t) != set(P.I_pr | P.J_pr):
        raise TraceError("principal parameter map does not match the partition")
    if set(s) != set(P.I_comp | P.J_comp):
        raise TraceError("complementary parameter map does not match the partition")
    val = 1.0
    for j in range(k):
        val *= r ** dims[j]
    for j in P.I_pr:
        val *= (1.0 + r * t[j]) ** (-N)
    for j in P.J_pr:
        val *= (1.0 + R * t[j]) ** (-N)
    for j in P.J_comp:
        val *= math.exp(2.0 * s[j] * (dims[j] - 1) * R)
    return val


def trace_sum(
    spectrum: list[SpectrumAtom],
    r: float,
    R: float,
    N: int,
    dims: tuple[int, ...],
    k: int,
) -> float:
    """Sum of mult * H over the spectrum, each atom with its own partition."""
    total = 0.0
    for atom in spectrum:
        if atom.ell != len(dims):
            raise TraceError("atom arity does not match dims")
        P = PartitionShape.from_atom(atom, k)
        s = {j: v for j, (kind, v) in enumerate(atom.params) if kind == COMPLEMENTARY}
        t = {j: v for j, (kind, v) in enumerate(atom.params) if kind == PRINCIPAL}
        total += atom.mult * estimator_H(r, R, P, s, t, N, dims)
    return total


def trace_sum_by_partition(
    spectrum, r, R, N, dims, k
) -> dict[PartitionShape, float]:
    """Per-partition breakdown of the trace sum."""
    out: dict[PartitionShape, float] = {}
    for atom in spectrum:
        P = PartitionShape.from_atom(atom, k)
        s = {j: v for j, (kind, v) in enumerate(atom.params) if kind == COMPLEMENTARY}
        t = {j: v for j, (kind, v) in enumerate(atom.params) if kind == PRINCIPAL}
        out[P] = out.get(P, 0.0) + atom.mult * estimator_H(r, R, P, s, t, N, dims)
    return out


# ----------------------------------------------------------------------------
# synthetic spectra

def density_count_check(
    spectrum: list[SpectrumAtom],
    Q: frozenset[int],
    sigma: dict[int, float],
    T: float,
    C: float,
    delta: float,
    dims: tuple[int, ...],
) -> bool:
    """True iff the boxed multiplicity count obeys the density bound

        sum mult <= C * prod_{j in Q} (1+T)^{d_j (1 - 2 m(sigma)) + delta},

    where the box requires a principal parameter <= T on factors in Q and a
    complementary parameter > sigma_j on the others, and
    m(sigma) = max_{j not in Q} sigma_j (zero when Q is everything)."""
    ell = len(dims)
    Qc = frozenset(range(ell)) - Q
    if set(sigma) != Qc:
        raise TraceError("sigma keys must be the complement of Q")
    m_sigma = max(sigma.values(), default=0.0)
    count = 0
    for atom in spectrum:
        ok = True
        for j, (kind, val) in enumerate(atom.params):
            if j in Q:
                if kind != PRINCIPAL or val > T:
                    ok = False
                    break
            else:
                if kind != COMPLEMENTARY or val <= sigma[j]:
                    ok = False
                    break
        if ok:
            count += atom.mult
    bound = C
    for j in Q:
        bound *= (1.0 + T) ** (dims[j] * (1.0 - 2.0 * m_sigma) + delta)
    return count <= bound


def verify_density_grid(
    spectrum: list[SpectrumAtom],
    dims: tuple[int, ...],
    T_max: float,
    C: float = 2.0,
    delta: float = 0.1,
    n_sigma: int = 5,
    n_T: int = 5,
) -> bool:
    """Density check over all factor subsets, a sigma grid, and a T grid."""
    ell = len(dims)
    sigmas = np.linspace(0.02, 0.42, n_sigma)
    Ts = np.geomspace(1.0, max(T_max, 1.0), n_T)
    for bits in iter_product([0, 1], repeat=ell):
        Q = frozenset(j for j in range(ell) if bits[j])
        Qc = [j for j in range(ell) if not bits[j]]
        for sv in sigmas:
            sigma = {j: float(sv) for j in Qc}
            for T in Ts:
                if not density_count_check(spectrum, Q, sigma, float(T), C, delta, dims):
                    return False
    return True


def synth_spectrum(
    seed: int,
    ell: int,
    dims: tuple[int, ...],
    T_max: float,
    gap: float = 0.05,
    kappa: float = 1.0,
    n_bins: int = 48,
    comp_levels: int = 6,
    C: float = 2.0,
    delta: float = 0.1,
) -> list[SpectrumAtom]:
    """Deterministic density-compliant synthetic spectrum.

    The tempered bulk follows a growth-law intensity d_j t^{d_j - 1} per
    factor, realized as Poisson multiplicities on a per-factor geometric
    grid.  Complementary parameters sit on a geometric ladder below
    1/2 - gap, with counts thinned like (1+T)^{d(1-2s)} on the tempered
    side.  The whole configuration is rescaled by halving until the boxed
    density check passes with the given C and delta.
    """
    if not 0.0 < gap < 0.5:
        raise TraceError(f"gap must lie in (0, 1/2), got {gap}")
    if len(dims) != ell:
        raise TraceError("dims length must equal ell")
    if T_max < 0:
        raise TraceError("T_max must be >= 0")

    s_top = 0.5 - gap
    levels = [s_top * (0.5 ** m) for m in range(comp_levels)]

    def t_cells(span: float) -> list[tuple[float, float]]:
        if span <= 0:
            return []
        lo = min(0.05, span / 4.0)
        edges = np.concatenate([[0.0], np.geomspace(lo, span, n_bins)])
        return [(float(edges[i]), float(edges[i + 1])) for i in range(len(edges) - 1)]

    def cell_center(lo: float, hi: float) -> float:
        return (lo + hi) / 2.0 if lo == 0.0 else math.sqrt(lo * hi)

    def build(scale: float) -> list[SpectrumAtom]:
        rng = np.random.default_rng(seed)
        atoms: list[SpectrumAtom] = []
        cells = t_cells(T_max)
        weights = {}
        for j in range(ell):
            weights[j] = np.array([hi ** dims[j] - lo ** dims[j] for lo, hi in cells])

        if cells and T_max > 0:
            # fully tempered bulk
            for idx in iter_product(range(len(cells)), repeat=ell):
                mass = scale * kappa
                for j in range(ell):
                    mass *= weights[j][idx[j]]
                mult = int(rng.poisson(mass))
                if mult > 0:
                    params = tuple(
                        (PRINCIPAL, cell_center(*cells[idx[j]])) for j in range(ell)
                    )
                    atoms.append(SpectrumAtom(params=params, mult=mult))

        # one complementary factor, tempered elsewhere
        for jc in range(ell):
            others = [j for j in range(ell) if j != jc]
            for s_val in levels:
                target = scale * kappa
                for j in others:
                    target *= (1.0 + T_max) ** (dims[j] * (1.0 - 2.0 * s_val))
                if not others or not cells or T_max == 0:
                    mult = int(rng.poisson(target))
                    if mult > 0:
                        params = [(PRINCIPAL, 0.0)] * ell
                        params[jc] = (COMPLEMENTARY, s_val)
                        atoms.append(SpectrumAtom(params=tuple(params), mult=mult))
                    continue
                totals = {j: weights[j].sum() for j in others}
                for idx in iter_product(range(len(cells)), repeat=len(others)):
                    mass = target
                    for pos, j in enumerate(others):
                        mass *= weights[j][idx[pos]] / totals[j]
                    mult = int(rng.poisson(mass))
                    if mult == 0:
                        continue
                    params: list[tuple[str, float]] = [None] * ell  # type: ignore
                    params[jc] = (COMPLEMENTARY, s_val)
                    for pos, j in enumerate(others):
                        params[j] = (PRINCIPAL, cell_center(*cells[idx[pos]]))
                    atoms.append(SpectrumAtom(params=tuple(params), mult=mult))

        # a single fully complementary atom (bounded by the empty-window check)
        if levels:
            params = tuple((COMPLEMENTARY, levels[min(m, len(levels) - 1)])
                           for m in range(ell))
            atoms.append(SpectrumAtom(params=params, mult=1))
        return atoms

    scale = 1.0
    for _ in range(14):
        spectrum = build(scale)
        if verify_density_grid(spectrum, dims, T_max, C=C, delta=delta):
            return spectrum
        scale /= 2.0
    raise TraceError("could not rescale the synthetic spectrum into compliance")


def spectrum_to_jsonl(spectrum: list[SpectrumAtom]) -> str:
    lines = []
    for atom in spectrum:
        lines.append(json.dumps(
            {"params": [[k, v] for k, v in atom.params], "mult": atom.mult},
            sort_keys=True,
        ))
    return "\n".join(lines) + "\n"


def spectrum_from_jsonl(text: str) -> list[SpectrumAtom]:
    atoms = []
    for line in text.splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        atoms.append(SpectrumAtom(
            params=tuple((str(k), float(v)) for k, v in obj["params"]),
            mult=int(obj["mult"]),
        ))
    return atoms


# ----------------------------------------------------------------------------
# multidimensional Riemann-Stieltjes integration

def _check_box(box, ell: int):
    if ell > 3:
        raise TraceError("dimensions above 3 are unsupported")
    if len(box) != ell:
        raise TraceError("box arity mismatch")
    for a, b in box:
        if not a < b:
            raise TraceError(f"degenerate box side [{a}, {b}]")


def stieltjes_integrate(f, atoms, box, ell: int) -> float:
    """Riemann-Stieltjes integral of f against a purely atomic cumulative
    function: sum of f(p) * mass over atoms in the half-open box
    prod (a_j, b_j]."""
    _check_box(box, ell)
    total = 0.0
    for point, mass in atoms:
        if len(point) != ell:
            raise TraceError("atom arity mismatch")
        if all(a < p <= b for p, (a, b) in zip(point, box)):
            total += mass * f(*point)
    return total


def _corners(indices, box):
    """Yield (assignment dict, sign) over lower/upper choices for indices."""
    idx = sorted(indices)
    for bits in iter_product([0, 1], repeat=len(idx)):
        sign = 1
        assign = {}
        for pos, j in enumerate(idx):
            if bits[pos]:
                assign[j] = box[j][1]
            else:
                assign[j] = box[j][0]
                sign = -sign
        yield assign, sign


def zaremba_rhs(f, atoms, box, ell: int) -> float:
    """Face-expansion side of the integration-by-parts identity

        int_B f dphi = sum_S (-1)^{|S|} int_{B_S} Delta_{S^c}(phi d_S f),

    for atomic phi.  The inner smooth integral of the mixed partial of f over
    each clipped sub-box is evaluated exactly as an alternating corner sum of
    f (fundamental theorem of calculus), so the identity holds to rounding.
    """
    _check_box(box, ell)
    total = 0.0
    all_idx = set(range(ell))
    for bits in iter_product([0, 1], repeat=ell):
        S = {j for j in range(ell) if bits[j]}
        Sc = all_idx - S
        sign_S = (-1) ** len(S)
        for assign_c, sign_c in _corners(Sc, box):
            for point, mass in atoms:
                # phi(y_S, corner) = mass * [p_j <= corner_j for j in S^c]
                if any(point[j] > assign_c[j] for j in Sc):
                    continue
                # int over prod_{j in S}[max(a_j, p_j), b_j] of d_S f
                lows = {}
                empty = False
                for j in S:
                    lo = max(box[j][0], point[j])
                    if lo > box[j][1]:
                        empty = True
                        break
                    lows[j] = lo
                if empty:
                    continue
                inner = 0.0
                for bits_s in iter_product([0, 1], repeat=len(S)):
                    idx_s = sorted(S)
                    sign_s = 1
                    coords = dict(assign_c)
                    for pos, j in enumerate(idx_s):
                        if bits_s[pos]:
                            coords[j] = box[j][1]
                        else:
                            coords[j] = lows[j]
                            sign_s = -sign_s
                    args = [coords[j] for j in range(ell)]
                    inner += sign_s * f(*args)
                total += sign_S * sign_c * mass * inner
    return total


def zaremba_rhs_smooth(f, f_partials, phi, box, ell: int, n_nodes: int = 64) -> float:
    """Same face expansion for a smooth cumulative function phi (a callable);
    f_partials[frozenset(S)] must give the mixed partial of f over S."""
    _check_box(box, ell)
    from .quadrature import gl_rule

    x, w = gl_rule(n_nodes)
    total = 0.0
    all_idx = set(range(ell))
    for bits in iter_product([0, 1], repeat=ell):
        S = sorted(j for j in range(ell) if bits[j])
        Sc = all_idx - set(S)
        sign_S = (-1) ** len(S)
        dfun = f_partials[frozenset(S)]
        for assign_c, sign_c in _corners(Sc, box):
            if not S:
                args = [assign_c[j] for j in range(ell)]
                total += sign_S * sign_c * phi(*args) * dfun(*args)
                continue
            # |S|-dimensional tensor Gauss-Legendre over the S box
            axes = []
            wts = []
            for j in S:
                a, b = box[j]
                axes.append(0.5 * (a + b) + 0.5 * (b - a) * x)
                wts.append(0.5 * (b - a) * w)
            val = 0.0
            for combo in iter_product(*(range(n_nodes) for _ in S)):
                coords = dict(assign_c)
                wprod = 1.0
                for pos, j in enumerate(S):
                    coords[j] = axes[pos][combo[pos]]
                    wprod *= wts[pos][combo[pos]]
                args = [coords[j] for j in range(ell)]
                val += wprod * phi(*args) * dfun(*args)
            total += sign_S * sign_c * val
    return total


# ----------------------------------------------------------------------------
# geometric kernel diagonal

def kernel_diag(
    profiles: tuple[RadialProfile, RadialProfile],
    x_pair: tuple[np.ndarray, np.ndarray],
    cache: EnumerationCache,
) -> float:
    """Diagonal of the convolution kernel at the point x = (x1, x2):

        sum over +/- classes of F1(t(x1^-1 M1 x1)) * F2(t(x2^-1 M2 x2)),

    each class counted once (signs act identically on both factors).
    Requires enumeration coverage supp_p + 2 * t(x_p) on each factor."""
    f1, f2 = profiles
    x1, x2 = (np.asarray(x_pair[0], dtype=np.float64),
              np.asarray(x_pair[1], dtype=np.float64))
    disp1 = cartan_radius(x1, RHO_REAL)
    disp2 = cartan_radius(x2, RHO_REAL)
    need1 = f1.support + 2.0 * disp1
    need2 = f2.support + 2.0 * disp2
    if cache.R1 < need1 - 1e-12 or cache.R2 < need2 - 1e-12:
        raise CoverageError(
            f"cache covers ({cache.R1}, {cache.R2}), kernel needs "
            f"({need1:.6f}, {need2:.6f}) after conjugation displacement"
        )

    def inv2(M):
        return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])

    x1i, x2i = inv2(x1), inv2(x2)
    total = 0.0
    for el in cache.elements:
        c1 = x1i @ el.mat1 @ x1
        c2 = x2i @ el.mat2 @ x2
        t1 = cartan_radius(c1, RHO_REAL)
        if t1 > f1.support:
            continue
        t2 = cartan_radius(c2, RHO_REAL)
        if t2 > f2.support:
            continue
        total += float(f1.evaluator(np.array([t1]))[0]) * \
            float(f2.evaluator(np.array([t2]))[0])
    return total


# ----------------------------------------------------------------------------
# scaling experiment

@dataclass
class TraceScalingResult:
    rows: list[tuple[float, float, float]]       # (R, r, trace_sum)
    fitted_exponent: float
    worst_partition_share: float                 # at the largest R
    spectrum_size: int


def run_trace_experiment(
    seed: int,
    ell: int,
    k: int,
    dims: tuple[int, ...],
    N: int,
    R_list: list[float],
    gap: float = 0.05,
) -> TraceScalingResult:
    """Trace-sum scaling along the matching-volume schedule
    r(R) = exp(-(a/d) R), with T_max covering the estimator's effective
    support exp((a/d) max R)."""
    from .diophantine import SplitShape, schedule_r

    rho_list = tuple({2: 0.5, 3: 1.0}[d] for d in dims)
    shape = SplitShape(k=k, ell=ell, rho_list=rho_list)
    T_max = 2.0 * math.exp((shape.a_rest / shape.d_first) * max(R_list))
    spectrum = synth_spectrum(seed, ell, dims, T_max, gap=gap)
    rows = []
    for R in R_list:
        r = schedule_r(R, shape)
        rows.append((float(R), float(r), trace_sum(spectrum, r, R, N, dims, k)))
    Rs = np.array([row[0] for row in rows])
    logs = np.log(np.maximum([row[2] for row in rows], 1e-300))
    slope = float(np.polyfit(Rs, logs, 1)[0])
    by_part = trace_sum_by_partition(spectrum, rows[-1][1], rows[-1][0], N, dims, k)
    worst = PartitionShape(
        I_pr=frozenset(range(k)), I_comp=frozenset(),
        J_pr=frozenset(), J_comp=frozenset(range(k, ell)),
    )
    total_last = sum(by_part.values())
    share = by_part.get(worst, 0.0) / total_last if total_last > 0 else 0.0
    return TraceScalingResult(
        rows=rows,
        fitted_exponent=slope,
        worst_partition_share=float(share),
        spectrum_size=len(spectrum),
    )
