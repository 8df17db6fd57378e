"""Annealing Hamiltonian spectra for small Ising instances.

The time-dependent Hamiltonian over anneal fraction s in [0, 1] is

    H(s) = -A(s)/2 * sum_i sx_i + B(s)/2 * (sum_i h_i sz_i
                                            + sum_{i<j} J_ij sz_i sz_j),

with sx/sz the Pauli operators extended by identity factors. Basis state m
assigns qubit i the sz eigenvalue +1 when bit i of m (LSB = qubit 0) is 0.
The minimum spectral gap is min_s lambda_1(s) - lambda_0(s).
"""

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ._rng import rng_stream
from .qubo import IsingProblem, mu_law

DEFAULT_QUBIT_CAP = 12
DEGENERACY_TOL = 1e-10
# dense diagonalization below this Hilbert dimension, Lanczos above
_DENSE_DIM_LIMIT = 256


@dataclass(frozen=True)
class AnnealSchedule:
    """Envelopes A(s), B(s); either the linear ramp A=1-s, B=s or a tabulated
    schedule with linear interpolation between samples."""

    kind: str
    s: np.ndarray | None = None
    a_vals: np.ndarray | None = None
    b_vals: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "linear":
            return
        if self.kind != "tabulated":
            raise ValueError("schedule kind must be 'linear' or 'tabulated'")
        s = np.asarray(self.s, dtype=float)
        a = np.asarray(self.a_vals, dtype=float)
        b = np.asarray(self.b_vals, dtype=float)
        if s.ndim != 1 or s.size < 2 or a.shape != s.shape or b.shape != s.shape:
            raise ValueError("tabulated schedule needs matching s, A, B samples")
        if np.any(np.diff(s) <= 0):
            raise ValueError("schedule s samples must be strictly increasing")
        if np.any(a < 0) or np.any(b < 0):
            raise ValueError("A(s) and B(s) must be nonnegative")
        if np.any(np.diff(a) > 1e-9 * max(a.max(), 1.0)):
            raise ValueError("A(s) must be non-increasing")
        if np.any(np.diff(b) < -1e-9 * max(b.max(), 1.0)):
            raise ValueError("B(s) must be non-decreasing")
        if a[-1] > 0.05 * a[0] or b[0] > 0.05 * b[-1]:
            raise ValueError("A must vanish toward s=1 and B toward s=0")
        for arr in (s, a, b):
            arr.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "a_vals", a)
        object.__setattr__(self, "b_vals", b)

    @classmethod
    def linear(cls):
        return cls(kind="linear")

    @classmethod
    def from_csv(cls, path):
        """Load a tabulated schedule from CSV columns (s, A, B)."""
        s, a, b = [], [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    vals = [float(x) for x in row[:3]]
                except ValueError:
                    continue  # header line
                s.append(vals[0]); a.append(vals[1]); b.append(vals[2])
        return cls(kind="tabulated", s=np.array(s), a_vals=np.array(a),
                   b_vals=np.array(b))

    def a(self, s):
        if self.kind == "linear":
            return 1.0 - np.asarray(s, dtype=float)
        return np.interp(s, self.s, self.a_vals)

    def b(self, s):
        if self.kind == "linear":
            return np.asarray(s, dtype=float) + 0.0
        return np.interp(s, self.s, self.b_vals)


@lru_cache(maxsize=8)
def _basis_tables(n):
    """Spin table (size x n) and transverse-term XOR index pairs for n qubits."""
    size = 1 << n
    idx = np.arange(size)
    spins = 1.0 - 2.0 * ((idx[:, None] >> np.arange(n)) & 1)
    rows = np.repeat(idx, n)
    cols = (idx[:, None] ^ (1 << np.arange(n))).ravel()
    return spins, rows, cols


def _ising_diagonal(problem):
    """Classical Ising energies (without offset) per basis state."""
    spins, _, _ = _basis_tables(problem.dim)
    return spins @ problem.h + np.einsum("si,si->s", spins @ problem.j.T, spins)


def build_hamiltonian(problem, schedule, s, qubit_cap=DEFAULT_QUBIT_CAP):
    """Dense Hermitian H(s) of dimension 2^n."""
    n = problem.dim
    if n > qubit_cap:
        raise ValueError(f"{n} qubits exceeds the cap {qubit_cap}")
    if not 0.0 <= s <= 1.0:
        raise ValueError("anneal fraction s must lie in [0, 1]")
    size = 1 << n
    _, rows, cols = _basis_tables(n)
    ham = np.zeros((size, size))
    ham[rows, cols] = -0.5 * float(schedule.a(s))
    ham[np.arange(size), np.arange(size)] = 0.5 * float(schedule.b(s)) * _ising_diagonal(problem)
    return ham


def _lowest_two_dense(ham):
    w = np.linalg.eigvalsh(ham)
    return float(w[0]), float(w[1])


def _gap_curve(problem, schedule, s_grid, qubit_cap, method):
    n = problem.dim
    if n > qubit_cap:
        raise ValueError(f"{n} qubits exceeds the cap {qubit_cap}")
    size = 1 << n
    diag = _ising_diagonal(problem)
    lam0 = np.empty(len(s_grid))
    lam1 = np.empty(len(s_grid))
    use_dense = method == "dense" or (method == "auto" and size < _DENSE_DIM_LIMIT)
    if use_dense:
        for i, s in enumerate(s_grid):
            lam0[i], lam1[i] = _lowest_two_dense(build_hamiltonian(
                problem, schedule, s, qubit_cap))
        return lam0, lam1
    _, rows, cols = _basis_tables(n)
    x_op = sp.csr_matrix((np.ones(size * n), (rows, cols)), shape=(size, size))
    v0 = None
    for i, s in enumerate(s_grid):
        ham = (-0.5 * float(schedule.a(s))) * x_op + sp.diags(
            0.5 * float(schedule.b(s)) * diag)
        try:
            w, vecs = spla.eigsh(ham, k=2, which="SA", v0=v0, tol=1e-9)
            order = np.argsort(w)
            lam0[i], lam1[i] = float(w[order[0]]), float(w[order[1]])
            v0 = vecs[:, order[0]]
        except (spla.ArpackError, spla.ArpackNoConvergence):
            lam0[i], lam1[i] = _lowest_two_dense(ham.toarray())
            v0 = None
    return lam0, lam1


@dataclass(frozen=True)
class GapProfile:
    s_grid: np.ndarray
    lam0: np.ndarray
    lam1: np.ndarray

    @property
    def gap(self):
        return self.lam1 - self.lam0

    @property
    def min_gap(self):
        return float(self.gap.min())

    @property
    def min_gap_s(self):
        return float(self.s_grid[int(np.argmin(self.gap))])

    @property
    def degenerate(self):
        """Ground state effectively degenerate somewhere on the grid."""
        return bool(self.gap.min() < DEGENERACY_TOL)

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "lambda0", "lambda1", "gap"])
            for i in range(len(self.s_grid)):
                w.writerow([repr(float(self.s_grid[i])), repr(float(self.lam0[i])),
                            repr(float(self.lam1[i])), repr(float(self.gap[i]))])


def gap_profile(problem, schedule, grid_points, qubit_cap=DEFAULT_QUBIT_CAP,
                method="auto"):
    """Eigenvalue-gap curve lambda_1(s) - lambda_0(s) on a uniform s grid.

    method 'dense' forces full diagonalization (the reference path); 'auto'
    switches to warm-started Lanczos for Hilbert dimensions >= 256, falling
    back to dense on convergence failures.
    """
    if grid_points < 2:
        raise ValueError("grid_points must be >= 2")
    s_grid = np.linspace(0.0, 1.0, grid_points)
    lam0, lam1 = _gap_curve(problem, schedule, s_grid, qubit_cap, method)
    gap = lam1 - lam0
    lam1 = np.where(gap < DEGENERACY_TOL, lam0, lam1)  # record tiny gaps as 0
    return GapProfile(s_grid=s_grid, lam0=lam0, lam1=lam1)


def random_ising_instance(n, seed):
    """Gaussian h and J jointly max-norm normalized into [-1, +1]."""
    rng = rng_stream(seed)
    h = rng.standard_normal(n)
    j = np.triu(rng.standard_normal((n, n)), 1)
    m = max(np.abs(h).max(), np.abs(j).max() if n > 1 else 0.0)
    if m > 0:
        h = h / m
        j = j / m
    return IsingProblem(h=h, j=j)


def compand_ising(problem, mu):
    """Elementwise mu-law compression of the biases and couplers."""
    return IsingProblem(h=mu_law(problem.h, mu),
                        j=np.triu(mu_law(problem.j, mu), 1),
                        offset=problem.offset)


@dataclass(frozen=True)
class GapStudyResult:
    n: int
    num_instances: int
    mean_gap_plain: float
    mean_gap_companded: float
    efficiency: float
    degenerate_count: int
    mean_gap_plain_nondegenerate: float
    mean_gap_companded_nondegenerate: float


def _instance_seed(seed, i):
    from ._rng import derive_seed
    return derive_seed(seed, 0x6A9, i)


def companding_gap_study(n, num_instances, schedule, mu, seed,
                         grid_points=65, qubit_cap=DEFAULT_QUBIT_CAP):
    """Minimum-gap statistics with and without companding the coefficients.

    Efficiency is the fraction of instances whose companded minimum gap
    exceeds the plain one. Instances with a (near-)degenerate ground state
    are flagged; means are reported both including and excluding them.
    """
    if num_instances < 1:
        raise ValueError("num_instances must be >= 1")
    plain = np.empty(num_instances)
    comp = np.empty(num_instances)
    degen = np.zeros(num_instances, dtype=bool)
    for i in range(num_instances):
        inst = random_ising_instance(n, _instance_seed(seed, i))
        p_prof = gap_profile(inst, schedule, grid_points, qubit_cap)
        c_prof = gap_profile(compand_ising(inst, mu), schedule, grid_points, qubit_cap)
        plain[i] = p_prof.min_gap
        comp[i] = c_prof.min_gap
        degen[i] = p_prof.degenerate or c_prof.degenerate
    keep = ~degen
    return GapStudyResult(
        n=n,
        num_instances=num_instances,
        mean_gap_plain=float(plain.mean()),
        mean_gap_companded=float(comp.mean()),
        efficiency=float(np.mean(comp > plain)),
        degenerate_count=int(degen.sum()),
        mean_gap_plain_nondegenerate=float(plain[keep].mean()) if keep.any() else math.nan,
        mean_gap_companded_nondegenerate=float(comp[keep].mean()) if keep.any() else math.nan,
    )


def rng_seed_for_instance(seed, i):
    from ._rng import derive_seed
    return derive_seed(seed, 0x6A9, i)


def tts(total_anneal_time, p):
    """Time to reach the ground state with 99% confidence:
    TTS = T_run * log(0.01) / log(1 - p)."""
    if not total_anneal_time > 0:
        raise ValueError("total_anneal_time must be positive")
    if p < 0 or p > 1:
        raise ValueError("success probability must lie in [0, 1]")
    if p == 0:
        return math.inf
    if p == 1:
        return float(total_anneal_time)
    return float(total_anneal_time) * math.log(0.01) / math.log1p(-p)
