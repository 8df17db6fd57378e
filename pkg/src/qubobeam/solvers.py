"""QUBO backends: exact enumeration (the oracle), a simulated-annealing
ensemble that emulates the analogue-annealer workflow (many independent
anneals, fresh coefficient noise per anneal, histogram of distinct returned
solutions), and the Rayleigh-quotient classical baseline.

Each anneal optimizes its own noisy instance Q + E (the device solves the
altered problem) but reported energies are always evaluated on the noiseless
Q passed in (we judge by the true one).
"""

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from ._rng import derive_seeds, rng_stream
from .mimo import CodingPair
from .qubo import DEFAULT_ICE_SIGMA, inject_ice_noise

DEFAULT_EXACT_CAP = 24


class ExactCapError(ValueError):
    """QUBO dimension beyond the exact-enumeration cap."""


def bits_to_string(bits):
    return "".join("1" if b else "0" for b in bits)


def string_to_bits(s):
    return np.fromiter((1 if c == "1" else 0 for c in s), dtype=np.int64, count=len(s))


def _all_bit_rows(nbits):
    idx = np.arange(1 << nbits, dtype=np.uint32)
    shifts = np.arange(nbits - 1, -1, -1, dtype=np.uint32)
    return ((idx[:, None] >> shifts) & 1).astype(np.float64)


def _solve_exact_matrix(q, row_chunk=256):
    """Global argmin of b^T q b via meet-in-the-middle enumeration.

    Splitting b = [x; y] gives E = x^T Q11 x + 2 x^T Q12 y + y^T Q22 y, so all
    2^n energies come from one rank-|y| matmul per x-block. Blocks scan in
    bitstring order, so the first minimum is the lexicographic tie-break.
    """
    n = q.shape[0]
    if n == 1:
        return (np.array([1]), float(q[0, 0])) if q[0, 0] < 0 else (np.array([0]), 0.0)
    hi = n // 2
    xb = _all_bit_rows(hi)
    yb = _all_bit_rows(n - hi)
    e1 = np.einsum("ij,ij->i", xb @ q[:hi, :hi], xb)
    e2 = np.einsum("ij,ij->i", yb @ q[hi:, hi:], yb)
    v = 2.0 * (xb @ q[:hi, hi:])
    yt = yb.T.copy()
    best_e, best_x, best_y = np.inf, -1, -1
    for s in range(0, len(xb), row_chunk):
        blk = v[s:s + row_chunk] @ yt
        blk += e1[s:s + row_chunk, None]
        blk += e2[None, :]
        k = int(np.argmin(blk))
        i, j = divmod(k, blk.shape[1])
        if blk[i, j] < best_e:
            best_e, best_x, best_y = float(blk[i, j]), s + i, j
    bits = np.concatenate([xb[best_x], yb[best_y]]).astype(np.int64)
    return bits, best_e


def solve_exact(q, cap=DEFAULT_EXACT_CAP):
    """Globally minimal (bitstring, energy); lexicographic tie-break."""
    if q.dim > cap:
        raise ExactCapError(f"dim {q.dim} exceeds exact-solver cap {cap}")
    bits, energy = _solve_exact_matrix(q.matrix)
    return bits_to_string(bits), energy


@dataclass(frozen=True)
class SolverConfig:
    """Annealing-ensemble parameters.

    Temperatures are multiples of the problem's ||Q||_max; the schedule is
    geometric from start_temp down to end_temp over the sweeps of one anneal.
    """

    num_anneals: int = 1000
    sweeps_per_anneal: int = 200
    start_temp: float = 2.0
    end_temp: float = 0.01
    noise_sigma: float = DEFAULT_ICE_SIGMA
    seed: int = 0

    def __post_init__(self):
        if self.num_anneals < 1:
            raise ValueError("num_anneals must be >= 1")
        if self.sweeps_per_anneal < 1:
            raise ValueError("sweeps_per_anneal must be >= 1")
        if not (self.start_temp > self.end_temp > 0):
            raise ValueError("need start_temp > end_temp > 0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class HistogramEntry:
    bitstring: str
    energy: float
    count: int


@dataclass(frozen=True)
class SolutionHistogram:
    """Distinct returned bitstrings with noiseless energies and counts,
    sorted by ascending energy (bitstring order within ties)."""

    entries: tuple
    total_anneals: int

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        if sum(e.count for e in self.entries) != self.total_anneals:
            raise ValueError("histogram counts must sum to total_anneals")
        if len({e.bitstring for e in self.entries}) != len(self.entries):
            raise ValueError("histogram bitstrings must be distinct")
        energies = [e.energy for e in self.entries]
        if any(a > b for a, b in zip(energies, energies[1:])):
            raise ValueError("histogram energies must be non-decreasing")

    def best(self):
        return self.entries[0]

    def num_distinct(self):
        return len(self.entries)

    def probabilities(self):
        return [e.count / self.total_anneals for e in self.entries]

    def to_json_dict(self):
        return {
            "total_anneals": self.total_anneals,
            "entries": [
                {"bitstring": e.bitstring, "energy": e.energy, "count": e.count,
                 "probability": e.count / self.total_anneals}
                for e in self.entries
            ],
        }

    @classmethod
    def from_json_dict(cls, d):
        entries = [HistogramEntry(e["bitstring"], float(e["energy"]), int(e["count"]))
                   for e in d["entries"]]
        return cls(entries=tuple(entries), total_anneals=int(d["total_anneals"]))

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    def save_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bitstring", "energy", "count", "probability"])
            for e in self.entries:
                w.writerow([e.bitstring, repr(e.energy), e.count,
                            repr(e.count / self.total_anneals)])

    @classmethod
    def load_csv(cls, path):
        entries = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                entries.append(HistogramEntry(row["bitstring"], float(row["energy"]),
                                              int(row["count"])))
        return cls(entries=tuple(entries), total_anneals=sum(e.count for e in entries))


def _aggregate(bit_rows, energies, total):
    uniq, first, counts = np.unique(bit_rows, axis=0, return_index=True,
                                    return_counts=True)
    e = energies[first]
    order = np.argsort(e, kind="stable")  # np.unique already sorted rows lexicographically
    entries = [HistogramEntry(bits_to_string(uniq[k].astype(np.int64)),
                              float(e[k]), int(counts[k])) for k in order]
    return SolutionHistogram(entries=tuple(entries), total_anneals=total)


def solve_annealed(q, cfg):
    """Ensemble of independent single-bit-flip Metropolis anneals.

    With noise_sigma > 0 each anneal draws a fresh symmetric Gaussian noise
    matrix and optimizes the noisy objective; final states additionally
    undergo greedy single-flip descent on that same noisy objective (each
    anneal returns a local optimum of the problem it actually saw).
    """
    n = q.dim
    na = cfg.num_anneals
    rng = rng_stream(cfg.seed, 0x5A)
    if cfg.noise_sigma > 0:
        seeds = derive_seeds(cfg.seed, na, 0x1CE)
        qa = np.stack([inject_ice_noise(q, cfg.noise_sigma, s).matrix for s in seeds])
    else:
        qa = np.broadcast_to(q.matrix, (na, n, n))
    dg = qa.diagonal(axis1=1, axis2=2)

    scale = max(q.max_abs_entry, np.finfo(float).tiny)
    sweeps = cfg.sweeps_per_anneal
    temps = (cfg.start_temp * scale) * (
        (cfg.end_temp / cfg.start_temp) ** (np.arange(sweeps) / max(sweeps - 1, 1)))

    b = rng.integers(0, 2, size=(na, n)).astype(np.float64)
    phi = np.einsum("aij,aj->ai", qa, b)
    rows = np.arange(na)
    for t in temps:
        for k in rng.permutation(n):
            delta = 1.0 - 2.0 * b[:, k]
            de = dg[:, k] + 2.0 * delta * phi[:, k]
            acc = de <= 0
            hot = ~acc
            if hot.any():
                u = rng.random(na)
                acc |= hot & (u < np.exp(-np.clip(de, 0.0, 700.0) / t))
            if acc.any():
                step = np.where(acc, delta, 0.0)
                phi += step[:, None] * qa[:, k, :]
                b[:, k] += step
    for _ in range(8 * n):
        delta = 1.0 - 2.0 * b
        de = dg + 2.0 * delta * phi
        k = np.argmin(de, axis=1)
        move = de[rows, k] < -1e-12
        if not move.any():
            break
        step = np.where(move, delta[rows, k], 0.0)
        phi += step[:, None] * qa[rows, k, :]
        b[rows, k] += step

    energies = np.einsum("ij,ij->i", b @ q.matrix, b)  # judged on the noiseless Q
    return _aggregate(b.astype(np.int64), energies, na)


def reevaluate_histogram(hist, q):
    """Same bitstrings and counts, energies recomputed on another problem."""
    bits = np.stack([string_to_bits(e.bitstring) for e in hist.entries])
    energies = q.energy(bits)
    order = sorted(range(len(hist.entries)),
                   key=lambda k: (energies[k], hist.entries[k].bitstring))
    entries = [HistogramEntry(hist.entries[k].bitstring, float(energies[k]),
                              hist.entries[k].count) for k in order]
    return SolutionHistogram(entries=tuple(entries), total_anneals=hist.total_anneals)


def success_probability(hist, ground_energy, tol=1e-9):
    """Fraction of anneals whose energy is within tol of the ground energy."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    hits = sum(e.count for e in hist.entries if e.energy <= ground_energy + tol)
    return hits / hist.total_anneals


def rq_baseline(channel):
    """Rayleigh-quotient heuristic: quantize the dominant singular vectors.

    Each singular vector is phase-aligned so its largest-magnitude entry is
    real-positive before sign quantization (sgn(0) -> +1).
    """
    u, _, vh = np.linalg.svd(channel.entries)
    u = u[:, 0]
    v = vh[0, :].conj()

    def align_quantize(x):
        k = int(np.argmax(np.abs(x)))
        x = x * np.exp(-1j * np.angle(x[k]))
        return np.where(x.real >= 0, 1.0, -1.0) + 1j * np.where(x.imag >= 0, 1.0, -1.0)

    return CodingPair(f=align_quantize(v), g=align_quantize(u))
