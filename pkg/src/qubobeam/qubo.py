"""Reformulation chain: complex 1-bit subproblem -> real spin quadratic form
-> calibrated binary QUBO, plus spin/binary conversions, QUBO<->Ising, the
mu-law companding pre-processor and the additive coefficient-noise model.

Both embeddings reduce to the same primitive. For a fixed complex vector t
and a 1-bit complex vector s with real stacking s_r = [Re(s); Im(s)],

    |t^H s|^2 = s_r^T (M^T M) s_r,   M = [[ Re(t)^T, Im(t)^T],
                                          [-Im(t)^T, Re(t)^T]],

because the two rows of M s_r are the real and imaginary parts of t^H s.
The pre-coder form uses t = H^H g (so |g^H H f|^2 = |t^H f|^2) and the
post-coder form uses t = H f (so |g^H H f|^2 = |t^H g|^2). This identity is
the normative contract for the block structure.

Spin -> binary uses b = (s + 1)/2, under which

    s^T V s = b^T V0 b + 1^T V 1,    V0 = 4 V - 4 diag(V 1),

and the calibrated minimization problem is min_b b^T (-V0/||V0||_max) b.
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from .mimo import DimensionError, _as_alphabet_vector

_SYM_TOL = 1e-12


@dataclass(frozen=True)
class SpinQuadraticForm:
    """Symmetric PSD matrix V with objective s^T V s over spins s."""

    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        v = np.asarray(self.matrix, dtype=float)
        if v.shape != (self.dim, self.dim):
            raise DimensionError(f"form must be {self.dim}x{self.dim}")
        scale = max(np.abs(v).max(), 1.0)
        if np.abs(v - v.T).max() > _SYM_TOL * scale:
            raise ValueError("spin form matrix must be symmetric")
        if v.size and np.linalg.eigvalsh(v)[0] < -1e-9 * scale:
            raise ValueError("spin form matrix must be positive semidefinite")
        v.setflags(write=False)
        object.__setattr__(self, "matrix", v)


@dataclass(frozen=True)
class QuboProblem:
    """Minimization matrix Q (= -V_n for embedded problems) with calibration
    metadata: scale = ||V0||_max and offset = 1^T V 1, so that for b=(s+1)/2

        s^T V s = offset - scale * (b^T Q b).

    Calibrated problems have max |entry| = 1 (scale 1 recorded for the zero
    matrix); noise-injected copies may exceed the range.
    """

    matrix: np.ndarray
    dim: int
    scale: float = 1.0
    offset: float = 0.0
    companded: bool = False
    mu: float | None = None

    def __post_init__(self):
        q = np.asarray(self.matrix, dtype=float)
        if q.shape != (self.dim, self.dim):
            raise DimensionError(f"QUBO matrix must be {self.dim}x{self.dim}")
        if not np.all(np.isfinite(q)):
            raise ValueError("QUBO entries must be finite")
        scale = max(np.abs(q).max(), 1.0)
        if np.abs(q - q.T).max() > _SYM_TOL * scale:
            raise ValueError("QUBO matrix must be symmetric")
        if not (self.scale > 0):
            raise ValueError("scale must be positive")
        q.setflags(write=False)
        object.__setattr__(self, "matrix", q)

    @property
    def max_abs_entry(self):
        return float(np.abs(self.matrix).max())

    def energy(self, bits):
        """b^T Q b for a bit vector or a stack of bit vectors (rows)."""
        b = np.atleast_2d(np.asarray(bits, dtype=float))
        e = np.einsum("ij,ij->i", b @ self.matrix, b)
        return float(e[0]) if np.asarray(bits).ndim == 1 else e

    def spin_objective_from_energy(self, energy):
        """Map a QUBO energy back to the originating spin objective value."""
        return self.offset - self.scale * np.asarray(energy, dtype=float)

    def to_json_dict(self):
        return {
            "dim": self.dim,
            "matrix": self.matrix.ravel().tolist(),
            "scale": self.scale,
            "offset": self.offset,
            "companded": self.companded,
            "mu": self.mu,
        }

    @classmethod
    def from_json_dict(cls, d):
        dim = int(d["dim"])
        m = np.asarray(d["matrix"], dtype=float).reshape(dim, dim)
        return cls(matrix=m, dim=dim, scale=float(d["scale"]),
                   offset=float(d["offset"]), companded=bool(d["companded"]),
                   mu=None if d.get("mu") is None else float(d["mu"]))

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def to_coo_text(self):
        """Upper-triangle 'i j value' lines (0-based, diagonal included)."""
        lines = []
        for i in range(self.dim):
            for j in range(i, self.dim):
                lines.append(f"{i} {j} {self.matrix[i, j]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_coo_text(cls, text, dim, **meta):
        m = np.zeros((dim, dim))
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            i, j, v = line.split()
            i, j, v = int(i), int(j), float(v)
            m[i, j] = v
            m[j, i] = v
        return cls(matrix=m, dim=dim, **meta)


@dataclass(frozen=True)
class IsingProblem:
    """Linear biases h and strictly-upper-triangular couplers J with
    energy  E(sigma) = sum_i h_i sigma_i + sum_{i<j} J_ij sigma_i sigma_j + offset."""

    h: np.ndarray
    j: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        jm = np.asarray(self.j, dtype=float)
        n = h.size
        if jm.shape != (n, n):
            raise DimensionError("coupler matrix must be n x n")
        if np.any(np.tril(jm) != 0):
            raise ValueError("couplers must be strictly upper triangular")
        h.setflags(write=False)
        jm.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "j", jm)

    @property
    def dim(self):
        return self.h.size

    def energy(self, spins):
        s = np.asarray(spins, dtype=float)
        return float(self.h @ s + s @ self.j @ s + self.offset)


def _alignment_form(t):
    """M^T M for the |t^H s|^2 identity above; dimension 2 len(t)."""
    m = np.block([[t.real[None, :], t.imag[None, :]],
                  [-t.imag[None, :], t.real[None, :]]])
    return m.T @ m


def real_embed_precoder(channel, g):
    """Spin form V (dim 2 N_T) with f_r^T V f_r = |g^H H f|^2 for all 1-bit f."""
    g = _as_alphabet_vector(g, "g")
    if g.size != channel.n_rx:
        raise DimensionError("g does not match the channel's receive dimension")
    t = channel.entries.conj().T @ g
    return SpinQuadraticForm(matrix=_alignment_form(t), dim=2 * channel.n_tx)


def real_embed_postcoder(channel, f):
    """Spin form R (dim 2 N_R) with g_r^T R g_r = |g^H H f|^2 for all 1-bit g."""
    f = _as_alphabet_vector(f, "f")
    if f.size != channel.n_tx:
        raise DimensionError("f does not match the channel's transmit dimension")
    t = channel.entries @ f
    return SpinQuadraticForm(matrix=_alignment_form(t), dim=2 * channel.n_rx)


def spin_form_to_qubo(form):
    """Calibrated QUBO whose binary argmin maps to the spin-form argmax."""
    v = form.matrix
    n = form.dim
    v0 = 4.0 * v - 4.0 * np.diag(v @ np.ones(n))
    offset = float(np.ones(n) @ v @ np.ones(n))
    scale = float(np.abs(v0).max())
    if scale == 0.0:
        return QuboProblem(matrix=np.zeros((n, n)), dim=n, scale=1.0, offset=offset)
    return QuboProblem(matrix=-(v0 / scale), dim=n, scale=scale, offset=offset)


def binary_to_spin(b):
    b = np.asarray(b)
    if not np.all((b == 0) | (b == 1)):
        raise ValueError("binary vector entries must be 0 or 1")
    return (2 * b - 1).astype(np.int64)


def spin_to_binary(s):
    s = np.asarray(s)
    if not np.all((s == -1) | (s == 1)):
        raise ValueError("spin vector entries must be -1 or +1")
    return ((s + 1) // 2).astype(np.int64)


def spins_to_coding_vector(s):
    """Invert the [Re; Im] stacking: entry k = s[k] + j s[N+k]."""
    s = np.asarray(s, dtype=float)
    if s.size % 2:
        raise DimensionError("spin vector must have even length")
    n = s.size // 2
    return s[:n] + 1j * s[n:]


def coding_vector_to_spins(v):
    """The [Re; Im] stacking used by the embeddings."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag])


def mu_law(x, mu):
    """Odd, monotone logarithmic compression C(x) on [-1, 1]; C(+-1) = +-1."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.log1p(mu * np.abs(x)) / np.log1p(mu)


def compand(q, mu):
    """Elementwise mu-law compression of a calibrated QUBO matrix."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    if q.max_abs_entry > 1.0:
        raise ValueError("companding expects entries in [-1, 1]")
    return replace(q, matrix=mu_law(q.matrix, mu), companded=True, mu=float(mu))


def qubo_to_ising(q):
    """Equivalent Ising problem under b = (sigma + 1)/2; energies match with
    the conversion offset and ground states correspond bijectively."""
    m = q.matrix
    n = q.dim
    h = 0.5 * (m @ np.ones(n))
    jm = np.triu(0.5 * m, 1)
    offset = 0.25 * float(np.ones(n) @ m @ np.ones(n)) + 0.25 * float(np.trace(m))
    return IsingProblem(h=h, j=jm, offset=offset)


# Default coefficient-noise level, as a fraction of the max-norm-1 scale.
DEFAULT_ICE_SIGMA = 0.02


def inject_ice_noise(q, sigma, seed):
    """Additive symmetric white-Gaussian perturbation Q + E of the programmed
    coefficients; entries on and above the diagonal are i.i.d. N(0, sigma^2)."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return q
    from ._rng import rng_stream
    rng = rng_stream(seed)
    e = rng.normal(0.0, sigma, size=(q.dim, q.dim))
    e = np.triu(e) + np.triu(e, 1).T
    return replace(q, matrix=q.matrix + e)
