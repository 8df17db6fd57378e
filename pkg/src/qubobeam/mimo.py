"""Complex MIMO beamforming problem: channels, SNR objective, 1-bit coding
vectors, problem symmetries and the exhaustive-search benchmark.

The system is a point-to-point N_R x N_T link in beamforming mode. Transmit
and receive weights are restricted to the quantized complex alphabet
{+-1 +- 1j} (one sign bit per real dimension). The received SNR for a
pre-coder f and post-coder g is

    rho(g, f) = P |g^H H f|^2 / (4 N_T N_R sigma^2),

where the 4 N_T N_R accounts for the power normalization of the unnormalized
+-1+-1j vectors (||f|| = sqrt(2 N_T), ||g|| = sqrt(2 N_R)).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from ._rng import rng_stream

# Enumeration cap for exhaustive search: 2*(n_tx + n_rx) bits.
DEFAULT_ENUMERATION_BITS = 28

# The coding alphabet (one complex symbol per sign-bit pair).
ALPHABET = (1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j)


class DimensionError(ValueError):
    """Shape/dimension mismatch between channel and coding vectors."""


class AlphabetError(ValueError):
    """A coding vector entry lies outside {+-1 +- 1j}."""


class EnumerationCapError(ValueError):
    """Problem too large for the configured exhaustive-search cap."""


def _as_alphabet_vector(v, name):
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size == 0:
        raise AlphabetError(f"{name} must be a non-empty complex vector")
    if not (np.all(np.abs(v.real) == 1) and np.all(np.abs(v.imag) == 1)):
        raise AlphabetError(f"{name} entries must lie in {{+-1 +- 1j}}")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class ComplexChannel:
    """N_R x N_T complex channel matrix with finite entries."""

    n_tx: int
    n_rx: int
    entries: np.ndarray

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise DimensionError("antenna counts must be >= 1")
        h = np.asarray(self.entries, dtype=complex)
        if h.shape != (self.n_rx, self.n_tx):
            raise DimensionError(
                f"channel matrix must be {self.n_rx}x{self.n_tx}, got {h.shape}")
        if not np.all(np.isfinite(h.real)) or not np.all(np.isfinite(h.imag)):
            raise ValueError("channel entries must be finite")
        h.setflags(write=False)
        object.__setattr__(self, "entries", h)

    def to_json_dict(self):
        return {
            "n_tx": self.n_tx,
            "n_rx": self.n_rx,
            "re": self.entries.real.ravel().tolist(),
            "im": self.entries.imag.ravel().tolist(),
        }

    @classmethod
    def from_json_dict(cls, d):
        n_tx, n_rx = int(d["n_tx"]), int(d["n_rx"])
        re = np.asarray(d["re"], dtype=float).reshape(n_rx, n_tx)
        im = np.asarray(d["im"], dtype=float).reshape(n_rx, n_tx)
        return cls(n_tx=n_tx, n_rx=n_rx, entries=re + 1j * im)

    def save_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh)

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True, eq=False)
class CodingPair:
    """Unnormalized 1-bit pre-coder f (length N_T) and post-coder g (N_R)."""

    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f", _as_alphabet_vector(self.f, "f"))
        object.__setattr__(self, "g", _as_alphabet_vector(self.g, "g"))

    def __eq__(self, other):
        if not isinstance(other, CodingPair):
            return NotImplemented
        return (self.f.shape == other.f.shape and self.g.shape == other.g.shape
                and np.array_equal(self.f, other.f) and np.array_equal(self.g, other.g))

    def __hash__(self):
        return hash((self.f.tobytes(), self.g.tobytes()))

    def bitstring(self):
        """Bit encoding: [Re f; Im f; Re g; Im g] with +1 -> '1', -1 -> '0'."""
        s = np.concatenate([self.f.real, self.f.imag, self.g.real, self.g.imag])
        return "".join("1" if x > 0 else "0" for x in s)


@dataclass(frozen=True)
class SnrContext:
    """Transmit power P (linear) and AWGN variance sigma^2."""

    power: float
    noise_var: float

    def __post_init__(self):
        if not (self.power >= 0):
            raise ValueError("power must be >= 0")
        if not (self.noise_var > 0):
            raise ValueError("noise_var must be > 0")


def generate_rayleigh_channel(n_tx, n_rx, seed):
    """Rayleigh block-fading channel: entries i.i.d. CN(0,1).

    Real and imaginary parts are each N(0, 1/2); deterministic per seed.
    """
    if n_tx < 1 or n_rx < 1:
        raise DimensionError("antenna counts must be >= 1")
    rng = rng_stream(seed)
    h = rng.standard_normal((n_rx, n_tx)) + 1j * rng.standard_normal((n_rx, n_tx))
    return ComplexChannel(n_tx=n_tx, n_rx=n_rx, entries=h * np.sqrt(0.5))


@dataclass(frozen=True)
class ChannelEnsemble:
    """Seeded channel ensemble; member i is independent of generation order."""

    n_tx: int
    n_rx: int
    count: int
    seed: int

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("ensemble count must be >= 1")

    def channel(self, i):
        from ._rng import derive_seed
        return generate_rayleigh_channel(self.n_tx, self.n_rx, derive_seed(self.seed, i))

    def __iter__(self):
        return (self.channel(i) for i in range(self.count))


def pair_objective(channel, pair):
    """|g^H H f|^2, the power-independent part of the SNR."""
    if pair.f.size != channel.n_tx or pair.g.size != channel.n_rx:
        raise DimensionError("coding pair does not match channel dimensions")
    return float(abs(np.vdot(pair.g, channel.entries @ pair.f)) ** 2)


def snr(channel, pair, ctx):
    """Received SNR  P |g^H H f|^2 / (4 N_T N_R sigma^2)."""
    x = pair_objective(channel, pair)
    return ctx.power * x / (4.0 * channel.n_tx * channel.n_rx * ctx.noise_var)


# SNR-preserving transformations: (g, f) -> (a g, conj(a) f) for
# a in {1, -1, -j, j}; the last two are the real/imag swap maps
# f -> -Im(f) + Re(f) j with g -> +Im(g) - Re(g) j, and its negation.
_ORBIT_PHASES = (1.0, -1.0, -1.0j, 1.0j)


def symmetry_orbit(pair):
    """Equivalence class of a pair under the SNR-preserving sign/swap maps."""
    return {CodingPair(f=np.conj(a) * pair.f, g=a * pair.g) for a in _ORBIT_PHASES}


def canonical_pair(pair):
    """Orbit member with the lexicographically smallest bit encoding."""
    return min(symmetry_orbit(pair), key=lambda p: p.bitstring())


def _vectors_for_indices(idx, n):
    """Decode pair-enumeration indices into 1-bit vectors (rows).

    Index bits (most significant first) map to [Re; Im] sign bits,
    matching CodingPair.bitstring() ordering; bit 1 -> +1.
    """
    shifts = np.arange(2 * n - 1, -1, -1, dtype=np.uint64)
    s = 2.0 * ((idx[:, None] >> shifts) & 1) - 1.0
    return s[:, :n] + 1j * s[:, n:]


def exhaustive_search(channel, ctx, use_symmetry=False, bit_cap=DEFAULT_ENUMERATION_BITS):
    """Globally optimal coding pair by enumeration of all 2^{2(N_T+N_R)} pairs.

    With ``use_symmetry`` only one representative per symmetry orbit is
    evaluated (the member with g[0] = 1+1j), a 4x reduction; the optimum is
    identical. Ties are broken toward the lexicographically smallest bit
    encoding and the returned pair is the canonical orbit representative.
    """
    n_t, n_r = channel.n_tx, channel.n_rx
    bits = 2 * (n_t + n_r)
    if bits > bit_cap:
        raise EnumerationCapError(
            f"exhaustive search needs {bits} bits > cap {bit_cap}")

    h = channel.entries
    nf = 1 << (2 * n_t)
    f_chunk = min(nf, 1 << 12)
    if use_symmetry:
        ng = 1 << (2 * (n_r - 1)) if n_r > 1 else 1
    else:
        ng = 1 << (2 * n_r)
    g_chunk = min(ng, 1 << 12)

    def g_block(start, stop):
        idx = np.arange(start, stop, dtype=np.uint64)
        if use_symmetry:
            if n_r == 1:
                return np.full((1, 1), 1 + 1j)
            sub = _vectors_for_indices(idx, n_r - 1)
            g = np.empty((len(idx), n_r), dtype=complex)
            g[:, 0] = 1 + 1j
            # interleave: remaining Re bits then remaining Im bits
            g[:, 1:] = sub
            return g
        return _vectors_for_indices(idx, n_r)

    best = (-1.0, None, None)  # (objective, f_idx, g_idx)
    best_vecs = None
    for fs in range(0, nf, f_chunk):
        fe = min(fs + f_chunk, nf)
        F = _vectors_for_indices(np.arange(fs, fe, dtype=np.uint64), n_t)
        W = F @ h.T  # rows: H f for each f
        for gs in range(0, ng, g_chunk):
            ge = min(gs + g_chunk, ng)
            G = g_block(gs, ge)
            m = np.abs(W @ G.conj().T) ** 2  # (f, g) block
            k = int(np.argmax(m))
            i, j = divmod(k, m.shape[1])
            cand = (float(m[i, j]), fs + i, gs + j)
            if cand[0] > best[0] or (cand[0] == best[0] and
                                     (cand[1], cand[2]) < (best[1], best[2])):
                best = cand
                best_vecs = (F[i].copy(), G[j].copy())

    pair = CodingPair(f=best_vecs[0], g=best_vecs[1])
    if use_symmetry:
        pair = canonical_pair(pair)
    return pair, snr(channel, pair, ctx)
