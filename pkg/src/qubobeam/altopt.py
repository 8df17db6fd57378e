"""Alternating pre/post-coder design: each iteration solves two QUBO
subproblems (f given g, then g given f) until the SNR change falls below a
relative tolerance or the iteration cap is hit, over L restarts from random
initial post-coders; the best restart wins.

Initial post-coders are drawn uniformly over the alphabet but restarts avoid
repeating a symmetry orbit while unused orbits remain, since initials in the
same orbit provably produce identical iterates (the spin form built from g is
invariant under g -> -g and g -> +-j g).
"""

import json
from dataclasses import dataclass, replace

import numpy as np

from ._rng import derive_seed, rng_stream
from .mimo import (CodingPair, EnumerationCapError, exhaustive_search,
                   pair_objective, snr)
from .qubo import (real_embed_postcoder, real_embed_precoder,
                   spin_form_to_qubo, spins_to_coding_vector, binary_to_spin,
                   compand)
from .solvers import SolverConfig, solve_annealed, solve_exact, string_to_bits


@dataclass(frozen=True)
class AltOptConfig:
    restarts: int = 8
    max_iters: int = 8
    rel_tol: float = 0.01
    solver: object = "exact"  # "exact" or a SolverConfig
    companding_mu: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.rel_tol > 0):
            raise ValueError("rel_tol must be > 0")
        if self.solver != "exact" and not isinstance(self.solver, SolverConfig):
            raise ValueError("solver must be 'exact' or a SolverConfig")
        if self.companding_mu is not None and not (self.companding_mu > 0):
            raise ValueError("companding_mu must be positive")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    f: np.ndarray
    g: np.ndarray
    snr: float


@dataclass(frozen=True)
class RestartTrace:
    records: tuple
    final_f: np.ndarray
    final_g: np.ndarray
    final_snr: float


@dataclass(frozen=True)
class AltOptTrace:
    restarts: tuple
    winner: int

    @property
    def final_snr(self):
        return self.restarts[self.winner].final_snr

    def to_jsonl(self):
        """One JSON record per iteration (plus one final record per restart)."""
        lines = []
        for l, rt in enumerate(self.restarts):
            for rec in rt.records:
                lines.append(json.dumps({
                    "restart": l, "iteration": rec.iteration,
                    "f_re": rec.f.real.tolist(), "f_im": rec.f.imag.tolist(),
                    "g_re": rec.g.real.tolist(), "g_im": rec.g.imag.tolist(),
                    "snr": rec.snr,
                }))
            lines.append(json.dumps({
                "restart": l, "final": True, "snr": rt.final_snr,
                "winner": l == self.winner,
            }))
        return "\n".join(lines) + "\n"

    def save_jsonl(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())


def _random_onebit(rng, n):
    re = 2.0 * rng.integers(0, 2, n) - 1.0
    im = 2.0 * rng.integers(0, 2, n) - 1.0
    return re + 1j * im


def _orbit_key(g):
    for a in (1.0, -1.0, 1.0j, -1.0j):
        v = a * g
        if v[0].real > 0 and v[0].imag > 0:
            return v.tobytes()
    raise AssertionError("unreachable: alphabet entries always rotate onto 1+1j")


def _solve_qubo_best(q, solver, seed_path):
    if solver == "exact":
        bitstring, _ = solve_exact(q)
        return bitstring
    cfg = replace(solver, seed=derive_seed(solver.seed, *seed_path))
    return solve_annealed(q, cfg).best().bitstring


def _subproblem_step(form, solver, mu, seed_path):
    """Solve one embedded subproblem; None when every vector is equivalent."""
    q = spin_form_to_qubo(form)
    if not q.matrix.any():
        return None
    if mu is not None:
        q = compand(q, mu)
    bits = string_to_bits(_solve_qubo_best(q, solver, seed_path))
    return spins_to_coding_vector(binary_to_spin(bits))


def design_pair(channel, ctx, cfg):
    """Best coding pair over restarts, with the full per-iteration trace."""
    n_orbits = 4 ** channel.n_rx // 4
    used = set()
    traces = []
    for l in range(cfg.restarts):
        rng = rng_stream(cfg.seed, l)
        f = _random_onebit(rng, channel.n_tx)
        g = _random_onebit(rng, channel.n_rx)
        tries = 0
        while _orbit_key(g) in used and tries < 256:
            g = _random_onebit(rng, channel.n_rx)
            tries += 1
        used.add(_orbit_key(g))
        if len(used) >= n_orbits:
            used = set()

        rho_old = snr(channel, CodingPair(f=f, g=g), ctx)
        rho_new = rho_old
        records = []
        k = 0
        while True:
            k += 1
            if k > 1:
                rho_old = rho_new
            f_new = _subproblem_step(real_embed_precoder(channel, g),
                                     cfg.solver, cfg.companding_mu, (l, k, 0))
            if f_new is not None:
                f = f_new
            g_new = _subproblem_step(real_embed_postcoder(channel, f),
                                     cfg.solver, cfg.companding_mu, (l, k, 1))
            if g_new is not None:
                g = g_new
            rho_new = snr(channel, CodingPair(f=f, g=g), ctx)
            records.append(IterationRecord(iteration=k, f=f, g=g, snr=rho_new))
            if rho_old > 0 and abs(rho_new - rho_old) / abs(rho_old) < cfg.rel_tol:
                break
            if k >= cfg.max_iters:
                break
        # Return the best recorded iterate; with the exact backend ascent is
        # monotone so this is the last iterate, as in the pseudocode.
        best = max(range(len(records)), key=lambda i: (records[i].snr, i))
        traces.append(RestartTrace(records=tuple(records),
                                   final_f=records[best].f,
                                   final_g=records[best].g,
                                   final_snr=records[best].snr))
    winner = max(range(len(traces)), key=lambda i: (traces[i].final_snr, -i))
    trace = AltOptTrace(restarts=tuple(traces), winner=winner)
    pair = CodingPair(f=traces[winner].final_f, g=traces[winner].final_g)
    return pair, trace


def snr_sweep(ensemble, powers_db, noise_var, cfg, include_es="auto",
              include_rq=True, bit_cap=None):
    """Mean SNR per transmit-power level for each design method.

    The designed pairs maximize |g^H H f|^2, which does not depend on P, so
    each method designs once per channel and the mean SNR is evaluated at
    every power. Values are linear; convert to dB only when reporting.
    """
    from .mimo import DEFAULT_ENUMERATION_BITS
    from .solvers import rq_baseline

    if len(powers_db) == 0:
        raise ValueError("powers_db must be non-empty")
    if bit_cap is None:
        bit_cap = DEFAULT_ENUMERATION_BITS
    if include_es == "auto":
        include_es = 2 * (ensemble.n_tx + ensemble.n_rx) <= bit_cap

    from .mimo import SnrContext
    ref_ctx = SnrContext(power=1.0, noise_var=noise_var)

    obj = {"alg1": []}
    if include_es:
        obj["es"] = []
    if include_rq:
        obj["rq"] = []
    for i, channel in enumerate(ensemble):
        ch_cfg = replace(cfg, seed=derive_seed(cfg.seed, i))
        pair, _ = design_pair(channel, ref_ctx, ch_cfg)
        obj["alg1"].append(snr(channel, pair, ref_ctx))
        if include_es:
            _, s = exhaustive_search(channel, ref_ctx, use_symmetry=True,
                                     bit_cap=bit_cap)
            obj["es"].append(s)
        if include_rq:
            obj["rq"].append(snr(channel, rq_baseline(channel), ref_ctx))

    means = {k: float(np.mean(v)) for k, v in obj.items()}
    table = {"power_db": list(map(float, powers_db))}
    for k in ("es", "alg1", "rq"):
        if k in means:
            table[f"snr_{k}"] = [means[k] * 10.0 ** (p / 10.0) for p in powers_db]
    return table
