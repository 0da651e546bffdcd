"""Backend micro-benchmarks: compiled kernels against the numpy fallback.

Each kernel is timed best-of-N on identical inputs, and numerical
agreement between backends is verified at the same time, so a speedup
figure is never reported for code paths that disagree.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import backend
from .rng import RngState


@dataclass(frozen=True)
class BenchRow:
    kernel: str
    numpy_ms: float
    numba_ms: float | None
    speedup: float | None
    max_diff: float


def _time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000.0


def _cases(d: int, k: int, steps: int):
    rng = RngState(2718)
    q0 = np.linalg.qr(rng.normals(d * k).reshape(d, k))[0].copy()
    xs = rng.normals(steps * d).reshape(steps, d) * (0.3 / np.sqrt(d))
    gammas = 10.0 / (1.0 + np.arange(float(steps)))
    normals_out = np.empty(200_000)
    uints_out = np.empty(200_000, dtype=np.uint64)
    jac = rng.normals(48 * 16).reshape(48, 16).copy()
    idx = np.arange(100_000, dtype=np.int64)

    cases = []

    def mk(name, runner):
        cases.append((name, runner))

    def run_uint(k_mod):
        buf = np.empty_like(uints_out)
        k_mod.fill_uint64(np.uint64(7), np.uint64(0), buf)
        return buf.astype(np.float64)

    mk("fill_uint64 (200k)", run_uint)

    def run_normals(k_mod):
        buf = np.empty_like(normals_out)
        k_mod.fill_normals(np.uint64(7), np.uint64(0), buf)
        return buf

    mk("fill_normals (200k)", run_normals)

    tall = np.ascontiguousarray(xs[:d, :k])

    def run_qr(k_mod):
        q = np.empty((d, k))
        r = np.empty((k, k))
        for _ in range(200):
            w = tall.copy()
            k_mod.qr_factor(w, q, r, 1e-12)
        return q

    mk("qr_factor (d x k, 200x)", run_qr)

    def run_sgd(k_mod):
        q = q0.copy()
        s = np.empty((d, k))
        r = np.empty((k, k))
        k_mod.sgd_chunk_dense(q, xs, gammas, 1e-12, s, r)
        return q

    mk(f"sgd_chunk_dense ({steps} steps)", run_sgd)

    def run_block(k_mod):
        s = np.zeros((d, k))
        k_mod.block_accum_dense(s, q0, xs, 1.0 / steps)
        return s

    mk(f"block_accum_dense ({steps} pts)", run_block)

    def run_jacobi(k_mod):
        sv = np.empty(16)
        for _ in range(50):
            k_mod.jacobi_sv(jac.copy(), sv)
        return sv

    mk("jacobi_sv (48 x 16, 50x)", run_jacobi)

    def run_shuffle(k_mod):
        p = idx.copy()
        k_mod.shuffle(np.uint64(11), np.uint64(0), p)
        return p.astype(np.float64)

    mk("shuffle (100k)", run_shuffle)

    return cases


def run_bench(d: int = 200, k: int = 8, steps: int = 5000, repeat: int = 3) -> list[BenchRow]:
    """Time every kernel on each available backend and cross-check outputs."""
    from . import _kernels_np as knp

    have_numba = "numba" in backend.available_backends()
    knb = None
    if have_numba:
        from . import _kernels_nb as knb_mod

        knb = knb_mod

    rows = []
    for name, runner in _cases(d, k, steps):
        out_np = runner(knp)
        t_np = _time(lambda: runner(knp), repeat)
        t_nb = None
        speed = None
        diff = 0.0
        if knb is not None:
            out_nb = runner(knb)  # warm the JIT before timing
            t_nb = _time(lambda: runner(knb), repeat)
            speed = t_np / t_nb if t_nb > 0 else float("inf")
            diff = float(np.max(np.abs(out_np - out_nb)))
        rows.append(BenchRow(name, t_np, t_nb, speed, diff))
    return rows


def format_rows(rows: list[BenchRow]) -> str:
    lines = [f"{'kernel':<34} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max diff':>10}"]
    for row in rows:
        nb = f"{row.numba_ms:10.2f}" if row.numba_ms is not None else f"{'-':>10}"
        sp = f"{row.speedup:8.1f}" if row.speedup is not None else f"{'-':>8}"
        lines.append(f"{row.kernel:<34} {row.numpy_ms:10.2f} {nb} {sp} {row.max_diff:10.2e}")
    return "\n".join(lines)
