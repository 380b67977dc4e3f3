"""Compare the compiled kernels against the numpy fallback.

Times the two hot paths (user-slot decoding and shift scoring) on
representative workloads and checks that both backends return identical
results. Run directly:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from entsync.kernels import fallback

try:
    from entsync.kernels import _native as native
except ImportError:
    native = None


def _offsets(counts):
    out = np.zeros(counts.shape[0] + 1, dtype=np.int64)
    np.cumsum(counts, out=out[1:])
    return out


def decode_workload(rng, n_slots, mu_t, mu_b=5e-6, detect_prob=0.0018, shift=17):
    pair_counts = rng.poisson(mu_t, n_slots)
    total = int(pair_counts.sum())
    bg_counts = rng.poisson(mu_b, n_slots)
    nbg = int(bg_counts.sum())
    return (
        pair_counts,
        rng.integers(0, 2, n_slots).astype(np.int8),
        rng.normal(0.0, 50e-12, n_slots),
        _offsets(pair_counts),
        rng.random(total),
        rng.normal(0.0, 200e-12, total),
        detect_prob,
        4e-9,
        shift,
        _offsets(bg_counts),
        rng.integers(0, 2, nbg).astype(np.int8),
        (rng.random(nbg) - 0.5) * 10e-9 + rng.normal(0.0, 200e-12, nbg),
    )


def score_workload(rng, n_slots, n_valid, span):
    ref = rng.choice(np.array([-1, 0, 1], dtype=np.int8), size=n_slots, p=[0.7, 0.15, 0.15])
    idx = np.sort(rng.choice(n_slots, size=n_valid, replace=False)).astype(np.int64)
    bits = rng.integers(0, 2, n_valid).astype(np.int8)
    return ref, idx, bits, -span, span


def best_of(fn, args, repeats=5):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b, equal_nan=True)


def main():
    if native is None:
        print("compiled kernels not built; nothing to compare")
        return

    rng = np.random.default_rng(0)
    rows = []

    for label, mu_t, n in (
        ("decode 1e5 slots, mu_t=0.5", 0.5, 100_000),
        ("decode 1e5 slots, mu_t=4.0", 4.0, 100_000),
        ("decode 1e6 slots, mu_t=0.5", 0.5, 1_000_000),
    ):
        args = decode_workload(rng, n, mu_t)
        t_native, out_native = best_of(native.decode_user_slots, args)
        t_fallback, out_fallback = best_of(fallback.decode_user_slots, args)
        assert same(out_native, out_fallback), "backends disagree"
        rows.append((label, t_native, t_fallback))

    for label, n, k, span in (
        ("score 1e5 slots, 150 bits, +-50", 100_000, 150, 50),
        ("score 1e5 slots, 3e4 bits, +-50", 100_000, 30_000, 50),
        ("score 2e5 slots, 1e5 bits, +-200", 200_000, 100_000, 200),
    ):
        ref, idx, bits, lo, hi = score_workload(rng, n, k, span)
        t_native, out_native = best_of(native.score_shifts, (ref, idx, bits, lo, hi))
        t_fallback, out_fallback = best_of(fallback.score_shifts, (ref, idx, bits, lo, hi))
        assert same(out_native, out_fallback), "backends disagree"
        rows.append((label, t_native, t_fallback))

    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'native':>10}  {'fallback':>10}  {'speedup':>8}")
    for label, t_native, t_fallback in rows:
        print(
            f"{label:<{width}}  {t_native*1e3:>8.2f}ms  {t_fallback*1e3:>8.2f}ms"
            f"  {t_fallback/t_native:>7.1f}x"
        )
    print("\nall outputs bit-identical across backends")


if __name__ == "__main__":
    main()
