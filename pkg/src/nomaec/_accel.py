"""Hot numeric kernels.

Every kernel has a numba implementation and a pure-numpy twin with the same
signature. The active backend is chosen once at import time:

    NOMAEC_BACKEND=numpy   force the numpy path
    NOMAEC_BACKEND=numba   require numba (ImportError if missing)
    unset                  numba when importable, numpy otherwise

Both twins are always importable by name (``*_numpy`` / ``*_numba``) so the
test-suite and the benchmark can compare them directly.
"""
import os

import numpy as np

LN2 = float(np.log(2.0))

# Philox4x32-10 constants (Salmon et al., Random123)
PHILOX_M0 = 0xD2511F53
PHILOX_M1 = 0xCD9E8D57
PHILOX_W0 = 0x9E3779B9
PHILOX_W1 = 0xBB67AE85
MASK32 = 0xFFFFFFFF
TWO_M53 = 2.0 ** -53

_requested = os.environ.get("NOMAEC_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(f"NOMAEC_BACKEND must be 'numba' or 'numpy', got {_requested!r}")

try:
    import numba as nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    if _requested == "numba":
        raise
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA and _requested != "numpy" else "numpy"


# ---------------------------------------------------------------------------
# numpy twins
# ---------------------------------------------------------------------------

def philox4x32_numpy(c0, c1, c2, c3, k0, k1):
    """Vectorised Philox4x32-10. Inputs are uint64 arrays holding 32-bit words."""
    m0 = np.uint64(PHILOX_M0)
    m1 = np.uint64(PHILOX_M1)
    mask = np.uint64(MASK32)
    s32 = np.uint64(32)
    k0 = np.asarray(k0, dtype=np.uint64) & mask
    k1 = np.asarray(k1, dtype=np.uint64) & mask
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint64) & mask for c in (c0, c1, c2, c3))
    for _ in range(10):
        p0 = c0 * m0
        p1 = c2 * m1
        c0, c1, c2, c3 = (
            (p1 >> s32) ^ c1 ^ k0,
            p1 & mask,
            (p0 >> s32) ^ c3 ^ k1,
            p0 & mask,
        )
        k0 = (k0 + np.uint64(PHILOX_W0)) & mask
        k1 = (k1 + np.uint64(PHILOX_W1)) & mask
    return c0, c1, c2, c3


def _words_to_unit(hi, lo):
    # 53-bit uniform in (0, 1]; never exactly zero so -log() stays finite
    x = (hi << np.uint64(32)) | lo
    return ((x >> np.uint64(11)) + np.uint64(1)).astype(np.float64) * TWO_M53


def uniforms_numpy(seed, start, count, width, stream):
    """(count, width) uniforms in (0, 1] for blocks start..start+count-1.

    Counter layout: (block_lo, block_hi, column_pair, stream); key = seed.
    """
    seed = int(seed)
    blocks = np.arange(start, start + count, dtype=np.uint64)
    lo = blocks & np.uint64(MASK32)
    hi = blocks >> np.uint64(32)
    out = np.empty((count, width), dtype=np.float64)
    k0 = np.uint64(seed & MASK32)
    k1 = np.uint64((seed >> 32) & MASK32)
    for j in range((width + 1) // 2):
        c2 = np.full(count, j, dtype=np.uint64)
        c3 = np.full(count, stream, dtype=np.uint64)
        x0, x1, x2, x3 = philox4x32_numpy(lo, hi, c2, c3, k0, k1)
        out[:, 2 * j] = _words_to_unit(x0, x1)
        if 2 * j + 1 < width:
            out[:, 2 * j + 1] = _words_to_unit(x2, x3)
    return out


def exp_gains_numpy(seed, start, count, mean_gains):
    means = np.asarray(mean_gains, dtype=np.float64)
    u = uniforms_numpy(seed, start, count, means.size, 0)
    g = -np.log(u) * means
    # stable sort keeps draw order on ties
    return np.sort(g, axis=1, kind="stable")


def sic_rates_numpy(gains, powers, rho, share, scale):
    """Uplink SIC rates for ascending-sorted gains (rows = blocks)."""
    gains = np.asarray(gains, dtype=np.float64)
    n, k = gains.shape
    sr = scale * rho
    out = np.empty((n, k), dtype=np.float64)
    interference = np.zeros(n, dtype=np.float64)
    for j in range(k):
        x = sr * powers[j] * gains[:, j] / (1.0 + sr * interference)
        out[:, j] = share * (np.log1p(x) / LN2)
        interference = interference + powers[j] * gains[:, j]
    return out


def oma_rates_numpy(gains, powers, rho, n_shares, share, scale):
    gains = np.asarray(gains, dtype=np.float64)
    nsr = n_shares * scale * rho
    sub = share / n_shares
    out = np.empty(gains.shape, dtype=np.float64)
    for j in range(gains.shape[1]):
        out[:, j] = sub * (np.log1p(nsr * powers[j] * gains[:, j]) / LN2)
    return out


def paired_rates_numpy(gains, plan_idx, plan_table, p_weak, p_strong, rho, nomar):
    """Rates for a per-block pairing plan.

    plan_table has shape (n_plans, n_groups, 2); each group is (weak, strong)
    in global rank indices. Returns (rates (N, M), noma_chosen (N, G) bool).
    Each group gets 1/G of the resources at G-times power; with ``nomar`` the
    group falls back to OMA inside its share when that serves its strong
    member better.
    """
    gains = np.asarray(gains, dtype=np.float64)
    n, m = gains.shape
    n_groups = plan_table.shape[1]
    share = 1.0 / n_groups
    sr = n_groups * rho
    sr2 = 2.0 * sr
    half = share / 2.0
    rates = np.empty((n, m), dtype=np.float64)
    chosen = np.ones((n, n_groups), dtype=np.bool_)
    for p in range(plan_table.shape[0]):
        rows = np.nonzero(plan_idx == p)[0]
        if rows.size == 0:
            continue
        for gi in range(n_groups):
            w, s = plan_table[p, gi, 0], plan_table[p, gi, 1]
            gw = gains[rows, w]
            gs = gains[rows, s]
            nw = share * (np.log1p(sr * p_weak * gw / (1.0 + sr * 0.0)) / LN2)
            ns = share * (np.log1p(sr * p_strong * gs / (1.0 + sr * (p_weak * gw))) / LN2)
            if nomar:
                ow = half * (np.log1p(sr2 * p_weak * gw) / LN2)
                os_ = half * (np.log1p(sr2 * p_strong * gs) / LN2)
                pick = ns >= os_
                rates[rows, w] = np.where(pick, nw, ow)
                rates[rows, s] = np.where(pick, ns, os_)
                chosen[rows, gi] = pick
            else:
                rates[rows, w] = nw
                rates[rows, s] = ns
    return rates, chosen


def heuristic_choice_numpy(gains, partners, p_weak, p_strong, rho, n_groups):
    """Index of the plan maximising the strongest user's post-SIC SINR.

    ``partners[p]`` is the rank paired with the strongest user in plan p.
    First maximum wins, so with plans in lexicographic order ties go to the
    lexicographically smallest plan.
    """
    gains = np.asarray(gains, dtype=np.float64)
    top = gains[:, -1]
    noise = 1.0 / (n_groups * rho)
    obj = (p_strong * top)[:, None] / (noise + p_weak * gains[:, partners])
    return np.argmax(obj, axis=1).astype(np.int64)


def batch_lme_numpy(x, beta, n_batches):
    """Per-batch (min, sum exp(beta*(x-min)), count) over contiguous batches."""
    x = np.asarray(x, dtype=np.float64)
    edges = _batch_edges(x.size, n_batches)
    mins = np.empty(n_batches)
    sums = np.empty(n_batches)
    for b in range(n_batches):
        seg = x[edges[b]:edges[b + 1]]
        mins[b] = seg.min()
        sums[b] = np.exp(beta * (seg - mins[b])).sum()
    return mins, sums, np.diff(edges)


def _batch_edges(n, n_batches):
    # same split as np.array_split: the first n % k batches get one extra
    q, r = divmod(n, n_batches)
    sizes = np.full(n_batches, q, dtype=np.int64)
    sizes[:r] += 1
    edges = np.zeros(n_batches + 1, dtype=np.int64)
    np.cumsum(sizes, out=edges[1:])
    return edges


# ---------------------------------------------------------------------------
# numba twins
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    _U = nb.uint64

    @nb.njit(cache=True, inline="always")
    def _philox_scalar(c0, c1, c2, c3, k0, k1):
        mask = _U(MASK32)
        s32 = _U(32)
        for _ in range(10):
            p0 = c0 * _U(PHILOX_M0)
            p1 = c2 * _U(PHILOX_M1)
            n0 = (p1 >> s32) ^ c1 ^ k0
            n1 = p1 & mask
            n2 = (p0 >> s32) ^ c3 ^ k1
            n3 = p0 & mask
            c0, c1, c2, c3 = n0, n1, n2, n3
            k0 = (k0 + _U(PHILOX_W0)) & mask
            k1 = (k1 + _U(PHILOX_W1)) & mask
        return c0, c1, c2, c3

    @nb.njit(cache=True, inline="always")
    def _unit(hi, lo):
        x = (hi << _U(32)) | lo
        return np.float64((x >> _U(11)) + _U(1)) * TWO_M53

    @nb.njit(cache=True, nogil=True)
    def uniforms_numba(seed, start, count, width, stream):
        seed = _U(seed)
        k0 = seed & _U(MASK32)
        k1 = (seed >> _U(32)) & _U(MASK32)
        out = np.empty((count, width), dtype=np.float64)
        st = _U(stream)
        for i in range(count):
            b = _U(start) + _U(i)
            lo = b & _U(MASK32)
            hi = b >> _U(32)
            for j in range((width + 1) // 2):
                x0, x1, x2, x3 = _philox_scalar(lo, hi, _U(j), st, k0, k1)
                out[i, 2 * j] = _unit(x0, x1)
                if 2 * j + 1 < width:
                    out[i, 2 * j + 1] = _unit(x2, x3)
        return out

    @nb.njit(cache=True, nogil=True)
    def exp_gains_numba(seed, start, count, mean_gains):
        m = mean_gains.size
        g = uniforms_numba(seed, start, count, m, 0)
        for i in range(count):
            for j in range(m):
                g[i, j] = -np.log(g[i, j]) * mean_gains[j]
            # insertion sort: M is small and this is stable
            for j in range(1, m):
                v = g[i, j]
                t = j - 1
                while t >= 0 and g[i, t] > v:
                    g[i, t + 1] = g[i, t]
                    t -= 1
                g[i, t + 1] = v
        return g

    @nb.njit(cache=True, nogil=True)
    def sic_rates_numba(gains, powers, rho, share, scale):
        n, k = gains.shape
        sr = scale * rho
        out = np.empty((n, k), dtype=np.float64)
        for i in range(n):
            interference = 0.0
            for j in range(k):
                x = sr * powers[j] * gains[i, j] / (1.0 + sr * interference)
                out[i, j] = share * (np.log1p(x) / LN2)
                interference = interference + powers[j] * gains[i, j]
        return out

    @nb.njit(cache=True, nogil=True)
    def oma_rates_numba(gains, powers, rho, n_shares, share, scale):
        n, k = gains.shape
        nsr = n_shares * scale * rho
        sub = share / n_shares
        out = np.empty((n, k), dtype=np.float64)
        for i in range(n):
            for j in range(k):
                out[i, j] = sub * (np.log1p(nsr * powers[j] * gains[i, j]) / LN2)
        return out

    @nb.njit(cache=True, nogil=True)
    def paired_rates_numba(gains, plan_idx, plan_table, p_weak, p_strong, rho, nomar):
        n, m = gains.shape
        n_groups = plan_table.shape[1]
        share = 1.0 / n_groups
        sr = n_groups * rho
        sr2 = 2.0 * sr
        half = share / 2.0
        rates = np.empty((n, m), dtype=np.float64)
        chosen = np.ones((n, n_groups), dtype=np.bool_)
        for i in range(n):
            p = plan_idx[i]
            for gi in range(n_groups):
                w = plan_table[p, gi, 0]
                s = plan_table[p, gi, 1]
                gw = gains[i, w]
                gs = gains[i, s]
                nw = share * (np.log1p(sr * p_weak * gw / (1.0 + sr * 0.0)) / LN2)
                ns = share * (np.log1p(sr * p_strong * gs / (1.0 + sr * (p_weak * gw))) / LN2)
                if nomar:
                    ow = half * (np.log1p(sr2 * p_weak * gw) / LN2)
                    os_ = half * (np.log1p(sr2 * p_strong * gs) / LN2)
                    if ns >= os_:
                        rates[i, w] = nw
                        rates[i, s] = ns
                    else:
                        rates[i, w] = ow
                        rates[i, s] = os_
                        chosen[i, gi] = False
                else:
                    rates[i, w] = nw
                    rates[i, s] = ns
        return rates, chosen

    @nb.njit(cache=True, nogil=True)
    def heuristic_choice_numba(gains, partners, p_weak, p_strong, rho, n_groups):
        n, m = gains.shape
        noise = 1.0 / (n_groups * rho)
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            num = p_strong * gains[i, m - 1]
            best = -1.0
            arg = 0
            for p in range(partners.size):
                v = num / (noise + p_weak * gains[i, partners[p]])
                if v > best:
                    best = v
                    arg = p
            out[i] = arg
        return out

    @nb.njit(cache=True, nogil=True)
    def _batch_lme_kernel(x, beta, edges):
        nb_ = edges.size - 1
        mins = np.empty(nb_)
        sums = np.empty(nb_)
        for b in range(nb_):
            lo = edges[b]
            hi = edges[b + 1]
            mn = x[lo]
            for t in range(lo + 1, hi):
                if x[t] < mn:
                    mn = x[t]
            acc = 0.0
            for t in range(lo, hi):
                acc += np.exp(beta * (x[t] - mn))
            mins[b] = mn
            sums[b] = acc
        return mins, sums

    def batch_lme_numba(x, beta, n_batches):
        x = np.ascontiguousarray(x, dtype=np.float64)
        edges = _batch_edges(x.size, n_batches)
        mins, sums = _batch_lme_kernel(x, float(beta), edges)
        return mins, sums, np.diff(edges)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _pick(name):
    return globals()[f"{name}_{BACKEND}"]


def uniforms(seed, start, count, width, stream):
    return _pick("uniforms")(np.uint64(seed), int(start), int(count), int(width), int(stream))


def exp_gains(seed, start, count, mean_gains):
    return _pick("exp_gains")(np.uint64(seed), int(start), int(count),
                              np.ascontiguousarray(mean_gains, dtype=np.float64))


def sic_rates(gains, powers, rho, share=1.0, scale=1.0):
    return _pick("sic_rates")(np.ascontiguousarray(gains, dtype=np.float64),
                              np.ascontiguousarray(powers, dtype=np.float64),
                              float(rho), float(share), float(scale))


def oma_rates(gains, powers, rho, n_shares, share=1.0, scale=1.0):
    return _pick("oma_rates")(np.ascontiguousarray(gains, dtype=np.float64),
                              np.ascontiguousarray(powers, dtype=np.float64),
                              float(rho), float(n_shares), float(share), float(scale))


def paired_rates(gains, plan_idx, plan_table, p_weak, p_strong, rho, nomar):
    return _pick("paired_rates")(np.ascontiguousarray(gains, dtype=np.float64),
                                 np.ascontiguousarray(plan_idx, dtype=np.int64),
                                 np.ascontiguousarray(plan_table, dtype=np.int64),
                                 float(p_weak), float(p_strong), float(rho), bool(nomar))


def heuristic_choice(gains, partners, p_weak, p_strong, rho, n_groups):
    return _pick("heuristic_choice")(np.ascontiguousarray(gains, dtype=np.float64),
                                     np.ascontiguousarray(partners, dtype=np.int64),
                                     float(p_weak), float(p_strong), float(rho),
                                     int(n_groups))


def batch_lme(x, beta, n_batches):
    return _pick("batch_lme")(x, float(beta), int(n_batches))
