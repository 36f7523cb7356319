"""Compiled Gibbs kernels.

All functions take flat numpy arrays so they can be jitted. Count layout:

    n_cluster[C]          documents per cluster
    n_cs[C, S]            pairs per (cluster, sentiment)
    n_cst[C, S, T]        pairs per (cluster, sentiment, topic)
    n_stw[S, T, V]        word tokens per (sentiment, topic, word)
    n_st[S, T]            word tokens per (sentiment, topic), i.e. 2 x pairs
    n_ds[D, S], n_dst[D, S, T]   per-document pair counts
"""

import math

import numpy as np
from numba import njit

_RESCALE = 1e280


@njit(cache=True)
def log_rising(base, m):
    """log(base * (base + 1) * ... * (base + m - 1)); 0 for m == 0."""
    acc = 0.0
    p = 1.0
    for x in range(m):
        p *= base + x
        if p > _RESCALE:
            acc += math.log(p)
            p = 1.0
    return acc + math.log(p)


@njit(cache=True, error_model="numpy")
def _mul_rising(acc_log, prod, base, m):
    """prod[l] *= base[l] (base[l] + 1) ... (base[l] + m - 1) for every cluster l.

    The cluster axis is innermost so the products vectorize. Terms (count plus
    prior) stay far below 1e18, so an 8-term chunk grows ``prod`` by < 1e144;
    after each chunk any prod[l] above 1e150 is folded into acc_log[l].
    """
    C = prod.shape[0]
    x = 0
    while x < m:
        stop = min(x + 8, m)
        for y in range(x, stop):
            fy = float(y)
            for l in range(C):
                prod[l] *= base[l] + fy
        for l in range(C):
            if prod[l] > 1e150:
                acc_log[l] += math.log(prod[l])
                prod[l] = 1.0
        x = stop


@njit(cache=True)
def cluster_log_weights(n_cluster, n_cs, n_cst, m_ds, m_dst, alpha, gamma, delta, strict, out):
    """Unnormalized log weight of each cluster for one document whose counts
    (m_ds[S], m_dst[S, T]) are NOT included in the cluster tensors.

    The constant 1 / (D - 1 + C * delta) is omitted. Each weight is a ratio of
    rising factorials; numerator and denominator products are accumulated
    separately so only a few logs are taken per cluster.
    """
    C, S, T = n_cst.shape
    acc_num = np.empty(C)
    acc_den = np.zeros(C)
    num = np.ones(C)
    den = np.ones(C)
    base = np.empty(C)
    tot = np.zeros(C)
    m_d = 0
    for s in range(S):
        m_d += m_ds[s]
    for l in range(C):
        for s in range(S):
            tot[l] += n_cs[l, s]
        if strict:
            acc_num[l] = math.log(n_cluster[l]) if n_cluster[l] > 0 else -np.inf
        else:
            acc_num[l] = math.log(n_cluster[l] + delta)
    for s in range(S):
        if m_ds[s] == 0:
            continue
        for l in range(C):
            base[l] = n_cs[l, s] + gamma
        _mul_rising(acc_num, num, base, m_ds[s])
        for z in range(T):
            if m_dst[s, z] == 0:
                continue
            for l in range(C):
                base[l] = n_cst[l, s, z] + alpha
            _mul_rising(acc_num, num, base, m_dst[s, z])
    if strict:
        # printed form: products start at y = 0 and use one pooled aspect normalizer
        for l in range(C):
            base[l] = tot[l] + S * gamma - 1.0
            if base[l] <= 0.0:
                acc_num[l] = -np.inf
                base[l] = 1.0
        _mul_rising(acc_den, den, base, m_d + 1)
        for l in range(C):
            base[l] = tot[l] + T * alpha - 1.0
            if base[l] <= 0.0:
                acc_num[l] = -np.inf
                base[l] = 1.0
        _mul_rising(acc_den, den, base, m_d + 1)
    else:
        for l in range(C):
            base[l] = tot[l] + S * gamma
        _mul_rising(acc_den, den, base, m_d)
        for s in range(S):
            if m_ds[s] == 0:
                continue
            # n_cs[l, s] is the topic-marginal of n_cst[l, s, :]
            for l in range(C):
                base[l] = n_cs[l, s] + T * alpha
            _mul_rising(acc_den, den, base, m_ds[s])
    for l in range(C):
        out[l] = (acc_num[l] + math.log(num[l])) - (acc_den[l] + math.log(den[l]))


@njit(cache=True)
def pair_weights(c, w1, w2, n_cs, n_cst, n_stw, n_st, beta, beta_sum, alpha, gamma, out):
    """Unnormalized weight of every (sentiment, topic) for one pair whose counts are
    NOT included in the tensors. Returns the total mass."""
    S, T = n_st.shape
    tot_c = 0
    for s in range(S):
        tot_c += n_cs[c, s]
    same = 1 if w1 == w2 else 0
    total = 0.0
    for j in range(S):
        f_sent = (n_cs[c, j] + gamma) / (tot_c + S * gamma)
        denom_topic = n_cs[c, j] + T * alpha
        b1 = beta[j, w1]
        b2 = beta[j, w2]
        bs = beta_sum[j]
        for k in range(T):
            num1 = n_stw[j, k, w1] + b1
            num2 = n_stw[j, k, w2] + same + b2
            if num1 == 0.0 or num2 == 0.0:
                out[j, k] = 0.0
                continue
            d = n_st[j, k] + bs
            w = ((n_cst[c, j, k] + alpha) / denom_topic) * f_sent * (num1 / d) * (num2 / (d + 1.0))
            out[j, k] = w
            total += w
    return total


@njit(cache=True)
def _draw(weights, total, rng):
    """Index drawn proportional to non-negative ``weights`` (1-d)."""
    u = rng.random() * total
    acc = 0.0
    n = weights.shape[0]
    last = -1
    for i in range(n):
        w = weights[i]
        if w > 0.0:
            acc += w
            last = i
            if u < acc:
                return i
    return last  # u landed on the rounding gap at the top


@njit(cache=True)
def _draw_log(logw, probs, rng):
    """Draw from unnormalized log weights. Returns -1 if every weight is zero."""
    n = logw.shape[0]
    mx = -np.inf
    for i in range(n):
        if logw[i] > mx:
            mx = logw[i]
    if not np.isfinite(mx):
        return -1
    total = 0.0
    for i in range(n):
        p = math.exp(logw[i] - mx) if logw[i] > -np.inf else 0.0
        probs[i] = p
        total += p
    return _draw(probs, total, rng)


@njit(cache=True)
def initialize_state(w1, w2, doc_ptr, C, S, T, beta, rng, cluster_of_doc, assign_s, assign_z, unconstrained):
    D = doc_ptr.shape[0] - 1
    allowed = np.empty(S, dtype=np.int64)
    for d in range(D):
        cluster_of_doc[d] = int(rng.random() * C)
        for i in range(doc_ptr[d], doc_ptr[d + 1]):
            n_ok = 0
            for s in range(S):
                if beta[s, w1[i]] > 0.0 and beta[s, w2[i]] > 0.0:
                    allowed[n_ok] = s
                    n_ok += 1
            if n_ok == 0:
                unconstrained[i] = True
                assign_s[i] = int(rng.random() * S)
            else:
                assign_s[i] = allowed[int(rng.random() * n_ok)]
            assign_z[i] = int(rng.random() * T)


@njit(cache=True)
def build_counts(w1, w2, doc_ptr, cluster_of_doc, assign_s, assign_z,
                 n_cluster, n_cs, n_cst, n_stw, n_st, n_ds, n_dst):
    D = doc_ptr.shape[0] - 1
    for d in range(D):
        c = cluster_of_doc[d]
        n_cluster[c] += 1
        for i in range(doc_ptr[d], doc_ptr[d + 1]):
            s = assign_s[i]
            z = assign_z[i]
            n_cs[c, s] += 1
            n_cst[c, s, z] += 1
            n_ds[d, s] += 1
            n_dst[d, s, z] += 1
            n_stw[s, z, w1[i]] += 1
            n_stw[s, z, w2[i]] += 1
            n_st[s, z] += 2


@njit(cache=True)
def sample_cluster_step(d, cluster_of_doc, n_cluster, n_cs, n_cst, n_ds, n_dst,
                        alpha, gamma, delta, strict, rng, logw, probs):
    """Resample document d's cluster in place. Returns True if the uniform fallback fired."""
    C, S, T = n_cst.shape
    c = cluster_of_doc[d]
    n_cluster[c] -= 1
    for s in range(S):
        n_cs[c, s] -= n_ds[d, s]
        for z in range(T):
            n_cst[c, s, z] -= n_dst[d, s, z]
    cluster_log_weights(n_cluster, n_cs, n_cst, n_ds[d], n_dst[d], alpha, gamma, delta, strict, logw)
    new = _draw_log(logw, probs, rng)
    fallback = new < 0
    if fallback:
        new = int(rng.random() * C)
    cluster_of_doc[d] = new
    n_cluster[new] += 1
    for s in range(S):
        n_cs[new, s] += n_ds[d, s]
        for z in range(T):
            n_cst[new, s, z] += n_dst[d, s, z]
    return fallback


@njit(cache=True)
def sample_pair_step(d, i, c, w1, w2, assign_s, assign_z, n_cs, n_cst, n_stw, n_st, n_ds, n_dst,
                     beta, beta_sum, alpha, gamma, rng, weights):
    """Resample pair i (of document d, in cluster c) in place. Returns True on fallback."""
    S, T = n_st.shape
    a = w1[i]
    b = w2[i]
    s = assign_s[i]
    z = assign_z[i]
    n_cs[c, s] -= 1
    n_cst[c, s, z] -= 1
    n_ds[d, s] -= 1
    n_dst[d, s, z] -= 1
    n_stw[s, z, a] -= 1
    n_stw[s, z, b] -= 1
    n_st[s, z] -= 2
    total = pair_weights(c, a, b, n_cs, n_cst, n_stw, n_st, beta, beta_sum, alpha, gamma, weights)
    fallback = not (total > 0.0)
    if fallback:
        idx = int(rng.random() * S * T)
    else:
        idx = _draw(weights.reshape(S * T), total, rng)
    s = idx // T
    z = idx % T
    assign_s[i] = s
    assign_z[i] = z
    n_cs[c, s] += 1
    n_cst[c, s, z] += 1
    n_ds[d, s] += 1
    n_dst[d, s, z] += 1
    n_stw[s, z, a] += 1
    n_stw[s, z, b] += 1
    n_st[s, z] += 2
    return fallback


@njit(cache=True)
def sweep(w1, w2, doc_ptr, cluster_of_doc, assign_s, assign_z,
          n_cluster, n_cs, n_cst, n_stw, n_st, n_ds, n_dst,
          beta, beta_sum, alpha, gamma, delta, strict, rng, fallbacks):
    """One full pass: every document's cluster, then every pair's (sentiment, topic).

    fallbacks[0] / fallbacks[1] accumulate uniform-fallback counts for the two kernels.
    """
    C, S, T = n_cst.shape
    D = doc_ptr.shape[0] - 1
    logw = np.empty(C)
    probs = np.empty(C)
    weights = np.empty((S, T))
    for d in range(D):
        if sample_cluster_step(d, cluster_of_doc, n_cluster, n_cs, n_cst, n_ds, n_dst,
                               alpha, gamma, delta, strict, rng, logw, probs):
            fallbacks[0] += 1
    for d in range(D):
        c = cluster_of_doc[d]
        for i in range(doc_ptr[d], doc_ptr[d + 1]):
            if sample_pair_step(d, i, c, w1, w2, assign_s, assign_z, n_cs, n_cst, n_stw, n_st,
                                n_ds, n_dst, beta, beta_sum, alpha, gamma, rng, weights):
                fallbacks[1] += 1


@njit(cache=True)
def fold_in_document(w1, w2, local_w1, local_w2, n_local_words,
                     n_cluster, n_cs, n_cst, n_stw, n_st, beta, beta_sum,
                     alpha, gamma, delta, strict, burn_in, samples, rng):
    """Gibbs over one new document against frozen global counts.

    w1/w2 are global word ids of the document's pairs; local_w1/local_w2 index the
    document's distinct words. Returns averaged (n_ds[S], n_dst[S, T]) over the
    ``samples`` sweeps after ``burn_in``, plus a fallback count.
    """
    C, S, T = n_cst.shape
    P = w1.shape[0]
    m_ds = np.zeros(S, dtype=np.int64)
    m_dst = np.zeros((S, T), dtype=np.int64)
    l_stw = np.zeros((S, T, n_local_words), dtype=np.int64)
    l_st = np.zeros((S, T), dtype=np.int64)
    assign_s = np.empty(P, dtype=np.int64)
    assign_z = np.empty(P, dtype=np.int64)
    allowed = np.empty(S, dtype=np.int64)
    for i in range(P):
        n_ok = 0
        for s in range(S):
            if beta[s, w1[i]] > 0.0 and beta[s, w2[i]] > 0.0:
                allowed[n_ok] = s
                n_ok += 1
        s = allowed[int(rng.random() * n_ok)] if n_ok > 0 else int(rng.random() * S)
        z = int(rng.random() * T)
        assign_s[i] = s
        assign_z[i] = z
        m_ds[s] += 1
        m_dst[s, z] += 1
        l_stw[s, z, local_w1[i]] += 1
        l_stw[s, z, local_w2[i]] += 1
        l_st[s, z] += 2

    logw = np.empty(C)
    probs = np.empty(C)
    weights = np.empty(S * T)
    acc_ds = np.zeros(S)
    acc_dst = np.zeros((S, T))
    fallbacks = 0
    c = 0
    for it in range(burn_in + samples):
        cluster_log_weights(n_cluster, n_cs, n_cst, m_ds, m_dst, alpha, gamma, delta, strict, logw)
        c = _draw_log(logw, probs, rng)
        if c < 0:
            c = int(rng.random() * C)
            fallbacks += 1
        tot_c = 0
        for s in range(S):
            tot_c += n_cs[c, s]
        for i in range(P):
            s = assign_s[i]
            z = assign_z[i]
            m_ds[s] -= 1
            m_dst[s, z] -= 1
            l_stw[s, z, local_w1[i]] -= 1
            l_stw[s, z, local_w2[i]] -= 1
            l_st[s, z] -= 2
            same = 1 if w1[i] == w2[i] else 0
            tot = tot_c + (P - 1)
            total = 0.0
            for j in range(S):
                ncj = n_cs[c, j] + m_ds[j]
                f_sent = (ncj + gamma) / (tot + S * gamma)
                for k in range(T):
                    num1 = n_stw[j, k, w1[i]] + l_stw[j, k, local_w1[i]] + beta[j, w1[i]]
                    num2 = n_stw[j, k, w2[i]] + l_stw[j, k, local_w2[i]] + same + beta[j, w2[i]]
                    if num1 == 0.0 or num2 == 0.0:
                        weights[j * T + k] = 0.0
                        continue
                    dd = n_st[j, k] + l_st[j, k] + beta_sum[j]
                    w = ((n_cst[c, j, k] + m_dst[j, k] + alpha) / (ncj + T * alpha)) * f_sent \
                        * (num1 / dd) * (num2 / (dd + 1.0))
                    weights[j * T + k] = w
                    total += w
            if total > 0.0:
                idx = _draw(weights, total, rng)
            else:
                idx = int(rng.random() * S * T)
                fallbacks += 1
            s = idx // T
            z = idx % T
            assign_s[i] = s
            assign_z[i] = z
            m_ds[s] += 1
            m_dst[s, z] += 1
            l_stw[s, z, local_w1[i]] += 1
            l_stw[s, z, local_w2[i]] += 1
            l_st[s, z] += 2
        if it >= burn_in:
            for s in range(S):
                acc_ds[s] += m_ds[s]
                for z in range(T):
                    acc_dst[s, z] += m_dst[s, z]
    n = max(samples, 1)
    return acc_ds / n, acc_dst / n, fallbacks
