"""Collapsed Gibbs sweep kernels for the topic model.

The sampler consumes pre-generated uniform variates instead of drawing
inside the loop, so a fit is bitwise-identical whether the JIT-compiled or
the plain-Python variant executes (same statements, same IEEE-754 order).
"""
from __future__ import annotations

import numpy as np


def _init_assignments(doc_ids, word_ids, z, n_dk, n_wk, n_k, uniforms):
    K = n_k.shape[0]
    for t in range(doc_ids.shape[0]):
        k = int(uniforms[t] * K)
        if k >= K:
            k = K - 1
        z[t] = k
        n_dk[doc_ids[t], k] += 1
        n_wk[word_ids[t], k] += 1
        n_k[k] += 1


def _gibbs_sweep(doc_ids, word_ids, z, n_dk, n_wk, n_k, alpha, beta, uniforms):
    n_tokens = doc_ids.shape[0]
    K = n_k.shape[0]
    V = n_wk.shape[0]
    vbeta = V * beta
    probs = np.empty(K, dtype=np.float64)
    for t in range(n_tokens):
        d = doc_ids[t]
        w = word_ids[t]
        k_old = z[t]
        n_dk[d, k_old] -= 1
        n_wk[w, k_old] -= 1
        n_k[k_old] -= 1
        total = 0.0
        for k in range(K):
            p = (n_dk[d, k] + alpha) * (n_wk[w, k] + beta) / (n_k[k] + vbeta)
            probs[k] = p
            total += p
        u = uniforms[t] * total
        acc = 0.0
        k_new = K - 1
        for k in range(K):
            acc += probs[k]
            if acc >= u:
                k_new = k
                break
        z[t] = k_new
        n_dk[d, k_new] += 1
        n_wk[w, k_new] += 1
        n_k[k_new] += 1


try:  # pragma: no cover - exercised indirectly by the fit tests
    from numba import njit

    init_assignments = njit(cache=True)(_init_assignments)
    gibbs_sweep = njit(cache=True)(_gibbs_sweep)
    JIT_ENABLED = True
except ImportError:  # pragma: no cover
    init_assignments = _init_assignments
    gibbs_sweep = _gibbs_sweep
    JIT_ENABLED = False
