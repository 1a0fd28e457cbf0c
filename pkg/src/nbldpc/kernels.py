"""Compiled inner loops of the EMS / Min-Max decoder.

Messages are ``(penalties, indices, length)`` triples stored in fixed-width
rows of ``n_m`` slots; only the first ``length`` slots are meaningful.  All
scores saturate at ``cap`` (``inf`` in floating mode, ``2^Q - 1`` when
quantized).  Every function here is pure apart from writing its ``out_*``
arguments.
"""

from __future__ import annotations

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True)
def _key_less(sa, ga, sb, gb):
    return sa < sb or (sa == sb and ga < gb)


@njit(cache=True)
def sort_pairs(pen, idx, length):
    """In-place insertion sort of the first ``length`` slots by (penalty, index)."""
    for i in range(1, length):
        p = pen[i]
        g = idx[i]
        j = i - 1
        while j >= 0 and _key_less(p, g, pen[j], idx[j]):
            pen[j + 1] = pen[j]
            idx[j + 1] = idx[j]
            j -= 1
        pen[j + 1] = p
        idx[j + 1] = g


@njit(cache=True)
def map_indices(pen, idx, length, table_row, out_pen, out_idx):
    """Relabel indices through ``table_row`` (a row of the mul/div table) and re-sort ties."""
    for k in range(length):
        out_pen[k] = pen[k]
        out_idx[k] = table_row[idx[k]]
    sort_pairs(out_pen, out_idx, length)


@njit(cache=True)
def _score(pa, pb, use_max, cap):
    s = max(pa, pb) if use_max else pa + pb
    return cap if s > cap else s


@njit(cache=True)
def ecn_exhaustive(a_pen, a_idx, la, b_pen, b_idx, lb, use_max, cap, q, n_m, out_pen, out_idx):
    """Reference ECN: score every stored pair, keep the best per symbol, then the ``n_m`` best symbols."""
    best = np.full(q, INF)
    for i in range(la):
        for j in range(lb):
            g = a_idx[i] ^ b_idx[j]
            s = _score(a_pen[i], b_pen[j], use_max, cap)
            if s < best[g]:
                best[g] = s
    count = 0
    order = np.argsort(best, kind="mergesort")  # stable: ties stay in index order
    for k in range(q):
        g = order[k]
        if best[g] == INF or count == n_m:
            break
        out_pen[count] = best[g]
        out_idx[count] = g
        count += 1
    base = out_pen[0]
    for k in range(count):
        out_pen[k] -= base
    sort_pairs(out_pen, out_idx, count)  # rounding in the subtraction can create ties
    return count


@njit(cache=True)
def ecn_bubble(a_pen, a_idx, la, b_pen, b_idx, lb, use_max, cap, q, n_m, ls_cn, out_pen, out_idx):
    """Bubble-check ECN with at most ``ls_cn`` live candidates.

    Rows of the (a x b) score matrix are processed in bands of ``ls_cn``.
    Within a band the live set holds one candidate per row (the head of that
    row's unexplored columns); popping the minimum yields the band's pairs in
    nondecreasing score order.  Popped pairs feed an ``n_m``-slot output
    register keyed by symbol.  Once the register is full, a band stops as soon
    as its next score exceeds the register's worst score, and a band whose
    first candidate already exceeds it is skipped.  The register therefore
    ends up holding exactly the ``n_m`` best per-symbol minima, the same set
    the exhaustive combine produces.
    """
    slot_of = np.full(q, -1, dtype=np.int64)
    reg_pen = np.empty(n_m)
    reg_idx = np.empty(n_m, dtype=np.int64)
    size = 0
    worst_k = 0
    live_row = np.empty(ls_cn, dtype=np.int64)
    live_col = np.empty(ls_cn, dtype=np.int64)

    r0 = 0
    while r0 < la:
        r1 = min(r0 + ls_cn, la)
        if size == n_m:
            worst = reg_pen[0]
            for k in range(1, size):
                if reg_pen[k] > worst:
                    worst = reg_pen[k]
            if _score(a_pen[r0], b_pen[0], use_max, cap) > worst:
                break  # later bands start even higher (a is sorted)
        n_live = 0
        for r in range(r0, r1):
            live_row[n_live] = r
            live_col[n_live] = 0
            n_live += 1
        while n_live > 0:
            # pop the live minimum
            best_k = 0
            best_s = _score(a_pen[live_row[0]], b_pen[live_col[0]], use_max, cap)
            for k in range(1, n_live):
                s = _score(a_pen[live_row[k]], b_pen[live_col[k]], use_max, cap)
                if s < best_s:
                    best_s = s
                    best_k = k
            r = live_row[best_k]
            c = live_col[best_k]
            g = a_idx[r] ^ b_idx[c]
            if size == n_m:
                worst_k = 0
                for k in range(1, size):
                    if _key_less(reg_pen[worst_k], reg_idx[worst_k], reg_pen[k], reg_idx[k]):
                        worst_k = k
                if best_s > reg_pen[worst_k]:
                    break
            # offer (g, best_s) to the register
            slot = slot_of[g]
            if slot >= 0:
                if best_s < reg_pen[slot]:
                    reg_pen[slot] = best_s
            elif size < n_m:
                reg_pen[size] = best_s
                reg_idx[size] = g
                slot_of[g] = size
                size += 1
            elif _key_less(best_s, g, reg_pen[worst_k], reg_idx[worst_k]):
                slot_of[reg_idx[worst_k]] = -1
                reg_pen[worst_k] = best_s
                reg_idx[worst_k] = g
                slot_of[g] = worst_k
            # bubble: advance this row or retire it
            if c + 1 < lb:
                live_col[best_k] = c + 1
            else:
                n_live -= 1
                live_row[best_k] = live_row[n_live]
                live_col[best_k] = live_col[n_live]
        r0 = r1

    for k in range(size):
        out_pen[k] = reg_pen[k]
        out_idx[k] = reg_idx[k]
    sort_pairs(out_pen, out_idx, size)
    base = out_pen[0]
    for k in range(size):
        out_pen[k] -= base
    sort_pairs(out_pen, out_idx, size)
    return size


@njit(cache=True)
def ecn(a_pen, a_idx, la, b_pen, b_idx, lb, use_max, cap, q, n_m, ls_cn, out_pen, out_idx):
    if ls_cn <= 0:
        return ecn_exhaustive(a_pen, a_idx, la, b_pen, b_idx, lb, use_max, cap, q, n_m, out_pen, out_idx)
    return ecn_bubble(a_pen, a_idx, la, b_pen, b_idx, lb, use_max, cap, q, n_m, ls_cn, out_pen, out_idx)


@njit(cache=True)
def cn_process(in_pen, in_idx, in_len, d, use_max, cap, q, n_m, ls_cn, out_pen, out_idx, out_len):
    """Forward / backward / merge recursion over ``d`` incoming messages (rows 0..d-1)."""
    if d == 1:
        out_pen[0, 0] = 0.0
        out_idx[0, 0] = 0
        out_len[0] = 1
        return
    fw_pen = np.empty((d, n_m))
    fw_idx = np.empty((d, n_m), dtype=np.int64)
    fw_len = np.empty(d, dtype=np.int64)
    bw_pen = np.empty((d, n_m))
    bw_idx = np.empty((d, n_m), dtype=np.int64)
    bw_len = np.empty(d, dtype=np.int64)

    fw_pen[0, :] = in_pen[0, :]
    fw_idx[0, :] = in_idx[0, :]
    fw_len[0] = in_len[0]
    for k in range(1, d - 1):
        fw_len[k] = ecn(fw_pen[k - 1], fw_idx[k - 1], fw_len[k - 1], in_pen[k], in_idx[k], in_len[k],
                        use_max, cap, q, n_m, ls_cn, fw_pen[k], fw_idx[k])
    bw_pen[d - 1, :] = in_pen[d - 1, :]
    bw_idx[d - 1, :] = in_idx[d - 1, :]
    bw_len[d - 1] = in_len[d - 1]
    for k in range(d - 2, 0, -1):
        bw_len[k] = ecn(bw_pen[k + 1], bw_idx[k + 1], bw_len[k + 1], in_pen[k], in_idx[k], in_len[k],
                        use_max, cap, q, n_m, ls_cn, bw_pen[k], bw_idx[k])

    out_pen[0, :] = bw_pen[1, :]
    out_idx[0, :] = bw_idx[1, :]
    out_len[0] = bw_len[1]
    out_pen[d - 1, :] = fw_pen[d - 2, :]
    out_idx[d - 1, :] = fw_idx[d - 2, :]
    out_len[d - 1] = fw_len[d - 2]
    for j in range(1, d - 1):
        out_len[j] = ecn(fw_pen[j - 1], fw_idx[j - 1], fw_len[j - 1], bw_pen[j + 1], bw_idx[j + 1], bw_len[j + 1],
                         use_max, cap, q, n_m, ls_cn, out_pen[j], out_idx[j])


@njit(cache=True)
def _accumulate(score, msg_pen, msg_idx, length, offset, cap, present, union):
    """score[beta] += message value at beta (compensation value where absent), saturating."""
    q = score.shape[0]
    comp = msg_pen[length - 1] + offset
    if comp > cap:
        comp = cap
    for b in range(q):
        present[b] = False
    for k in range(length):
        present[msg_idx[k]] = True
        union[msg_idx[k]] = True
    for k in range(length):
        score[msg_idx[k]] += msg_pen[k]
    for b in range(q):
        if not present[b]:
            score[b] += comp
        if score[b] > cap:
            score[b] = cap


@njit(cache=True)
def combine_scores(prior_pen, prior_idx, prior_len, msg_pen, msg_idx, msg_len, skip, offset, cap, q, score, union):
    """Dense score over GF(q): prior plus every message row except ``skip``.

    Absent symbols take each message's compensation value; ``union`` flags
    symbols stored in at least one input.
    """
    present = np.zeros(q, dtype=np.bool_)
    for b in range(q):
        score[b] = 0.0
        union[b] = False
    _accumulate(score, prior_pen, prior_idx, prior_len, offset, cap, present, union)
    for m in range(msg_len.shape[0]):
        if m == skip:
            continue
        _accumulate(score, msg_pen[m], msg_idx[m], msg_len[m], offset, cap, present, union)


@njit(cache=True)
def vn_update(prior_pen, prior_idx, prior_len, msg_pen, msg_idx, msg_len, skip,
              offset, cap, q, n_m, ls_vn, out_pen, out_idx):
    """Extrinsic v-c message with skimming.

    Only symbols among the first ``ls_vn`` entries of some input are
    candidates; if they number fewer than ``n_m`` the shortfall is filled with
    the best remaining stored symbols.
    """
    score = np.empty(q)
    union = np.empty(q, dtype=np.bool_)
    combine_scores(prior_pen, prior_idx, prior_len, msg_pen, msg_idx, msg_len, skip, offset, cap, q, score, union)
    cand = np.zeros(q, dtype=np.bool_)
    for k in range(min(ls_vn, prior_len)):
        cand[prior_idx[k]] = True
    for m in range(msg_len.shape[0]):
        if m == skip:
            continue
        for k in range(min(ls_vn, msg_len[m])):
            cand[msg_idx[m, k]] = True

    order = np.argsort(score, kind="mergesort")
    count = 0
    for k in range(q):
        b = order[k]
        if cand[b] and count < n_m:
            out_pen[count] = score[b]
            out_idx[count] = b
            count += 1
    if count < n_m:
        for k in range(q):
            b = order[k]
            if union[b] and not cand[b] and count < n_m:
                out_pen[count] = score[b]
                out_idx[count] = b
                count += 1
        sort_pairs(out_pen, out_idx, count)
    base = out_pen[0]
    for k in range(count):
        out_pen[k] -= base
    sort_pairs(out_pen, out_idx, count)  # rounding in the subtraction can create ties
    return count


@njit(cache=True)
def decide(prior_pen, prior_idx, prior_len, msg_pen, msg_idx, msg_len, offset, cap, q, score):
    """Posterior over all incoming messages; returns argmin over stored symbols (ties: lower index)."""
    union = np.empty(q, dtype=np.bool_)
    combine_scores(prior_pen, prior_idx, prior_len, msg_pen, msg_idx, msg_len, -1, offset, cap, q, score, union)
    best = -1
    for b in range(q):
        if union[b] and (best < 0 or score[b] < score[best]):
            best = b
    for b in range(q):
        if not union[b]:
            score[b] = INF
    return best


@njit(cache=True)
def decode_kernel(row_ptr, edge_col, edge_coef, col_ptr, col_edges, mul, div,
                  prior_pen, prior_idx, use_max, cap, q, n_m, ls_cn, ls_vn, offset,
                  max_iter, early_stop, decisions):
    """Run the row-serial schedule; returns (iterations run, converged)."""
    m = row_ptr.shape[0] - 1
    n = col_ptr.shape[0] - 1
    n_edges = edge_col.shape[0]
    vc_pen = np.empty((n_edges, n_m))
    vc_idx = np.empty((n_edges, n_m), dtype=np.int64)
    vc_len = np.empty(n_edges, dtype=np.int64)
    cv_pen = np.empty((n_edges, n_m))
    cv_idx = np.empty((n_edges, n_m), dtype=np.int64)
    cv_len = np.empty(n_edges, dtype=np.int64)
    prior_len = prior_pen.shape[1]

    max_dc = 1
    for i in range(m):
        max_dc = max(max_dc, row_ptr[i + 1] - row_ptr[i])
    max_dv = 1
    for j in range(n):
        max_dv = max(max_dv, col_ptr[j + 1] - col_ptr[j])
    in_pen = np.empty((max_dc, n_m))
    in_idx = np.empty((max_dc, n_m), dtype=np.int64)
    in_len = np.empty(max_dc, dtype=np.int64)
    out_pen = np.empty((max_dc, n_m))
    out_idx = np.empty((max_dc, n_m), dtype=np.int64)
    out_len = np.empty(max_dc, dtype=np.int64)
    vin_pen = np.empty((max_dv, n_m))
    vin_idx = np.empty((max_dv, n_m), dtype=np.int64)
    vin_len = np.empty(max_dv, dtype=np.int64)
    tmp_pen = np.empty(n_m)
    tmp_idx = np.empty(n_m, dtype=np.int64)
    score = np.empty(q)

    # first iteration: variable nodes by-pass the priors
    for e in range(n_edges):
        j = edge_col[e]
        map_indices(prior_pen[j], prior_idx[j], prior_len, mul[edge_coef[e]], vc_pen[e], vc_idx[e])
        vc_len[e] = prior_len

    iters = 0
    converged = False
    for it in range(max_iter):
        iters = it + 1
        for i in range(m):
            lo = row_ptr[i]
            d = row_ptr[i + 1] - lo
            for k in range(d):
                in_pen[k, :] = vc_pen[lo + k, :]
                in_idx[k, :] = vc_idx[lo + k, :]
                in_len[k] = vc_len[lo + k]
            cn_process(in_pen, in_idx, in_len, d, use_max, cap, q, n_m, ls_cn, out_pen, out_idx, out_len)
            for k in range(d):
                e = lo + k
                map_indices(out_pen[k], out_idx[k], out_len[k], div[:, edge_coef[e]], cv_pen[e], cv_idx[e])
                cv_len[e] = out_len[k]

        for j in range(n):
            lo = col_ptr[j]
            dv = col_ptr[j + 1] - lo
            for k in range(dv):
                e = col_edges[lo + k]
                vin_pen[k, :] = cv_pen[e, :]
                vin_idx[k, :] = cv_idx[e, :]
                vin_len[k] = cv_len[e]
            for k in range(dv):
                e = col_edges[lo + k]
                cnt = vn_update(prior_pen[j], prior_idx[j], prior_len, vin_pen[:dv], vin_idx[:dv], vin_len[:dv], k,
                                offset, cap, q, n_m, ls_vn, tmp_pen, tmp_idx)
                map_indices(tmp_pen, tmp_idx, cnt, mul[edge_coef[e]], vc_pen[e], vc_idx[e])
                vc_len[e] = cnt
            decisions[j] = decide(prior_pen[j], prior_idx[j], prior_len, vin_pen[:dv], vin_idx[:dv], vin_len[:dv],
                                  offset, cap, q, score)

        converged = True
        for i in range(m):
            s = 0
            for e in range(row_ptr[i], row_ptr[i + 1]):
                s ^= mul[edge_coef[e], decisions[edge_col[e]]]
            if s != 0:
                converged = False
                break
        if early_stop and converged:
            break
    return iters, converged
