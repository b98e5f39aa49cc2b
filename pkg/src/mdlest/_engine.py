"""Single-source dense Gibbs sweep shared by the interpreted and jitted engines.

This module must import without numba; the compiled twin is created in
_kernels from the very same function object. Keep the arithmetic order
stable: the two engines are required to produce bit-identical trajectories,
so every floating-point operation here happens in a fixed sequence.
"""

import math

import numpy as np


def sweep_dense(symbols, codes, table, totals, powers, nlogn, q, levels,
                is_identity, jt, colsq, r, like_scale, s_beta,
                order, uniforms, sums, best_symbols, record, probs_out, chosen_out):
    """One Gibbs sweep visiting all coordinates in the given order.

    For every coordinate the coding-length change of each candidate level is
    evaluated by applying the count moves and undoing them (exact integer
    arithmetic), the residual change comes from the cached linear response,
    and one level is drawn from the Boltzmann conditional with max-subtracted
    weights. `sums` holds [S, T, sumsq, best_var]; it, the count arrays, the
    residual, `symbols`/`codes`, and `best_symbols` are updated in place.
    When `record` is true, row t of probs_out receives the conditional
    distribution used at visit t and chosen_out[t] the drawn level.
    """
    n = symbols.shape[0]
    n_levels = levels.shape[0]
    m = r.shape[0]
    dbits = np.empty(n_levels, dtype=np.float64)
    wbuf = np.empty(n_levels, dtype=np.float64)
    for t in range(n):
        i = order[t]
        a_old = symbols[i]
        v_old = levels[a_old]
        if is_identity:
            adot = r[i]
            bsq = 1.0
        else:
            adot = 0.0
            for mm in range(m):
                adot += jt[i, mm] * r[mm]
            bsq = colsq[i]
        c0 = codes[i]
        for k in range(n_levels):
            if k == a_old:
                d_ent = 0.0
            else:
                d_s = 0.0
                d_t = 0.0
                c = table[c0, a_old]
                table[c0, a_old] = c - 1
                d_s += nlogn[c - 1] - nlogn[c]
                c = table[c0, k]
                table[c0, k] = c + 1
                d_s += nlogn[c + 1] - nlogn[c]
                shift = k - a_old
                for u in range(q):
                    j = i + u + 1
                    if j >= n:
                        j -= n
                    cj = codes[j]
                    cj2 = cj + shift * powers[u]
                    b = symbols[j]
                    c = table[cj, b]
                    table[cj, b] = c - 1
                    d_s += nlogn[c - 1] - nlogn[c]
                    c = totals[cj]
                    totals[cj] = c - 1
                    d_t += nlogn[c - 1] - nlogn[c]
                    c = table[cj2, b]
                    table[cj2, b] = c + 1
                    d_s += nlogn[c + 1] - nlogn[c]
                    c = totals[cj2]
                    totals[cj2] = c + 1
                    d_t += nlogn[c + 1] - nlogn[c]
                for u in range(q):
                    j = i + u + 1
                    if j >= n:
                        j -= n
                    cj = codes[j]
                    cj2 = cj + shift * powers[u]
                    b = symbols[j]
                    table[cj, b] += 1
                    totals[cj] += 1
                    table[cj2, b] -= 1
                    totals[cj2] -= 1
                table[c0, a_old] += 1
                table[c0, k] -= 1
                d_ent = d_t - d_s
            d = levels[k] - v_old
            dres = d * (d * bsq - 2.0 * adot)
            dbits[k] = d_ent + dres * like_scale
        mn = dbits[0]
        k_min = 0
        for k in range(1, n_levels):
            if dbits[k] < mn:
                mn = dbits[k]
                k_min = k
        tot = 0.0
        for k in range(n_levels):
            w = math.exp(-s_beta * (dbits[k] - mn))
            wbuf[k] = w
            tot += w
        if record:
            for k in range(n_levels):
                probs_out[t, k] = wbuf[k] / tot
        uu = uniforms[t] * tot
        chosen = k_min
        acc = 0.0
        for k in range(n_levels):
            acc += wbuf[k]
            if uu < acc:
                chosen = k
                break
        if record:
            chosen_out[t] = chosen
        if chosen != a_old:
            d_s = 0.0
            d_t = 0.0
            c = table[c0, a_old]
            table[c0, a_old] = c - 1
            d_s += nlogn[c - 1] - nlogn[c]
            c = table[c0, chosen]
            table[c0, chosen] = c + 1
            d_s += nlogn[c + 1] - nlogn[c]
            shift = chosen - a_old
            for u in range(q):
                j = i + u + 1
                if j >= n:
                    j -= n
                cj = codes[j]
                cj2 = cj + shift * powers[u]
                b = symbols[j]
                c = table[cj, b]
                table[cj, b] = c - 1
                d_s += nlogn[c - 1] - nlogn[c]
                c = totals[cj]
                totals[cj] = c - 1
                d_t += nlogn[c - 1] - nlogn[c]
                c = table[cj2, b]
                table[cj2, b] = c + 1
                d_s += nlogn[c + 1] - nlogn[c]
                c = totals[cj2]
                totals[cj2] = c + 1
                d_t += nlogn[c + 1] - nlogn[c]
                codes[j] = cj2
            symbols[i] = chosen
            d = levels[chosen] - v_old
            dres = d * (d * bsq - 2.0 * adot)
            if is_identity:
                r[i] -= d
            else:
                for mm in range(m):
                    r[mm] -= d * jt[i, mm]
            sums[0] += d_s
            sums[1] += d_t
            sums[2] += dres
        var = (sums[1] - sums[0]) + sums[2] * like_scale
        if var < sums[3]:
            sums[3] = var
            for jj in range(n):
                best_symbols[jj] = symbols[jj]
