"""Straight-line reference implementations used to cross-check the library."""

import math


def expected_utility(U, probs, y):
    total = 0.0
    for y2, p in enumerate(probs):
        total += U[y][y2] * p
    return total


def argmax_lowest(values):
    best = 0
    for i, v in enumerate(values):
        if v > values[best]:
            best = i
    return best


def trial_regrets(U, p_human, refs):
    """Regret_n and the MAP regret for given references, by explicit loops."""
    size = len(p_human)
    u_h = [expected_utility(U, p_human, y) for y in range(size)]
    y_star = argmax_lowest(u_h)

    distinct = sorted(set(refs))
    mc = []
    for y in distinct:
        mc.append(sum(U[y][r] for r in refs) / len(refs))
    y_hat = distinct[argmax_lowest(mc)]

    counts = [0] * size
    for r in refs:
        counts[r] += 1
    map_hat = argmax_lowest(counts)
    map_star = argmax_lowest(list(p_human))
    return {
        "regret_n": u_h[y_star] - u_h[y_hat],
        "regret_map": p_human[map_star] - p_human[map_hat],
        "y_hat": y_hat,
        "map_hat": map_hat,
    }


def bound_formula(name, n, D, d, delta, wd=0.0, wd_tt=0.0, alpha_err=0.0):
    """Published bound forms written out independently."""
    L = math.log(1.0 / delta)
    d_term = 36.0 / n * math.sqrt(d * math.log(d))
    if name == "lemma_heart":
        return 3 * math.sqrt(L / n) + d_term
    if name == "lemma_heart_smalld":
        return 3 * math.sqrt(L / n) + 72 * math.sqrt(d) / n
    if name == "lemma_kernel":
        return 3 * math.sqrt(L / n) + 2 / math.sqrt(n)
    if name == "lemma_wd":
        return 2 * wd
    if name == "lemma_black":
        return 3 * math.sqrt(L / D)
    if name == "theorem_bound3":
        return 3 * math.sqrt(L / n) + d_term + 2 * wd
    if name == "theorem_bound":
        return 4 * math.sqrt(L / n) + 4 * math.sqrt(L / D) + d_term
    if name == "corollary_utility":
        return 4 * math.sqrt(L / D) + 4 * math.sqrt(L / n) + 2 * d * alpha_err
    if name == "corollary_temperature":
        return 4 * math.sqrt(L / n) + 4 * math.sqrt(L / D) + d_term + wd_tt
    if name == "map_bound_n":
        return 6 * math.sqrt(L / n) + 2 * wd
    if name == "map_bound_nd":
        return 8 * math.sqrt(L / n) + 8 * math.sqrt(L / D)
    if name == "corollary_mbr":
        return 4 * math.sqrt(L / n) + 4 * math.sqrt(L / D) + d_term + delta
    raise KeyError(name)
