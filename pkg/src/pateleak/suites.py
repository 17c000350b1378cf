"""Named property suites run by ``pateleak verify``.

Each suite returns a :class:`SuiteResult`. ``checks`` maps a short check
name to a pass flag and ``details`` holds the numbers behind it.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import channels as ch
from .laplace import leakage_at_vmax, win_prob_uniform_closed
from .majorization import (EQUAL, P_MAJORIZES_Q, Q_MAJORIZES_P, compare,
                           enumerate_histograms, extremal_histograms)
from .montecarlo import mc_membership_adversary, mc_win_probability
from .noise import gaussian_model, laplace_model
from .rnm import entrywise_leakage, win_probability


@dataclass
class SuiteResult:
    name: str
    checks: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())


def schur_suite(total=6, m=3, noises=None, slack=1e-9):
    """Leakage reverses majorization over all integer histograms with a
    fixed total, and the extremal histograms attain the max/min."""
    noises = noises or {"laplace(0.1)": laplace_model(0.1),
                        "gaussian(5)": gaussian_model(5.0)}
    hists = enumerate_histograms(total, m)
    res = SuiteResult("schur", details={"n_histograms": len(hists)})
    for label, noise in noises.items():
        leak = {h: entrywise_leakage(h, noise).value_nats for h in hists}
        violations, pairs = 0, 0
        for a_i, a in enumerate(hists):
            for b in hists[a_i + 1:]:
                rel = compare(a, b).relation
                if rel == P_MAJORIZES_Q:
                    pairs += 1
                    violations += leak[a] > leak[b] + slack
                elif rel == Q_MAJORIZES_P:
                    pairs += 1
                    violations += leak[b] > leak[a] + slack
                elif rel == EQUAL:
                    violations += abs(leak[a] - leak[b]) > slack
        hi, lo = max(leak.values()), min(leak.values())
        v_max, v_min = extremal_histograms(total, m)
        max_ok = True
        if total % m == 0:
            v_max = tuple(int(x) for x in v_max)
            max_ok = leak[v_max] >= hi - slack
        min_ok = all(leak[tuple(int(x) for x in h)] <= lo + slack for h in v_min)
        res.checks[f"{label}: order"] = violations == 0
        res.checks[f"{label}: max at v_max"] = max_ok
        res.checks[f"{label}: min at concentrated"] = min_ok
        res.details[label] = {"comparable_pairs": pairs, "violations": int(violations),
                              "max": hi, "min": lo}
    return res


def composition_suite(n=1000, seed=7, slack=1e-12):
    """Composition and data-processing inequalities on random channels."""
    rng = np.random.default_rng(seed)
    comp_bad = dp_bad = comp_strict = dp_strict = 0
    for _ in range(n):
        nx = int(rng.integers(2, 7))
        c1 = ch.random_channel(nx, int(rng.integers(2, 7)), rng)
        c2 = ch.random_channel(nx, int(rng.integers(2, 7)), rng)
        joint = ch.pcml(ch.product_channel(c1, c2))
        bound = ch.pcml(c1) + ch.pcml(c2)
        comp_bad += joint > bound + slack
        comp_strict += joint < bound - 1e-9

        n_y2 = int(rng.integers(2, 7))
        kernel = rng.random((len(c1.y_alphabet), n_y2))
        kernel /= kernel.sum(axis=1, keepdims=True)
        after = ch.pcml(ch.postprocess(c1, kernel))
        dp_bound = min(ch.pcml(c1), ch.pcml(ch.kernel_as_channel(c1, kernel)))
        dp_bad += after > dp_bound + slack
        dp_strict += after < dp_bound - 1e-9
    res = SuiteResult("composition")
    res.checks["composition holds"] = comp_bad == 0
    res.checks["composition strict somewhere"] = comp_strict > 0
    res.checks["data processing holds"] = dp_bad == 0
    res.checks["data processing strict somewhere"] = dp_strict > 0
    res.details = {"pairs": n, "composition_violations": int(comp_bad),
                   "composition_strict": int(comp_strict),
                   "dp_violations": int(dp_bad), "dp_strict": int(dp_strict)}
    return res


def adversary_suite(n=200, seed=11, n_random_u=20, slack=1e-12):
    """Shattering adversary attains exp(leakage); random ones never beat it."""
    rng = np.random.default_rng(seed)
    worst_attain, exceed = 0.0, 0
    for _ in range(n):
        c = ch.random_channel(int(rng.integers(2, 7)), int(rng.integers(2, 7)), rng)
        target = math.exp(ch.pcml(c))
        prior, u = ch.shattering_adversary(c)
        worst_attain = max(worst_attain, abs(ch.map_adversary_gain(c, prior, u) - target))
        nx = len(c.x_support)
        for _ in range(n_random_u):
            prior = rng.random(nx) + 1e-3
            prior /= prior.sum()
            u = rng.random((nx, int(rng.integers(1, 7))))
            u /= u.sum(axis=1, keepdims=True)
            exceed += ch.map_adversary_gain(c, prior, u) > target + slack
    res = SuiteResult("adversary")
    res.checks["shattering attains"] = worst_attain <= slack
    res.checks["no adversary exceeds"] = exceed == 0
    res.details = {"channels": n, "max_attain_gap": worst_attain,
                   "exceedances": int(exceed)}
    return res


def mc_suite(samples=1_000_000, seed=3, n_sigma=3.0):
    """Quadrature win probabilities and leakage against simulation."""
    lap = laplace_model(0.1)
    cases = [((1, 0), 0, lap), ((6, 3, 2, 1), 0, lap), ((6, 3, 2, 1), 3, lap),
             ((2, 2, 2), 1, lap), ((4, 1, 0), 2, gaussian_model(2.0))]
    res = SuiteResult("mc")
    for k, (v, j, noise) in enumerate(cases):
        ref = win_probability(v, j, noise)
        est = mc_win_probability(v, j, noise, samples, seed + k)
        res.checks[f"win {v}[{j}]"] = est.within(ref, n_sigma)
        res.details[f"win {v}[{j}]"] = {"reference": ref, "estimate": est.mean,
                                        "std_error": est.std_error}
    for k, v_minus in enumerate([(4, 3, 2, 1), (0, 0)]):
        leak = entrywise_leakage(v_minus, lap).value_nats
        est = mc_membership_adversary(v_minus, lap, samples, seed + 100 + k)
        log_ratio = math.log(est.mean)
        bound = leak + n_sigma * est.std_error / est.mean
        res.checks[f"adversary {v_minus}"] = log_ratio <= bound
        res.details[f"adversary {v_minus}"] = {"leakage": leak, "log_ratio": log_ratio,
                                               "std_error": est.std_error / est.mean}
    return res


def bounds_suite(gammas=(0.05, 0.1, 0.5, 1.0, 2.0), m_max=256):
    """Uniform-histogram closed form: below gamma, nondecreasing in m, and
    equal to quadrature for small m."""
    res = SuiteResult("bounds")
    for g in gammas:
        vals = [leakage_at_vmax(m, g) for m in range(2, m_max + 1)]
        res.checks[f"gamma={g}: <= gamma"] = max(vals) <= g + 1e-10
        res.checks[f"gamma={g}: nondecreasing"] = all(
            b >= a for a, b in zip(vals, vals[1:]))
    gap = 0.0
    for g in gammas[:4]:
        noise = laplace_model(g)
        for m in range(2, 11):
            quad = math.exp(entrywise_leakage([0] * m, noise).value_nats)
            gap = max(gap, abs(quad - m * win_prob_uniform_closed(m, g)))
    res.checks["closed form = quadrature"] = gap <= 1e-8
    res.details["max_gap"] = gap
    return res


SUITES = {
    "schur": schur_suite,
    "composition": composition_suite,
    "adversary": adversary_suite,
    "mc": mc_suite,
    "bounds": bounds_suite,
}
