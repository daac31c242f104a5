"""Experiment registry: each id pairs one bound with one ground-truth oracle.

A runner turns validated parameters into independent row tasks; the
driver executes them (possibly concurrently), times them, and sorts the
rows deterministically.  Monte Carlo rows derive their seed from
(master seed, experiment id hash, parameter snapshot hash), so results
do not depend on execution order or parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from time import perf_counter
from typing import Callable, Optional

from . import coupling as cp
from . import expander as ex
from . import graphs as gr
from . import growth as gw
from . import polynomials as pl
from .distributions import (
    ExactDistribution,
    all_equal_coins,
    fixed_ones_uniform,
    iid_fair_coins,
    is_exact,
    load_distribution,
    product_bernoulli,
)
from .errors import ResourceLimitError
from .reporting import (
    PROV_EXACT,
    PROV_FLOAT,
    PROV_MC,
    ReportRow,
    params_json,
    sort_rows,
)
from .rng import DEFAULT_SEED, derive_seed, stream_hash

ENUM_BUDGET = 10**6
FLOAT_TOL = 1e-9


@dataclass(frozen=True)
class ParamSpec:
    name: str
    kind: str  # "int" | "rational" | "str" | "choice"
    help: str
    required: bool = False
    default: object = None
    choices: tuple = ()
    check: Optional[Callable[[object], Optional[str]]] = None


@dataclass
class RunConfig:
    command: str
    params: dict
    seed: int = DEFAULT_SEED
    trials: int = 10000
    output: str = "-"
    fmt: str = "csv"
    parallelism: int = 1
    budget: int = ENUM_BUDGET
    timing: bool = False


@dataclass
class RunContext:
    seed: int
    trials: int
    budget: int


@dataclass(frozen=True)
class RowTask:
    params: dict
    thunk: Callable[[], dict]


@dataclass(frozen=True)
class Experiment:
    name: str
    pairing: str
    params: tuple[ParamSpec, ...]
    runner: Callable[[dict, RunContext], list[RowTask]]


def _range_check(desc: str, ok: Callable[[object], bool]) -> Callable:
    def check(v):
        return None if ok(v) else desc

    return check


def parse_param(spec: ParamSpec, raw: str):
    try:
        if spec.kind == "int":
            value: object = int(raw)
        elif spec.kind == "rational":
            value = Fraction(raw)
        elif spec.kind == "choice":
            if raw not in spec.choices:
                raise ValueError(f"must be one of {', '.join(spec.choices)}")
            value = raw
        else:
            value = raw
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"--{spec.name}: cannot parse {raw!r} as {spec.kind}: {exc}") from exc
    if spec.check is not None:
        problem = spec.check(value)
        if problem:
            raise ValueError(f"--{spec.name}: {problem}, got {raw}")
    return value


# ---------------------------------------------------------------------------
# shared helpers

def _clamp(value):
    if value is None:
        return None
    if value < 0:
        return 0
    if value > 1:
        return Fraction(1) if is_exact(value) else 1.0
    return value


def _row(
    bound,
    bound_prov: str,
    oracle,
    oracle_ci: float,
    oracle_prov: str,
    verdict: str,
    clamp: bool = True,
) -> dict:
    return {
        "bound": _clamp(bound) if clamp else bound,
        "bound_provenance": bound_prov,
        "oracle": _clamp(oracle) if clamp else oracle,
        "oracle_ci": oracle_ci,
        "oracle_provenance": oracle_prov,
        "verdict": verdict,
    }


def _dominance(oracle, bound) -> str:
    exact = is_exact(oracle) and is_exact(bound)
    tol = 0 if exact else FLOAT_TOL
    return "dominates" if oracle <= bound + tol else "violated"


def _prov(value) -> str:
    return PROV_EXACT if is_exact(value) else PROV_FLOAT


def _row_seed(ctx: RunContext, experiment: str, params: dict) -> int:
    return derive_seed(ctx.seed, stream_hash(experiment), stream_hash(params_json(params)))


def parse_distribution_spec(spec: str, budget: int = ENUM_BUDGET) -> ExactDistribution:
    """Builtin distribution specs ("coins:n=4", "bernoulli:n=6,p=1/3",
    "allequal:n=4,p=1/2", "fixedones:n=5,k=2", "perm:N=3",
    "walk:lambda=1/4,n=4,mu=1/2,steps=6") or a path to a JSON file."""
    if spec.endswith(".json"):
        return load_distribution(spec)
    kind, _, rest = spec.partition(":")
    kv = {}
    if rest:
        for item in rest.split(","):
            key, _, val = item.partition("=")
            if not val:
                raise ValueError(f"malformed distribution spec item {item!r}")
            kv[key] = val
    try:
        if kind == "coins":
            return iid_fair_coins(int(kv["n"]))
        if kind == "bernoulli":
            return product_bernoulli(int(kv["n"]), Fraction(kv["p"]))
        if kind == "allequal":
            return all_equal_coins(int(kv["n"]), Fraction(kv["p"]))
        if kind == "fixedones":
            return fixed_ones_uniform(int(kv["n"]), int(kv["k"]))
        if kind == "perm":
            return pl.permutation_indicator_distribution(int(kv["N"]))
        if kind == "walk":
            lam = Fraction(kv["lambda"])
            n = int(kv["n"])
            mu = Fraction(kv["mu"])
            steps = int(kv["steps"])
            walk = _jn_walk_spec(lam, n, mu, steps)
            return ex.walk_indicator_distribution(walk, budget)
    except KeyError as exc:
        raise ValueError(f"distribution spec {spec!r} is missing key {exc}") from exc
    raise ValueError(f"unknown distribution spec {spec!r}")


def parse_pattern_spec(spec: str) -> gr.Pattern:
    if spec in gr.BUILTIN_PATTERNS:
        return gr.BUILTIN_PATTERNS[spec]
    if spec.endswith(".json"):
        return gr.load_pattern(spec)
    raise ValueError(
        f"unknown pattern {spec!r}; builtins: {', '.join(sorted(gr.BUILTIN_PATTERNS))}"
    )


def parse_polynomial_spec(spec: str) -> pl.PositivePolynomial:
    if spec.endswith(".json"):
        return pl.load_polynomial(spec)
    kind, _, rest = spec.partition(":")
    kv = dict(item.split("=") for item in rest.split(",") if item)
    if kind == "triangle":
        return gr.copy_polynomial(gr.BUILTIN_PATTERNS["k3"], int(kv["n"]))
    if kind == "es":
        return pl.elementary_symmetric(int(kv["l"]), int(kv["k"]))
    raise ValueError(f"unknown polynomial spec {spec!r}")


def parse_model_spec(spec: str, n: int) -> gr.RandomGraphModel:
    kind, _, rest = spec.partition(":")
    kv = dict(item.split("=") for item in rest.split(",") if item)
    if kind == "gnp":
        return gr.gnp(n, Fraction(kv["p"]))
    if kind == "gnm":
        return gr.gnm(n, int(kv["m"]))
    raise ValueError(f"unknown model spec {spec!r} (use gnp:p=... or gnm:m=...)")


def _jn_walk_spec(lam, n: int, mu, steps: int) -> ex.WalkSpec:
    w = mu * n
    if w != int(w):
        raise ValueError(f"mu*n = {w} must be an integer vertex count")
    return ex.WalkSpec(ex.build_jn_construction(lam, n), tuple(range(int(w))), steps)


# ---------------------------------------------------------------------------
# runners

def _run_toy_chernoff(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        n, eps = params["n"], params["eps"]
        bound = gw.toy_chernoff_bound(n, eps)
        threshold = gw.ceil_snap(Fraction(n, 2) * (1 + eps))
        oracle = gw.binomial_tail(n, Fraction(1, 2), threshold)
        return _row(bound, PROV_FLOAT, oracle, 0.0, PROV_EXACT, _dominance(oracle, bound))

    return [RowTask(dict(params), thunk)]


def _run_gb_check(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        dist = parse_distribution_spec(params["dist"], ctx.budget)
        delta, m, eps = params["delta"], params["m"], params["eps"]
        chk = gw.check_growth_bounded(dist, delta, m)
        mu = gw.coordinate_mean(dist)
        bound = gw.markov_tail_bound(delta, eps, m)
        oracle = gw.exact_tail(dist, mu * dist.n * (1 + eps))
        verdict = _dominance(oracle, bound) if chk.holds else "not-certified"
        return _row(bound, _prov(bound), oracle, 0.0, _prov(oracle), verdict)

    return [RowTask(dict(params), thunk)]


def _run_wor_bound(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        dist = parse_distribution_spec(params["dist"], ctx.budget)
        delta, eps, c = params["delta"], params["eps"], params["c"]
        mu = gw.coordinate_mean(dist)
        wb = gw.wor_tail_bound(delta, eps, c, mu, dist.n)
        oracle = gw.exact_tail(dist, mu * dist.n * (1 + eps))
        if wb.vacuous:
            return _row(wb.value, _prov(wb.value), oracle, 0.0, _prov(oracle), "vacuous")
        chk = gw.check_gb_without_repetition(dist, delta, wb.m)
        verdict = _dominance(oracle, wb.value) if chk.holds else "not-certified"
        return _row(wb.value, _prov(wb.value), oracle, 0.0, _prov(oracle), verdict)

    return [RowTask(dict(params), thunk)]


def _run_coupling_verify(params: dict, ctx: RunContext) -> list[RowTask]:
    m, ell, k = params["m"], params["ell"], params["k"]
    alpha = params["alpha"]
    tasks = []

    def claim_thunk(claim_name: str):
        def thunk():
            reports = cp.verify_conditional_claims(m, ell, k)
            rep = next((r for r in reports if r.claim == claim_name), None)
            if rep is None:
                return _row(0, PROV_EXACT, None, 0.0, PROV_EXACT, "unsupported")
            verdict = "exact" if rep.max_discrepancy == 0 else "violated"
            return _row(0, PROV_EXACT, rep.max_discrepancy, 0.0, PROV_EXACT, verdict)

        return thunk

    for claim in ("first-gap-equals", "first-gap-exceeds"):
        tasks.append(RowTask({**params, "claim": claim}, claim_thunk(claim)))

    def marginal_thunk():
        law = cp.coupled_gaps_joint_law(m, m, ell, alpha, ctx.budget)
        beta = cp.coupling_parameters(m, m, ell, alpha)
        target = cp.gap_distribution_exact(m, ell, ctx.budget)
        d_marg = cp.joint_law_d_marginal(law)
        disc = cp._max_discrepancy(d_marg, target)
        dom_mass = sum(p for (d, e), p in law.items() if any(b > a for a, b in zip(d, e)))
        e_marg = cp.joint_law_e_marginal(law)
        fa = math.floor(Fraction(alpha))
        per = cp._e_pmf(beta, fa)
        iid_disc = Fraction(0)
        for e_tuple, p in e_marg.items():
            expected = Fraction(1)
            for v in e_tuple:
                expected *= per.get(v, Fraction(0))
            iid_disc = max(iid_disc, abs(p - expected))
        worst = max(disc, iid_disc, dom_mass)
        verdict = "exact" if worst == 0 else "violated"
        return _row(0, PROV_EXACT, worst, 0.0, PROV_EXACT, verdict)

    tasks.append(RowTask({**params, "claim": "coupled-marginals"}, marginal_thunk))
    return tasks


def _run_expander_hitting(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        lam, n, mu = params["lambda"], params["n"], params["mu"]
        steps, m, eps = params["steps"], params["m"], params["eps"]
        spec = _jn_walk_spec(lam, n, mu, steps)
        hb = ex.hitting_bound(mu, eps, m, lam, steps)
        oracle = ex.avg_stay_prob(spec, m, "exact", budget=ctx.budget)
        if not hb.supported:
            return _row(hb.value, _prov(hb.value), oracle, 0.0, PROV_FLOAT, "unsupported")
        return _row(hb.value, _prov(hb.value), oracle, 0.0, PROV_FLOAT, _dominance(oracle, hb.value))

    return [RowTask(dict(params), thunk)]


def _run_expander_tail(params: dict, ctx: RunContext) -> list[RowTask]:
    lam, mu = params["lambda"], params["mu"]
    steps, eps = params["steps"], params["eps"]

    def thunk():
        tb = ex.main_tail_bound(mu, lam, eps, steps)
        oracle = ex.jn_walk_tail_exact(lam, mu, steps, eps)
        return _row(tb.value, PROV_FLOAT, oracle, 0.0, PROV_FLOAT, _dominance(oracle, tb.value))

    tasks = [RowTask(dict(params), thunk)]
    if params.get("n") is not None:

        def cross_thunk():
            spec = _jn_walk_spec(lam, params["n"], mu, steps)
            full = ex.walk_tail_exact(spec, eps, ctx.budget * 10)
            lumped = ex.jn_walk_tail_exact(lam, mu, steps, eps)
            verdict = "agrees" if abs(full - lumped) <= 1e-12 else "violated"
            return _row(full, PROV_FLOAT, lumped, 0.0, PROV_FLOAT, verdict)

        tasks.append(RowTask({**params, "check": "dp-crosscheck"}, cross_thunk))
    return tasks


def _run_expander_tight(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        lam, mu = params["lambda"], params["mu"]
        steps, eps = params["steps"], params["eps"]
        tb = ex.tight_tail_bound(mu, lam, eps, steps)
        oracle = ex.jn_walk_tail_exact(lam, mu, steps, eps)
        if not tb.remark_valid:
            return _row(tb.value, PROV_FLOAT, oracle, 0.0, PROV_FLOAT, "outside-remark")
        return _row(tb.value, PROV_FLOAT, oracle, 0.0, PROV_FLOAT, _dominance(oracle, tb.value))

    return [RowTask(dict(params), thunk)]


def _run_expander_lower(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        lam, mu = params["lambda"], params["mu"]
        steps, eps = params["steps"], params["eps"]
        cert = ex.optimality_lower_bound(lam, mu, eps, steps)
        oracle = ex.jn_walk_tail_exact(lam, mu, steps, eps)
        verdict = "lower-bounds" if cert.value <= oracle + FLOAT_TOL else "violated"
        return _row(cert.value, PROV_FLOAT, oracle, 0.0, PROV_FLOAT, verdict)

    return [RowTask(dict(params), thunk)]


def _run_poly_bound(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        poly = parse_polynomial_spec(params["poly"])
        dist = parse_distribution_spec(params["dist"], ctx.budget)
        if poly.variable_count != dist.n:
            raise ValueError(
                f"polynomial has {poly.variable_count} variables, distribution {dist.n}"
            )
        delta, m, eps = params["delta"], params["m"], params["eps"]
        k = poly.degree
        marg = pl.MarginalProfile.from_distribution(dist)
        mu = pl.expectation(poly, dist)
        stats = pl.poly_stats(poly, marg, mu, ctx.budget)
        ai = pl.check_almost_independent(dist, delta, k * m, ctx.budget)
        bound = pl.kv_bound(stats, delta, eps, m, k)
        oracle = pl.poly_tail_exact(poly, dist, stats.mu0_star * (1 + eps))
        verdict = _dominance(oracle, bound) if ai.holds else "not-certified"
        return _row(bound, _prov(bound), oracle, 0.0, _prov(oracle), verdict)

    return [RowTask(dict(params), thunk)]


def _run_es_tightness(params: dict, ctx: RunContext) -> list[RowTask]:
    l, p, k, eps = params["l"], params["p"], params["k"], params["eps"]

    def chain_thunk():
        s = max(k, gw.ceil_snap(p * l * (1 + 2 * eps)))
        lhs = pl.es_tail_exact(l, p, k, comb(s, k))
        rhs = gw.binomial_tail(l, p, s)
        verdict = "exact" if lhs == rhs else "violated"
        return _row(rhs, PROV_EXACT, lhs, 0.0, PROV_EXACT, verdict)

    def floor_thunk():
        target = p**k * comb(l, k) * (1 + eps)
        oracle = pl.es_tail_exact(l, p, k, target)
        try:
            floor = pl.es_lower_floor(p, l, eps, k)
        except ValueError:
            return _row(None, PROV_FLOAT, oracle, 0.0, _prov(oracle), "unsupported")
        if 4 * eps * eps * p * l < 3:
            return _row(floor, PROV_FLOAT, oracle, 0.0, _prov(oracle), "unsupported")
        verdict = "lower-bounds" if floor <= oracle else "violated"
        return _row(floor, PROV_FLOAT, oracle, 0.0, _prov(oracle), verdict)

    def reverse_thunk():
        s = gw.ceil_snap(p * l * (1 + eps))
        oracle = gw.binomial_tail(l, p, s)
        try:
            floor = pl.reverse_chernoff_floor(p, l, eps)
        except ValueError:
            return _row(None, PROV_FLOAT, oracle, 0.0, _prov(oracle), "unsupported")
        verdict = "lower-bounds" if floor <= oracle else "violated"
        return _row(floor, PROV_FLOAT, oracle, 0.0, _prov(oracle), verdict)

    return [
        RowTask({**params, "check": "chain-equality"}, chain_thunk),
        RowTask({**params, "check": "floor"}, floor_thunk),
        RowTask({**params, "check": "reverse-chernoff"}, reverse_thunk),
    ]


def _run_perm_ai(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        N = params["N"]
        m = params["m"] if params["m"] is not None else N // 2
        dist = pl.permutation_indicator_distribution(N)
        res = pl.check_almost_independent(dist, params["delta"], m, ctx.budget)
        verdict = "certified" if res.holds else "not-certified"
        return _row(res.worst_rhs, _prov(res.worst_rhs), res.worst_lhs, 0.0, _prov(res.worst_lhs), verdict)

    return [RowTask(dict(params), thunk)]


def _run_graph_mstar(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        pattern = parse_pattern_spec(params["pattern"])
        n, p = params["n"], params["p"]
        value = gr.m_star(n, p, pattern, ctx.budget)
        E = comb(n, 2)
        consistent = True
        if value < E:
            broke = False
            for H in gr.subpatterns(pattern):
                res = gr.packing_number(n, value + 1, H, ctx.budget)
                if res.value > n**H.vertex_count * p**H.edge_count:
                    broke = True
                    break
            consistent = broke
        verdict = "consistent" if consistent else "violated"
        return _row(value, PROV_EXACT, None, 0.0, PROV_EXACT, verdict, clamp=False)

    return [RowTask(dict(params), thunk)]


def _run_graph_tail(params: dict, ctx: RunContext) -> list[RowTask]:
    def thunk():
        pattern = parse_pattern_spec(params["pattern"])
        n, eps, c_g = params["n"], params["eps"], params["c_g"]
        model = parse_model_spec(params["model"], n)
        if model.kind == "gnp":
            bound = gr.jor_tail_bound(pattern, n, model.p, eps, c_g)
        else:
            bound = gr.gnm_tail_bound(pattern, n, model.m_edges, eps, c_g).value
        mu = _expected_copies(model, pattern, params["mode"], ctx.budget)
        threshold = mu * (1 + eps)
        if params["mode"] == "exact":
            oracle = gr.subgraph_tail(model, pattern, threshold, "exact", budget=ctx.budget)
            return _row(bound, PROV_FLOAT, oracle, 0.0, _prov(oracle), _dominance(oracle, bound))
        seed = _row_seed(ctx, "graph-tail", params)
        mc = gr.subgraph_tail(model, pattern, threshold, "mc", ctx.trials, seed, ctx.budget)
        sigma = mc.ci99 / gw._Z99
        verdict = "dominates" if mc.estimate - 3 * sigma <= bound + FLOAT_TOL else "violated"
        return _row(bound, PROV_FLOAT, mc.estimate, mc.ci99, PROV_MC, verdict)

    return [RowTask(dict(params), thunk)]


def _expected_copies(model: gr.RandomGraphModel, pattern: gr.Pattern, mode: str, budget: int):
    if mode == "exact":
        dist = gr.edge_distribution(model, budget)
        return pl.expectation(gr.copy_polynomial(pattern, model.n), dist)
    if model.kind == "gnp":
        return gr.expected_copies_independent(pattern, model.n, model.p)
    if model.kind == "gnm":
        E = comb(model.n, 2)
        prob = Fraction(1)
        for i in range(pattern.edge_count):
            prob *= Fraction(model.m_edges - i, E - i)
        d = gr.automorphism_count(pattern)
        falling = 1
        for i in range(pattern.vertex_count):
            falling *= model.n - i
        return Fraction(falling, d) * prob
    raise ValueError("exact models require exact mode")


# ---------------------------------------------------------------------------
# registry

def _p_int(name, help, required=True, default=None, lo=None, hi=None):
    def check(v):
        if lo is not None and v < lo:
            return f"must be >= {lo}"
        if hi is not None and v > hi:
            return f"must be <= {hi}"
        return None

    return ParamSpec(name, "int", help, required, default, check=check)


def _p_rat(name, help, required=True, default=None, range_desc=None, ok=None):
    check = None
    if ok is not None:
        check = _range_check(range_desc, ok)
    return ParamSpec(name, "rational", help, required, default, check=check)


_EPS_HALF = (lambda e: 0 <= e <= Fraction(1, 2), "eps in [0, 1/2]")
_EPS_45 = (lambda e: 0 <= e <= Fraction(4, 5), "eps in [0, 4/5]")


REGISTRY: dict[str, Experiment] = {}


def _register(exp: Experiment) -> None:
    REGISTRY[exp.name] = exp


_register(
    Experiment(
        "toy-chernoff",
        "fair-coin tail bound exp(-eps^2 n/6) vs the exact binomial tail",
        (
            _p_int("n", "number of coins", lo=1),
            _p_rat("eps", "relative deviation", range_desc=_EPS_HALF[1], ok=_EPS_HALF[0]),
        ),
        _run_toy_chernoff,
    )
)

_register(
    Experiment(
        "gb-check",
        "growth-boundedness certificate + ((1+delta)/(1+eps))^m vs exact tail",
        (
            ParamSpec("dist", "str", "distribution spec or JSON path", True),
            _p_rat("delta", "moment slack", range_desc="delta >= 0", ok=lambda d: d >= 0),
            _p_int("m", "moment order", lo=1),
            _p_rat("eps", "relative deviation", range_desc="eps >= 0", ok=lambda e: e >= 0),
        ),
        _run_gb_check,
    )
)

_register(
    Experiment(
        "wor-bound",
        "subset-index tail bound ((1+delta)/(1+(1-c)eps))^m vs exact tail",
        (
            ParamSpec("dist", "str", "distribution spec or JSON path", True),
            _p_rat("delta", "subset slack", range_desc="delta >= -1", ok=lambda d: d >= -1),
            _p_rat("eps", "relative deviation", range_desc="eps >= 0", ok=lambda e: e >= 0),
            _p_rat("c", "exponent split fraction", range_desc="c in [0, 1]", ok=lambda c: 0 <= c <= 1),
        ),
        _run_wor_bound,
    )
)

_register(
    Experiment(
        "coupling-verify",
        "conditional-law identities and coupled-marginal exactness of the gap law",
        (
            _p_int("m", "subset size", lo=1),
            _p_int("ell", "horizon", lo=1),
            _p_int("k", "conditioning value", required=False, default=1, lo=1),
            _p_rat("alpha", "coupling cutoff", required=False, default=Fraction(1),
                   range_desc="alpha >= 1", ok=lambda a: a >= 1),
        ),
        _run_coupling_verify,
    )
)

_register(
    Experiment(
        "expander-hitting",
        "(mu(1+eps))^m vs exact average stay probability over random step subsets",
        (
            _p_rat("lambda", "spectral gap parameter", range_desc="lambda in [0, 1)",
                   ok=lambda l: 0 <= l < 1),
            _p_int("n", "vertex count", lo=1),
            _p_rat("mu", "target density (mu*n integral)", range_desc="mu in (0, 1)",
                   ok=lambda m: 0 < m < 1),
            _p_int("steps", "walk length", lo=1),
            _p_int("m", "subset size", lo=1),
            _p_rat("eps", "relative deviation", range_desc="eps >= 0", ok=lambda e: e >= 0),
        ),
        _run_expander_hitting,
    )
)

_register(
    Experiment(
        "expander-tail",
        "2 exp(-(1-lambda) eps^2 mu ell/18) vs the exact occupation-count DP",
        (
            _p_rat("lambda", "spectral gap parameter", range_desc="lambda in [0, 1)",
                   ok=lambda l: 0 <= l < 1),
            _p_rat("mu", "target density", range_desc="mu in (0, 1)", ok=lambda m: 0 < m < 1),
            _p_int("steps", "walk length", lo=1),
            _p_rat("eps", "relative deviation", range_desc=_EPS_45[1], ok=_EPS_45[0]),
            _p_int("n", "optional vertex count for the full-DP crosscheck",
                   required=False, default=None, lo=1),
        ),
        _run_expander_tail,
    )
)

_register(
    Experiment(
        "expander-tight",
        "sharp-exponent bound (with cubic correction) vs the occupation-count DP",
        (
            _p_rat("lambda", "spectral gap parameter", range_desc="lambda in [0, 1)",
                   ok=lambda l: 0 <= l < 1),
            _p_rat("mu", "target density", range_desc="mu in (0, 1)", ok=lambda m: 0 < m < 1),
            _p_int("steps", "walk length", lo=1),
            _p_rat("eps", "relative deviation", range_desc="eps in (0, 1/2]",
                   ok=lambda e: 0 < e <= Fraction(1, 2)),
        ),
        _run_expander_tight,
    )
)

_register(
    Experiment(
        "expander-lower",
        "alternating-run lower-bound certificate vs the occupation-count DP",
        (
            _p_rat("lambda", "spectral gap parameter", range_desc="lambda in (0, 1)",
                   ok=lambda l: 0 < l < 1),
            _p_rat("mu", "target density", range_desc="mu in (0, 1)", ok=lambda m: 0 < m < 1),
            _p_int("steps", "walk length", lo=1),
            _p_rat("eps", "relative deviation", range_desc="eps > 0", ok=lambda e: e > 0),
        ),
        _run_expander_lower,
    )
)

_register(
    Experiment(
        "poly-bound",
        "binomial-weighted truncation bound vs the exact polynomial tail",
        (
            ParamSpec("poly", "str", "polynomial spec (triangle:n=5, es:l=6,k=2) or path", True),
            ParamSpec("dist", "str", "distribution spec or JSON path", True),
            _p_rat("delta", "almost-independence slack", required=False, default=Fraction(0),
                   range_desc="delta >= 0", ok=lambda d: d >= 0),
            _p_int("m", "moment order", required=False, default=1, lo=1),
            _p_rat("eps", "relative deviation", range_desc="eps > 0", ok=lambda e: e > 0),
        ),
        _run_poly_bound,
    )
)

_register(
    Experiment(
        "es-tightness",
        "elementary-symmetric chain equality and the two lower-bound floors",
        (
            _p_int("l", "variable count", lo=1),
            _p_rat("p", "success probability", range_desc="p in (0, 1/2]",
                   ok=lambda p: 0 < p <= Fraction(1, 2)),
            _p_int("k", "symmetric degree", lo=1),
            _p_rat("eps", "relative deviation", range_desc="eps in (0, 1/4]",
                   ok=lambda e: 0 < e <= Fraction(1, 4)),
        ),
        _run_es_tightness,
    )
)

_register(
    Experiment(
        "perm-ai",
        "almost-independence certificate of the permutation indicator law",
        (
            _p_int("N", "domain size", lo=1, hi=6),
            _p_rat("delta", "slack", required=False, default=Fraction(1),
                   range_desc="delta >= 0", ok=lambda d: d >= 0),
            _p_int("m", "tuple length cap (default floor(N/2))", required=False,
                   default=None, lo=1),
        ),
        _run_perm_ai,
    )
)

_register(
    Experiment(
        "graph-mstar",
        "packing-constrained scale M* with brute-force consistency at M*+1",
        (
            ParamSpec("pattern", "str", "pattern name (k2,k3,k4,p3,c4) or JSON path", True),
            _p_int("n", "host vertex count", lo=2),
            _p_rat("p", "edge probability", range_desc="p in [0, 1]", ok=lambda p: 0 <= p <= 1),
        ),
        _run_graph_mstar,
    )
)

_register(
    Experiment(
        "graph-tail",
        "exp(-c_G eps^2 M*) vs the exact (or MC) copy-count tail",
        (
            ParamSpec("pattern", "str", "pattern name or JSON path", True),
            _p_int("n", "host vertex count", lo=2),
            ParamSpec("model", "str", "gnp:p=... or gnm:m=...", True),
            _p_rat("eps", "relative deviation", range_desc="eps > 0", ok=lambda e: e > 0),
            _p_rat("c_g", "pattern constant", required=False, default=Fraction(1, 100),
                   range_desc="c_g > 0", ok=lambda c: c > 0),
            ParamSpec("mode", "choice", "oracle mode", False, "exact", ("exact", "mc")),
        ),
        _run_graph_tail,
    )
)


# ---------------------------------------------------------------------------
# driver

def run_experiment(config: RunConfig) -> tuple[list[ReportRow], bool]:
    """Execute one experiment; returns (sorted rows, any_failure)."""
    if config.command not in REGISTRY:
        raise ValueError(f"unknown experiment {config.command!r}")
    exp = REGISTRY[config.command]
    ctx = RunContext(seed=config.seed, trials=config.trials, budget=config.budget)
    tasks = exp.runner(config.params, ctx)

    def execute(task: RowTask) -> ReportRow:
        start = perf_counter()
        try:
            partial = task.thunk()
        except (ValueError, ResourceLimitError, OSError) as exc:
            partial = _row(None, PROV_FLOAT, None, 0.0, PROV_FLOAT, f"error:{exc}")
        ms = (perf_counter() - start) * 1000
        return ReportRow(experiment=config.command, params=task.params, ms=ms, **partial)

    if config.parallelism > 1:
        with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
            rows = list(pool.map(execute, tasks))
    else:
        rows = [execute(t) for t in tasks]
    rows = sort_rows(rows)
    failed = any(r.verdict == "violated" or r.verdict.startswith("error") for r in rows)
    return rows, failed
