"""Batch verification entry point.

Builds signatures and modules from a config, runs the selected
verification suite and emits a machine-readable JSON report.  The
process exit status is nonzero exactly when some check fails.
"""

from __future__ import annotations

import argparse
import itertools
import json
import random
import sys
from dataclasses import dataclass, asdict

from . import modrep, pbw, weyl
from .coeffs import ONE, ZERO, ZPoly, a as PARAM_A, b as PARAM_B, q, scalar, scalar_from_str, scalar_str
from .linalg import RowReducer
from .superfree import appendixA_check
from .weyl import HighestWeight, TorsionTriple

SCHEMA = 1


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Flags for one verification run; mirrored one-to-one by the JSON config."""

    suite: str
    M: int = 2
    N: int = 1
    a: str | None = None
    b: str | None = None
    window: int = 2
    order: int = 10
    degree_bound: int = 4
    seed: int = 0
    count: int = 20
    n_max: int = 4
    height: int = 3
    tensor: bool = False
    chevalley: bool = False
    Q: str | None = None
    Pprev: str | None = None
    out: str | None = None

    def validate(self):
        if self.window <= 0 or self.order <= 0 or self.degree_bound <= 0:
            raise ConfigError("windows, orders and degree bounds must be positive")
        if self.M < 1 or self.N < 0:
            raise ConfigError("invalid signature")
        if self.a is not None and _parse_scalar(self.a) == ZERO:
            raise ConfigError("evaluation point a must be nonzero")


def _parse_scalar(text: str):
    try:
        return scalar_from_str(text)
    except Exception as exc:
        raise ConfigError(f"cannot parse scalar {text!r}: {exc}") from exc


def _parse_poly(text: str) -> ZPoly:
    return ZPoly([_parse_scalar(part.strip()) for part in text.split(",")])


def _eval_module(cfg: RunConfig, which: str = "a"):
    point = PARAM_A if which == "a" else PARAM_B
    raw = cfg.a if which == "a" else cfg.b
    if raw is not None:
        point = _parse_scalar(raw)
    glm = modrep.fundamental(cfg.M, cfg.N)
    return modrep.evaluation_pullback(glm, point)


def _check(name: str, ok: bool, witness=None) -> dict:
    entry = {"name": name, "status": "pass" if ok else "fail"}
    if witness is not None:
        entry["witness"] = witness
    return entry


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def _suite_verify_relations(cfg: RunConfig) -> list[dict]:
    if cfg.M == cfg.N:
        raise ConfigError("verify-relations builds an evaluation module; need M != N")
    lm = _eval_module(cfg)
    rep = modrep.relation_report(lm, window=cfg.window, include_chevalley=cfg.chevalley)
    checks = [
        _check(
            f"relations({cfg.M},{cfg.N}) {c['name']}",
            c["status"] == "pass",
            {"instances": c["instances"], "failures": c["failures"]},
        )
        for c in rep["checks"]
    ]
    if cfg.tensor:
        other = _eval_module(cfg, "b")
        tm = modrep.tensor(lm, other)
        trep = modrep.relation_report(tm, window=min(cfg.window, 1))
        checks += [
            _check(
                f"tensor-relations({cfg.M},{cfg.N}) {c['name']}",
                c["status"] == "pass",
                {"instances": c["instances"], "failures": c["failures"]},
            )
            for c in trep["checks"]
        ]
    return checks


def _suite_highest_weight(cfg: RunConfig) -> list[dict]:
    if cfg.M == cfg.N:
        raise ConfigError("highest-weight needs M != N")
    lm = _eval_module(cfg)
    hw = modrep.highest_weight(lm, window=cfg.window, degree_bound=cfg.degree_bound)
    return [_check(f"highest-weight({cfg.M},{cfg.N})", True, hw.to_json())]


def _suite_tensor_hw(cfg: RunConfig) -> list[dict]:
    if cfg.M == cfg.N:
        raise ConfigError("tensor-hw needs M != N")
    m1 = _eval_module(cfg, "a")
    m2 = _eval_module(cfg, "b")
    tm = modrep.tensor(m1, m2)
    hw1 = modrep.highest_weight(m1, window=cfg.window, degree_bound=cfg.degree_bound)
    hw2 = modrep.highest_weight(m2, window=cfg.window, degree_bound=cfg.degree_bound)
    hwt = modrep.highest_weight(tm, window=cfg.window, degree_bound=cfg.degree_bound)
    prod = weyl.monoid_product(hw1, hw2)
    ok = hwt.P == prod.P and hwt.torsion == prod.torsion and hwt.epsilon == prod.epsilon
    return [
        _check(
            f"tensor-hw({cfg.M},{cfg.N})",
            ok,
            {"tensor": hwt.to_json(), "monoid": prod.to_json()},
        )
    ]


def _suite_weyl_slice(cfg: RunConfig) -> list[dict]:
    if cfg.Q is None:
        raise ConfigError("weyl-slice needs --Q")
    Q = _parse_poly(cfg.Q)
    P_prev = _parse_poly(cfg.Pprev) if cfg.Pprev else ZPoly.one()
    if Q.coeff(0) != ONE:
        raise ConfigError("Q must have constant term 1")
    sl = weyl.weyl_odd_slice(Q, P_prev)
    ok_dim = sl.d == Q.degree
    ok_spec = weyl.slice_spectrum_identity(Q, sl)
    charpoly = weyl.charpoly(sl.hM1).to_json() if sl.d else ["1"]
    return [
        _check("weyl-slice dimension = deg Q", ok_dim, {"d": sl.d}),
        _check(
            "weyl-slice spectrum identity",
            ok_spec,
            {"theta": scalar_str(sl.theta), "charpoly": charpoly, "hM1": sl.to_json()["hM1"]},
        ),
    ]


def random_torsion_triple(rng: random.Random, max_degree: int = 4) -> TorsionTriple:
    """Deterministic random coprime triple from a small scalar pool."""
    pool = [scalar(1), scalar(-1), scalar(2), q, -q, q**-1, q + q**-1]
    cs = [q, q**-1, scalar(2), q**2, scalar(3), -q]
    while True:
        d = rng.randint(0, max_degree)
        # degree zero forces Q = P = 1 and hence c^2 = 1
        c = (scalar(1), scalar(-1))[rng.randrange(2)] if d == 0 else cs[rng.randrange(len(cs))]
        pcoeffs = [ONE] + [pool[rng.randrange(len(pool))] for _ in range(d)]
        P = ZPoly(pcoeffs)
        if P.degree != d:
            continue
        qcoeffs = [ONE] + [pool[rng.randrange(len(pool))] for _ in range(max(0, d - 1))]
        qcoeffs += [pcoeffs[-1] * c**-2] if d else []
        Q = ZPoly(qcoeffs)
        if Q.degree != d:
            continue
        if d and not weyl.poly_coprime(Q, P):
            continue
        return TorsionTriple(c, Q, P)


def _hw_of(t: TorsionTriple) -> HighestWeight:
    return HighestWeight({}, t, {})


def _suite_monoid(cfg: RunConfig) -> list[dict]:
    rng = random.Random(cfg.seed)
    checks = []
    order = max(cfg.order, 2 * cfg.degree_bound + 2)
    worked = TorsionTriple(q, ZPoly([ONE, -(q**-2)]), ZPoly([ONE, -ONE]))
    _, _, win = weyl.torsion_to_series(worked, order)
    checks.append(
        _check(
            "worked example f == 1",
            all(v == ONE for v in win.values()),
            {"window": {str(k): scalar_str(v) for k, v in sorted(win.items())}},
        )
    )
    checks.append(
        _check(
            "worked example roundtrip",
            weyl.series_to_torsion(win, q, cfg.degree_bound) == worked,
        )
    )
    triples = [random_torsion_triple(rng, cfg.degree_bound) for _ in range(cfg.count)]
    ok_rt = True
    for t in triples:
        _, _, w = weyl.torsion_to_series(t, order)
        back = weyl.series_to_torsion(w, t.c, cfg.degree_bound)
        if back != t:
            ok_rt = False
            checks.append(_check("roundtrip", False, t.to_json()))
    checks.append(_check(f"roundtrip x{cfg.count}", ok_rt))
    ident = weyl.identity_triple()
    ok_id = all(
        weyl.monoid_product(_hw_of(t), _hw_of(ident)).torsion == t for t in triples
    )
    checks.append(_check("identity law", ok_id))
    ok_comm = True
    ok_assoc = True
    for t1, t2, t3 in zip(triples, triples[1:], triples[2:]):
        p12 = weyl.monoid_product(_hw_of(t1), _hw_of(t2))
        p21 = weyl.monoid_product(_hw_of(t2), _hw_of(t1))
        ok_comm &= p12.torsion == p21.torsion
        left = weyl.monoid_product(p12, _hw_of(t3)).torsion
        right = weyl.monoid_product(_hw_of(t1), weyl.monoid_product(_hw_of(t2), _hw_of(t3))).torsion
        ok_assoc &= left == right
    checks.append(_check("commutativity", ok_comm))
    checks.append(_check("associativity", ok_assoc))
    ok_star = True
    for t1, t2 in zip(triples, triples[1:]):
        _, _, w1 = weyl.torsion_to_series(t1, 2 * order)
        _, _, w2 = weyl.torsion_to_series(t2, 2 * order)
        direct = weyl.star_product_window(w1, w2, t1.c, t2.c, order)
        prod = weyl.monoid_product(_hw_of(t1), _hw_of(t2)).torsion
        _, _, wp = weyl.torsion_to_series(prod, order)
        ok_star &= all(direct[n] == wp[n] for n in range(-order, order + 1))
    checks.append(_check("star product matches series product", ok_star))
    return checks


def _suite_pbw_rank(cfg: RunConfig) -> list[dict]:
    if cfg.M == cfg.N:
        raise ConfigError("pbw-rank builds evaluation modules; need M != N")
    lm = _eval_module(cfg)
    modules = [(f"fundamental({cfg.M},{cfg.N})", lm)]
    if cfg.tensor:
        modules.append(("tensor", modrep.tensor(lm, _eval_module(cfg, "b"))))
    window = range(-cfg.window, cfg.window + 1)
    sig = lm.sig
    checks = []
    for label, module in modules:
        for wt in itertools.product(range(cfg.height + 1), repeat=sig.n_nodes):
            if not 1 <= sum(wt) <= cfg.height:
                continue
            monos = pbw.enumerate_pbw(sig, list(wt), window)
            words = pbw.all_words(sig, list(wt), window)
            r1 = RowReducer()
            r2 = RowReducer()
            for mono in monos:
                r1.add(module.elem_matrix(pbw.monomial_elem(sig, mono)).flatten())
            for word in words:
                r2.add(module.elem_matrix(_word_elem(word)).flatten())
            checks.append(
                _check(
                    f"pbw-rank {label} weight {wt}",
                    r1.rank == r2.rank,
                    {"pbw": len(monos), "words": len(words), "rank": [r1.rank, r2.rank]},
                )
            )
    return checks


def _word_elem(word):
    from .superfree import Elem

    return Elem.monomial(word)


def _suite_appendix_a(cfg: RunConfig) -> list[dict]:
    rep = appendixA_check(cfg.n_max, range(-cfg.window, cfg.window + 1))
    return [
        _check(f"appendix-a {c['name']}", c["status"] == "pass", c.get("detail") or None)
        for c in rep["checks"]
    ]


def _suite_coproduct(cfg: RunConfig) -> list[dict]:
    if cfg.M == cfg.N:
        raise ConfigError("coproduct-check needs M != N")
    m1 = _eval_module(cfg, "a")
    m2 = _eval_module(cfg, "b")
    tm = modrep.tensor(m1, m2)
    sig = m1.sig
    checks = []
    for part in ("x+", "x-", "phi"):
        for j in range(1, sig.n_nodes + 1):
            for n in (-1, 0, 1):
                ok = modrep.check_coproduct_formula(j, n, m1, m2, part=part, product=tm)
                checks.append(_check(f"coproduct {part} j={j} n={n}", ok))
    for i in range(1, sig.n_nodes):
        for s in (1, -1):
            res = modrep.cartan_coproduct_constants(i, m1, m2, sign=s, product=tm)
            ok = res.get("solvable") and res.get("z_matches")
            checks.append(_check(f"cartan-coproduct constants i={i} sign={s:+d}", bool(ok), res))
    return checks


SUITES = {
    "verify-relations": _suite_verify_relations,
    "highest-weight": _suite_highest_weight,
    "tensor-hw": _suite_tensor_hw,
    "weyl-slice": _suite_weyl_slice,
    "monoid": _suite_monoid,
    "pbw-rank": _suite_pbw_rank,
    "appendix-a": _suite_appendix_a,
    "coproduct-check": _suite_coproduct,
}


def run(cfg: RunConfig) -> dict:
    """Execute one suite and assemble the versioned report."""
    cfg.validate()
    if cfg.suite not in SUITES:
        raise ConfigError(f"unknown suite {cfg.suite!r}")
    if cfg.suite == "appendix-a":
        # the oscillation replay is specific to the (2,2) signature
        if (cfg.M, cfg.N) not in ((2, 2), (RunConfig.M, RunConfig.N)):
            raise ConfigError("appendix-a requires the (2,2) signature")
        cfg.M, cfg.N = 2, 2
    checks = SUITES[cfg.suite](cfg)
    return {
        "schema": SCHEMA,
        "config": {k: v for k, v in asdict(cfg).items() if v is not None},
        "passed": all(c["status"] == "pass" for c in checks),
        "checks": checks,
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superloop",
        description="Exact verification suites for quantum loop superalgebra computations.",
    )
    sub = parser.add_subparsers(dest="suite", required=True)
    for name in SUITES:
        p = sub.add_parser(name)
        p.add_argument("--M", type=int, default=None)
        p.add_argument("--N", type=int, default=None)
        p.add_argument("--a", type=str, default=None, help="evaluation point (exact expression)")
        p.add_argument("--b", type=str, default=None, help="second evaluation point")
        p.add_argument("--window", type=int, default=None)
        p.add_argument("--order", type=int, default=None)
        p.add_argument("--degree-bound", dest="degree_bound", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--count", type=int, default=None)
        p.add_argument("--nmax", dest="n_max", type=int, default=None)
        p.add_argument("--height", type=int, default=None)
        p.add_argument("--tensor", action="store_true", default=None)
        p.add_argument("--chevalley", action="store_true", default=None)
        p.add_argument("--Q", type=str, default=None, help="comma-separated Weyl polynomial coefficients")
        p.add_argument("--Pprev", type=str, default=None, help="neighbour polynomial coefficients")
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--config", type=str, default=None, help="JSON file mirroring the flags")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    values = {k: v for k, v in vars(args).items()}
    config_path = values.pop("config", None)
    merged: dict = {"suite": values.pop("suite")}
    if config_path:
        with open(config_path) as fh:
            for key, val in json.load(fh).items():
                key = key.replace("-", "_")
                if key == "suite":
                    continue
                if key not in RunConfig.__dataclass_fields__:
                    print(f"unknown config key {key!r}", file=sys.stderr)
                    return 2
                merged[key] = val
    # explicit command-line flags win over the config file
    merged.update({k: v for k, v in values.items() if v is not None})
    cfg = RunConfig(**merged)
    try:
        report = run(cfg)
    except ConfigError as exc:
        print(json.dumps({"schema": SCHEMA, "error": str(exc)}), file=sys.stderr)
        return 2
    text = json.dumps(report, indent=2)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
