"""chiral2d command-line driver.

    chiral2d bracket --scenario s.json [--out DIR]
    chiral2d star --scenario s.json --hbar-order 2
    chiral2d ope --scenario s.json
    chiral2d verify causality
    chiral2d embed --scenario s.json --out DIR
    chiral2d propagator --scenario s.json --out DIR

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import bulk, chiral_algebra as ca, fields, geometry as geo
from .descriptors import (DescriptorError, parse_diffeo, parse_field, parse_function,
                          parse_spacetime, parse_surface, random_configuration)
from .exact import Exact, I
from .functional import Functional, make_vertex, register
from .verification import SUITES, check


class InputError(Exception):
    pass


def _load(path: str | None) -> dict:
    if path is None:
        raise InputError("--scenario is required for this command")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read scenario: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("scenario must be a JSON object")
    return data


def _exact(desc) -> Exact:
    if isinstance(desc, (int, str)):
        return Exact.coerce(Fraction(str(desc)))
    if isinstance(desc, dict):
        desc = [desc]
    return Exact.from_json(desc)


def _functions(sc: dict) -> dict:
    out = {}
    for name, desc in sc.get("functions", {}).items():
        out[name] = parse_function(desc, label=name)
        register(out[name])
    return out


def _smeared(desc: dict, funcs: dict) -> tuple:
    field = parse_field(desc["field"])
    try:
        f = funcs[desc["smearing"]]
    except KeyError as exc:
        raise InputError(f"unknown smearing function {desc.get('smearing')!r}") from exc
    return field, f


def _expected(items, funcs: dict) -> Functional:
    """[{"power": n, "smearing": [[name, order], ...], "coefficient": ...}] as a functional."""
    out = Functional.zero()
    for it in items:
        smear = []
        for name, k in it["smearing"]:
            if name not in funcs:
                raise InputError(f"unknown smearing function {name!r}")
            smear.append((funcs[name].uid, int(k)))
        v = make_vertex(smear, [0] * int(it.get("power", 0)))
        out = out + Functional({((v,), ()): _exact(it.get("coefficient", 1))})
    return out


def _psi_samples(sc: dict, rng, cylinder: bool):
    return [random_configuration(rng, periodic=cylinder) for _ in range(int(sc.get("psiSamples", 0)))]


def run_bracket(sc: dict, args) -> dict:
    funcs = _functions(sc)
    host = parse_spacetime(sc.get("spacetime"))
    surface = parse_surface(sc.get("surface"), host)
    (FA, fa), (FB, fb) = (_smeared(sc["fields"][k], funcs) for k in ("A", "B"))
    A, B = FA(fa), FB(fb)
    br = ca.poisson_bracket(A, B)
    checks = [check("antisymmetry", None, 0, (br + ca.poisson_bracket(B, A)).is_zero())]
    out = {"bracket": br.to_json()}
    if br.degree() == 0:
        out["value"] = complex(fields.evaluate_functional(br, surface, None)).real
    rng = np.random.default_rng(args.seed)
    samples = _psi_samples(sc, rng, host.cylinder)
    if "expect" in sc:
        exp = _expected(sc["expect"], funcs)
        checks.append(check("symbolic identity", repr(exp), 0, br == exp))
        for i, psi in enumerate(samples):
            a = complex(fields.evaluate_functional(br, surface, psi))
            b = complex(fields.evaluate_functional(exp, surface, psi))
            err = abs(a - b)
            checks.append(check(f"numeric sample {i}", err, args.tol, err <= args.tol * max(1.0, abs(b))))
    if "expectValue" in sc:
        ref = float(sc["expectValue"])
        err = abs(out.get("value", math.nan) - ref)
        checks.append(check("value", err, args.tol, err <= args.tol * max(1.0, abs(ref))))
    return {"outputs": out, "checks": checks}


def run_star(sc: dict, args) -> dict:
    funcs = _functions(sc)
    (FA, fa), (FB, fb) = (_smeared(sc["fields"][k], funcs) for k in ("A", "B"))
    A, B = FA(fa), FB(fb)
    order = args.hbar_order
    S = ca.star_product(A, B, order=order)
    C = ca.commutator(A, B, order=order)
    state = ca.GaussianState()
    checks = []
    if order >= 1:
        checks.append(check("hbar^1 commutator = i bracket", None, 0,
                            C[1] == ca.poisson_bracket(A, B).scale(I)))
    out = {"star": S.to_json(), "commutator": C.to_json(),
           "state_at_zero": ca.gaussian_state_eval(state, S).to_json()}
    return {"outputs": out, "checks": checks}


def run_ope(sc: dict, args) -> dict:
    names = sc.get("fields")
    if not isinstance(names, list) or len(names) != 2:
        raise InputError("ope scenario needs \"fields\": [A, B]")
    A, B = parse_field(names[0]), parse_field(names[1])
    table = ca.ope_extract(A, B)
    checks = []
    for it in sc.get("expect", []):
        term = table.term(int(it["power"]))
        want = _exact(it["coefficient"])
        hp = int(it["coefficient"].get("hbarPow", 0)) if isinstance(it["coefficient"], dict) else 0
        got = None if term is None else term.coefficient(it.get("field", "1"))
        ok = got is not None and (got - want).is_zero() and term.hbar_pow == hp
        checks.append(check(f"power {it['power']} coefficient of {it.get('field', '1')}",
                            None if got is None else got.to_json(None if term is None else term.hbar_pow),
                            0, ok))
    if "expectTerms" in sc:
        n = len(table.terms)
        checks.append(check("number of singular terms", n, 0, n == int(sc["expectTerms"])))
    return {"outputs": {"ope": table.to_json()}, "checks": checks}


def run_verify(suite: str, args) -> dict:
    if suite not in SUITES:
        raise InputError(f"unknown suite {suite!r}; choose from {', '.join(sorted(SUITES))}")
    rng = np.random.default_rng(args.seed)
    return {"outputs": {"suite": suite}, "checks": SUITES[suite](rng)}


def _grid(desc, default):
    lo, hi, n = desc if desc is not None else default
    return np.linspace(float(lo), float(hi), int(n))


def run_embed(sc: dict, args) -> dict:
    checks = []
    out = {}
    tables = {}
    if "dilation" in sc:
        d = sc["dilation"]
        tp = parse_function(d["t_plus"])
        tm = parse_function(d.get("t_minus", d["t_plus"]))
        rho = geo.dilation_diffeo(tp, tm)
        x = _grid(d.get("grid"), (-6, 6, 2001))
        mp = rho.margin(tp, x) - 2
        mm = rho.margin(tm, x) - 2
        worst = float(min(mp.min(), mm.min()))
        out["min_margin_minus_2"] = worst
        checks.append(check("slab clears the boundary graphs", worst, 0.05, worst > 0.05))
        src = geo.standard_surface()
        dst = src
        rows = ["x,rho,rho_prime"]
        for xi, r, rp in zip(x, rho(x), rho.d(x, 1)):
            rows.append(f"{xi:.12g},{r:.12g},{rp:.12g}")
        tables["dilation.csv"] = "\n".join(rows) + "\n"
    else:
        host = parse_spacetime(sc.get("spacetime"))
        src = parse_surface(sc.get("source"), host)
        dst = parse_surface(sc.get("target"), host)
        rho = parse_diffeo(sc.get("rho"))
    emb = geo.extend_diffeo(rho, src, dst)
    us = _grid(sc.get("u"), (-2, 2, 9))
    vs = _grid(sc.get("v"), (-2, 2, 9))
    U, V = np.meshgrid(us, vs, indexing="ij")
    cu, cv = emb.chi(U.ravel(), V.ravel())
    wl = emb.omega_l(U.ravel())
    wr = emb.omega_r(V.ravel())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v", "chi_u", "chi_v", "omega_l", "omega_r"])
    for row in zip(U.ravel(), V.ravel(), cu, cv, wl, wr):
        w.writerow([f"{x:.12g}" for x in row])
    tables["embedding.csv"] = buf.getvalue()
    s = np.linspace(-2, 2, 101)
    worst = 0.0
    for e in sc.get("solutions", ["u", "u**2", "sin(u)"]):
        phi = fields.ExprBulk(e, cylinder=src.cylinder)
        lhs = fields.chiral_derivative(src, fields.PulledBack(phi, emb))(s)
        rhs = fields.weighted_pullback(emb, 1, fields.chiral_derivative(dst, phi))(s)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    checks.append(check("commuting square", worst, args.tol, worst <= args.tol))
    out["rho"] = rho.label
    return {"outputs": out, "checks": checks, "tables": tables}


def run_propagator(sc: dict, args) -> dict:
    host = parse_spacetime(sc.get("spacetime"))
    E = bulk.PauliJordanKernel(host)
    W = None if host.cylinder else bulk.HadamardBulkKernel(float(sc.get("epsilon", 1e-6)),
                                                           float(sc.get("lambda", 1.0)))
    us = _grid(sc.get("u"), (-2, 2, 5))
    vs = _grid(sc.get("v"), (-2, 2, 5))
    refs = sc.get("reference", [[0.0, 0.0]])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v", "u'", "v'", "ReE", "ReW", "ImW"])
    anti = True
    for ur, vr in refs:
        y = geo.Point(float(ur), float(vr), host.cylinder)
        for u in us:
            for v in vs:
                x = geo.Point(float(u), float(v), host.cylinder)
                e = bulk.pauli_jordan(E, x, y)
                anti &= e == -bulk.pauli_jordan(E, y, x)
                if W is None:
                    wv = complex(math.nan, math.nan)
                else:
                    try:
                        wv = bulk.hadamard_bulk(W, x, y)
                    except bulk.BulkError:
                        wv = complex(math.nan, math.nan)
                w.writerow([f"{x.u:.12g}", f"{x.v:.12g}", f"{y.u:.12g}", f"{y.v:.12g}",
                            f"{e:.12g}", f"{wv.real:.12g}", f"{wv.imag:.12g}"])
    checks = [check("E antisymmetric on the grid", None, 0, anti)]
    return {"outputs": {"rows": len(refs) * len(us) * len(vs)}, "checks": checks,
            "tables": {"propagator.csv": buf.getvalue()}}


COMMANDS = {"bracket": run_bracket, "star": run_star, "ope": run_ope,
            "embed": run_embed, "propagator": run_propagator}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="chiral2d", description="Chiral free boson toolkit")
    p.add_argument("command", choices=sorted(list(COMMANDS) + ["verify"]))
    p.add_argument("suite", nargs="?", help="suite name for verify")
    p.add_argument("--scenario", help="JSON scenario file")
    p.add_argument("--out", help="directory for report.json and CSV tables")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--hbar-order", type=int, default=ca.N_MAX)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte identity)")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    if args.tol <= 0 or args.hbar_order < 0:
        print("error: --tol must be positive and --hbar-order non-negative", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        if args.command == "verify":
            scenario = None
            result = run_verify(args.suite or "", args)
        else:
            scenario = _load(args.scenario)
            result = COMMANDS[args.command](scenario, args)
    except (InputError, DescriptorError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    tables = result.pop("tables", {})
    report = {"operation": args.command, "seed": args.seed, "inputs": scenario,
              "suite": args.suite if args.command == "verify" else None, **result}
    report["pass"] = all(c["pass"] for c in report["checks"])
    if args.timings:
        report["seconds"] = round(time.perf_counter() - start, 3)
    text = json.dumps(report, sort_keys=True, indent=2, default=str) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(text)
        for name, body in tables.items():
            (out / name).write_text(body)
    sys.stdout.write(text)
    for c in report["checks"]:
        print(f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']}", file=sys.stderr)
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
