"""File-driven front end: ccm solve|verify|equitable|nash|commodify|match.

Problems and certificates are single JSON documents (schemas ship in
ccm/schemas).  Results go to stdout, diagnostics to stderr; exit codes
are part of the interface.  Certificates embed a hash of the problem
file so verify cannot be pointed at the wrong instance.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources

import jsonschema
import numpy as np

from . import exchange, market, matching, polytope, solutions
from .tolerances import EPS_LP

VERSION = "0.1.0"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INADMISSIBLE = 2
EXIT_NON_MEMBER = 3
EXIT_AT_RESOLUTION = 4


def _schema(name: str) -> dict:
    with resources.files("ccm.schemas").joinpath(name).open("rb") as fh:
        return json.load(fh)


def _fail(message: str, code: int = EXIT_ERROR) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return code


def _num(x) -> float:
    v = float(x)
    if not np.isfinite(v):
        raise ValueError("numbers must be finite")
    return v


def _matrix(rows) -> np.ndarray:
    return np.array([[_num(x) for x in row] for row in rows], dtype=float)


def _load_problem(path: str) -> tuple[dict, str]:
    with open(path, "rb") as fh:
        raw = fh.read()
    doc = json.loads(raw)
    jsonschema.validate(doc, _schema("problem.schema.json"))
    digest = hashlib.sha256(
        json.dumps(doc, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    return doc, digest


def _collective_of(doc: dict):
    kind = doc["type"]
    if kind == "collective":
        return market.CollectiveProblem(_matrix(doc["utilities"]))
    if kind == "matching":
        return matching.to_collective(_matching_of(doc))
    if kind == "economy":
        return exchange.to_collective_exchange(_economy_of(doc))
    raise ValueError(f"no collective form for problem type {kind!r}")


def _matching_of(doc: dict) -> matching.MatchingProblem:
    groups = tuple(tuple(g) for g in doc["groups"]) if "groups" in doc else None
    return matching.MatchingProblem(
        matchings=tuple(tuple(j) for j in doc["matchings"]),
        w=_matrix(doc["weights"]),
        groups=groups,
    )


def _economy_of(doc: dict) -> exchange.Economy:
    goods = tuple(doc["goods"])
    if doc["kind"] == "additive":
        return exchange.Economy(
            n=len(doc["weights"]), names=goods, kind="additive", weights=_matrix(doc["weights"])
        )
    n = doc.get("agents") or 1 + max(b["agent"] for b in doc["bundles"])
    triples = [(b["agent"], b["items"], _num(b["value"])) for b in doc["bundles"]]
    return exchange.economy_from_bundle_values(n, goods, triples)


def _bargaining_of(doc: dict) -> polytope.Polytope:
    kind = doc["type"]
    if kind == "bargaining":
        return polytope.coco_hull(_matrix(doc["generators"]))
    if kind == "economy":
        return exchange.bargaining_of_economy(_economy_of(doc))
    return market.bargaining_of(_collective_of(doc))


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _lindahl_payload(cert: market.LindahlCertificate) -> dict:
    return {
        "p": cert.p.tolist(),
        "q": cert.q.tolist(),
        "payoffs": cert.payoffs.tolist(),
        "alpha": cert.alpha.tolist(),
        "c": cert.c.tolist(),
    }


def _base(kind: str, digest: str, tol: float) -> dict:
    return {
        "kind": kind,
        "version": VERSION,
        "problem_sha256": digest,
        "tolerances": {"eps_lp": tol},
    }


def _parse_vector(text: str) -> np.ndarray:
    return np.array([_num(x) for x in text.split(",")], dtype=float)


def cmd_solve(args) -> int:
    try:
        doc, digest = _load_problem(args.problem)
        if doc["type"] == "bargaining":
            return _fail("bargaining files have no market to solve; use nash or equitable")
        P = _collective_of(doc)
        tol = args.tol or EPS_LP
        if args.sweep:
            certs = market.sweep_lindahl_payoffs(P, grid_steps=args.sweep, tol=tol)
            payload = _base("lindahl_sweep", digest, tol)
            payload["certificates"] = [_lindahl_payload(c) for c in certs]
            payload["payoffs"] = [c.payoffs.tolist() for c in certs]
            _emit(payload, args.out)
            return EXIT_OK
        c = _parse_vector(args.c) if args.c else np.zeros(P.n)
        if c.shape != (P.n,):
            return _fail("shift vector has the wrong length")
        cert = market.lindahl_from_nash(P, c)
        if cert is None:
            return _fail("shift vector is inadmissible at its Nash allocation", EXIT_INADMISSIBLE)
        payload = _base("lindahl", digest, tol)
        payload.update(_lindahl_payload(cert))
        if doc["type"] == "matching":
            M = _matching_of(doc)
            pi, xi, q = matching.lindahl_to_walras(M, cert.p, cert.q, tol)
            payload["kind"] = "walras_matching"
            payload["pi"] = pi.tolist()
            payload["xi"] = xi.tolist()
            payload["lints"] = matching.price_coherence_lint(M, cert.p, cert.q)
        _emit(payload, args.out)
        return EXIT_OK
    except (ValueError, OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        return _fail(str(exc))


def cmd_verify(args) -> int:
    try:
        doc, digest = _load_problem(args.problem)
        with open(args.certificate) as fh:
            cert = json.load(fh)
        jsonschema.validate(cert, _schema("certificate.schema.json"))
        if cert["problem_sha256"] != digest:
            return _fail("certificate does not match this problem (stale hash)")
        tol = args.tol or cert.get("tolerances", {}).get("eps_lp", EPS_LP)
        report = _reverify(doc, cert, tol)
        _emit(report, args.out)
        return EXIT_OK if report["passed"] else EXIT_ERROR
    except (ValueError, OSError, KeyError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        return _fail(str(exc))


def _verdict_json(verdict) -> dict:
    return {
        "passed": verdict.passed,
        "violations": [
            {"condition": v.condition, "agent": v.agent, "residual": v.residual}
            for v in verdict.violations
        ],
    }


def _reverify(doc: dict, cert: dict, tol: float) -> dict:
    kind = cert["kind"]
    if kind == "lindahl":
        P = _collective_of(doc)
        verdict = market.verify_lindahl(P, _matrix(cert["p"]), np.array(cert["q"]), tol)
        return _verdict_json(verdict)
    if kind == "lindahl_sweep":
        P = _collective_of(doc)
        out = [
            _verdict_json(market.verify_lindahl(P, _matrix(c["p"]), np.array(c["q"]), tol))
            for c in cert["certificates"]
        ]
        return {"passed": all(v["passed"] for v in out), "certificates": out}
    if kind == "walras_matching":
        M = _matching_of(doc)
        verdict = matching.verify_walras_matching(
            M, _matrix(cert["pi"]), _matrix(cert["xi"]), np.array(cert["q"]), tol
        )
        return _verdict_json(verdict)
    if kind == "walras_exchange":
        E = _economy_of(doc)
        prices = _prices_from_json(E, cert["prices"])
        theta = exchange.RandomAllocation(
            tuple(cert["theta"]["weights"]),
            tuple(tuple(a) for a in cert["theta"]["allocations"]),
        )
        verdict = exchange.verify_walras_exchange(E, prices, theta, tol)
        return _verdict_json(verdict)
    if kind == "equitable":
        B = _bargaining_of(doc)
        verdict = solutions.equitable_contains(B, np.array(cert["point"]))
        same = verdict.status == cert["status"]
        ok = same and (
            not verdict.is_member
            or solutions.validate_certificate(B, np.array(cert["point"]), verdict.certificate)
        )
        return {"passed": bool(ok), "status": verdict.status}
    if kind == "nash":
        P = _collective_of(doc)
        q = np.array(cert["q"])
        resid = _nash_residual(P, q)
        return {"passed": bool(resid <= 1e-8), "kkt_residual": resid}
    raise ValueError(f"unknown certificate kind {kind!r}")


def _prices_from_json(E: exchange.Economy, obj: dict) -> exchange.PackagePrices:
    if "additive" in obj:
        return exchange.PackagePrices(names=E.names, additive=np.array(obj["additive"], float))
    return exchange.PackagePrices(names=E.names, table=np.array(obj["table"], float))


def _nash_residual(P: market.CollectiveProblem, q: np.ndarray) -> float:
    x = P.u @ q
    phi = (P.u / x[:, None]).sum(axis=0)
    over = float(phi.max() - P.n)
    on = float(np.abs(np.where(q > 1e-8, phi - P.n, 0.0)).max())
    return max(over, on) / P.n


def cmd_equitable(args) -> int:
    try:
        doc, digest = _load_problem(args.problem)
        B = _bargaining_of(doc)
        x = _parse_vector(args.point)
        try:
            verdict = solutions.equitable_contains(B, x, grid_steps=args.grid)
        except ValueError as exc:
            if "outside" in str(exc):
                payload = _base("equitable", digest, EPS_LP)
                payload.update({"point": x.tolist(), "status": "non_member_certified",
                                "witness": None, "resolution": 0, "reason": "not feasible"})
                _emit(payload, args.out)
                return EXIT_NON_MEMBER
            raise
        payload = _base("equitable", digest, EPS_LP)
        payload.update(
            {
                "point": x.tolist(),
                "status": verdict.status,
                "resolution": verdict.resolution,
                "witness": None
                if verdict.certificate is None
                else {
                    "scale": verdict.certificate.witness.scale.tolist(),
                    "base": verdict.certificate.witness.base.tolist(),
                },
            }
        )
        _emit(payload, args.out)
        if verdict.status == solutions.MEMBER:
            return EXIT_OK
        if verdict.status == solutions.NON_MEMBER:
            return EXIT_NON_MEMBER
        return EXIT_AT_RESOLUTION
    except (ValueError, OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        return _fail(str(exc))


def cmd_nash(args) -> int:
    try:
        doc, digest = _load_problem(args.problem)
        payload = _base("nash", digest, EPS_LP)
        if doc["type"] == "bargaining":
            B = _bargaining_of(doc)
            point = solutions.nash_solution(B)
            payload.update({"point": point.tolist(), "q": [], "kkt_residual": 0.0})
        else:
            P = _collective_of(doc)
            q = market.nash_allocation(P)
            payload.update(
                {
                    "q": q.tolist(),
                    "payoffs": (P.u @ q).tolist(),
                    "kkt_residual": _nash_residual(P, q),
                }
            )
        _emit(payload, args.out)
        return EXIT_OK
    except (ValueError, OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        return _fail(str(exc))


def cmd_commodify(args) -> int:
    try:
        doc, _ = _load_problem(args.problem)
        if doc["type"] != "bargaining":
            return _fail("commodify expects a bargaining problem file")
        B = _bargaining_of(doc)
        if args.mode == "two":
            E = exchange.commodify_two(B)
            out = {
                "type": "economy",
                "kind": "additive",
                "goods": list(E.names),
                "weights": [[repr(float(x)) for x in row] for row in E.weights],
            }
        else:
            E = exchange.commodify_general(B)
            out = {
                "type": "economy",
                "kind": "table",
                "goods": list(E.names),
                "agents": E.n,
                "bundles": _sparse_bundles(E),
            }
        _emit(out, args.out)
        return EXIT_OK
    except (ValueError, OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        return _fail(str(exc))


def _sparse_bundles(E: exchange.Economy) -> list[dict]:
    """Minimal bundle values that regenerate the table by free disposal."""
    table = E.value_table()
    out = []
    for i in range(E.n):
        for lvl in sorted({float(v) for v in table[i] if v > 0}):
            for mask in exchange._minimal_bundles(table[i], lvl, E.r):
                if abs(table[i][mask] - lvl) <= 1e-12:
                    out.append(
                        {
                            "agent": i,
                            "items": [b for b in range(E.r) if mask >> b & 1],
                            "value": repr(lvl),
                        }
                    )
    return out


def cmd_match(args) -> int:
    try:
        doc, digest = _load_problem(args.problem)
        if doc["type"] != "matching":
            return _fail("match expects a matching problem file")
        M = _matching_of(doc)
        P = matching.to_collective(M)
        c = _parse_vector(args.c) if args.c else np.zeros(P.n)
        cert = market.lindahl_from_nash(P, c)
        if cert is None:
            return _fail("shift vector is inadmissible at its Nash allocation", EXIT_INADMISSIBLE)
        pi, xi, q = matching.lindahl_to_walras(M, cert.p, cert.q)
        p_back, q_back = matching.walras_to_lindahl(M, pi, xi, q)
        payload = _base("walras_matching", digest, args.tol or EPS_LP)
        payload.update(
            {
                "pi": pi.tolist(),
                "xi": xi.tolist(),
                "q": q.tolist(),
                "payoffs": cert.payoffs.tolist(),
                "p": p_back.tolist(),
                "lints": matching.price_coherence_lint(M, cert.p, cert.q),
                "round_trip_payoff_gap": float(
                    np.abs(P.u @ q_back - cert.payoffs).max()
                ),
            }
        )
        _emit(payload, args.out)
        return EXIT_OK
    except (ValueError, OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
        return _fail(str(exc))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ccm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("problem")
        p.add_argument("--out", default=None)
        p.add_argument("--tol", type=float, default=None)

    p_solve = sub.add_parser("solve", help="solve for a Lindahl equilibrium")
    common(p_solve)
    p_solve.add_argument("--c", default=None, help="utility shift vector, comma separated")
    p_solve.add_argument("--sweep", type=int, default=None, help="sweep grid steps per axis")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="re-check a certificate")
    common(p_verify)
    p_verify.add_argument("certificate")
    p_verify.set_defaults(func=cmd_verify)

    p_eq = sub.add_parser("equitable", help="equitable-set membership")
    common(p_eq)
    p_eq.add_argument("--point", required=True, help="payoff vector, comma separated")
    p_eq.add_argument("--grid", type=int, default=64)
    p_eq.set_defaults(func=cmd_equitable)

    p_nash = sub.add_parser("nash", help="Nash allocation / bargaining point")
    common(p_nash)
    p_nash.set_defaults(func=cmd_nash)

    p_com = sub.add_parser("commodify", help="realize a bargaining set as an economy")
    common(p_com)
    p_com.add_argument("--mode", choices=["two", "general"], default="two")
    p_com.set_defaults(func=cmd_commodify)

    p_match = sub.add_parser("match", help="matching pipeline with both verifications")
    common(p_match)
    p_match.add_argument("--c", default=None)
    p_match.set_defaults(func=cmd_match)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
