"""Command-line entry point.

Exit codes: 0 when every check passes, 1 when a check fails, 2 on usage or
input errors.  Defaults for ``--seed`` and ``--jobs`` can be overridden with
``SIGNED_IWASAWA_SEED`` and ``SIGNED_IWASAWA_JOBS``.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import re
import sys
import warnings
from typing import Optional, Sequence

import numpy as np

from . import admissible_arithmetic as adm
from . import ideals_and_harness as ih
from . import selftest
from . import signed_decomposition as sd
from . import stabilization as st
from .iwasawa_rings import RingParams, TruncatedSeries, omega, omega_factors

ENV_PREFIX = "SIGNED_IWASAWA_"


class InputError(ValueError):
    """Bad user input; reported with exit code 2."""


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(ENV_PREFIX + name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise InputError("environment variable %s%s must be an integer, got %r" % (ENV_PREFIX, name, raw))


# -- polynomial parsing --------------------------------------------------------------

_TERM = re.compile(r"^(?:(\d+)\s*\*?\s*)?(X(?:\s*\^\s*(\d+))?)?$")


def parse_poly(text: str) -> list:
    """Coefficient list from e.g. ``"1 + 2*X - X^3"``."""
    src = text.replace(" ", "")
    if not src:
        raise InputError("empty polynomial")
    if src[0] not in "+-":
        src = "+" + src
    coeffs: dict = {}
    for sign, body in re.findall(r"([+-])([^+-]*)", src):
        m = _TERM.match(body)
        if not body or not m or (m.group(1) is None and m.group(2) is None):
            raise InputError("cannot parse term %r in %r" % (sign + body, text))
        c = int(m.group(1)) if m.group(1) else 1
        if m.group(2) is None:
            k = 0
        else:
            k = int(m.group(3)) if m.group(3) else 1
        coeffs[k] = coeffs.get(k, 0) + (c if sign == "+" else -c)
    out = [0] * (max(coeffs) + 1)
    for k, c in coeffs.items():
        out[k] = c
    return out


# -- IO helpers ----------------------------------------------------------------------

def _load_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError("cannot read %s: %s" % (path, exc.strerror))
    except json.JSONDecodeError as exc:
        raise InputError("malformed JSON in %s: %s" % (path, exc))


def _emit(obj, out: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _params(args, ext: int = 1) -> RingParams:
    try:
        return RingParams(args.p, args.n, ext)
    except ValueError as exc:
        raise InputError("--p/--n: %s" % exc)


# -- commands ------------------------------------------------------------------------

def cmd_omega(args) -> int:
    if args.m < 0:
        raise InputError("--m must be >= 0")
    f = omega_factors(_params(args, args.ext), args.m)
    out = f.to_json()
    out["p"], out["n"] = args.p, args.n
    _emit(out, args.out)
    return 0


def cmd_theta_synth(args) -> int:
    params = _params(args)
    if args.M < 1:
        raise InputError("--M must be >= 1")
    if args.mode == "pm":
        first = TruncatedSeries(params, parse_poly(args.plus))
        second = TruncatedSeries(params, parse_poly(args.minus))
        if args.ap % params.N:
            raise InputError("--ap must be 0 mod p^n for --mode pm")
        fam = sd.pm_synthesize(first, second, params, args.M)
    else:
        first = TruncatedSeries(params, parse_poly(args.sharp))
        second = TruncatedSeries(params, parse_poly(args.flat))
        fam = sd.sprung_synthesize(first, second, params, args.ap, args.M)
    _emit(fam.to_json(), args.out)
    return 0


def _load_family(path: str) -> sd.ThetaFamily:
    try:
        return sd.ThetaFamily.from_json(_load_json(path))
    except KeyError as exc:
        raise InputError("family JSON is missing field %s" % exc)


def cmd_theta_decompose(args) -> int:
    fam = _load_family(args.family)
    mode = args.mode
    if mode == "auto":
        mode = "pm" if fam.ap_mod == 0 else "sharpflat"
    try:
        pair = sd.pm_extract(fam) if mode == "pm" else sd.sprung_decompose(fam, args.M)
    except (sd.NotSignedFamily, sd.SignConventionViolation, sd.NoSharpFlatDecomposition) as exc:
        _emit({"passed": False, "error": type(exc).__name__, "message": str(exc)}, args.out)
        return 1
    out = pair.to_json()
    out["passed"] = True
    _emit(out, args.out)
    return 0


def cmd_stabilize(args) -> int:
    fam = _load_family(args.family)
    try:
        field = st.quad_field(fam.a_p, fam.params.p)
    except st.WeilBoundViolation as exc:
        raise InputError(str(exc))
    roots = ("alpha", "beta") if args.root == "both" else (args.root,)
    levels = range(fam.M + 1) if args.m is None else [args.m]
    out = {"field": field.to_json(), "stabilized": [], "checks": []}
    ok = True
    for root in roots:
        for m in levels:
            out["stabilized"].append(st.stabilize(fam, field, root, m).to_json())
        for m in range(fam.M):
            rep = st.check_projection_compat(fam, field, root, m)
            ok &= rep.passed
            out["checks"].append(rep.to_json())
    if fam.M >= 1:
        rep = st.check_linear_relations(fam, field)
        ok &= rep.passed
        out["checks"].append(rep.to_json())
    out["passed"] = bool(ok)
    _emit(out, args.out)
    return 0 if ok else 1


def cmd_identity(args) -> int:
    try:
        field = st.quad_field(args.ap, args.p)
    except (st.WeilBoundViolation, ValueError) as exc:
        raise InputError("--ap/--p: %s" % exc)
    cases = ("inert", "split") if args.case == "both" else (args.case,)
    reps = []
    for case in cases:
        fn = st.leading_identity_inert if case == "inert" else st.leading_identity_split
        reps.append(fn(field).to_json())
    ok = all(r["passed"] for r in reps)
    _emit({"field": field.to_json(), "reports": reps, "passed": ok}, args.out)
    return 0 if ok else 1


def cmd_local_selftest(args) -> int:
    _params(args)
    if args.rho < 2:
        raise InputError("--rho must be >= 2")
    res = selftest.local_selftest(args.seed, args.p, args.n, args.M, args.rho, args.trials)
    _emit(res, args.out)
    return 0 if res["passed"] else 1


def _load_curve(args) -> adm.CurveData:
    spec = args.curve
    if spec.endswith(".json") or os.path.isfile(spec):
        obj = _load_json(spec)
        try:
            return adm.CurveData.from_json(obj)
        except KeyError as exc:
            raise InputError("curve JSON is missing field %s" % exc)
    try:
        coeffs = tuple(int(x) for x in spec.split(","))
    except ValueError:
        raise InputError("--curve must be a1,a2,a3,a4,a6 or a JSON file")
    if len(coeffs) != 5:
        raise InputError("--curve needs five coefficients, got %d" % len(coeffs))
    if args.conductor is not None:
        return adm.CurveData(coeffs, args.conductor)
    curve = adm.CurveData(coeffs)
    # without a conductor, assume semistability: N0 = radical of the discriminant
    fac = {q: 1 for q in adm._factor(abs(curve.discriminant))}
    print("warning: no --conductor given; using the radical of the discriminant %s" % sorted(fac), file=sys.stderr)
    return adm.CurveData(coeffs, None, fac)


def cmd_admissible_scan(args) -> int:
    try:
        curve = _load_curve(args)
    except ValueError as exc:
        raise InputError("--curve: %s" % exc)
    try:
        K = adm.QuadFieldData.build(args.disc, curve)
    except ValueError as exc:
        raise InputError("--disc: %s" % exc)
    if args.p < 5 or not adm.is_prime(args.p):
        raise InputError("--p must be a prime >= 5")
    if args.n < 1:
        raise InputError("--n must be >= 1")
    if args.max > adm.ELL_CAP:
        raise InputError("--max must be <= 2^24")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        entries = adm.scan_admissible(curve, K, args.p, args.n, args.max, args.jobs)
    for w in caught:
        print("warning: %s" % w.message, file=sys.stderr)
    _emit([e.to_json() for e in entries], args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["ell", "eps", "degenerate"])
            for e in entries:
                wr.writerow([e.ell, e.eps, int(e.degenerate)])
    return 0


def _series_entry(x, params, mod):
    if isinstance(x, dict):
        s = TruncatedSeries.from_json(x)
        if s.params != params:
            raise InputError("matrix entry has params %r, expected %r" % (s.params, params))
        return s.reduce(mod)
    if isinstance(x, int):
        x = str(x)
    return TruncatedSeries(params, parse_poly(x), mod)


def cmd_fitting(args) -> int:
    obj = _load_json(args.matrix)
    try:
        params = RingParams(int(obj["p"]), int(obj["n"]))
        if "modulus" in obj:
            mod = tuple(int(x) for x in obj["modulus"])
        else:
            mod = omega(params, int(obj["M"]))
        entries = [[_series_entry(x, params, mod) for x in row] for row in obj["entries"]]
    except KeyError as exc:
        raise InputError("matrix JSON is missing field %s" % exc)
    I = ih.fitting_ideal(ih.PresentationMatrix(entries))
    _emit(I.to_json(), args.out)
    return 0


def cmd_harness_verify(args) -> int:
    sysb = ih.BipartiteSystem.from_json(_load_json(args.system))
    try:
        rep = ih.verify_bipartite(sysb)
    except ih.MalformedSystem as exc:
        raise InputError("system: %s" % exc)
    _emit(rep.to_json(), args.out)
    return 0 if rep.passed else 1


def cmd_harness_build(args) -> int:
    params = _params(args)
    try:
        primes = [int(q) for q in args.primes.split(",") if q]
    except ValueError:
        raise InputError("--primes must be a comma-separated list of integers")
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    sysb = ih.build_bipartite(rng, params, omega(params, args.M), primes, args.r)
    _emit(sysb.to_json(), args.out)
    return 0


def cmd_selftest_all(args) -> int:
    res = selftest.run_all(args.seed, args.jobs)
    _emit(res, args.out)
    return 0 if res["passed"] else 1


# -- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    seed = _env_int("SEED", 0)
    jobs = _env_int("JOBS", 1)
    top = argparse.ArgumentParser(prog="signed-iwasawa", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def common(sp, ring=True, p_default=None):
        if ring:
            sp.add_argument("--p", type=int, required=p_default is None, default=p_default)
            sp.add_argument("--n", type=int, default=1)
        sp.add_argument("--out", help="write JSON here instead of stdout")
        return sp

    sp = common(sub.add_parser("omega", help="cyclotomic factors at level m"))
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--ext", type=int, default=1, choices=(1, 2))
    sp.set_defaults(func=cmd_omega)

    theta = sub.add_parser("theta", help="theta families").add_subparsers(dest="action", required=True)
    sp = common(theta.add_parser("synth", help="build a family from signed components"))
    sp.add_argument("--mode", choices=("pm", "sharpflat"), default="pm")
    sp.add_argument("--M", type=int, default=2)
    sp.add_argument("--ap", type=int, default=0)
    sp.add_argument("--plus", default="0")
    sp.add_argument("--minus", default="0")
    sp.add_argument("--sharp", default="0")
    sp.add_argument("--flat", default="0")
    sp.set_defaults(func=cmd_theta_synth)
    sp = common(theta.add_parser("decompose", help="signed components of a family"), ring=False)
    sp.add_argument("--family", required=True, help="family JSON file, or - for stdin")
    sp.add_argument("--mode", choices=("auto", "pm", "sharpflat"), default="auto")
    sp.add_argument("--M", type=int, default=None)
    sp.set_defaults(func=cmd_theta_decompose)

    sp = common(sub.add_parser("stabilize", help="stabilized elements of a family"), ring=False)
    sp.add_argument("--family", required=True)
    sp.add_argument("--root", choices=("alpha", "beta", "both"), default="both")
    sp.add_argument("--m", type=int, default=None)
    sp.set_defaults(func=cmd_stabilize)

    sp = common(sub.add_parser("identity", help="leading-term identities"), ring=False)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--ap", type=int, required=True)
    sp.add_argument("--case", choices=("inert", "split", "both"), default="both")
    sp.set_defaults(func=cmd_identity)

    local = sub.add_parser("local", help="local point systems").add_subparsers(dest="action", required=True)
    sp = common(local.add_parser("selftest", help="generate a system and check it"), p_default=5)
    sp.add_argument("--M", type=int, default=2)
    sp.add_argument("--rho", type=int, default=2)
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--trials", type=int, default=100)
    sp.set_defaults(func=cmd_local_selftest)

    admp = sub.add_parser("admissible", help="admissible primes").add_subparsers(dest="action", required=True)
    sp = common(admp.add_parser("scan", help="enumerate n-admissible primes"))
    sp.add_argument("--curve", required=True, help="a1,a2,a3,a4,a6 or a curve JSON file")
    sp.add_argument("--conductor", type=int, default=None)
    sp.add_argument("--disc", type=int, required=True)
    sp.add_argument("--max", type=int, default=10**4)
    sp.add_argument("--jobs", type=int, default=jobs)
    sp.add_argument("--csv", default=None)
    sp.set_defaults(func=cmd_admissible_scan)

    sp = common(sub.add_parser("fitting", help="Fitting ideal of a presentation"), ring=False)
    sp.add_argument("--matrix", required=True)
    sp.set_defaults(func=cmd_fitting)

    harness = sub.add_parser("harness", help="bipartite systems").add_subparsers(dest="action", required=True)
    sp = common(harness.add_parser("verify", help="check reciprocity laws on every edge"), ring=False)
    sp.add_argument("--system", required=True)
    sp.set_defaults(func=cmd_harness_verify)
    sp = common(harness.add_parser("build", help="constructively propagated random system"))
    sp.add_argument("--M", type=int, default=2)
    sp.add_argument("--primes", required=True)
    sp.add_argument("--r", type=int, default=None)
    sp.add_argument("--seed", type=int, default=seed)
    sp.set_defaults(func=cmd_harness_build)

    sp = common(sub.add_parser("selftest-all", help="every property suite"), ring=False)
    sp.add_argument("--seed", type=int, default=seed)
    sp.add_argument("--jobs", type=int, default=jobs)
    sp.set_defaults(func=cmd_selftest_all)
    return top


def run(argv: Optional[Sequence[str]] = None) -> int:
    try:
        parser = build_parser()
    except InputError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (InputError, ValueError, KeyError, TypeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
