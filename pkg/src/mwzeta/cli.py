"""Command-line entry point: parse a curve, run the pipeline, print JSON.

Exit codes: 0 success, 2 invalid input, 3 precision failure, 4 validation failure.
"""

from __future__ import annotations

import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import click

from .errors import InvalidCurve, InvalidInput, MWZetaError, PrecisionExhausted
from .padic import FieldSpec, KCoefficient

EXIT_OK, EXIT_INPUT, EXIT_PRECISION, EXIT_VALIDATION = 0, 2, 3, 4

log = logging.getLogger("mwzeta")


@dataclass
class JobSpec:
    p: int
    n: int = 1
    modulus: list | None = None
    lambdas: list | None = None
    Q: list | None = None
    p1: int | None = None
    p2: int | None = None
    empirical: bool = False
    verify: bool = False
    emit_basis: bool = False
    r_max: int | None = None
    method: str = "ode"
    extra: dict = dc_field(default_factory=dict)

    @classmethod
    def from_mapping(cls, d: dict) -> "JobSpec":
        known = {k: d[k] for k in ("p", "n", "modulus", "lambdas", "Q", "p1", "p2", "verify",
                                   "r_max", "method") if k in d}
        if "empirical_precision" in d:
            known["empirical"] = bool(d["empirical_precision"])
        if "emit_basis" in d:
            known["emit_basis"] = bool(d["emit_basis"])
        if "p" not in known:
            raise InvalidInput("job needs a prime p")
        return cls(**known)

    def field(self) -> FieldSpec:
        if not isinstance(self.p, int) or self.p < 2:
            raise InvalidInput("p must be a prime")
        if self.p == 2:
            raise InvalidInput("odd characteristic required")
        return FieldSpec.make(self.p, self.n, self.modulus)

    def residues(self, field: FieldSpec) -> list:
        if (self.lambdas is None) == (self.Q is None):
            raise InvalidInput("give exactly one of lambdas or Q")
        gf = field.gf
        if self.lambdas is not None:
            res = [gf.elt(x) for x in self.lambdas]
        else:
            coeffs = [gf.elt(c) for c in self.Q]
            while coeffs and not any(coeffs[-1]):
                coeffs.pop()
            if not coeffs or coeffs[-1] != gf.one:
                raise InvalidInput("Q must be monic")
            res = gf.roots(coeffs)
            if len(res) != len(coeffs) - 1:
                raise InvalidInput("Q does not split over F_q")
        if len(set(res)) != len(res):
            raise InvalidCurve("ramification points not distinct")
        return res


def _load_job_file(path: str) -> dict:
    text = Path(path).read_text()
    if path.endswith(".toml"):
        try:
            import tomllib
        except ModuleNotFoundError:  # python < 3.11
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def _coeff_json(x: KCoefficient) -> list:
    if x.is_zero():
        return [None, 0]
    u = x.field.ring(x.relprec).reduce(x.unit)
    return [x.val, list(u) if isinstance(u, tuple) else int(u)]


def basis_to_json(basis) -> dict:
    """Centers in basis order; per element, per center, both Y-degrees."""
    curve = basis.curve
    centers = [str(c) for c in basis.centers]
    elems = []
    kinds = ["w" if any(e is w for w in basis.w_part) else "y" for e in basis.elements]
    for kind, el in zip(kinds, basis.elements):
        comps = []
        for c in basis.centers:
            for y in range(2):
                s = el[c][y]
                co = [_coeff_json(x) for x in s.kcoeffs()]
                while co and co[-1][0] is None:
                    co.pop()
                comps.append({"center": str(c), "y_degree": y, "prec": s.prec, "coefficients": co})
        elems.append({"kind": kind, "components": comps})
    return {"p": curve.field.p, "n": curve.field.n, "modulus": list(curve.field.modulus),
            "centers": centers, "P1": basis.P1, "elements": elems,
            "w_part": kinds.count("w"), "y_part": kinds.count("y")}


def parse_basis_json(d: dict) -> dict:
    """Validate and normalize a dumped basis (inverse of ``basis_to_json`` on its output)."""
    for key in ("centers", "elements", "P1"):
        if key not in d:
            raise InvalidInput(f"basis dump lacks '{key}'")
    out = dict(d)
    out["elements"] = [{"kind": e["kind"],
                        "components": [{"center": c["center"], "y_degree": int(c["y_degree"]),
                                        "prec": int(c["prec"]),
                                        "coefficients": [list(x) for x in c["coefficients"]]}
                                       for c in e["components"]]}
                       for e in d["elements"]]
    return out


def run_job(job: JobSpec) -> tuple[int, dict]:
    """Run one job; returns (exit code, JSON payload)."""
    from .basis import compute_basis
    from .frobenius import empirical_precisions, required_precisions
    from .isocrystal import CurveData
    from .zeta import compute_zeta

    try:
        field = job.field()
        res = job.residues(field)
        curve = CurveData(field, res)
    except MWZetaError as e:
        return EXIT_INPUT, {"error": type(e).__name__, "message": str(e)}
    except (ValueError, TypeError) as e:
        return EXIT_INPUT, {"error": "InvalidInput", "message": str(e)}
    g = curve.g
    if job.empirical or job.p1 is not None:
        policy = empirical_precisions(g, field.p, field.n, job.p1, job.p2)
    else:
        policy = required_precisions(g, field.p, field.n)
        if job.p2 is not None:
            policy = required_precisions(g, field.p, field.n, safety=max(0, job.p2 - policy.P2 + 2))
    try:
        if job.emit_basis:
            t = time.perf_counter()
            basis = compute_basis(curve, policy.P1, policy.working)
            payload = basis_to_json(basis)
            payload["timings"] = {"basis": time.perf_counter() - t}
            return EXIT_OK, payload
        result = compute_zeta(curve, policy, job.r_max, job.method, oracle=job.verify)
    except PrecisionExhausted as e:
        return EXIT_PRECISION, {"error": type(e).__name__, "message": str(e)}
    except MWZetaError as e:
        return EXIT_INPUT, {"error": type(e).__name__, "message": str(e)}
    payload = result.to_json()
    return (EXIT_OK if result.ok else EXIT_VALIDATION), payload


def _parse_list(text):
    if text is None:
        return None
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return [int(x) for x in text.replace(";", ",").split(",") if x.strip()]


@click.command(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("--job", "job_file", type=click.Path(exists=True, dir_okay=False), help="JSON or TOML job file.")
@click.option("--p", type=int, help="Odd prime p.")
@click.option("--n", type=int, default=None, help="Degree of F_q over F_p.")
@click.option("--modulus", help="Little-endian coefficients of the F_q modulus, e.g. '[1,0,1]'.")
@click.option("--lambdas", help="Ramification points as JSON, e.g. '[0,1,4]' or '[[0,1],[1,1]]'.")
@click.option("--Q", "Q", help="Coefficients of the monic polynomial Q over F_q (ascending), as JSON.")
@click.option("--p1", type=int, help="Analytic precision (implies empirical mode).")
@click.option("--p2", type=int, help="p-adic digits wanted on the Frobenius matrix.")
@click.option("--empirical-precision", "empirical", is_flag=True, help="Small precisions checked by validation.")
@click.option("--verify", is_flag=True, help="Compare with brute-force point counts.")
@click.option("--emit-basis", is_flag=True, help="Dump the cohomology basis instead of the zeta function.")
@click.option("--json", "as_json", is_flag=True, help="Print JSON only.")
@click.option("--r-max", type=int, help="Number of point counts to report.")
@click.option("--method", type=click.Choice(["ode", "direct"]), default="ode", help="Local Frobenius method.")
@click.option("--log-level", default=None, help="Logging level (or MWZETA_LOG).")
def main(job_file, p, n, modulus, lambdas, Q, p1, p2, empirical, verify, emit_basis, as_json, r_max,
         method, log_level):
    """Zeta function of y^2 = Q(x) over F_q with Q split and squarefree."""
    level = log_level or os.environ.get("MWZETA_LOG", "WARNING")
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.WARNING), stream=sys.stderr)
    data = _load_job_file(job_file) if job_file else {}
    flags = {"p": p, "n": n, "modulus": _parse_list(modulus), "lambdas": _parse_list(lambdas),
             "Q": _parse_list(Q), "p1": p1, "p2": p2, "r_max": r_max}
    data.update({k: v for k, v in flags.items() if v is not None})
    data.setdefault("n", 1)
    data["empirical_precision"] = empirical or data.get("empirical_precision", False)
    data["verify"] = verify or data.get("verify", False)
    data["emit_basis"] = emit_basis or data.get("emit_basis", False)
    data["method"] = method if method != "ode" else data.get("method", "ode")
    try:
        job = JobSpec.from_mapping(data)
    except (InvalidInput, TypeError) as e:
        click.echo(json.dumps({"error": "InvalidInput", "message": str(e)}), err=True)
        sys.exit(EXIT_INPUT)
    code, payload = run_job(job)
    if code in (EXIT_INPUT, EXIT_PRECISION):
        click.echo(json.dumps(payload), err=True)
        sys.exit(code)
    if as_json or job.emit_basis:
        click.echo(json.dumps(payload, indent=None if as_json else 2))
    else:
        click.echo(f"charpoly: {payload['charpoly']}")
        click.echo(f"counts:   {payload['counts']}")
        click.echo(f"valid:    {payload['validation']}")
    sys.exit(code)


if __name__ == "__main__":
    main()
