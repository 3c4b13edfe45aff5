"""Declarative scenarios: JSON in, residual report out."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .algebra import Signature
from .fields import (
    FieldError,
    FormField,
    SpinorField,
    constant_spinor_field,
    polynomial_field,
    scalar_polynomial,
    spinor_polynomial_field,
)
from .gauge import GaugePotential, gauge_section
from .geometry import Geometry, certify, make_geometry
from .operators import (
    Context,
    EquationId,
    OperatorSpec,
    OpKind,
    conformal_cky,
    conformal_potential,
    pipeline,
    residual,
    validate_pipeline,
)
from .spin import twistor_ansatz

_HERE = Path(__file__).resolve().parent
DEFAULT_TOLERANCE = 1e-9
CERTIFY_TOLERANCE = 1e-9


class ScenarioError(ValueError):
    """Scenario is well-formed JSON but cannot be built (exit code 2)."""


def load_schema(name: str = "scenario") -> dict:
    return json.loads((_HERE / "schemas" / f"{name}.schema.json").read_text(encoding="utf-8"))


def validate(doc: dict, name: str = "scenario"):
    jsonschema.validate(doc, load_schema(name))


def bundled_scenarios() -> dict[str, Path]:
    return {p.stem: p for p in sorted((_HERE / "scenarios").glob("*.json"))}


def read_document(path_or_name: str) -> dict:
    path = Path(path_or_name)
    if not path.exists():
        bundled = bundled_scenarios()
        if path_or_name not in bundled:
            raise FileNotFoundError(path_or_name)
        path = bundled[path_or_name]
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _complex_list(values) -> np.ndarray:
    return np.array([complex(v[0], v[1]) if isinstance(v, list) else complex(v) for v in values])


def sample_points(g: Geometry, count: int, seed: int, radius: float):
    """Uniform points in [-radius, radius]^n inside the chart domain."""
    rng = np.random.default_rng(seed)
    pts, rejected = [], 0
    while len(pts) < count:
        x = rng.uniform(-radius, radius, size=g.n)
        if g.in_domain(x):
            pts.append(tuple(float(v) for v in x))
        else:
            rejected += 1
            if rejected > 1000 * (count + 1):
                raise ScenarioError("could not sample points inside the chart domain")
    return pts, rejected


@dataclass
class Scenario:
    doc: dict
    sig: Signature
    geometry: Geometry
    ctx: Context
    fields: dict = field(default_factory=dict)

    @classmethod
    def build(cls, doc: dict) -> "Scenario":
        validate(doc)
        sig = Signature(tuple(doc["signature"]))
        g = make_geometry(sig, doc["geometry"])
        self = cls(doc, sig, g, Context(g, gamma=doc.get("gamma", 0.0), mass=doc.get("mass", 0.0)))
        self._pending = dict(doc.get("fields", {}))
        gspec = doc.get("gauge")
        if gspec is not None:
            imag = gspec.get("imaginary", False)
            if "potential" in gspec:
                try:
                    pot = GaugePotential.polynomial(sig, gspec["potential"], imag)
                except FieldError as exc:
                    raise ScenarioError(f"gauge potential: {exc}") from exc
                if pot.field.grades and pot.field.grades != {1}:
                    raise ScenarioError("gauge potential must be a 1-form")
            else:
                pot = GaugePotential.exact(g, self.resolve(gspec["exact"], FormField), imag)
            self.ctx.gauge = pot
            self.ctx.charge = gspec.get("ingredient_charge", 0.0)
        for name in list(self._pending):
            self.resolve(name)
        return self

    def resolve(self, name: str, kind=None):
        if name not in self.fields:
            if name not in self._pending:
                raise ScenarioError(f"unknown field {name!r}")
            spec = self._pending.pop(name)
            self.fields[name] = None  # cycle guard
            try:
                self.fields[name] = self._make(name, spec)
            except FieldError as exc:
                raise ScenarioError(f"field {name!r}: {exc}") from exc
        f = self.fields[name]
        if f is None:
            raise ScenarioError(f"field {name!r} refers to itself")
        if kind is not None and not isinstance(f, kind):
            want = "form" if kind is FormField else "spinor"
            raise ScenarioError(f"field {name!r} must be a {want} field")
        return f

    def _make(self, name: str, spec: dict):
        sig, g = self.sig, self.geometry
        k = spec["kind"]
        if k == "form":
            return polynomial_field(sig, spec["components"], name=name)
        if k == "scalar":
            return scalar_polynomial(sig, spec["monomials"], name=name)
        if k == "twistor":
            return twistor_ansatz(g, _complex_list(spec["phi0"]), _complex_list(spec["phi1"]))
        if k == "constant-spinor":
            return constant_spinor_field(sig, _complex_list(spec["value"]), name=name)
        if k == "spinor-polynomial":
            return spinor_polynomial_field(sig, spec["components"], name=name)
        if k == "conformal-cky":
            return conformal_cky(g, self.resolve(spec["of"], FormField))
        if k == "conformal-potential":
            return conformal_potential(g, self.resolve(spec["of"], FormField))
        if k == "gauge-section":
            if self.ctx.gauge is None or getattr(self.ctx.gauge, "chi", None) is None:
                raise ScenarioError("gauge-section needs an exact gauge potential")
            return gauge_section(self.ctx.gauge, self.resolve(spec["of"], SpinorField))
        raise ScenarioError(f"unknown field kind {k!r}")  # pragma: no cover

    def stages(self, specs) -> list[OperatorSpec]:
        out = []
        for s in specs:
            if "middle_form" in s:
                out.append(OperatorSpec(OpKind(s["op"]),
                                        middle_form=self.resolve(s["middle_form"], FormField)))
            else:
                out.append(OperatorSpec(OpKind(s["op"]), self.resolve(s["ingredient"], FormField)))
        return out


def _check_name(i: int, spec: dict) -> str:
    return spec.get("name", f"check-{i}")


def _verdict(norms, tol, expect) -> dict:
    worst = max(norms, default=0.0)
    verdict = "pass" if worst <= tol else "fail"
    return {"norms": norms, "max_norm": worst, "tolerance": tol, "verdict": verdict,
            "expect": expect, "ok": verdict == expect}


def run_check(sc: Scenario, i: int, spec: dict, points, scale: float) -> dict:
    ctx = sc.ctx
    expect = spec.get("expect", "pass")
    if "sw" in spec:
        from .seiberg_witten import candidate_report

        sw = spec["sw"]
        tol = sw.get("tolerance", DEFAULT_TOLERANCE) * scale
        pts = points[: sw["points"]] if "points" in sw else points
        rep = candidate_report(ctx, sc.resolve(sw["input"], SpinorField),
                               sc.stages(sw["candidate"]), pts, tol)
        cur = rep["current"]
        out = _verdict(cur["norms"], tol, expect)
        out.update({"name": _check_name(i, spec), "equation": "VANISHING_CURRENT",
                    "dirac_residual": rep["dirac_residual"],
                    "curvature_norm": rep["curvature_norm"],
                    "max_component": cur["max_component"],
                    "sw_solution": rep["solution"], "orientation": "e1234"})
        return out
    tol = spec.get("tolerance", DEFAULT_TOLERANCE) * scale
    if "pipeline" in spec:
        stages = sc.stages(spec["pipeline"])
        psi = sc.resolve(spec["input"], SpinorField)
        final = validate_pipeline(stages, ctx, psi)
        eq = EquationId.parse(spec["equation"]) if "equation" in spec else final
        subject = pipeline(stages, psi, ctx)
        desc = [s["op"] for s in spec["pipeline"]]
    else:
        eq = EquationId.parse(spec["equation"])
        subj = spec["subject"]
        if eq.subject == "pair":
            if not isinstance(subj, list):
                raise ScenarioError(f"{eq.name} needs a [form, spinor] subject pair")
            subject = (sc.resolve(subj[0], FormField), sc.resolve(subj[1], SpinorField))
        else:
            if isinstance(subj, list):
                raise ScenarioError(f"{eq.name} takes a single subject")
            subject = sc.resolve(subj, SpinorField if eq.subject == "spinor" else FormField)
        desc = None
    norms = [residual(eq, ctx, subject, p).norm for p in points]
    out = _verdict(norms, tol, expect)
    out.update({"name": _check_name(i, spec), "equation": eq.name})
    if desc is not None:
        out["pipeline"] = desc
    return out


def certification(g: Geometry, count: int, seed: int, tol: float = CERTIFY_TOLERANCE) -> dict:
    rep = certify(g, points=count, seed=seed)
    identities = {k: {"norm": v, "pass": v <= tol} for k, v in rep["worst"].items()}
    return {"geometry": rep["geometry"], "points": rep["points"], "rejected": rep["rejected"],
            "tolerance": tol, "identities": identities,
            "status": "pass" if all(x["pass"] for x in identities.values()) else "fail"}


def run_scenario(doc: dict, points: int | None = None, seed: int | None = None,
                 tolerance_scale: float = 1.0) -> dict:
    sc = Scenario.build(doc)
    pspec = doc.get("points", {})
    count = points if points is not None else pspec.get("count", 8)
    seed = seed if seed is not None else pspec.get("seed", 0)
    radius = pspec.get("radius", 0.5)
    pts, rejected = sample_points(sc.geometry, count, seed, radius)
    checks = [run_check(sc, i, c, pts, tolerance_scale) for i, c in enumerate(doc.get("checks", []))]
    return {
        "scenario": doc.get("name", ""),
        "schema_version": doc["schema_version"],
        "environment": {
            "seed": seed, "points": count, "radius": radius, "rejected": rejected,
            "tolerance_scale": tolerance_scale,
            "certification": certification(sc.geometry, min(count, 10), seed),
        },
        "checks": checks,
        "passed": all(c["ok"] for c in checks),
    }
