"""Command line interface: gen, audit, roundtrip, construct, class.

Every run emits a report, machine-readable as JSON or as human-readable
text.  Each asserted bound carries the inequality it checks as its
anchor string.  Exit codes: 0 all checks pass, 1 some bound violated,
2 input/schema error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import families as fam
from . import io_formats as iof
from .complexes import NerveTree, build_star_cover, generators
from .cocycles import (
    Morphism,
    flatness,
    gauge_constant,
    hom_defect,
    pullback,
    triangle_defect,
    y_flatness,
)
from .constructions import (
    build_double,
    covering_pushforward,
    curvature_defect,
    fold_to_relative,
    holonomy_to_cech,
    unfold_to_double,
)
from .errors import AlmostFlatError, NotSurface, SchemaError, UnknownFamily
from .quasireps import QuasiRep, bold_alpha, bold_beta, dist_rep, rep_defect
from .relative import (
    StablyRelativeCocycle,
    build_cylinder,
    cylinder_flatten,
    dist_bundle,
    k_class,
    measure,
    normalize_relative,
)
from .unitary import exp_skew, random_skew

GEN_FAMILIES = (
    "circle",
    "filled_triangle",
    "torus7",
    "disk_pair",
    "annulus_one_boundary",
    "doubled_disk",
    "cover2_circle",
    "clutching_chern",
    "almost_commuting",
)


class Report:
    def __init__(self, command: str, provenance: dict):
        self.command = command
        self.provenance = provenance
        self.measured: dict = {}
        self.checks: list = []
        self.constants: dict = {}

    def check(self, name: str, anchor: str, measured: float, bound: float) -> bool:
        ok = bool(measured <= bound)
        self.checks.append(
            {
                "name": name,
                "anchor": anchor,
                "measured": float(measured),
                "bound": float(bound),
                "pass": ok,
            }
        )
        return ok

    @property
    def passed(self) -> bool:
        return all(c["pass"] for c in self.checks)

    def to_document(self) -> dict:
        payload = {
            "command": self.command,
            "provenance": self.provenance,
            "measured": self.measured,
            "constants": self.constants,
            "checks": self.checks,
            "pass": self.passed,
        }
        return iof.document("report", payload)

    def render_text(self) -> str:
        lines = [f"[{self.command}] report"]
        for key in sorted(self.measured):
            lines.append(f"  measured {key} = {self.measured[key]:.6e}")
        for key in sorted(self.constants):
            lines.append(f"  constant {key} = {self.constants[key]}")
        for c in self.checks:
            verdict = "pass" if c["pass"] else "FAIL"
            lines.append(
                f"  [{verdict}] {c['name']}: {c['measured']:.6e} <= {c['bound']:.6e}"
                f"   ({c['anchor']})"
            )
        lines.append(f"  overall: {'pass' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def emit(report: Report, args) -> int:
    if args.format == "json":
        print(json.dumps(report.to_document(), sort_keys=True, indent=1))
    else:
        print(report.render_text())
    return 0 if report.passed else 1


def provenance_for(paths, seed=None) -> dict:
    out = {"version": iof.SCHEMA_VERSION}
    if seed is not None:
        out["seed"] = seed
    out["inputs"] = {os.path.basename(p): iof.sha256_of(p) for p in paths}
    return out


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    family = args.family
    if family not in GEN_FAMILIES:
        raise UnknownFamily(f"unknown family {family!r} (choose from {GEN_FAMILIES})")
    written = []

    def write(name, doc):
        path = os.path.join(args.out, name)
        iof.dump_document(doc, path)
        written.append(path)

    if family == "clutching_chern":
        pair, cover, f = fam.clutching_chern(args.k)
        payload = iof.bundle_payload(
            f, iof.complex_payload(pair, basepoint=0, family="disk_pair"),
            family="clutching_chern",
        )
        write(f"clutching_chern_{args.k}.json", iof.document("relative_bundle", payload))
    elif family == "almost_commuting":
        pi, _ = fam.almost_commuting(args.d)
        write(f"almost_commuting_{args.d}.json", iof.document("quasirep", iof.quasirep_payload(pi)))
    elif family == "cover2_circle":
        cov = fam.cover2_circle()
        payload = iof.covering_payload(cov, iof.complex_payload(cov.base, family="circle"))
        write("cover2_circle.json", iof.document("covering", payload))
    else:
        pair, cover, tree, gens, oracle = fam.build_family(family)
        write(
            f"{family}_complex.json",
            iof.document("complex", iof.complex_payload(pair, basepoint=tree.basepoint, family=family)),
        )
        if args.eps is not None:
            f = fam.random_relative_instance(
                family, cover, tree, args.dim, args.eps, args.seed
            )
            payload = iof.bundle_payload(
                f, iof.complex_payload(pair, basepoint=tree.basepoint, family=family),
                family=family,
            )
            write(f"{family}_bundle_s{args.seed}.json", iof.document("relative_bundle", payload))

    for path in written:
        print(path)
    return 0


# ---------------------------------------------------------------------------
# audit


def cmd_audit(args) -> int:
    doc = iof.load_document(args.file)
    if doc["kind"] == "relative_bundle":
        f, pair, _ = iof.parse_bundle(doc["payload"], os.path.dirname(args.file) or ".")
        tree = NerveTree.build(build_star_cover(pair))
        report = Report("audit", provenance_for([args.file]))
        cert = measure(f)
        report.measured.update(
            {
                "eps_v1": cert.eps_v1,
                "eps_v2": cert.eps_v2,
                "eps_v0": cert.eps_v0,
                "eps_u": cert.eps_u,
                "overall": cert.overall,
            }
        )
        for name, v in (("v1", f.v1), ("v2", f.v2)):
            report.check(
                f"cocycle_identity_{name}",
                "v_mn(x) v_ns(x) = v_ms(x) at every sample",
                v.validate(),
                1e-9,
            )
            report.check(
                f"triangle_product_{name}",
                "||v_mn(x_mn) v_ns(x_ns) - v_ms(x_ms)|| <= 3*eps",
                triangle_defect(v, tree),
                3.0 * flatness(v) + 1e-9,
            )
        return emit(report, args)
    if doc["kind"] == "quasirep":
        pi = iof.parse_quasirep(doc["payload"])
        report = Report("audit", provenance_for([args.file]))
        report.measured["dim"] = pi.dim
        report.measured["n_generators"] = len(pi.gen_values)
        return emit(report, args)
    raise SchemaError(f"audit does not handle kind {doc['kind']!r}")


# ---------------------------------------------------------------------------
# roundtrip


def _family_context(family: str):
    pair, cover, tree, gens, oracle = fam.build_family(family)
    return pair, cover, tree, gens, oracle


def cmd_roundtrip(args) -> int:
    doc = iof.load_document(args.file)
    report = Report("roundtrip", provenance_for([args.file], seed=args.seed))
    if doc["kind"] == "relative_bundle":
        f, pair, cpayload = iof.parse_bundle(doc["payload"], os.path.dirname(args.file) or ".")
        cover = build_star_cover(pair)
        tree = NerveTree.build(cover)
        gens = generators(tree)
        _, fn = normalize_relative(f, tree)
        cert = measure(fn)
        p = bold_alpha(fn, tree, gens)
        g = bold_beta(p, tree, gens)
        d = dist_bundle(fn, g)
        report.measured["eps"] = cert.overall
        report.measured["roundtrip_distance"] = d
        if cert.overall > 1e-12:
            report.constants["roundtrip_ratio"] = d / cert.overall
        report.check(
            "roundtrip_distance_finite",
            "d(beta(alpha(f)), f) <= C * eps with C measured",
            d,
            max(10.0 * cert.overall, 1e-9),
        )
        try:
            k_before = k_class(f, tree)
            k_after = k_class(g, tree)
            report.measured["k_class_before"] = k_before.relative_chern
            report.measured["k_class_after"] = k_after.relative_chern
            report.check(
                "k_class_preserved",
                "relative Chern number equal before and after",
                abs(k_before.relative_chern - k_after.relative_chern),
                0.0,
            )
        except (NotSurface, AlmostFlatError):
            pass
        return emit(report, args)
    if doc["kind"] == "quasirep":
        pi = iof.parse_quasirep(doc["payload"])
        family = args.family or "torus7"
        pair, cover, tree, gens, oracle = _family_context(family)
        syms = set(pi.gen_values)
        if syms == {"a", "b"}:
            vec = fam.edge_vector_fn(family, pair)
            classes = fam.generator_classes(tree, gens, vec)
            basis = fam.lattice_basis(classes)
            mat = np.array([classes[b] for b in basis], dtype=float).T
            inv = np.linalg.inv(mat)
            coords = {
                g: tuple(int(round(x)) for x in inv @ np.array(classes[g], dtype=float))
                for g in gens.generators
            }
            pi = fam.rep_from_classes(pi.dim, coords, [pi.gen_values["a"], pi.gen_values["b"]])
        from .quasireps import alpha, beta, dist_qrep

        v = beta(pi, tree, gens)
        eps = rep_defect(pi, oracle) if syms != {"a", "b"} else flatness(v) / 8.0
        pi2 = alpha(v, tree, gens)
        d = dist_qrep(pi, pi2, gens.generators)
        report.measured["roundtrip_distance"] = d
        report.measured["beta_flatness"] = flatness(v)
        report.check(
            "alpha_beta_roundtrip",
            "d(alpha(beta(pi)), pi) <= C * eps with C measured",
            d,
            max(10.0 * max(eps, 1e-12), 1e-9),
        )
        return emit(report, args)
    raise SchemaError(f"roundtrip does not handle kind {doc['kind']!r}")


# ---------------------------------------------------------------------------
# construct


def cmd_construct(args) -> int:
    report = Report(f"construct:{args.sub}", {"version": iof.SCHEMA_VERSION, "seed": args.seed})
    os.makedirs(args.out, exist_ok=True)

    if args.sub == "double":
        doc = iof.load_document(args.file)
        f, pair, cpayload = iof.parse_bundle(doc["payload"], os.path.dirname(args.file) or ".")
        report.provenance = provenance_for([args.file], seed=args.seed)
        cover = build_star_cover(pair)
        dc = build_double(pair)
        eps = measure(f).overall
        c1 = gauge_constant(cover)
        vhat = unfold_to_double(f, dc)
        out = os.path.join(args.out, "double_cocycle.json")
        payload = {"complex": iof.complex_payload(dc.pair), **iof.cocycle_payload(vhat)}
        iof.dump_document(iof.document("cocycle", payload), out)
        report.measured["unfold_flatness"] = flatness(vhat)
        report.measured["input_eps"] = eps
        report.check(
            "double_flatness",
            "flatness(unfold) <= (|I|^2 + 2) * eps",
            flatness(vhat),
            (c1 + 1) * max(eps, 1e-12) + 1e-9,
        )
        f2 = fold_to_relative(vhat, dc)
        report.measured["fold_unfold_distance"] = dist_bundle(f, f2)
        report.check(
            "fold_unfold_roundtrip",
            "d(fold(unfold(f)), f) <= (|I|^2 + 1) * eps",
            dist_bundle(f, f2),
            c1 * max(eps, 1e-12) + 1e-9,
        )
        print(out)
        return emit(report, args)

    if args.sub == "cylinder":
        family = args.family or "disk_pair"
        pair, cover, tree, gens, oracle = _family_context(family)
        cyl = build_cylinder(pair, args.k)
        qmap = {v: v for v in range(pair.n_vertices)}
        for layer in range(1, args.k + 1):
            for y in sorted(pair.y_vertices):
                qmap[cyl.layer_vertex(y, layer)] = y
        rng = np.random.default_rng(args.seed)
        base = fam.flat_backbone(family, cover, args.dim, rng)
        vb = pullback(qmap, cyl.cover, base)
        eps = args.eps if args.eps is not None else 1e-3
        v = fam.apply_gauge_field(vb, fam.gauge_field(cyl.cover, args.dim, rng), eps / 4)
        w = fam.apply_gauge_field(vb, fam.gauge_field(cyl.cover, args.dim, rng), eps / 4)
        units = {
            cyl.layer_vertex(y, args.k): exp_skew(random_skew(args.dim, rng, eps / 4))
            for y in sorted(pair.y_vertices)
        }
        u = Morphism(args.dim, units)
        eps_in = max(flatness(v), flatness(w), hom_defect(v, w, u, y_only=True))
        g = cylinder_flatten(v, w, u, cyl, cover)
        cert = measure(g)
        out = os.path.join(args.out, f"cylinder_k{args.k}_bundle.json")
        iof.dump_document(
            iof.document(
                "relative_bundle",
                iof.bundle_payload(g, iof.complex_payload(pair, family=family)),
            ),
            out,
        )
        report.measured["input_eps"] = eps_in
        report.measured["certificate"] = cert.overall
        report.check(
            "cylinder_certificate",
            "certificate(flattened) <= 2 * eps",
            cert.overall,
            2.0 * eps_in + 1e-9,
        )
        print(out)
        return emit(report, args)

    if args.sub == "pushforward":
        doc = iof.load_document(args.file)
        if doc["kind"] != "covering":
            raise SchemaError("pushforward needs a covering document")
        cov = iof.parse_covering(doc["payload"], os.path.dirname(args.file) or ".")
        report.provenance = provenance_for([args.file], seed=args.seed)
        tcover = build_star_cover(cov.total)
        bcover = build_star_cover(cov.base)
        eps = args.eps if args.eps is not None else 1e-3
        vup = fam.random_flat_cocycle("circle", tcover, args.dim, eps, args.seed)
        vdn = covering_pushforward(cov, vup, tcover, bcover)
        out = os.path.join(args.out, "pushforward_cocycle.json")
        payload = {"complex": iof.complex_payload(cov.base), **iof.cocycle_payload(vdn)}
        iof.dump_document(iof.document("cocycle", payload), out)
        report.measured["upstairs_flatness"] = flatness(vup)
        report.measured["downstairs_flatness"] = flatness(vdn)
        report.check(
            "pushforward_flatness",
            "flatness preserved exactly by the deck-block assembly",
            abs(flatness(vdn) - flatness(vup)),
            1e-12,
        )
        print(out)
        return emit(report, args)

    if args.sub == "holonomy":
        doc = iof.load_document(args.file)
        if doc["kind"] != "connection":
            raise SchemaError("holonomy needs a connection document")
        conn, pair = iof.parse_connection(doc["payload"], os.path.dirname(args.file) or ".")
        report.provenance = provenance_for([args.file], seed=args.seed)
        cover = build_star_cover(pair)
        kappa = curvature_defect(conn, pair)
        v = holonomy_to_cech(conn, cover)
        out = os.path.join(args.out, "holonomy_cocycle.json")
        payload = {"complex": iof.complex_payload(pair), **iof.cocycle_payload(v)}
        iof.dump_document(iof.document("cocycle", payload), out)
        report.measured["curvature"] = kappa
        report.measured["cech_flatness"] = flatness(v)
        report.check(
            "holonomy_flatness",
            "flatness(cech) <= 2 * curvature (bigons span at most 2 cells)",
            flatness(v),
            2.0 * kappa + 1e-12,
        )
        print(out)
        return emit(report, args)

    raise SchemaError(f"unknown construct target {args.sub!r}")


# ---------------------------------------------------------------------------
# class


def cmd_class(args) -> int:
    doc = iof.load_document(args.file)
    if doc["kind"] != "relative_bundle":
        raise SchemaError("class readout needs a relative bundle document")
    f, pair, _ = iof.parse_bundle(doc["payload"], os.path.dirname(args.file) or ".")
    tree = NerveTree.build(build_star_cover(pair))
    report = Report("class", provenance_for([args.file]))
    kc = k_class(f, tree)
    report.measured["relative_chern"] = kc.relative_chern
    report.measured["residue"] = kc.residue
    report.check(
        "class_residue",
        "winding total within 0.1 of an integer multiple of 2 pi",
        kc.residue,
        0.1,
    )
    try:
        oracle = fam.boundary_winding_oracle(f)
        report.measured["boundary_winding_oracle"] = oracle
        report.check(
            "class_matches_winding_oracle",
            "relative Chern number equals the boundary det-winding count",
            abs(kc.relative_chern - oracle),
            0.0,
        )
    except NotSurface:
        pass
    return emit(report, args)


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="almostflat")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--eps", type=float, default=None)
        p.add_argument("--dim", type=int, default=2)
        p.add_argument("--format", choices=("json", "text"), default="text")
        p.add_argument("--out", default=".")

    g = sub.add_parser("gen", help="generate instance documents")
    g.add_argument("--family", required=True)
    g.add_argument("--k", type=int, default=1, help="winding for clutching_chern")
    g.add_argument("--d", type=int, default=8, help="dimension for almost_commuting")
    common(g)
    g.set_defaults(fn=cmd_gen)

    a = sub.add_parser("audit", help="measure defects and check the triangle bound")
    a.add_argument("file")
    common(a)
    a.set_defaults(fn=cmd_audit)

    r = sub.add_parser("roundtrip", help="monodromy round trip with distances")
    r.add_argument("file")
    r.add_argument("--family", default=None)
    common(r)
    r.set_defaults(fn=cmd_roundtrip)

    c = sub.add_parser("construct", help="doubles, cylinders, pushforwards, holonomy")
    c.add_argument("sub", choices=("double", "cylinder", "pushforward", "holonomy"))
    c.add_argument("file", nargs="?")
    c.add_argument("--family", default=None)
    c.add_argument("--k", type=int, default=1)
    common(c)
    c.set_defaults(fn=cmd_construct)

    k = sub.add_parser("class", help="surface K-class readout")
    k.add_argument("file")
    common(k)
    k.set_defaults(fn=cmd_class)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (SchemaError, UnknownFamily, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except AlmostFlatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
