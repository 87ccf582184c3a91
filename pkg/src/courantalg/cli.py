"""Batch front end: structured problem documents in, reports out.

A document is a single JSON object with a versioned schema field declaring a
coefficient backend, one metric module, a connection, named elements, and a
command list.  Exit code 0 means every verification command passed, 1 means
a mathematical verification failed, 2 means the document was rejected before
computation.  Machine-readable reports are byte-identical across runs of the
same document; wall-clock timings appear only in the human format.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .cmaps import (
    Cochain,
    cbracket,
    cmap_verify,
    cmap_wedge,
    quartic_from_biderivation,
    symbol_tower,
    to_form,
)
from .deform import (
    CourantStructure,
    DeformationSeries,
    cohomology_dims,
    delta_squared_is_zero,
    make_standard_courant,
    mc_extend,
    mc_obstruction,
    mc_series_valid,
    verify_courant,
)
from .modules import Connection, MetricModule, ModuleElement, metrize
from .poly import Backend, Derivation, MultiDerivation, Poly
from .rothstein import RothElement
from .symbol_map import apply_J, chat_membership, invert_J_deg2, invert_J_deg3
from .textforms import parse_poly, parse_roth, roth_to_text

SCHEMA = "courantalg/1"
REPORT_SCHEMA = "courantalg-report/1"


class DocumentError(ValueError):
    """Raised for any validation failure before computation starts."""


def _fail(msg: str, where: str = "") -> "DocumentError":
    return DocumentError(("%s: %s" % (where, msg)) if where else msg)


class ProblemDocument:
    """Parsed and validated problem document."""

    def __init__(self, raw: dict):
        if not isinstance(raw, dict):
            raise _fail("document must be a JSON object")
        if raw.get("schema") != SCHEMA:
            raise _fail("unsupported schema %r (want %r)" % (raw.get("schema"), SCHEMA))
        self.raw = raw
        self.standard_n = None
        module_spec = raw.get("module")
        if isinstance(module_spec, dict) and "standard" in module_spec:
            self.standard_n = int(module_spec["standard"])
            cs = make_standard_courant(self.standard_n)
            self.backend = cs.module.backend
            self.module = cs.module
            self.connection = cs.connection
            self.structure = cs
        else:
            self.backend = self._parse_backend(raw.get("backend"))
            self.module = self._parse_module(module_spec)
            self.connection = self._parse_connection(raw.get("connection"))
            self.structure = None
        self.elements: dict[str, object] = {}
        for name, spec in (raw.get("elements") or {}).items():
            self.elements[name] = self._parse_element(name, spec)
        self.commands = raw.get("commands") or []
        if not isinstance(self.commands, list):
            raise _fail("commands must be a list")

    # -- sections ------------------------------------------------------

    def _parse_backend(self, spec) -> Backend:
        if not isinstance(spec, dict):
            raise _fail("missing backend section")
        kind = spec.get("kind")
        if kind in ("freepoly", "poly", "free"):
            names = spec.get("vars")
            if names is None:
                raise _fail("freepoly backend needs a vars list", "backend")
            return Backend.free(len(names), tuple(names))
        if kind in ("dualnum", "dual"):
            return Backend.dual(spec.get("var", "eps"))
        raise _fail("unknown backend kind %r" % kind, "backend")

    def _parse_module(self, spec) -> MetricModule:
        if not isinstance(spec, dict):
            raise _fail("missing module section")
        gram_rows = spec.get("gram")
        if gram_rows is None:
            raise _fail("module needs a gram matrix", "module")
        gram = [[parse_poly(str(v), self.backend) for v in row] for row in gram_rows]
        try:
            return MetricModule(
                self.backend,
                gram,
                names=spec.get("basis"),
                internal_degrees=spec.get("internal_degrees"),
            )
        except ValueError as ex:
            raise _fail(str(ex), "module")

    def _parse_connection(self, spec) -> Connection:
        if spec is None or spec.get("kind") == "flat":
            return Connection.flat(self.module)
        kind = spec.get("kind")
        if kind in ("christoffel", "metrize", "metrize-of"):
            gamma_raw = spec.get("gamma")
            if gamma_raw is None:
                raise _fail("connection needs a gamma table", "connection")
            try:
                gamma = [
                    [self._parse_module_element(entry) for entry in row]
                    for row in gamma_raw
                ]
                conn = Connection(self.module, gamma)
            except ValueError as ex:
                raise _fail(str(ex), "connection")
            if kind in ("metrize", "metrize-of"):
                return metrize(conn)
            if not conn.is_metric():
                raise _fail("christoffel table is not metric (use kind metrize-of)", "connection")
            return conn
        raise _fail("unknown connection kind %r" % kind, "connection")

    def _parse_module_element(self, coeffs) -> ModuleElement:
        if len(coeffs) != self.module.rank:
            raise _fail("module element needs %d coefficients" % self.module.rank)
        return ModuleElement(self.module, [parse_poly(str(c), self.backend) for c in coeffs])

    def _parse_derivation(self, coeffs) -> Derivation:
        if self.backend.is_dual:
            return Derivation(self.backend, Fraction(str(coeffs[0])))
        return Derivation(self.backend, tuple(parse_poly(str(c), self.backend) for c in coeffs))

    def _basis_key(self, key: str) -> tuple[int, ...]:
        key = key.strip()
        if not key:
            return ()
        idx = []
        for piece in key.split(","):
            piece = piece.strip()
            if piece not in self.module.names:
                raise _fail("unknown basis name %r" % piece)
            idx.append(self.module.names.index(piece))
        return tuple(idx)

    def _parse_element(self, name: str, spec):
        if not isinstance(spec, dict) or "type" not in spec:
            raise _fail("element %r needs a type" % name, "elements")
        kind = spec["type"]
        try:
            if kind == "scalar":
                return Cochain.scalar(self.module, parse_poly(spec["value"], self.backend))
            if kind == "module":
                return Cochain.from_module_element(self._parse_module_element(spec["coeffs"]))
            if kind == "roth":
                return parse_roth(spec["terms"], self.module)
            if kind == "cmap":
                degree = int(spec["degree"])
                values = {
                    self._basis_key(k): self._parse_module_element(v)
                    for k, v in (spec.get("values") or {}).items()
                }
                symbol = None
                if spec.get("symbol") is not None:
                    symbol = {
                        self._basis_key(k): self._parse_derivation(v)
                        for k, v in spec["symbol"].items()
                    }
                return Cochain.from_tables(self.module, degree, values, symbol)
            if kind == "sder-quartic":
                table = {}
                for k, v in spec["p_table"].items():
                    gens = tuple(0 for _ in k.split(","))
                    table[gens] = parse_poly(str(v), self.backend)
                P = MultiDerivation(self.backend, 2, table)
                return quartic_from_biderivation(self.module, P)
        except DocumentError:
            raise
        except (KeyError, ValueError, TypeError) as ex:
            raise _fail("element %r: %s" % (name, ex), "elements")
        raise _fail("unknown element type %r" % kind, "elements")

    def lookup(self, name: str):
        if name not in self.elements:
            raise _fail("unresolved element reference %r" % name, "commands")
        return self.elements[name]

    def lookup_cochain(self, name: str) -> Cochain:
        el = self.lookup(name)
        if isinstance(el, RothElement):
            return apply_J(el, self.connection)
        if isinstance(el, Cochain):
            return el
        raise _fail("element %r is not a graded map" % name, "commands")

    def lookup_roth(self, name: str) -> RothElement:
        el = self.lookup(name)
        if isinstance(el, RothElement):
            return el
        if isinstance(el, Cochain) and el.degree <= 3:
            if el.degree == 3:
                return invert_J_deg3(el, self.connection)
            if el.degree == 2:
                return invert_J_deg2(el, self.connection)
            if el.degree == 1:
                return RothElement.from_module_element(el.module_part())
            return RothElement.from_scalar(self.module, el.scalar_part())
        raise _fail("element %r has no connection-side form" % name, "commands")


def _describe(obj) -> object:
    if isinstance(obj, RothElement):
        return roth_to_text(obj)
    if isinstance(obj, Cochain):
        return {
            "degree": obj.degree,
            "levels": {
                str(p): {
                    "%s | %s" % (",".join(map(str, gens)), ",".join(map(str, args))): str(v)
                    for (gens, args), v in sorted(table.items())
                }
                for p, table in sorted(obj.levels.items())
            },
        }
    return str(obj)


class CommandRunner:
    """Executes the command list; collects one record per command."""

    def __init__(self, doc: ProblemDocument, truncation: int | None, seed: int):
        self.doc = doc
        self.truncation = truncation
        self.seed = seed
        self.records: list[dict] = []
        self.timings: list[float] = []
        self.failed_verification = False

    def run(self) -> dict:
        for i, cmd in enumerate(self.doc.commands):
            if not isinstance(cmd, dict) or "op" not in cmd:
                raise _fail("command %d needs an op" % i, "commands")
            op = cmd["op"].replace("_", "-")
            handler = getattr(self, "cmd_" + op.replace("-", "_"), None)
            if handler is None:
                raise _fail("unknown command op %r" % cmd["op"], "commands")
            start = time.monotonic()
            record = handler(cmd)
            self.timings.append(time.monotonic() - start)
            record["op"] = op
            self.records.append(record)
        return {
            "schema": REPORT_SCHEMA,
            "seed": self.seed,
            "ok": not self.failed_verification,
            "commands": self.records,
        }

    def _structure(self, cmd) -> CourantStructure:
        if "element" in cmd:
            m = self.doc.lookup_cochain(cmd["element"])
            return CourantStructure.from_cochain(m, self.doc.connection, check=False)
        if self.doc.structure is not None:
            return self.doc.structure
        raise _fail("command needs an element or a standard module", "commands")

    def _mark(self, ok: bool):
        if not ok:
            self.failed_verification = True

    # -- command handlers ------------------------------------------------

    def cmd_verify_courant(self, cmd) -> dict:
        m = self.doc.lookup_cochain(cmd["element"]) if "element" in cmd else self.doc.structure.cochain
        ok, report = verify_courant(m, depth=cmd.get("depth", 1))
        self._mark(ok)
        return {
            "status": "ok",
            "verdict": ok,
            "axiom_route": report["axiom_route"],
            "bracket_route": report["bracket_route"],
            "probe_bound": report["probe_bound"],
        }

    def cmd_bracket(self, cmd) -> dict:
        lhs = self.doc.lookup_cochain(cmd["lhs"])
        rhs = self.doc.lookup_cochain(cmd["rhs"])
        out = cbracket(lhs, rhs)
        name = cmd.get("name")
        if name:
            self.doc.elements[name] = out
        return {"status": "ok", "zero": out.is_zero(), "result": _describe(out)}

    def cmd_wedge(self, cmd) -> dict:
        lhs = self.doc.lookup_cochain(cmd["lhs"])
        rhs = self.doc.lookup_cochain(cmd["rhs"])
        mode = cmd.get("mode", "both")
        if mode == "both":
            rec = cmap_wedge(lhs, rhs, "recursive")
            shu = cmap_wedge(lhs, rhs, "shuffle")
            agree = rec == shu
            self._mark(agree)
            out = rec
        else:
            out = cmap_wedge(lhs, rhs, mode)
            agree = None
        name = cmd.get("name")
        if name:
            self.doc.elements[name] = out
        record = {"status": "ok", "result": _describe(out)}
        if agree is not None:
            record["modes_agree"] = agree
        return record

    def cmd_symbol_tower(self, cmd) -> dict:
        c = self.doc.lookup_cochain(cmd["element"])
        depth = cmd.get("depth", 1)
        try:
            tower = symbol_tower(to_form(c), depth=depth)
        except ValueError as ex:
            self._mark(False)
            return {"status": "inconsistent", "verdict": False, "detail": str(ex)}
        levels = {
            str(p): len(tower.level(p)) for p in range(0, c.degree // 2 + 1)
        }
        return {"status": "ok", "verdict": True, "level_sizes": levels, "probe_bound": depth}

    def cmd_j_map(self, cmd) -> dict:
        phi = self.doc.lookup_roth(cmd["element"])
        image = apply_J(phi, self.doc.connection)
        name = cmd.get("name")
        if name:
            self.doc.elements[name] = image
        return {"status": "ok", "result": _describe(image)}

    def cmd_j_invert(self, cmd) -> dict:
        c = self.doc.lookup_cochain(cmd["element"])
        degree = int(cmd.get("degree", c.degree))
        if degree != c.degree:
            raise _fail("element degree %d does not match requested %d" % (c.degree, degree))
        if degree == 3:
            phi = invert_J_deg3(c, self.doc.connection)
        elif degree == 2:
            phi = invert_J_deg2(c, self.doc.connection)
        else:
            raise _fail("closed-form inversion supports degrees 2 and 3")
        round_trip = apply_J(phi, self.doc.connection) == c
        self._mark(round_trip)
        name = cmd.get("name")
        if name:
            self.doc.elements[name] = phi
        return {"status": "ok", "round_trip": round_trip, "preimage": roth_to_text(phi)}

    def cmd_chat_membership(self, cmd) -> dict:
        c = self.doc.lookup_cochain(cmd["element"])
        res = chat_membership(c, self.doc.connection, cap=self.truncation)
        record = {
            "status": "ok",
            "member": res["member"],
            "truncation_cap": res["cap"],
            "conclusive": res["conclusive"],
        }
        if res["member"]:
            record["preimage"] = roth_to_text(res["preimage"])
        else:
            record["certificate"] = res["certificate"]
        return record

    def cmd_cohomology(self, cmd) -> dict:
        cs = self._structure(cmd)
        r_lo, r_hi = cmd.get("r", [0, 5])
        d_lo, d_hi = cmd.get("d", [-3, 3])
        dims = cohomology_dims(cs, range(r_lo, r_hi + 1), range(d_lo, d_hi + 1))
        table = [
            {
                "r": r,
                "d": d,
                "dim": rec["dim"],
                "chain_dim": rec["chain_dim"],
                "rank_out": rec["rank_out"],
                "rank_in": rec["rank_in"],
            }
            for (r, d), rec in sorted(dims.items())
        ]
        squares = all(
            delta_squared_is_zero(cs, r, d)
            for r in range(r_lo, r_hi)
            for d in range(d_lo, d_hi + 1)
        )
        self._mark(squares)
        return {"status": "ok", "delta_squared_zero": squares, "table": table}

    def cmd_mc_extend(self, cmd) -> dict:
        from .deform import mc_residuals

        cs = self._structure(cmd)
        series = DeformationSeries(cs, [self.doc.lookup_roth(n) for n in cmd.get("series", [])])
        residuals = mc_residuals(series)
        valid, bad_order = mc_series_valid(series)
        if not valid:
            raise _fail("input series fails its relation at order %d" % bad_order, "mc-extend")
        obs, cocycle = mc_obstruction(series)
        self._mark(cocycle)
        record = {
            "status": "ok",
            "order": series.order,
            "relations": [
                {"order": j, "residual": roth_to_text(res)}
                for j, res in enumerate(residuals, start=1)
            ],
            "obstruction": roth_to_text(obs),
            "obstruction_is_cocycle": cocycle,
        }
        if "candidate" in cmd:
            record["accepted"] = mc_extend(series, self.doc.lookup_roth(cmd["candidate"]))
        return record

    def cmd_counterexample_sder(self, cmd) -> dict:
        """The dual-number quartic: in the complex, outside the symbol image."""
        import random

        backend = Backend.dual()
        eps = Poly.var(backend, 0)
        module = MetricModule(backend, [[Poly.one(backend)]])
        conn = Connection.flat(module)
        P = MultiDerivation(backend, 2, {(0, 0): eps})
        bad = quartic_from_biderivation(module, P)
        in_complex, _ = cmap_verify(bad)
        membership = chat_membership(bad, conn, cap=self.truncation)
        rng = random.Random(self.seed)
        degree3_members = 0
        trials = int(cmd.get("degree3_trials", 5))
        for _ in range(trials):
            sym = () if rng.random() < 0.5 else (0,)
            coeff = Poly(backend, {(0,): Fraction(rng.randint(-3, 3)),
                                   (1,): Fraction(rng.randint(-3, 3))})
            if sym:
                phi = RothElement(module, {((0,), (0,)): coeff})
            else:
                phi = RothElement.zero(module)
            c3 = apply_J(phi, conn)
            res3 = chat_membership(c3, conn) if not c3.is_zero() else {"member": True}
            degree3_members += 1 if res3["member"] else 0
        ok = in_complex and not membership["member"] and degree3_members == trials
        self._mark(ok)
        return {
            "status": "ok",
            "verdict": ok,
            "in_complex_degree4": in_complex,
            "image_member_degree4": membership["member"],
            "certificate": membership.get("certificate"),
            "degree3_members": "%d/%d" % (degree3_members, trials),
        }


def run_document(raw: dict, truncation: int | None = None, seed: int = 0) -> tuple[dict, int]:
    try:
        doc = ProblemDocument(raw)
        runner = CommandRunner(doc, truncation, seed)
        report = runner.run()
    except DocumentError as ex:
        return {"schema": REPORT_SCHEMA, "ok": False, "error": str(ex)}, 2
    return report, (0 if report["ok"] else 1)


def format_human(report: dict, timings=None) -> str:
    lines = []
    if "error" in report:
        return "document rejected: %s" % report["error"]
    for i, rec in enumerate(report["commands"]):
        head = "[%d] %s: %s" % (i, rec["op"], rec.get("status"))
        if "verdict" in rec:
            head += "  verdict=%s" % rec["verdict"]
        if timings:
            head += "  (%.3fs)" % timings[i]
        lines.append(head)
        for k, v in sorted(rec.items()):
            if k in ("op", "status", "verdict"):
                continue
            lines.append("      %s: %s" % (k, v))
    lines.append("overall: %s" % ("ok" if report["ok"] else "FAILED"))
    return "\n".join(lines)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="courantalg",
        description="Run a structured problem document against the library.",
    )
    ap.add_argument("document", help="path to the JSON problem document ('-' for stdin)")
    ap.add_argument("--truncation", type=int, default=None,
                    help="coefficient-degree cap for membership solves")
    ap.add_argument("--seed", type=int, default=0,
                    help="seed for randomized probe commands")
    ap.add_argument("--format", choices=("human", "json"), default="human")
    args = ap.parse_args(argv)
    try:
        text = sys.stdin.read() if args.document == "-" else open(args.document).read()
        raw = json.loads(text)
    except (OSError, json.JSONDecodeError) as ex:
        print("cannot read document: %s" % ex, file=sys.stderr)
        return 2
    report, code = run_document(raw, truncation=args.truncation, seed=args.seed)
    if args.format == "json":
        print(json.dumps(report, sort_keys=True, separators=(",", ":")))
    else:
        print(format_human(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
