"""Command line front end: TOML configs in, text/JSON/DOT reports out.

A config declares the rose and the substitution plus optional knobs:

    [presolenoid]
    edges = ["a", "b"]

    [substitution]
    a = "aab"
    b = "ab"

    [options]
    zeta_max_n = 8

Subcommands run single stages (validate, quotient, zeta, expansive,
ktheory, dot) or the whole pipeline (report).  Exit codes: 0 success,
1 a model or validation failure (axiom violations, no flattening
power, missing transfer matrices, unseparated pairs), 2 usage, parse,
or I/O errors.  Reports are deterministic for a fixed (config, seed)
and any SOLENOIDK_THREADS value.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__
from .dynamics import (CoverSpec, NoWitnessFound, forward_expansive_witness,
                       wieler_axiom_witness, zeta_series)
from .germ_quotient import (NoFlattening, constant_germ, k0_constant,
                            quotient_presentation)
from .graph_substitution import (SubstitutionSystem, UnknownEdge,
                                 _format_fraction, entropy, validate)
from .ktheory import NeedUserMatrices, kreport


class ParseError(ValueError):
    """Malformed config file; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class IoError(Exception):
    """Failed to read or write an artifact file."""


_OPTION_DEFAULTS = {
    "zeta_max_n": 8,
    "cover_level": 3,
    "n_max": 20,
    "grid_density": 64,
    "k_max": 3,
    "wieler_samples": 200,
    "seed": 20260817,
}
_OPTION_MINIMUMS = {
    "zeta_max_n": 1,
    "cover_level": 1,
    "n_max": 0,
    "grid_density": 1,
    "k_max": 1,
    "wieler_samples": 1,
}


@dataclass(frozen=True)
class RunConfig:
    """Parsed and validated run configuration."""

    system: SubstitutionSystem
    zeta_max_n: int
    cover_level: int
    n_max: int
    grid_density: int
    k_max: int
    wieler_samples: int
    seed: int
    user_a0: tuple | None
    user_a1: tuple | None
    json_path: str | None
    dot_path: str | None
    report_format: str

    def user_override(self):
        if self.user_a0 is None:
            return None
        return (self.user_a0, self.user_a1)

    def echo(self):
        opts = {name: getattr(self, name) for name in _OPTION_DEFAULTS}
        if self.user_a0 is not None:
            opts["a0"] = [list(r) for r in self.user_a0]
            opts["a1"] = [list(r) for r in self.user_a1]
        if self.json_path is not None:
            opts["json_path"] = self.json_path
        if self.dot_path is not None:
            opts["dot_path"] = self.dot_path
        opts["report_format"] = self.report_format
        return {
            "presolenoid": {"edges": list(self.system.edges)},
            "substitution": dict(zip(self.system.edges, self.system.images)),
            "options": opts,
        }


def _toml_position(exc):
    found = re.search(r"line (\d+), column (\d+)", str(exc))
    if found:
        return int(found.group(1)), int(found.group(2))
    return None, None


def _require_table(data, key):
    section = data.get(key)
    if not isinstance(section, dict):
        raise ParseError(f"missing [{key}] section")
    return section


def _int_option(options, name):
    value = options.get(name, _OPTION_DEFAULTS[name])
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"option {name} must be an integer")
    floor = _OPTION_MINIMUMS.get(name)
    if floor is not None and value < floor:
        raise ParseError(f"option {name} must be at least {floor}")
    return value


def _matrix_option(options, name):
    value = options.get(name)
    if value is None:
        return None
    try:
        rows = tuple(tuple(int(x) for x in row) for row in value)
    except (TypeError, ValueError):
        raise ParseError(f"option {name} must be a list of integer rows") from None
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ParseError(f"option {name} must be a rectangular matrix")
    return rows


def parse_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        line, column = _toml_position(exc)
        raise ParseError(f"invalid TOML: {exc}", line, column) from exc

    pre = _require_table(data, "presolenoid")
    edges = pre.get("edges")
    if (not isinstance(edges, list) or not edges
            or any(not isinstance(e, str) for e in edges)):
        raise ParseError("presolenoid.edges must be a nonempty list of strings")
    subst = _require_table(data, "substitution")
    if not subst:
        raise ParseError("empty substitution table")
    for edge, word in subst.items():
        if not isinstance(word, str):
            raise ParseError(f"substitution for {edge!r} must be a string")
    try:
        system = SubstitutionSystem.of(edges, subst)
    except UnknownEdge:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from exc

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise ParseError("[options] must be a table")
    known = set(_OPTION_DEFAULTS) | {"a0", "a1", "json_path", "dot_path",
                                     "report_format"}
    for key in options:
        if key not in known:
            raise ParseError(f"unknown option {key!r}")
    a0 = _matrix_option(options, "a0")
    a1 = _matrix_option(options, "a1")
    if (a0 is None) != (a1 is None):
        raise ParseError("options a0 and a1 must be given together")
    report_format = options.get("report_format", "json")
    if report_format not in ("json", "text"):
        raise ParseError("report_format must be 'json' or 'text'")
    for key in ("json_path", "dot_path"):
        if key in options and not isinstance(options[key], str):
            raise ParseError(f"option {key} must be a string path")
    return RunConfig(
        system=system,
        zeta_max_n=_int_option(options, "zeta_max_n"),
        cover_level=_int_option(options, "cover_level"),
        n_max=_int_option(options, "n_max"),
        grid_density=_int_option(options, "grid_density"),
        k_max=_int_option(options, "k_max"),
        wieler_samples=_int_option(options, "wieler_samples"),
        seed=_int_option(options, "seed"),
        user_a0=a0, user_a1=a1,
        json_path=options.get("json_path"),
        dot_path=options.get("dot_path"),
        report_format=report_format,
    )


@dataclass(frozen=True)
class Report:
    """Full pipeline output; worst is the exit severity (0 or 1)."""

    validation: dict
    quotient: dict
    dynamics: dict
    ktheory: dict
    model_assumptions: tuple
    config_echo: dict
    worst: int

    def to_json(self):
        return {
            "tool": {"name": "solenoidk", "version": __version__},
            "schema": "report-v1",
            "config": self.config_echo,
            "validation": self.validation,
            "quotient": self.quotient,
            "dynamics": self.dynamics,
            "ktheory": self.ktheory,
            "model_assumptions": list(self.model_assumptions),
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False,
                          indent=2) + "\n"


def _error_entry(exc, **extra):
    entry = {"kind": type(exc).__name__, "message": str(exc)}
    entry.update(extra)
    return entry


def run_pipeline(config: RunConfig) -> Report:
    """Run validate, quotient, dynamics, and K stages; errors are
    embedded per stage and later stages that depend on a failed one are
    marked skipped."""
    system = config.system
    worst = 0
    assumptions = ["germ presentation of the metric quotient"]

    vrep = validate(system)
    validation = vrep.to_json()
    if not vrep.ok:
        skipped = {"skipped": "validation failed"}
        return Report(validation=validation, quotient=dict(skipped),
                      dynamics=dict(skipped), ktheory=dict(skipped),
                      model_assumptions=tuple(assumptions),
                      config_echo=config.echo(), worst=1)

    quotient = {"presentation": quotient_presentation(system).to_json()}
    flattening_ok = True
    try:
        quotient["k0_constant"] = k0_constant(system).value
        quotient["constant_germ"] = str(constant_germ(system))
    except NoFlattening as exc:
        quotient["error"] = _error_entry(exc)
        flattening_ok = False
        worst = 1

    dynamics = {
        "zeta": zeta_series(system, config.zeta_max_n).to_json(),
        "entropy": entropy(system).to_json(),
    }
    expansive = forward_expansive_witness(
        system, CoverSpec(config.cover_level),
        n_max=config.n_max, grid_density=config.grid_density)
    dynamics["expansiveness"] = expansive.to_json()
    if not expansive.all_separated:
        worst = 1
    try:
        witness = wieler_axiom_witness(
            system, k_max=config.k_max, sample_count=config.wieler_samples,
            seed=config.seed)
        dynamics["axiom_witness"] = witness.to_json()
    except NoWitnessFound as exc:
        dynamics["axiom_witness"] = {"error": _error_entry(exc)}
        worst = 1

    if not flattening_ok:
        ktheory = {"skipped": "no flattening power, the germ model does not "
                              "stabilize"}
    else:
        try:
            kdata = kreport(system, config.user_override())
            ktheory = kdata.to_json()
            assumptions.extend(kdata.model_assumptions)
        except NeedUserMatrices as exc:
            ktheory = {"error": _error_entry(exc, reasons=list(exc.reasons))}
            worst = 1

    return Report(validation=validation, quotient=quotient, dynamics=dynamics,
                  ktheory=ktheory, model_assumptions=tuple(assumptions),
                  config_echo=config.echo(), worst=worst)


def render_text(report: Report) -> str:
    """Short human-readable summary of a pipeline report."""
    lines = []
    violations = report.validation.get("violations", [])
    lines.append("validation: ok" if not violations
                 else f"validation: {len(violations)} violation(s)")
    pres = report.quotient.get("presentation")
    if pres:
        lines.append(f"germs: {' '.join(pres['germs'])}  "
                     f"hausdorff: {str(pres['hausdorff']).lower()}")
    if "k0_constant" in report.quotient:
        lines.append(f"flattening power: {report.quotient['k0_constant']} "
                     f"(constant germ {report.quotient['constant_germ']})")
    elif "error" in report.quotient:
        lines.append(f"quotient error: {report.quotient['error']['message']}")
    zeta = report.dynamics.get("zeta")
    if zeta:
        counts = ",".join(str(c) for c in zeta["counts"])
        guess = zeta["guess"]
        lines.append(f"periodic counts: {counts}")
        if guess:
            lines.append(f"zeta guess: {guess['pretty']}")
    ent = report.dynamics.get("entropy")
    if ent:
        lo = _format_fraction(Fraction(ent["log_lo"]), 12)
        hi = _format_fraction(Fraction(ent["log_hi"]), 12)
        lines.append(f"entropy: {ent['decimal']} in [{lo}, {hi}]")
    exp = report.dynamics.get("expansiveness")
    if exp:
        state = ("all pairs separated within "
                 f"{exp['max_separation_time']}" if not exp["unseparated"]
                 else f"{len(exp['unseparated'])} unseparated pair(s)")
        lines.append(f"expansiveness (level {exp['level']}): {state}")
    wit = report.dynamics.get("axiom_witness")
    if wit:
        if "error" in wit:
            lines.append(f"axiom witness: {wit['error']['message']}")
        else:
            lines.append(f"axiom witness: k={wit['k']} gamma={wit['gamma']} "
                         f"beta={wit['beta']}")
    kth = report.ktheory
    if "skipped" in kth:
        lines.append(f"k-theory: skipped ({kth['skipped']})")
    elif "error" in kth:
        lines.append(f"k-theory error: {kth['error']['message']}")
    else:
        stable = kth["stable"]
        ruelle = kth["ruelle"]["assembled"]
        lines.append(f"quotient K: ({kth['k0_quotient']['name']}, "
                     f"{kth['k1_quotient']['name']})  via {kth['provenance']}")
        lines.append(f"stable K: ({stable['k0']['name'] or 'see report'}, "
                     f"{stable['k1']['name'] or 'see report'})")
        if ruelle["k0"] is not None:
            lines.append(f"crossed product K: ({ruelle['k0']['name']}, "
                         f"{ruelle['k1']['name']})")
        else:
            lines.append("crossed product K: pieces did not assemble, "
                         "see report")
    return "\n".join(lines) + "\n"


def export_dot(system: SubstitutionSystem, kind: str = "germs") -> str:
    """DOT text for the germ automaton or the arc gluing graph.

    germs: one node per germ, solid arrows for the germ map, dashed
    undirected edges joining germs that no pair of open sets separates.
    arcs: one node per arc, one arrow per germ from its incoming to its
    outgoing arc.
    """
    pres = quotient_presentation(system)
    lines = []
    if kind == "germs":
        lines.append("digraph germ_automaton {")
        for germ in pres.germs:
            lines.append(f'  "{germ}" [shape=circle];')
        for germ, image in pres.tau:
            lines.append(f'  "{germ}" -> "{image}";')
        for g1, g2 in pres.nonsep:
            lines.append(f'  "{g1}" -> "{g2}" '
                         "[dir=none, style=dashed, label=\"nonsep\"];")
        lines.append("}")
    elif kind == "arcs":
        lines.append("digraph arc_gluing {")
        for arc in sorted(pres.arcs):
            lines.append(f'  "{arc}" [shape=box];')
        for germ in pres.germs:
            lines.append(f'  "{germ.l}" -> "{germ.r}" [label="{germ}"];')
        lines.append("}")
    else:
        raise ValueError(f"unknown dot kind {kind!r}")
    return "\n".join(lines) + "\n"


def _write_or_print(text, path, out):
    if path is None:
        out.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _cmd_validate(config, out):
    vrep = validate(config.system)
    if vrep.ok:
        out.write("ok\n")
        return 0
    for violation in vrep.violations:
        out.write(f"{type(violation).__name__}: {violation}\n")
    return 1


def _cmd_quotient(config, out):
    pres = quotient_presentation(config.system)
    out.write(f"arcs: {' '.join(pres.arcs)}\n")
    out.write(f"germs: {' '.join(str(g) for g in pres.germs)}\n")
    for germ, image in pres.tau:
        out.write(f"  {germ} -> {image}\n")
    out.write(f"hausdorff: {str(pres.hausdorff).lower()}\n")
    out.write(f"local homeomorphism: {str(pres.local_homeomorphism).lower()}\n")
    try:
        k0 = k0_constant(config.system)
        out.write(f"flattening power: {k0.value} "
                  f"(constant germ {constant_germ(config.system)})\n")
    except NoFlattening as exc:
        out.write(f"NoFlattening: {exc}\n")
        return 1
    return 0


def _cmd_zeta(config, out, max_n):
    series = zeta_series(config.system, max_n or config.zeta_max_n)
    out.write(f"counts: {' '.join(str(c) for c in series.counts)}\n")
    out.write("guess: "
              + (str(series.guess) if series.guess else "none") + "\n")
    return 0


def _cmd_expansive(config, out, level, n_max, density, seed):
    del seed  # the grid is deterministic; kept for interface symmetry
    report = forward_expansive_witness(
        config.system, CoverSpec(level or config.cover_level),
        n_max=n_max if n_max is not None else config.n_max,
        grid_density=density or config.grid_density)
    out.write(json.dumps(report.to_json(), sort_keys=True) + "\n")
    return 0 if report.all_separated else 1


def _cmd_ktheory(config, out, a0_text, a1_text):
    override = config.user_override()
    if a0_text is not None:
        try:
            override = (json.loads(a0_text), json.loads(a1_text))
        except json.JSONDecodeError as exc:
            raise ParseError(f"transfer matrices must be JSON: {exc}") from exc
    try:
        data = kreport(config.system, override)
    except NoFlattening as exc:
        out.write(f"NoFlattening: {exc}\n")
        return 1
    except NeedUserMatrices as exc:
        out.write("NeedUserMatrices:\n")
        for reason in exc.reasons:
            out.write(f"  {reason}\n")
        return 1
    out.write(json.dumps(data.to_json(), sort_keys=True, ensure_ascii=False,
                         indent=2) + "\n")
    return 0


def _cmd_report(config, out, json_path):
    report = run_pipeline(config)
    path = json_path or config.json_path
    if config.report_format == "text" and path is None:
        out.write(render_text(report))
    else:
        _write_or_print(report.dumps(), path, out)
    return report.worst


def _cmd_dot(config, out, dot_path, kind):
    text = export_dot(config.system, kind)
    _write_or_print(text, dot_path or config.dot_path, out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="solenoidk",
        description="exact invariants of expanding rose substitutions")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="TOML system definition")
        return p

    add("validate", "check the structural axioms of the substitution")
    add("quotient", "print the germ presentation of the quotient")
    p = add("zeta", "periodic point counts and a rational zeta guess")
    p.add_argument("--max-n", type=int, default=None)
    p = add("expansive", "forward-orbit separation times for a finite cover")
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--density", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p = add("ktheory", "quotient, stable, and crossed-product K-groups")
    p.add_argument("--a0", default=None, help="degree-zero transfer matrix, JSON")
    p.add_argument("--a1", default=None, help="degree-one transfer matrix, JSON")
    p = add("report", "run the full pipeline and emit the JSON report")
    p.add_argument("--json", dest="json_path", default=None,
                   help="write the report to this path instead of stdout")
    p = add("dot", "export the germ automaton or arc gluing as DOT")
    p.add_argument("--out", dest="dot_path", default=None)
    p.add_argument("--kind", choices=("germs", "arcs"), default="germs")
    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "ktheory" and (args.a0 is None) != (args.a1 is None):
        sys.stderr.write("error: --a0 and --a1 must be given together\n")
        return 2

    try:
        config = parse_config(args.config)
        if args.command == "validate":
            return _cmd_validate(config, out)
        if args.command == "quotient":
            return _cmd_quotient(config, out)
        if args.command == "zeta":
            return _cmd_zeta(config, out, args.max_n)
        if args.command == "expansive":
            return _cmd_expansive(config, out, args.level, args.n_max,
                                  args.density, args.seed)
        if args.command == "ktheory":
            return _cmd_ktheory(config, out, args.a0, args.a1)
        if args.command == "report":
            return _cmd_report(config, out, args.json_path)
        if args.command == "dot":
            return _cmd_dot(config, out, args.dot_path, args.kind)
        raise AssertionError(f"unhandled command {args.command}")
    except (ParseError, UnknownEdge, IoError) as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
