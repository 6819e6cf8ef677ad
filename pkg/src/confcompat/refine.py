"""Refines path constraints into configuration constraints {A, X, F}.

A is read off the target invocation's attribute argument, X off the value
of tag-accessor (``getName``) calls constrained along the path — falling
back to the enclosing class name when no such call reaches the formula —
and F expands through the configuration-API format table.  Paths whose A or
X cannot be pinned down to a closed value set are discarded and recorded.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from . import formula as F
from . import semantics, solver
from .errors import ConfigError, EngineBudgetError
from .icfg import build_trimmed_icfg
from .ir import FrameworkSnapshot, IrClass, Site, Target, list_target_statements
from .symexec import DEFAULT_EXPANSION_BUDGET, PathConstraint, extract_path_constraints

FORMATS = (
    "int",
    "bool",
    "float",
    "string",
    "dimension",
    "styled_int",
    "styled_bool",
    "styled_float",
    "styled_string",
    "styled_dimension",
)

#: API whose return value names the XML tag being parsed.
TAG_API = "getName"


class ConfigApiSpec:
    """Map from configuration-API name to the data formats it can load."""

    def __init__(self, formats: dict[str, tuple[str, ...]]):
        for api, fmts in formats.items():
            for f in fmts:
                if f not in FORMATS:
                    raise ConfigError(f"unknown data format {f!r} for API {api}")
            if not fmts:
                raise ConfigError(f"API {api} declares no formats")
        self.formats = dict(formats)

    @classmethod
    def from_text(cls, text: str) -> "ConfigApiSpec":
        formats: dict[str, tuple[str, ...]] = {}
        for i, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise ConfigError(f"malformed API spec line {i}: {raw!r}")
            name, rest = line.split(":", 1)
            fmts = tuple(p.strip() for p in rest.split(",") if p.strip())
            formats[name.strip()] = fmts
        return cls(formats)

    @classmethod
    def default(cls) -> "ConfigApiSpec":
        text = (
            resources.files("confcompat").joinpath("data/confapis.txt").read_text()
        )
        return cls.from_text(text)

    def for_api(self, api: str) -> tuple[str, ...]:
        if api not in self.formats:
            raise ConfigError(f"configuration API {api!r} has no format entry")
        return self.formats[api]


@dataclass(frozen=True, order=True)
class ConfigConstraint:
    """{attribute, tag, format} witnessed at one API level."""

    attribute: str
    xml_tag: str
    format: str
    api_level: int = 0
    provenance: Site | None = None

    @property
    def triple(self) -> tuple[str, str, str]:
        return (self.attribute, self.xml_tag, self.format)

    def __str__(self):
        return (
            f"{{{self.attribute}, {self.xml_tag}, {self.format}}}"
            f" @ {self.api_level}"
        )


@dataclass(frozen=True)
class Diagnostic:
    site: Site
    reason: str
    detail: str = ""

    # budget-type reasons mean "undecided", not a semantic discard
    BUDGET_REASONS = frozenset(
        {"engine-budget", "solver-budget", "a-undecidable", "x-undecidable"}
    )

    def __str__(self):
        extra = f": {self.detail}" if self.detail else ""
        return f"{self.site} [{self.reason}]{extra}"


@dataclass(frozen=True)
class ExtractionResult:
    constraints: tuple[ConfigConstraint, ...]
    diagnostics: tuple[Diagnostic, ...]

    @property
    def triples(self) -> set[tuple[str, str, str]]:
        return {c.triple for c in self.constraints}

    @property
    def undecided(self) -> bool:
        return any(d.reason in Diagnostic.BUDGET_REASONS for d in self.diagnostics)


def attr_display(name: str) -> str:
    """Render ``R.attr.x`` as the platform attribute name ``android:x``."""
    if name.startswith("R.attr."):
        return "android:" + name[len("R.attr.") :]
    return name


def class_var_sorts(cls: IrClass) -> dict[F.Var, str]:
    return {
        F.Var(var, f"{cls.name}.{method}"): sort
        for (method, var), sort in semantics.var_sorts(cls).items()
    }


def _tag_vars(disjunct: F.Formula, calls: dict[F.Var, F.ApiCall]) -> list[F.Var]:
    """Tag-accessor variables reachable from a disjunct, including those
    buried inside other calls' arguments."""
    closed = solver._closure_vars(F.free_vars(disjunct), calls)
    return sorted(
        (v for v in closed if v in calls and calls[v].api == TAG_API),
        key=lambda v: (v.scope, v.name),
    )


def refine_acc(
    pi: PathConstraint,
    spec: ConfigApiSpec,
    snap: FrameworkSnapshot,
    solver_budget: int = solver.DEFAULT_BUDGET,
    int_seed: tuple[int, ...] = (),
    str_seed: tuple[str, ...] = (),
    diagnostics: list[Diagnostic] | None = None,
) -> list[ConfigConstraint]:
    """Refine one path constraint into configuration constraints.

    Unsatisfiable or budget-starved constraints produce nothing; each
    surviving disjunct contributes the cross product of its enumerated
    attribute values, tag values, and the API's declared formats.
    """
    diags = diagnostics if diagnostics is not None else []
    cls = snap.class_map[pi.class_name]
    target_stmt = cls.method_map[pi.target.method].body[pi.target.index]
    assert isinstance(target_stmt, Target)
    formats = spec.for_api(target_stmt.api)

    sym = solver.symbolize(pi.formula, snap.attr_consts)
    sorts = class_var_sorts(cls)
    common = dict(
        budget=solver_budget,
        int_seed=int_seed,
        str_seed=str_seed,
        calls=sym.calls,
        var_sorts=sorts,
    )

    outcome = solver.check_sat(solver.SolverQuery(sym.formula, **common))
    if isinstance(outcome, solver.Unsat):
        return []
    if isinstance(outcome, solver.BudgetExceeded):
        diags.append(Diagnostic(pi.target, "solver-budget", f"entry {pi.entry}"))
        return []

    names_by_id = snap.attr_names_by_id
    out: list[ConfigConstraint] = []
    for disjunct in F.disjuncts(sym.formula):
        tas = F.target_atoms(disjunct)
        if len(tas) != 1:
            raise AssertionError(
                f"expected one target invocation per disjunct, got {len(tas)}"
            )
        ta = tas[0]

        a_vals = solver.enumerate_values(
            solver.SolverQuery(disjunct, focus=ta.attr_arg, **common)
        )
        if isinstance(a_vals, solver.Undecidable):
            diags.append(Diagnostic(pi.target, "a-undecidable", f"entry {pi.entry}"))
            continue
        if not a_vals.closed:
            diags.append(Diagnostic(pi.target, "a-unclosed", f"entry {pi.entry}"))
            continue
        if not a_vals.values:
            continue  # disjunct unsatisfiable on its own

        tag_vars = _tag_vars(disjunct, sym.calls)
        if not tag_vars:
            x_vals: set[str] = {pi.class_name}
        else:
            x_vals = set()
            undecided = False
            for v in tag_vars:
                vs = solver.enumerate_values(
                    solver.SolverQuery(disjunct, focus=v, **common)
                )
                if isinstance(vs, solver.Undecidable):
                    diags.append(
                        Diagnostic(pi.target, "x-undecidable", f"entry {pi.entry}")
                    )
                    undecided = True
                    break
                if not vs.closed:
                    diags.append(
                        Diagnostic(pi.target, "x-unclosed", f"entry {pi.entry}")
                    )
                    undecided = True
                    break
                x_vals.update(vs.values)
            if undecided:
                continue

        for a in a_vals.values:
            attr_name = names_by_id.get(a)
            if attr_name is None:
                diags.append(
                    Diagnostic(
                        pi.target, "a-not-an-attribute", f"value {a!r}"
                    )
                )
                continue
            for x in sorted(x_vals):
                for fmt in formats:
                    out.append(
                        ConfigConstraint(
                            attribute=attr_display(attr_name),
                            xml_tag=x,
                            format=fmt,
                            api_level=snap.api_level,
                            provenance=pi.target,
                        )
                    )
    return out


def extract_all_constraints(
    snap: FrameworkSnapshot,
    spec: ConfigApiSpec | None = None,
    engine_budget: int = DEFAULT_EXPANSION_BUDGET,
    solver_budget: int = solver.DEFAULT_BUDGET,
) -> ExtractionResult:
    """Run the whole backward pipeline over every target of every class.

    One misbehaving target never aborts the snapshot; its diagnostics are
    aggregated into the result.
    """
    spec = spec or ConfigApiSpec.default()
    # unknown configuration APIs are a configuration error, raised up front
    for site in list_target_statements(snap):
        stmt = snap.class_map[site.cls].method_map[site.method].body[site.index]
        assert isinstance(stmt, Target)
        spec.for_api(stmt.api)

    constraints: list[ConfigConstraint] = []
    diags: list[Diagnostic] = []
    for cls in sorted(snap.classes, key=lambda c: c.name):
        sites = [s for s in list_target_statements(snap) if s.cls == cls.name]
        if not sites:
            continue
        g = build_trimmed_icfg(cls)
        int_pool, str_pool = semantics.class_pools(cls, snap.attr_consts)
        for site in sites:
            try:
                pis = extract_path_constraints(g, site, engine_budget)
            except EngineBudgetError as exc:
                diags.append(Diagnostic(site, "engine-budget", str(exc)))
                continue
            for pi in pis:
                constraints.extend(
                    refine_acc(
                        pi,
                        spec,
                        snap,
                        solver_budget=solver_budget,
                        int_seed=int_pool,
                        str_seed=str_pool,
                        diagnostics=diags,
                    )
                )

    seen: dict[tuple[str, str, str], ConfigConstraint] = {}
    for c in constraints:
        seen.setdefault(c.triple, c)
    ordered = tuple(sorted(seen.values(), key=lambda c: c.triple))
    return ExtractionResult(ordered, tuple(diags))
