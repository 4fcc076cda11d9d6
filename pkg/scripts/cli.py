"""
Command-line front end.

    spectral-lab sl --potential "x^2" --nmax 100 --check gelfand-levitan --out r.json
    spectral-lab schrod --potential "-2*sech(x)^2" --check zf --order 1
    spectral-lab qdiff --b 1 --k 0.5 --check m-coefficient
    spectral-lab auto --task dedekind --d -4 --s 2

Every run writes a JSON report; the exit code is 0 when all checks pass, 1 on
a failed check or a numerical failure, 2 on a usage error.
"""

import math
import os
import warnings
from typing import Annotated, Any, Callable, Optional

import numpy as np
import structlog
import typer
from pydantic import ValidationError

from scripts import automorphic, qdiff
from scripts.config import LOG_JSON, LOG_LEVEL, ConfigError, LabSettings, get_settings, load_config_file
from scripts.file_tools import write_csv, write_report
from scripts.lab_utils import check, configure_logging, console, print_checks, status
from scripts.numkit import ConditioningWarning
from scripts.potential import parse_potential
from scripts.report import ReportBuilder, render_summary
from scripts.schema import AutoTask, CheckRecord, MirrorOperator, QdiffCheck, SchrodCheck, SLCheck, Subcommand
from scripts.schrodinger import DecayingPotential, ScatteringProblem
from scripts.sturm_liouville import BoundedPotential, SturmLiouvilleProblem

log = structlog.get_logger(__name__)

app = typer.Typer(
    add_completion=False,
    no_args_is_help=True,
    help="Numerical checks of trace identities and resolvents for Sturm-Liouville, Schroedinger, "
    "functional-difference and automorphic Laplace operators.",
)

SECH_WELL_GRID = np.linspace(-8.0, 8.0, 161)


def _is_sech_well(v: DecayingPotential) -> bool:
    """True when v agrees with -2 sech(x)^2 on a sample grid, whatever its spelling."""
    values = np.asarray(v(SECH_WELL_GRID), dtype=float)
    return bool(np.allclose(values, -2.0 / np.cosh(SECH_WELL_GRID) ** 2, rtol=0.0, atol=1e-12))

ConfigOpt = Annotated[Optional[str], typer.Option("--config", help="JSON file supplying any flag")]
OutOpt = Annotated[Optional[str], typer.Option("--out", help="JSON report path")]
CsvOpt = Annotated[Optional[str], typer.Option("--csv", help="CSV table path")]
TolOpt = Annotated[Optional[float], typer.Option("--tol", help="Check tolerance override")]
SeedOpt = Annotated[Optional[int], typer.Option("--seed", help="Seed for randomized checks")]
LogJsonOpt = Annotated[bool, typer.Option("--log-json", help="Structured JSON logs on stderr")]


# -------------------------
# Flag handling
# -------------------------

def parse_complex(text: Any, name: str = "value") -> complex:
    """'re,im', 're' or a Python complex literal such as '1+2j'."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    raw = str(text).strip()
    try:
        if "," in raw:
            re_part, im_part = raw.split(",", 1)
            return complex(float(re_part), float(im_part))
        return complex(raw.replace(" ", ""))
    except ValueError:
        raise typer.BadParameter(f"cannot read '{raw}' as a complex number (use re,im)", param_hint=f"--{name}")


def _flag(name: str, ok: bool, lhs: float, rhs: float, note: str = "") -> CheckRecord:
    """Pass/fail property recorded as a check: abs_err is 0 when it holds and 1 otherwise."""
    return check(name, lhs, rhs, 0.5, abs_err=0.0 if ok else 1.0, note=note)


def _flat(row: dict) -> dict:
    """Split complex cells into _re and _im columns for CSV output."""
    out = {}
    for key, value in row.items():
        if isinstance(value, complex):
            out[f"{key}_re"], out[f"{key}_im"] = value.real, value.imag
        else:
            out[key] = value
    return out


def _int_pair(text: Any) -> tuple[int, int]:
    if isinstance(text, (list, tuple)) and len(text) == 2:
        return int(text[0]), int(text[1])
    try:
        m, n = str(text).split(",")
        return int(m), int(n)
    except ValueError:
        raise typer.BadParameter(f"expected m,n but got '{text}'", param_hint="--mn")


def _merge(config: Optional[str], cli: dict[str, Any]) -> dict[str, Any]:
    """command line > config file; environment and defaults are applied by the caller."""
    allowed = set(cli) | {"config", "log_json"}
    try:
        from_file = load_config_file(config, allowed)
    except ConfigError as e:
        raise typer.BadParameter(str(e), param_hint="--config")
    merged = {k: v for k, v in from_file.items() if k not in ("config", "log_json")}
    merged.update({k: v for k, v in cli.items() if v is not None})
    return merged


def _settings(params: dict[str, Any]) -> LabSettings:
    try:
        return get_settings(tol=params.get("tol"), seed=params.get("seed"))
    except ConfigError as e:
        raise typer.BadParameter(str(e))


def _choice(enum, value, name: str):
    try:
        return enum(value)
    except ValueError:
        options = ", ".join(e.value for e in enum)
        raise typer.BadParameter(f"'{value}' is not one of {options}", param_hint=f"--{name}")


def _finish(builder: ReportBuilder, settings: LabSettings, out: Optional[str], csv: Optional[str],
            table: Optional[list[dict]]) -> None:
    record = builder.build()
    path = write_report(record, os.path.abspath(out) if out else None, base_dir=settings.report_dir)
    if csv:
        if table:
            write_csv(table, os.path.abspath(csv))
        else:
            console.print("[yellow]no table for --csv in this run[/yellow]")
    if record.checks:
        print_checks(record.checks, title=f"{record.subcommand} checks")
    console.print(render_summary(record), markup=False, highlight=False)
    console.print(f"report: {path}")
    if not record.all_passed:
        raise typer.Exit(code=1)


def _run(subcommand: Subcommand, params: dict[str, Any], settings: LabSettings, log_json: bool,
         out: Optional[str], csv: Optional[str], body: Callable[[ReportBuilder], Optional[list[dict]]]) -> None:
    configure_logging(LOG_LEVEL, log_json or LOG_JSON)
    builder = ReportBuilder(subcommand, params, tol_override=settings.tol)
    table = None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConditioningWarning)
        with builder.guard(subcommand.value), status(f"running {subcommand.value} ..."):
            table = body(builder)
    for w in caught:
        if issubclass(w.category, ConditioningWarning):
            log.warning("conditioning", message=str(w.message))
    _finish(builder, settings, out, csv, table)


# -------------------------
# sl
# -------------------------

def _sl_body(problem: SturmLiouvilleProblem, check_name: SLCheck, n_max: int, lam: complex, settings: LabSettings):
    v = problem.v
    free = v.expr.is_constant and v.v_max == 0

    def eigen(b: ReportBuilder):
        eig = problem.eigenvalues(n_max)
        b.add_result("eigenvalues", eig.values)
        b.add_result("eigenvalue_error_estimates", eig.error_estimates)
        b.add_checks(problem.eigenvalue_simplicity(n_max), problem.wronskian_check(lam))
        if v.expr.is_constant:
            n = np.arange(1, n_max + 1)
            rel = np.abs(eig.array - (n**2 + v.mean)) / (n**2 + abs(v.mean))
            b.add_checks(check("eigenvalues-closed-form", float(rel.max()), 0.0, 1e-8, note="n^2 + c"))
        return [{"n": i + 1, "eigenvalue": val, "error_estimate": e}
                for i, (val, e) in enumerate(zip(eig.values, eig.error_estimates))]

    def determinant(b: ReportBuilder):
        det = problem.regularized_determinant(n_max)
        b.add_result("determinant", det)
        b.add_checks(check("determinant-truncation", det.value, det.half_value, 1e-4 * abs(det.value),
                           note=f"{n_max} vs {n_max // 2} factors"))
        if free:
            b.add_checks(check("determinant-free", det.value, 2 * math.pi, 1e-6))

    def trace(b: ReportBuilder):
        tr = problem.trace_resolvent(lam)
        b.add_result("trace_resolvent", tr)
        b.add_checks(check("trace-two-routes", tr.diagonal_integral, tr.log_derivative,
                           1e-6 * max(1.0, abs(tr.log_derivative))))
        if free:
            k = np.sqrt(lam + 0j)
            exact = -(math.pi / np.tan(math.pi * k) - 1 / k) / (2 * k)
            b.add_checks(check("trace-free", tr.diagonal_integral, exact, 1e-8))

    def gelfand_levitan(b: ReportBuilder):
        gl = problem.gelfand_levitan_check(n_max)
        b.add_result("gelfand_levitan", gl)
        b.add_checks(check("gelfand-levitan", gl.lhs, gl.rhs, 1e-3, note=f"tail {gl.tail:.3e}"))

    def d_asymptotics(b: ReportBuilder):
        fit = problem.d_asymptotics_fit()
        b.add_result("d_asymptotics", fit)
        b.add_checks(check("d-asymptotics", fit.coefficients[0], fit.expected_a, 0.02 * abs(fit.expected_a) + 1e-4,
                           note=f"k in {fit.k_range}"))

    def hilbert(b: ReportBuilder):
        b.add_checks(problem.hilbert_identity_check(lam, lam - 1.0))

    def hadamard(b: ReportBuilder):
        b.add_checks(problem.hadamard_check(lam, n_max))

    def parseval(b: ReportBuilder):
        record, result = problem.parseval_check(seed=settings.seed)
        b.add_result("parseval", result)
        b.add_checks(record)

    def weak(b: ReportBuilder):
        b.add_checks(problem.weak_resolvent_check(lam))

    steps = {
        SLCheck.EIGENVALUES: eigen,
        SLCheck.DETERMINANT: determinant,
        SLCheck.TRACE: trace,
        SLCheck.GELFAND_LEVITAN: gelfand_levitan,
        SLCheck.D_ASYMPTOTICS: d_asymptotics,
        SLCheck.HILBERT: hilbert,
        SLCheck.HADAMARD: hadamard,
        SLCheck.PARSEVAL: parseval,
        SLCheck.WEAK_RESOLVENT: weak,
    }
    return _dispatch(steps, check_name, SLCheck.ALL)


def _dispatch(steps: dict, chosen, all_value) -> Callable[[ReportBuilder], Optional[list[dict]]]:
    selected = list(steps.items()) if chosen == all_value else [(chosen, steps[chosen])]

    def body(builder: ReportBuilder):
        table = None
        for name, step in selected:
            with builder.guard(name.value):
                rows = step(builder)
                table = table or rows
        return table

    return body


@app.command("sl")
def sl_command(
    potential: Annotated[Optional[str], typer.Option("--potential", help="v(x) on [0, pi]")] = None,
    nmax: Annotated[Optional[int], typer.Option("--nmax", help="Number of eigenvalues")] = None,
    lam: Annotated[Optional[str], typer.Option("--lambda", help="Spectral parameter re,im")] = None,
    check_name: Annotated[Optional[str], typer.Option("--check", help="eigenvalues | determinant | trace | "
                          "gelfand-levitan | d-asymptotics | hilbert | hadamard | parseval | weak-resolvent | all")] = None,
    out: OutOpt = None,
    csv: CsvOpt = None,
    tol: TolOpt = None,
    seed: SeedOpt = None,
    config: ConfigOpt = None,
    log_json: LogJsonOpt = False,
):
    """Dirichlet problem -y'' + v y = lambda y on [0, pi]."""
    params = _merge(config, {"potential": potential, "nmax": nmax, "lambda": lam, "check": check_name,
                             "tol": tol, "seed": seed, "out": out, "csv": csv})
    settings = _settings(params)
    text = params.get("potential", "0")
    chosen = _choice(SLCheck, params.get("check", "all"), "check")
    n_max = int(params.get("nmax", 100))
    lam_value = parse_complex(params.get("lambda", "-1"), "lambda")
    try:
        v = BoundedPotential(parse_potential(str(text)))
    except ValueError as e:
        # PotentialSyntaxError or an unbounded v
        raise typer.BadParameter(str(e), param_hint="--potential")
    problem = SturmLiouvilleProblem(v, settings.sl_steps)
    report_params = {"potential": v.expr.to_text(), "nmax": n_max, "lambda": lam_value, "check": chosen.value,
                     "seed": settings.seed}
    if settings.tol is not None:
        report_params["tol"] = settings.tol
    _run(Subcommand.SL, report_params, settings, log_json, params.get("out"), params.get("csv"),
         _sl_body(problem, chosen, n_max, lam_value, settings))


# -------------------------
# schrod
# -------------------------

def _schrod_body(problem: ScatteringProblem, chosen: SchrodCheck, k: complex, lam: complex, order: int,
                 settings: LabSettings):
    sech_well = _is_sech_well(problem.v)
    k_grid = np.linspace(0.1, 10.0, 25)

    def scattering(b: ReportBuilder):
        a, refl = problem.scattering_coefficients(k)
        b.add_result("a", a)
        b.add_result("b", refl)
        b.add_checks(problem.conjugation_check([0.5, 1.0, 2.0]), problem.high_energy_check())
        k_upper = k if k.imag > 0 else complex(k.real, 1.0)
        b.add_checks(problem.jost_asymptotic_check(k_upper), problem.jost_bound_check(k_upper))
        if sech_well:
            a_grid, _, _ = problem.transition_coefficients(k_grid)
            exact = (k_grid - 1j) / (k_grid + 1j)
            worst = int(np.argmax(np.abs(a_grid - exact)))
            b.add_checks(check("a-closed-form", a_grid[worst], exact[worst], 1e-6, note="k in [0.1, 10]"))
        samples = problem.transmission_reflection(k_grid)
        return [_flat(s.model_dump()) for s in samples]

    def bound(b: ReportBuilder):
        states = problem.bound_states()
        b.add_result("bound_states", states)
        b.add_checks(*[check(f"bound-state kappa={s.kappa:.6g}", s.residual, 0.0, 1e-6) for s in states])
        if sech_well:
            kappa = states[0].kappa if states else float("nan")
            b.add_checks(check("bound-state-closed-form", kappa, 1.0, 1e-6))
        return [_flat(s.model_dump()) for s in states]

    def trace_formula(b: ReportBuilder):
        td = problem.trace_of_resolvent_difference(lam)
        b.add_result("trace_difference", td)
        b.add_checks(check("trace-formula", td.lhs, td.rhs, 1e-5 * max(1.0, abs(td.rhs))))
        if sech_well:
            kk = np.sqrt(lam + 0j)
            b.add_checks(check("trace-formula-closed-form", td.rhs, -1j / (kk * (kk * kk + 1)), 1e-6))

    def zf(b: ReportBuilder):
        ti = problem.zf_trace_identity_check(order)
        b.add_result("trace_identity", ti)
        b.add_checks(check(f"zf-order-{order}", ti.lhs, ti.rhs, 1e-4, note=f"tail {ti.tail_estimate:.2e}"))
        closed = {0: 2j, 1: -2j / 3}
        if sech_well and order in closed:
            b.add_checks(check(f"zf-order-{order}-closed-form", ti.rhs, closed[order], 1e-4))

    def unitarity(b: ReportBuilder):
        b.add_checks(problem.unitarity_check(k_grid))

    def dispersion(b: ReportBuilder):
        b.add_checks(problem.dispersion_check([0.5 + 0.5j, 1.0 + 1.0j, 2.0 + 0.3j]))

    def hilbert(b: ReportBuilder):
        b.add_checks(problem.hilbert2_check(lam))

    def gelfand_dikii(b: ReportBuilder):
        b.add_checks(problem.gelfand_dikii_check(lam))

    def riccati(b: ReportBuilder):
        b.add_checks(problem.log_a_riccati_check())

    def transmission(b: ReportBuilder):
        samples = problem.transmission_reflection(k_grid)
        worst = max(samples, key=lambda s: abs(s.transmission + s.reflection - 1.0))
        b.add_checks(check("transmission-reflection", worst.transmission + worst.reflection, 1.0, 1e-7,
                           note=f"worst at k={worst.k.real:.4g}"))
        return [_flat(s.model_dump()) for s in samples]

    steps = {
        SchrodCheck.SCATTERING: scattering,
        SchrodCheck.BOUND_STATES: bound,
        SchrodCheck.TRACE_FORMULA: trace_formula,
        SchrodCheck.ZF: zf,
        SchrodCheck.UNITARITY: unitarity,
        SchrodCheck.DISPERSION: dispersion,
        SchrodCheck.HILBERT: hilbert,
        SchrodCheck.GELFAND_DIKII: gelfand_dikii,
        SchrodCheck.RICCATI: riccati,
        SchrodCheck.TRANSMISSION: transmission,
    }
    return _dispatch(steps, chosen, SchrodCheck.ALL)


@app.command("schrod")
def schrod_command(
    potential: Annotated[Optional[str], typer.Option("--potential", help="Decaying v(x) on the line")] = None,
    k: Annotated[Optional[str], typer.Option("--k", help="Spectral parameter k (re,im)")] = None,
    lam: Annotated[Optional[str], typer.Option("--lambda", help="lambda = k^2 off the spectrum (re,im)")] = None,
    order: Annotated[Optional[int], typer.Option("--order", help="Order l of the trace identity")] = None,
    check_name: Annotated[Optional[str], typer.Option("--check", help="scattering | bound-states | trace-formula | "
                          "zf | unitarity | dispersion | hilbert | gelfand-dikii | riccati | transmission | all")] = None,
    out: OutOpt = None,
    csv: CsvOpt = None,
    tol: TolOpt = None,
    seed: SeedOpt = None,
    config: ConfigOpt = None,
    log_json: LogJsonOpt = False,
):
    """Scattering theory of -y'' + v y on the line."""
    params = _merge(config, {"potential": potential, "k": k, "lambda": lam, "order": order, "check": check_name,
                             "tol": tol, "seed": seed, "out": out, "csv": csv})
    settings = _settings(params)
    chosen = _choice(SchrodCheck, params.get("check", "all"), "check")
    k_value = parse_complex(params.get("k", "1"), "k")
    lam_value = parse_complex(params.get("lambda", "-4"), "lambda")
    l_order = int(params.get("order", 1))
    try:
        v = DecayingPotential(parse_potential(params.get("potential", "-2*sech(x)^2")),
                              threshold=settings.cutoff_threshold)
    except ValueError as e:
        # PotentialSyntaxError or a v without enough decay
        raise typer.BadParameter(str(e), param_hint="--potential")
    problem = ScatteringProblem(v)
    report_params = {"potential": v.expr.to_text(), "k": k_value, "lambda": lam_value, "order": l_order,
                     "check": chosen.value}
    if settings.tol is not None:
        report_params["tol"] = settings.tol
    _run(Subcommand.SCHROD, report_params, settings, log_json, params.get("out"), params.get("csv"),
         _schrod_body(problem, chosen, k_value, lam_value, l_order, settings))


# -------------------------
# qdiff
# -------------------------

def _qdiff_body(op: qdiff.DifferenceOperator, chosen: QdiffCheck, k: complex, x: float, operator: MirrorOperator,
                zeta: float, mn: tuple[int, int], basis: int, settings: LabSettings):
    b_value = op.b
    top = 0.5 / b_value

    def dilog(b: ReportBuilder):
        b.add_checks(*op.dilog_checks())

    def free_kernel(b: ReportBuilder):
        ks = [re + 1j * frac * top for re in (0.3, 0.8, 1.5) for frac in (0.2, 0.6)]
        xs = (-1.0, 0.2, 1.7)
        rows, worst = [], (0.0, 0j, 0.0)
        for kk in ks:
            closed = qdiff.free_resolvent_kernel(b_value, kk, np.array(xs))
            for xx, value in zip(xs, closed):
                fourier = qdiff.free_resolvent_fourier(b_value, kk, xx).value
                gap = abs(value - fourier)
                rows.append({"k_re": kk.real, "k_im": kk.imag, "x": xx, "closed_re": value.real,
                             "closed_im": value.imag, "fourier_re": fourier.real, "fourier_im": fourier.imag})
                if gap >= worst[0]:
                    worst = (gap, kk, xx)
        b.add_checks(check("free-kernel-two-routes", worst[0], 0.0, 1e-6,
                           note=f"worst of {len(rows)} samples at k={worst[1]}, x={worst[2]}"))
        b.add_checks(qdiff.free_kernel_weak_check(b_value, ks[0]))
        return rows

    def m_coeff(b: ReportBuilder):
        b.add_result("M", op.m_coefficient(k))
        b.add_checks(*op.m_coefficient_checks())

    def scattering(b: ReportBuilder):
        b.add_checks(*op.scattering_checks(k, x))

    def casorati(b: ReportBuilder):
        b.add_result("casorati_constant", op.casorati_constant(k))
        b.add_checks(*op.casorati_check(k))

    def weyl(b: ReportBuilder):
        rng = np.random.default_rng(settings.seed)
        for _ in range(3):
            test = qdiff.Gaussian(complex(-rng.uniform(1.0, 2.0), rng.uniform(-1, 1)),
                                  complex(rng.uniform(-0.5, 0.5), rng.uniform(-1, 1)))
            b.add_checks(qdiff.weyl_commutation_check(b_value, test))

    def mirror(b: ReportBuilder):
        spectrum = qdiff.mirror_spectrum(operator, b_value, basis, zeta=zeta, mn=mn, n_jobs=settings.n_jobs)
        b.add_result("mirror_spectrum", spectrum)
        for flag in spectrum.flags:
            b.add_diagnostic(flag)
        if spectrum.weyl_ratio is not None:
            b.add_checks(check("weyl-law", spectrum.weyl_ratio, 1.0, 0.2,
                               note=f"{spectrum.n_resolved} resolved eigenvalues"))
        lowest = spectrum.agreement_digits[:5]
        b.add_checks(_flag("mirror-lowest-stable", bool(lowest) and min(lowest) >= 4.0, min(lowest, default=0.0), 4.0,
                          note="digits of agreement of the lowest 5 eigenvalues under basis doubling"))
        return spectrum.csv_rows()

    steps = {
        QdiffCheck.DILOG: dilog,
        QdiffCheck.FREE_KERNEL: free_kernel,
        QdiffCheck.M_COEFFICIENT: m_coeff,
        QdiffCheck.SCATTERING: scattering,
        QdiffCheck.CASORATI: casorati,
        QdiffCheck.WEYL: weyl,
        QdiffCheck.MIRROR: mirror,
    }
    return _dispatch(steps, chosen, QdiffCheck.ALL)


@app.command("qdiff")
def qdiff_command(
    b: Annotated[Optional[float], typer.Option("--b", help="Shift parameter b > 0")] = None,
    k: Annotated[Optional[str], typer.Option("--k", help="Spectral parameter k (re,im)")] = None,
    x: Annotated[Optional[float], typer.Option("--x", help="Real point for pointwise identities")] = None,
    operator: Annotated[Optional[str], typer.Option("--operator", help="h-zeta | h-mn")] = None,
    zeta: Annotated[Optional[float], typer.Option("--zeta", help="zeta in H(zeta)")] = None,
    mn: Annotated[Optional[str], typer.Option("--mn", help="m,n in H_{m,n}")] = None,
    basis: Annotated[Optional[int], typer.Option("--basis", help="Fourier-grid size N")] = None,
    check_name: Annotated[Optional[str], typer.Option("--check", help="dilog | free-kernel | m-coefficient | "
                          "scattering | casorati | weyl | mirror | all")] = None,
    out: OutOpt = None,
    csv: CsvOpt = None,
    tol: TolOpt = None,
    seed: SeedOpt = None,
    config: ConfigOpt = None,
    log_json: LogJsonOpt = False,
):
    """Functional-difference operator U + U^-1 + V and the mirror-curve operators."""
    params = _merge(config, {"b": b, "k": k, "x": x, "operator": operator, "zeta": zeta, "mn": mn, "basis": basis,
                             "check": check_name, "tol": tol, "seed": seed, "out": out, "csv": csv})
    settings = _settings(params)
    chosen = _choice(QdiffCheck, params.get("check", "all"), "check")
    mn_value = _int_pair(params["mn"]) if "mn" in params else (1, 1)
    op_kind = _choice(MirrorOperator, params.get("operator", "h-mn" if "mn" in params else "h-zeta"), "operator")
    b_value = float(params.get("b", 1.0))
    k_value = parse_complex(params.get("k", "0.5"), "k")
    try:
        op = qdiff.DifferenceOperator(b_value, indent_cap=settings.indent_radius, order=settings.gl_order)
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint="--b")
    report_params = {"b": b_value, "k": k_value, "x": float(params.get("x", 0.3)), "operator": op_kind.value,
                     "zeta": float(params.get("zeta", 1.0)), "mn": list(mn_value),
                     "basis": int(params.get("basis", settings.mirror_basis)), "check": chosen.value,
                     "seed": settings.seed}
    if settings.tol is not None:
        report_params["tol"] = settings.tol
    _run(Subcommand.QDIFF, report_params, settings, log_json, params.get("out"), params.get("csv"),
         _qdiff_body(op, chosen, k_value, report_params["x"], op_kind, report_params["zeta"], mn_value,
                     report_params["basis"], settings))


# -------------------------
# auto
# -------------------------

def _auto_body(task: AutoTask, d: int, s: complex, z: complex, zp: complex, settings: LabSettings):
    def forms(b: ReportBuilder):
        heegner = automorphic.reduced_forms(d)
        b.add_result("class_number", heegner.class_number)
        b.add_result("forms", [[q.a, q.b, q.c] for q in heegner.forms])
        outside = sum(not q.in_closed_domain_exact() for q in heegner.forms)
        b.add_checks(_flag("heegner-membership", outside == 0, outside, 0.0,
                           note="points outside the closed domain"))
        return heegner.csv_rows()

    def phi(b: ReportBuilder):
        b.add_result("phi", automorphic.free_kernel_phi(automorphic.point_pair_u(z, zp), s))
        b.add_checks(*automorphic.phi_checks(s))

    def eisenstein(b: ReportBuilder):
        records, values = automorphic.eisenstein_checks(z, s)
        b.add_result("eisenstein", values)
        b.add_checks(*records, automorphic.modular_invariance_check(s, seed=settings.seed))
        with b.guard("truncated-integral"):
            trunc = automorphic.truncated_eisenstein_integral(s, 3.0)
            b.add_result("truncated_integral", trunc)
            b.add_checks(check("eisenstein-truncated-integral", trunc.quadrature, trunc.closed_form,
                               1e-8 * max(1.0, abs(trunc.closed_form)), note=f"height {trunc.height:g}"))
        return [v.csv_row() for v in values]

    def dedekind(b: ReportBuilder):
        zk = automorphic.dedekind_zeta(d, s)
        b.add_result("dedekind_zeta", zk)
        if zk.near_pole:
            b.add_diagnostic(f"s = {s} is close to the pole at s = 1")
        b.add_checks(check("dedekind-two-routes", zk.via_heegner, zk.via_factorization,
                           1e-7 * max(1.0, abs(zk.via_factorization)), note=f"h = {zk.class_number}"))

    def deuring(b: ReportBuilder):
        result = automorphic.deuring_limit_check(d, s)
        b.add_result("deuring", result)
        bound = max(1e-12, 100 * result.tail_scale)
        b.add_checks(check("deuring-limit", result.exact, result.two_term, bound,
                           note=f"height {result.height:.4f}, e^(-2 pi y) = {result.tail_scale:.2e}"))

    def series(b: ReportBuilder):
        result = automorphic.automorphic_resolvent_series(z, zp, s, tol=1e-6)
        swapped = automorphic.automorphic_resolvent_series(zp, z, s, tol=1e-6)
        b.add_result("resolvent", result)
        b.add_checks(
            check("series-doubling", result.last_change, 0.0, 1e-4, note=f"cutoff {result.cutoff:g}"),
            check("series-symmetry", result.value, swapped.value, 1e-5),
        )
        if s.imag != 0:
            conj = automorphic.automorphic_resolvent_series(z, zp, s.conjugate(), tol=1e-6)
            b.add_checks(check("series-reality", np.conj(result.value), conj.value, 1e-5))
        height = automorphic.reduce_point(zp).point.y + 1.0
        fay = automorphic.pseudo_cusp_constant_term(height, zp, s, tol=1e-7)
        b.add_result("constant_term", fay)
        b.add_checks(check("series-constant-term", fay.average, fay.expected, 1e-5 * max(1.0, abs(fay.expected)),
                           note=f"y = {height:.4g}"))

    def linnik(b: ReportBuilder):
        box = automorphic.DomainBox(y_min=1.0, y_max=2.0)
        stats = automorphic.linnik_ladder(settings.linnik_targets, box, n_jobs=settings.n_jobs)
        b.add_result("linnik", stats)
        b.add_result("box_measure", box.measure())
        b.add_checks(check("linnik-measure", box.measure(), 3 / (2 * math.pi), 1e-12))
        if len(stats) >= 2:
            first, last = stats[0].discrepancy, stats[-1].discrepancy
            b.add_checks(_flag("linnik-trend", last < first, last, first,
                              note=f"discrepancy {first:.4g} at d={stats[0].d}, {last:.4g} at d={stats[-1].d}"))
        return [st.csv_row() for st in stats]

    def cusp(b: ReportBuilder):
        params = automorphic.CuspZoneParams(a=1.0, kappa=3.0, s=s)
        y, yp = z.imag, zp.imag
        lo = min(y, yp)
        if lo < params.a:
            params = automorphic.CuspZoneParams(a=lo, kappa=3.0, s=s)
        kernels = automorphic.cusp_zone_kernels(params, y, yp)
        b.add_result("cusp_kernels", kernels)
        b.add_checks(*automorphic.cusp_checks(params, y, yp))

    steps = {
        AutoTask.FORMS: forms,
        AutoTask.PHI: phi,
        AutoTask.EISENSTEIN: eisenstein,
        AutoTask.DEDEKIND: dedekind,
        AutoTask.DEURING: deuring,
        AutoTask.SERIES: series,
        AutoTask.LINNIK: linnik,
        AutoTask.CUSP: cusp,
    }
    return _dispatch(steps, task, None)


@app.command("auto")
def auto_command(
    task: Annotated[Optional[str], typer.Option("--task", help="forms | phi | eisenstein | dedekind | deuring | "
                    "series | linnik | cusp")] = None,
    d: Annotated[Optional[int], typer.Option("--d", help="Fundamental discriminant d < 0")] = None,
    s: Annotated[Optional[str], typer.Option("--s", help="Spectral parameter s (re,im)")] = None,
    x: Annotated[Optional[float], typer.Option("--x", help="Re z")] = None,
    y: Annotated[Optional[float], typer.Option("--y", help="Im z")] = None,
    zp: Annotated[Optional[str], typer.Option("--zp", help="Second point z' (re,im)")] = None,
    out: OutOpt = None,
    csv: CsvOpt = None,
    tol: TolOpt = None,
    seed: SeedOpt = None,
    config: ConfigOpt = None,
    log_json: LogJsonOpt = False,
):
    """Modular-group Laplacian: Eisenstein series, Heegner points, resolvent."""
    params = _merge(config, {"task": task, "d": d, "s": s, "x": x, "y": y, "zp": zp,
                             "tol": tol, "seed": seed, "out": out, "csv": csv})
    settings = _settings(params)
    chosen = _choice(AutoTask, params.get("task", "eisenstein"), "task")
    d_value = int(params.get("d", -4))
    s_value = parse_complex(params.get("s", "2"), "s")
    z_value = complex(float(params.get("x", 0.0)), float(params.get("y", 1.0)))
    zp_value = parse_complex(params.get("zp", "0,2"), "zp")
    if z_value.imag <= 0 or zp_value.imag <= 0:
        raise typer.BadParameter("points must lie in the upper half-plane", param_hint="--y/--zp")
    report_params = {"task": chosen.value, "d": d_value, "s": s_value, "z": z_value, "zp": zp_value,
                     "seed": settings.seed}
    if settings.tol is not None:
        report_params["tol"] = settings.tol
    _run(Subcommand.AUTO, report_params, settings, log_json, params.get("out"), params.get("csv"),
         _auto_body(chosen, d_value, s_value, z_value, zp_value, settings))


def main() -> None:
    try:
        app()
    except ValidationError as e:
        console.print(f"[red]invalid parameters:[/red] {e}")
        raise SystemExit(2)
