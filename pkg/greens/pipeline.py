"""End-to-end run: degree check, assembly, relation solve, evaluation and comparison."""
from __future__ import annotations

import logging
from fractions import Fraction

from greens import audit_log
from greens.cocycle import compare_expected, green_value, normalization_ratio, pairing_constant
from greens.errors import DegreeObstruction
from greens.quadforms import deg_check, pell_solution
from greens.report import Report, decay_per_level, level_table
from greens.symbols import assemble_total, kernel_basis, solve_relations

logger = logging.getLogger("greens.pipeline")


def format_polynomial(coeffs, var="z"):
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = Fraction(coeffs[i])
        if c == 0:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if mono and abs(c) == 1:
            text = mono
        else:
            text = f"{abs(c)}{'*' + mono if mono else ''}"
        terms.append(("-" if c < 0 else "+", text))
    if not terms:
        return "0"
    sign, first = terms[0]
    out = ("-" if sign == "-" else "") + first
    for sign, text in terms[1:]:
        out += f" {sign} {text}"
    return out


def _witness_text(witness):
    out = {}
    for label, value in witness.items():
        if isinstance(value, dict):
            out[label] = {str(key): [str(c) for c in coeffs] for key, coeffs in value.items()}
        else:
            out[label] = [c.digit_string() for c in value.coeffs]
    return out


def _tail_valuations(rows):
    tails = {}
    for row in rows:
        key = f"level {row['level']}"
        tails[key] = min(tails.get(key, row["min_valuation"]), row["min_valuation"])
    return tails


def _branch_label(L):
    return str(Fraction(L))


def run_pipeline(cfg):
    """Runs every stage for `cfg` and returns the Report."""
    report = None
    with audit_log.stage("config"):
        cfg.validate()
        field = cfg.field
        report = Report(
            p=cfg.p,
            k=cfg.k,
            precision=cfg.N,
            working_precision=cfg.working_precision,
            series_order=cfg.series_order,
            level_cutoff=cfg.level_cutoff,
            branch=_branch_label(cfg.L_branch),
            divisor=cfg.divisor.as_entries(),
            target=cfg.target.as_list() if cfg.target else None,
            tolerance=cfg.defect_tolerance,
        )
        logger.info(
            f"p={cfg.p} k={cfg.k} N={cfg.N} M={cfg.series_order} L_cut={cfg.level_cutoff} W={cfg.working_precision}"
        )

    with audit_log.stage("degree") as fields:
        check = deg_check(cfg.divisor, cfg.k, cfg.p, field)
        report.degree_check = "passed" if check else "failed"
        report.degree_witness = _witness_text(check.witness)
        fields["passed"] = bool(check)
        if not check:
            raise DegreeObstruction(f"degree symbol is nonzero at {', '.join(check.witness)}", check.witness)

    with audit_log.stage("assembly") as fields:
        assembly = assemble_total(
            cfg.divisor,
            field,
            cfg.n,
            cfg.series_order,
            cfg.level_cutoff,
            stop_valuation=cfg.stop_valuation,
            checkpoint_dir=cfg.checkpoint_dir,
            check_degree=False,
            tolerance=cfg.defect_tolerance,
        )
        report.symmetric = assembly.symmetric
        report.levels_used = assembly.levels
        report.level_rows = assembly.rows
        report.tail_valuations = _tail_valuations(assembly.rows)
        report.decay_per_level = decay_per_level(level_table(assembly.rows))
        fields["levels"] = assembly.levels

    samples = [cfg.L_branch] + [L for L in cfg.branch_samples() if L != cfg.L_branch]
    solutions = {}
    with audit_log.stage("relations"):
        for L in samples:
            solutions[L] = solve_relations(assembly.total.with_branch(L), cfg.defect_tolerance)
        main = solutions[cfg.L_branch]
        report.defect_residuals = main.residuals
        report.post_residuals = main.post_residuals
        report.kernel = [format_polynomial(vec) for vec in kernel_basis(cfg.n)]

    if cfg.target is None:
        logger.info("no target given, stopping after the relation solve")
        return report

    values = {}
    with audit_log.stage("evaluation"):
        report.raising_constant = str(normalization_ratio(cfg.n))
        report.pairing_constant = str(pairing_constant(cfg.n))
        report.pell = list(pell_solution(cfg.target.disc))
        for L in samples:
            value, gamma = green_value(solutions[L].function, cfg.target, field)
            values[L] = value
            report.branch_values[_branch_label(L)] = value.digit_string()
        report.automorph = [list(row) for row in gamma]
        value = values[cfg.L_branch]
        report.value_valuation = value.valuation
        report.value_digits = value.digit_string()
        f0, f1, fp = (values[Fraction(L)] for L in (0, 1, cfg.p))
        report.branch_affine_agreement = ((fp - f0) - (f1 - f0) * cfg.p).valuation

    if cfg.expected is not None:
        with audit_log.stage("comparison") as fields:
            report.expected = cfg.expected.describe()
            report.agreement = compare_expected(values[cfg.L_branch], cfg.expected, field, cfg.L_branch)
            fields["agreement"] = report.agreement
    return report
