from typing import Any, Dict, List

from ..errors import ExponentRangeError
from ..state import ExperimentConfig, LabState, Report, ReportRow
from ..tools.exponent_algebra import (
    Rational,
    conjugate,
    endpoint_q,
    in_paper_range,
    in_stein_tomas_range,
    lebesgue_threshold,
    stated_q,
    young_chain,
)
from .runner import run_experiment

LATTICE_P = ["1", "9/8", "8/7", "7/6", "6/5", "5/4", "9/7", "4/3", "7/5", "10/7", "3/2"]
LATTICE_Q = ["1", "3/2", "2", "5/2", "3", "4"]
LATTICE_DIMENSIONS = [2, 3, 4, 5]


def exponent_verdict(d: int, p: str, q: str) -> Dict[str, Any]:
    """
    Range verdicts, conjugate, endpoints and derivation traces for one (d, p, q)

    Example:
        exponent_verdict(3, "4/3", "2")["maximal_range"]["in_range"]  # True
    """
    maximal = in_paper_range(d, p, q)
    stein_tomas = in_stein_tomas_range(d, p, q)
    threshold, trace = lebesgue_threshold()
    verdict: Dict[str, Any] = {
        "d": d,
        "p": str(Rational.coerce(p)),
        "q": str(Rational.coerce(q)),
        "conjugate_p": str(conjugate(p)),
        "maximal_range": maximal.model_dump(),
        "stein_tomas_range": stein_tomas.model_dump(),
        "endpoint_q": {"adopted": str(endpoint_q(d)), "stated": str(stated_q(d))},
        "lebesgue_threshold": {"p": str(threshold), "trace": trace},
    }
    try:
        verdict["young_chain"] = young_chain(p).model_dump()
    except ExponentRangeError as e:
        verdict["young_chain"] = {"error": str(e)}
    return verdict


def lattice_disagreements(d: int) -> List[str]:
    """Lattice points where the maximal range and the Stein-Tomas range disagree"""
    out = []
    for p in LATTICE_P:
        for q in LATTICE_Q:
            if in_paper_range(d, p, q).in_range != in_stein_tomas_range(d, p, q).in_range:
                out.append(f"({p}, {q})")
    return out


def exponent_report(config: ExperimentConfig) -> Report:
    """Exact checks of the exponent algebra; every row is compared with zero tolerance"""
    report = Report(experiment_id="exponents", config={"dimension": config.dimension})

    report.add(ReportRow.check("conjugate(4/3)", float(conjugate("4/3")), 4.0, "=="))

    endpoint = in_paper_range(3, "4/3", "2")
    nonzero = [c.name for c in endpoint.binding_constraints if Rational(c.slack) != 0]
    report.add(ReportRow.check("endpoint_nonzero_slacks", float(len(nonzero)), 0.0, "==",
                               note=", ".join(nonzero)))
    report.add(ReportRow.check("endpoint_in_range", float(endpoint.in_range), 1.0, "=="))

    for d in LATTICE_DIMENSIONS:
        bad = lattice_disagreements(d)
        if d == 3:
            report.add(ReportRow.check(f"range_disagreements_d{d}", float(len(bad)), 0.0, "==",
                                       note="; ".join(bad)))
        else:
            report.add(ReportRow.check(f"range_disagreements_d{d}", float(len(bad)), 1.0, ">=",
                                       note="; ".join(bad)))

    chain = young_chain("8/7")
    expected = ("4/3", "4", "8")
    got = (chain.s, chain.s_conjugate, chain.p_conjugate)
    report.add(ReportRow.check("young_chain(8/7)_mismatches",
                               float(sum(a != b for a, b in zip(got, expected))), 0.0, "==",
                               note=f"s={chain.s}, s'={chain.s_conjugate}, p'={chain.p_conjugate}"))

    threshold, trace = lebesgue_threshold()
    report.add(ReportRow.check("lebesgue_threshold", float(threshold != Rational(8, 7)), 0.0, "==",
                               note=str(threshold)))

    endpoint_mismatch = 0
    for d in range(2, 11):
        q = endpoint_q(d)
        verdict = in_paper_range(d, "4/3", q)
        if not verdict.in_range or any(Rational(c.slack) != 0 for c in verdict.binding_constraints):
            endpoint_mismatch += 1
    report.add(ReportRow.check("endpoint_q_consistency_d2_to_d10", float(endpoint_mismatch), 0.0, "=="))

    report.diagnostics["lebesgue_trace"] = trace
    report.diagnostics["endpoint_q"] = {
        str(d): {"adopted": str(endpoint_q(d)), "stated": str(stated_q(d))}
        for d in range(2, 7)
    }
    return report


def exponents_node(state: LabState) -> dict:
    """
    Node 1: Exponent algebra

    This node:
    1. Checks conjugates, the endpoint slacks and the Young chain exactly
    2. Compares the maximal range with the Stein-Tomas range on a test lattice
    3. Records the derivation trace of the 8/7 threshold
    """
    return run_experiment(state, "exponents", "🔢 NODE 1: EXPONENT ALGEBRA", exponent_report)
