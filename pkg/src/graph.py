import logging

from langgraph.graph import StateGraph, END

from .nodes.closed_forms import closed_forms_node
from .nodes.exponents import exponents_node
from .nodes.identities import identities_node
from .nodes.infrastructure import infrastructure_node
from .nodes.knapp import knapp_node
from .nodes.lebesgue import lebesgue_node
from .nodes.maximal_sweep import maximal_sweep_node, sweep_node
from .state import LabState

logger = logging.getLogger(__name__)

# (experiment id, graph node name, node function) in execution order
SUITE_NODES = [
    ("exponents", "exponents", exponents_node),
    ("extension", "closed_forms", closed_forms_node),
    ("infrastructure", "infrastructure", infrastructure_node),
    ("maximal", "maximal_sweep", maximal_sweep_node),
    ("knapp", "knapp", knapp_node),
    ("lebesgue", "lebesgue", lebesgue_node),
    ("identities", "identities", identities_node),
    ("sweep", "sweep", sweep_node),
]

EXPERIMENTS = [experiment for experiment, _, _ in SUITE_NODES]

# The configurable sweep is not part of the acceptance suite
ACCEPTANCE_EXPERIMENTS = [e for e in EXPERIMENTS if e != "sweep"]


def build_suite_graph():
    """
    Build the LangGraph experiment suite

    This function:
    1. Creates a StateGraph with LabState
    2. Adds one node per experiment
    3. Connects nodes in sequence
    4. Sets entry point
    5. Compiles the graph

    Every node checks LabState.selected and skips itself when not selected,
    so the same graph serves single experiments and the full suite.

    Returns:
        Compiled LangGraph ready to execute

    Flow:
        Node 1: Exponent algebra
            ↓
        Node 2: Closed forms (extension)
            ↓
        Node 3: Infrastructure
            ↓
        Node 4: Maximal operator sweep
            ↓
        Node 5: Knapp scaling
            ↓
        Node 6: Lebesgue points
            ↓
        Node 7: Identity suite
            ↓
        Ratio sweep (only when selected)
            ↓
        END
    """
    logger.info("📊 Building experiment suite graph...")
    graph = StateGraph(LabState)

    for experiment, name, node in SUITE_NODES:
        graph.add_node(name, node)
        logger.debug("  ✓ node %s (%s) added", name, experiment)

    names = [name for _, name, _ in SUITE_NODES]
    for a, b in zip(names, names[1:]):
        graph.add_edge(a, b)
    graph.add_edge(names[-1], END)

    graph.set_entry_point(names[0])
    compiled_graph = graph.compile()
    logger.info("  ✓ Graph compiled: %s → END", " → ".join(names))
    return compiled_graph


def run_suite(state: LabState) -> LabState:
    """Invoke the suite graph and return the final state as a LabState"""
    result = build_suite_graph().invoke(state)
    return LabState(**dict(result))


__all__ = ["build_suite_graph", "run_suite", "EXPERIMENTS", "ACCEPTANCE_EXPERIMENTS"]
