"""Disparity-filter backbone extraction for weighted directed networks.

For a node of degree k, an incident edge carrying fraction p of the node's
strength gets significance alpha = (1 - p)^(k - 1): the probability that a
uniformly random split of unit strength among k edges puts at least fraction
p on one given edge. Small alpha marks an edge too heavy to be a random
share of its endpoint's throughput.
"""
from __future__ import annotations

from dataclasses import dataclass

from .trade_ingest import TradeNetwork


@dataclass(frozen=True)
class BackboneParams:
    """alpha: significance level; keep_degree_one: retain edges whose only
    endpoint test is the degenerate k=1 case (which can never certify)."""

    alpha: float = 0.05
    keep_degree_one: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


def disparity_alpha(p: float, k: int) -> float:
    """Significance of an edge with normalized weight p at a degree-k endpoint.

    Closed form (1 - p)^(k - 1). A degree-1 endpoint carries its whole
    strength on the single edge, which a one-way split reproduces with
    certainty, so k = 1 returns 1.0 (never significant from that side).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"normalized weight must be in [0, 1], got {p}")
    if k < 1:
        raise ValueError(f"degree must be >= 1, got {k}")
    if k == 1:
        return 1.0
    return (1.0 - p) ** (k - 1)


@dataclass(frozen=True)
class EdgeSignificance:
    exporter: str
    importer: str
    weight: float
    alpha_exporter: float  # against the exporter's out-strength/out-degree
    alpha_importer: float  # against the importer's in-strength/in-degree

    @property
    def alpha(self) -> float:
        return min(self.alpha_exporter, self.alpha_importer)


def edge_significances(network: TradeNetwork) -> list[EdgeSignificance]:
    """Both one-sided alphas for every edge, sorted by (exporter, importer)."""
    out_strength: dict[str, float] = {}
    in_strength: dict[str, float] = {}
    out_degree: dict[str, int] = {}
    in_degree: dict[str, int] = {}
    for (exp, imp), w in network.edges.items():
        out_strength[exp] = out_strength.get(exp, 0.0) + w
        in_strength[imp] = in_strength.get(imp, 0.0) + w
        out_degree[exp] = out_degree.get(exp, 0) + 1
        in_degree[imp] = in_degree.get(imp, 0) + 1
    rows = []
    for (exp, imp), w in sorted(network.edges.items()):
        p_out = min(w / out_strength[exp], 1.0)
        p_in = min(w / in_strength[imp], 1.0)
        rows.append(
            EdgeSignificance(
                exporter=exp,
                importer=imp,
                weight=w,
                alpha_exporter=disparity_alpha(p_out, out_degree[exp]),
                alpha_importer=disparity_alpha(p_in, in_degree[imp]),
            )
        )
    return rows


def extract_backbone(network: TradeNetwork, params: BackboneParams = BackboneParams()) -> TradeNetwork:
    """Subnetwork of edges significant at params.alpha on at least one side.

    An edge survives if either endpoint test (exporter out-side OR importer
    in-side) gives alpha < params.alpha; degree-1 sides report 1.0 and so
    never certify. With keep_degree_one, edges at a degree-1 exporter
    out-side or degree-1 importer in-side are retained unconditionally
    (otherwise all pendant countries are silently pruned). Nodes with no
    surviving edges are dropped.
    """
    out_degree: dict[str, int] = {}
    in_degree: dict[str, int] = {}
    for (exp, imp) in network.edges:
        out_degree[exp] = out_degree.get(exp, 0) + 1
        in_degree[imp] = in_degree.get(imp, 0) + 1
    kept: dict[tuple[str, str], float] = {}
    for sig in edge_significances(network):
        keep = sig.alpha_exporter < params.alpha or sig.alpha_importer < params.alpha
        if not keep and params.keep_degree_one:
            keep = out_degree[sig.exporter] == 1 or in_degree[sig.importer] == 1
        if keep:
            kept[(sig.exporter, sig.importer)] = sig.weight
    nodes = frozenset(c for pair in kept for c in pair)
    return TradeNetwork(window=network.window, edges=kept, nodes=nodes)


@dataclass(frozen=True)
class BackboneSummary:
    window_label: str
    alpha: float
    nodes_before: int
    edges_before: int
    nodes_after: int
    edges_after: int
    weight_before: float
    weight_after: float

    @property
    def edge_fraction(self) -> float:
        return self.edges_after / self.edges_before if self.edges_before else 0.0

    @property
    def weight_fraction(self) -> float:
        return self.weight_after / self.weight_before if self.weight_before else 0.0


def summarize_backbone(network: TradeNetwork, backbone: TradeNetwork, alpha: float) -> BackboneSummary:
    return BackboneSummary(
        window_label=network.window.label(),
        alpha=alpha,
        nodes_before=len(network.nodes),
        edges_before=len(network.edges),
        nodes_after=len(backbone.nodes),
        edges_after=len(backbone.edges),
        weight_before=network.total_flow,
        weight_after=backbone.total_flow,
    )
