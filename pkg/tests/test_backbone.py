"""Disparity-filter significance and backbone extraction."""
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from scrapflow.backbone import (
    BackboneParams,
    disparity_alpha,
    edge_significances,
    extract_backbone,
    summarize_backbone,
)
from scrapflow.trade_ingest import TimeWindow, TradeNetwork


def network(edges: dict) -> TradeNetwork:
    nodes = frozenset(n for e in edges for n in e)
    return TradeNetwork(window=TimeWindow(2007, 2011), edges=dict(edges), nodes=nodes)


def integration_oracle(p: float, k: int) -> float:
    integral, _ = integrate.quad(lambda x: (1.0 - x) ** (k - 2), 0.0, p, epsabs=1e-13, epsrel=1e-13)
    return 1.0 - (k - 1) * integral


# ---------------------------------------------------------------------------
# disparity_alpha


def test_full_concentration_is_maximally_significant():
    assert disparity_alpha(1.0, 3) == 0.0


def test_half_weight_degree_two():
    assert disparity_alpha(0.5, 2) == pytest.approx(integration_oracle(0.5, 2), abs=1e-12)
    assert disparity_alpha(0.5, 2) == pytest.approx(0.5)


def test_point_two_degree_five():
    assert disparity_alpha(0.2, 5) == pytest.approx(integration_oracle(0.2, 5), abs=1e-12)
    assert disparity_alpha(0.2, 5) == pytest.approx(0.4096)


def test_degree_one_never_certifies():
    assert disparity_alpha(0.0, 1) == 1.0
    assert disparity_alpha(1.0, 1) == 1.0


def test_domain_errors():
    with pytest.raises(ValueError):
        disparity_alpha(-0.01, 3)
    with pytest.raises(ValueError):
        disparity_alpha(1.01, 3)
    with pytest.raises(ValueError):
        disparity_alpha(0.5, 0)


@given(st.floats(0.0, 1.0, allow_nan=False), st.integers(2, 50))
@settings(max_examples=80)
def test_closed_form_matches_integration(p, k):
    assert abs(disparity_alpha(p, k) - integration_oracle(p, k)) < 1e-10


# ---------------------------------------------------------------------------
# extract_backbone


def star_network() -> TradeNetwork:
    # hub with 10 out-edges: one carries 91% of out-strength, the rest 1% each
    edges = {("HUB", "D00"): 91.0}
    for i in range(1, 10):
        edges[("HUB", f"D{i:02d}")] = 1.0
    return network(edges)


def test_star_dominant_edge_survives_uniform_edges_dropped():
    bb = extract_backbone(star_network(), BackboneParams(alpha=0.05))
    assert set(bb.edges) == {("HUB", "D00")}
    assert bb.nodes == {"HUB", "D00"}
    assert math.isclose(disparity_alpha(0.91, 10), (1 - 0.91) ** 9)
    assert disparity_alpha(0.91, 10) == pytest.approx(3.874204889999988e-10)


def test_all_degree_one_yields_empty_backbone():
    bb = extract_backbone(network({("A", "B"): 5.0, ("C", "D"): 7.0}), BackboneParams(alpha=0.999))
    assert bb.edges == {}
    assert bb.nodes == frozenset()


def test_alpha_near_one_keeps_every_edge_with_a_testable_endpoint():
    net = star_network()
    bb = extract_backbone(net, BackboneParams(alpha=0.999999))
    assert set(bb.edges) == set(net.edges)  # hub out-degree 10 > 1 on every edge


def test_keep_degree_one_flag_retains_untestable_edges():
    net = network({("A", "B"): 5.0, ("C", "D"): 7.0})
    bb = extract_backbone(net, BackboneParams(alpha=0.05, keep_degree_one=True))
    assert set(bb.edges) == set(net.edges)


def test_or_rule_importer_side_can_certify():
    # exporter side is degree 1 everywhere; importer HUB has in-degree 10
    edges = {("S00", "HUB"): 91.0}
    for i in range(1, 10):
        edges[(f"S{i:02d}", "HUB")] = 1.0
    bb = extract_backbone(network(edges), BackboneParams(alpha=0.05))
    assert set(bb.edges) == {("S00", "HUB")}


def test_params_validation():
    with pytest.raises(ValueError):
        BackboneParams(alpha=0.0)
    with pytest.raises(ValueError):
        BackboneParams(alpha=1.0)


def test_edge_significances_normalized_weight_capped_at_one():
    sigs = edge_significances(star_network())
    by_edge = {(s.exporter, s.importer): s for s in sigs}
    dominant = by_edge[("HUB", "D00")]
    assert dominant.alpha_exporter == pytest.approx((1 - 0.91) ** 9)
    assert dominant.alpha_importer == 1.0  # importer degree 1
    assert dominant.alpha == dominant.alpha_exporter
    assert [(s.exporter, s.importer) for s in sigs] == sorted((s.exporter, s.importer) for s in sigs)


def test_summary_counts():
    net = star_network()
    bb = extract_backbone(net, BackboneParams(alpha=0.05))
    s = summarize_backbone(net, bb, 0.05)
    assert (s.edges_before, s.edges_after) == (10, 1)
    assert (s.nodes_before, s.nodes_after) == (11, 2)
    assert s.weight_after == pytest.approx(91.0)


# ---------------------------------------------------------------------------
# properties on random graphs

node_names = st.sampled_from([f"N{i}" for i in range(8)])


@st.composite
def random_networks(draw):
    pairs = draw(
        st.dictionaries(
            st.tuples(node_names, node_names).filter(lambda e: e[0] != e[1]),
            st.floats(0.01, 1e6, allow_nan=False),
            min_size=1,
            max_size=24,
        )
    )
    return network(pairs)


@given(random_networks(), st.floats(0.001, 0.5), st.floats(0.001, 0.5))
@settings(max_examples=60)
def test_backbone_monotone_in_alpha(net, a1, a2):
    lo, hi = sorted((a1, a2))
    small = extract_backbone(net, BackboneParams(alpha=lo))
    large = extract_backbone(net, BackboneParams(alpha=hi))
    assert set(small.edges) <= set(large.edges)


@given(random_networks(), st.floats(0.1, 1000.0, allow_nan=False))
@settings(max_examples=60)
def test_backbone_scale_invariance(net, c):
    scaled = network({e: w * c for e, w in net.edges.items()})
    params = BackboneParams(alpha=0.05)
    assert set(extract_backbone(net, params).edges) == set(extract_backbone(scaled, params).edges)


@given(random_networks())
@settings(max_examples=60)
def test_backbone_is_subgraph_with_original_weights(net):
    bb = extract_backbone(net, BackboneParams(alpha=0.1))
    for edge, w in bb.edges.items():
        assert net.edges[edge] == w
    assert bb.nodes == frozenset(n for e in bb.edges for n in e)
