"""Feasibility and clearing of price vectors via a transportation-flow reduction.

A price vector p is feasible when every buyer can be handed a demanded bundle
without exceeding supply. Routing money instead of units makes this a
bipartite flow problem: buyer i must push exactly beta_i (strict buyer,
money not bang-per-buck-maximal) or at most beta_i (flexible buyer) along
edges to the goods maximizing its bang-per-buck, and good j absorbs at most
p_j * s_j money.

The flow runs in two phases. Phase 1 routes strict budgets only; p is
feasible iff they saturate. Phase 2 adds the flexible buyers and keeps
augmenting, which never unsaturates a source edge, so the final value is the
maximal total spend extractable at p (the "max-extension revenue"). Since
every lower-bounded edge touches the source or the sink, p clears the market
exactly when that value equals sum_j p_j s_j: total inflow equal to total
good capacity forces each positively-priced good to sell out.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

from .flow import FlowNetwork
from .market import (
    MONEY,
    Allocation,
    BangPerBuckSet,
    Bundle,
    Market,
    MarketError,
    PriceVector,
    aggregate,
    bang_per_buck,
    is_demanded,
    require_valid,
)
from .numeric import Number


class OutcomeInfeasibleError(MarketError):
    """An outcome handed in as a precondition failed its feasibility check."""


@dataclass(frozen=True)
class SpendingGraph:
    """Bang-per-buck structure of all buyers at one price vector."""

    bpb: Tuple[BangPerBuckSet, ...]
    capacities: Tuple[Number, ...]  # p_j * s_j per good

    @property
    def strict_buyers(self) -> Tuple[int, ...]:
        return tuple(i for i, b in enumerate(self.bpb) if b.strict)


@dataclass(frozen=True)
class OverDemandWitness:
    """Goods S whose joint capacity cannot absorb the budgets forced into S."""

    goods: Tuple[int, ...]  # 1-based good indices
    forced_budget: Number
    capacity: Number

    @property
    def excess(self) -> Number:
        return self.forced_budget - self.capacity


@dataclass(frozen=True)
class FeasibilityCertificate:
    feasible: bool
    clearing: Optional[bool]  # None when only feasibility was decided
    allocation: Optional[Allocation]
    witness: Optional[OverDemandWitness]
    max_extension_revenue: Optional[Number] = None


def build_spending_graph(market: Market, p: PriceVector, tol: Number = None) -> SpendingGraph:
    if tol is None:
        tol = market.mode.tol
    bpb = tuple(
        bang_per_buck(buyer, p, tol, index=i) for i, buyer in enumerate(market.buyers)
    )
    caps = tuple(price * good.supply for price, good in zip(p, market.goods))
    return SpendingGraph(bpb, caps)


class _Routing:
    """Shared two-phase flow state behind check_feasible / check_clearing."""

    def __init__(self, market: Market, p: PriceVector, tol: Number):
        require_valid(market)
        self.market = market
        self.p = tuple(p)
        self.graph = build_spending_graph(market, p, tol)
        m, n = market.m, market.n
        caps = self.graph.capacities
        scale = max(1, sum(b.budget for b in market.buyers), sum(caps))
        self.slack = tol * scale * (m + n + 4)
        self.source = 0
        self.sink = m + n + 1
        self.net = FlowNetwork(m + n + 2, zero=tol * scale)
        self.buyer_edge = [None] * m
        self.spend_edges = [[] for _ in range(m)]  # (good index 0-based, edge id)
        for i, bpb in enumerate(self.graph.bpb):
            if bpb.strict:
                self.buyer_edge[i] = self.net.add_edge(self.source, 1 + i, market.buyers[i].budget)
            for j in sorted(bpb.goods - {MONEY}):
                eid = self.net.add_edge(1 + i, 1 + m + (j - 1), caps[j - 1])
                self.spend_edges[i].append((j - 1, eid))
        for k in range(n):
            self.net.add_edge(1 + m + k, self.sink, caps[k])

    def run_strict_phase(self):
        required = sum(
            self.market.buyers[i].budget for i in self.graph.strict_buyers
        )
        pushed = self.net.max_flow(self.source, self.sink)
        self.strict_spend = pushed
        self.shortfall = required - pushed
        self.feasible = self.shortfall <= self.slack
        return self.feasible

    def run_extension_phase(self):
        m = self.market.m
        for i, bpb in enumerate(self.graph.bpb):
            if not bpb.strict:
                self.buyer_edge[i] = self.net.add_edge(
                    self.source, 1 + i, self.market.buyers[i].budget
                )
        self.extension_revenue = self.strict_spend + self.net.max_flow(self.source, self.sink)
        return self.extension_revenue

    def allocation(self) -> Allocation:
        bundles = []
        for i in range(self.market.m):
            bundle = [0 * price for price in self.p]
            for k, eid in self.spend_edges[i]:
                bundle[k] = self.net.flow_on(eid) / self.p[k]
            bundles.append(tuple(bundle))
        return tuple(bundles)

    def witness(self) -> OverDemandWitness:
        reach = self.net.reachable_from(self.source)
        m = self.market.m
        goods = tuple(k + 1 for k in range(self.market.n) if reach[1 + m + k])
        forced = sum(
            self.market.buyers[i].budget
            for i in self.graph.strict_buyers
            if reach[1 + i]
        )
        capacity = sum(self.graph.capacities[j - 1] for j in goods)
        return OverDemandWitness(goods, forced, capacity)


def check_feasible(market: Market, p: PriceVector, tol: Number = None) -> FeasibilityCertificate:
    """Decide feasibility of p; the certificate carries a witness either way.

    Feasible: an allocation (strict buyers' routed spends, flexible buyers at
    zero) extending p to a feasible outcome. Infeasible: an over-demanded good
    set from the minimum cut.
    """
    if tol is None:
        tol = market.mode.tol
    routing = _Routing(market, p, tol)
    if routing.run_strict_phase():
        return FeasibilityCertificate(True, None, routing.allocation(), None)
    return FeasibilityCertificate(False, None, None, routing.witness())


def max_extension(market: Market, p: PriceVector, tol: Number = None):
    """Max-extension revenue at p and an allocation attaining it, or None if p
    is infeasible. Strict budgets are routed first as a hard requirement, then
    flexible buyers top the goods up."""
    if tol is None:
        tol = market.mode.tol
    routing = _Routing(market, p, tol)
    if not routing.run_strict_phase():
        return None
    revenue = routing.run_extension_phase()
    return revenue, routing.allocation()


def check_clearing(market: Market, p: PriceVector, tol: Number = None) -> FeasibilityCertificate:
    """Decide whether p is feasible and clears every positively priced good."""
    if tol is None:
        tol = market.mode.tol
    routing = _Routing(market, p, tol)
    if not routing.run_strict_phase():
        return FeasibilityCertificate(False, False, None, routing.witness())
    revenue = routing.run_extension_phase()
    total_capacity = sum(routing.graph.capacities)
    clearing = total_capacity - revenue <= routing.slack
    return FeasibilityCertificate(True, clearing, routing.allocation(), None, revenue)


def meet(p: PriceVector, q: PriceVector) -> PriceVector:
    if len(p) != len(q):
        raise MarketError("price dimensions differ")
    return tuple(min(a, b) for a, b in zip(p, q))


def outcome_is_feasible(market: Market, p: PriceVector, allocation: Allocation, tol: Number = None) -> bool:
    """Def.-style outcome check: aggregate within supply and every bundle demanded."""
    if tol is None:
        tol = market.mode.tol
    if len(allocation) != market.m:
        return False
    totals = aggregate(allocation, market.n)
    for total, good in zip(totals, market.goods):
        if total > good.supply + tol * max(1, good.supply):
            return False
    return all(
        is_demanded(buyer, p, bundle, tol)
        for buyer, bundle in zip(market.buyers, allocation)
    )


def meet_allocation(
    market: Market,
    p: PriceVector,
    q: PriceVector,
    x: Allocation,
    y: Allocation,
    tol: Number = None,
) -> Allocation:
    """Splice two feasible outcomes into one at the elementwise minimum price.

    With B = {j : p_j >= q_j}, a buyer keeps its q-outcome bundle y_i whenever
    it demands some good of B at the meet, and its p-outcome bundle x_i
    otherwise. The result extends meet(p, q) to a feasible outcome.
    """
    if tol is None:
        tol = market.mode.tol
    if not outcome_is_feasible(market, p, x, tol):
        raise OutcomeInfeasibleError("first outcome does not extend p feasibly")
    if not outcome_is_feasible(market, q, y, tol):
        raise OutcomeInfeasibleError("second outcome does not extend q feasibly")
    r = meet(p, q)
    b_side = {j + 1 for j in range(market.n) if p[j] >= q[j]}
    chosen = []
    for i, buyer in enumerate(market.buyers):
        demanded = bang_per_buck(buyer, r, tol, index=i).goods
        chosen.append(y[i] if demanded & b_side else x[i])
    return tuple(chosen)
