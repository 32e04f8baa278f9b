"""Market and bid-collection file formats.

One JSON schema with a discriminating `kind` field carries both plain markets
and arctic bid collections:

    { "kind": "market" | "arctic",
      "goods":  [ {"name": str, "supply": num|"p/q"} ],
      "buyers": [ {"name": str, "values": [...], "budget": num|"p/q"} ],
      "bids":   [ {"owner": str, "vector": [...], "budget": num|"p/q"} ] }

Numbers may be written as JSON numbers or as strings ("3/5", "0.25"). When
every numeric token in a document is an integer or a string, the market is
read in exact rational mode; a single raw JSON float switches the whole
document to float mode. An arctic collection reduces to a market with one
pseudo-buyer per bid; the owner of each pseudo-buyer is retained so reports
can re-aggregate.

A CSV alternative with header `name,budget,v_1,...,v_n` covers the buyer
(or bid) table only; supplies must be given separately.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .market import Buyer, Good, Market, MarketError
from .numeric import EXACT, FLOAT_DEFAULT, Number, NumericMode, number_to_json, parse_number

KIND_MARKET = "market"
KIND_ARCTIC = "arctic"


class ParseError(MarketError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class ArcticBid:
    owner: str
    vector: Tuple[Number, ...]
    budget: Number


@dataclass(frozen=True)
class BidCollection:
    goods: Tuple[Good, ...]
    bids: Tuple[ArcticBid, ...]
    mode: NumericMode


@dataclass(frozen=True)
class FlattenedMarket:
    """Market of pseudo-buyers (one per kept bid) plus their owners."""

    market: Market
    owners: Tuple[str, ...]


@dataclass(frozen=True)
class LoadedMarket:
    kind: str
    market: Market
    owners: Optional[Tuple[str, ...]]  # set for arctic inputs
    collection: Optional[BidCollection]


def _require(condition, path, message):
    if not condition:
        raise ParseError(path, message)


def _numeric_tokens(obj, path):
    """Yield every numeric slot of a document for mode inference."""
    for k, good in enumerate(obj.get("goods", ())):
        if isinstance(good, dict):
            yield f"goods[{k}].supply", good.get("supply")
    key = "buyers" if "buyers" in obj else "bids"
    vec_key = "values" if key == "buyers" else "vector"
    for k, row in enumerate(obj.get(key, ())):
        if isinstance(row, dict):
            yield f"{key}[{k}].budget", row.get("budget")
            vec = row.get(vec_key)
            if isinstance(vec, list):
                for j, v in enumerate(vec):
                    yield f"{key}[{k}].{vec_key}[{j}]", v
    for j, c in enumerate(obj.get("costs", ())):
        yield f"costs[{j}]", c


def _token_is_exact(token) -> bool:
    if isinstance(token, bool):
        return False
    if isinstance(token, int):
        return True
    if isinstance(token, str):
        try:
            if "/" in token:
                num, den = token.split("/", 1)
                Fraction(int(num.strip()), int(den.strip()))
            else:
                Fraction(token.strip())
            return True
        except (ValueError, ZeroDivisionError):
            return False
    return False


def _infer_mode(obj) -> NumericMode:
    for _path, token in _numeric_tokens(obj, ""):
        if token is None:
            continue
        if not _token_is_exact(token):
            return FLOAT_DEFAULT
    return EXACT


def _number(token, path, mode) -> Number:
    try:
        return parse_number(token, mode)
    except ValueError as exc:
        raise ParseError(path, str(exc)) from None


def _parse_goods(obj, mode) -> Tuple[Good, ...]:
    goods_raw = obj.get("goods")
    _require(isinstance(goods_raw, list) and goods_raw, "goods", "need a nonempty array")
    goods = []
    for k, entry in enumerate(goods_raw):
        path = f"goods[{k}]"
        _require(isinstance(entry, dict), path, "expected an object")
        name = entry.get("name")
        _require(isinstance(name, str) and name, f"{path}.name", "need a nonempty string")
        supply = _number(entry.get("supply"), f"{path}.supply", mode)
        _require(supply >= 0, f"{path}.supply", "supply must be nonnegative")
        goods.append(Good(name, supply))
    return tuple(goods)


def _check_costs(obj, mode):
    costs = obj.get("costs")
    if costs is None:
        return
    _require(isinstance(costs, list), "costs", "expected an array")
    for j, c in enumerate(costs):
        value = _number(c, f"costs[{j}]", mode)
        _require(
            value == 0,
            f"costs[{j}]",
            "nonzero seller costs are out of scope; remove the costs field",
        )


def parse_bid_collection(source, mode: Optional[NumericMode] = None) -> BidCollection:
    obj = _as_object(source)
    _require(obj.get("kind") == KIND_ARCTIC, "kind", "expected \"arctic\"")
    if mode is None:
        mode = _infer_mode(obj)
    _check_costs(obj, mode)
    goods = _parse_goods(obj, mode)
    bids_raw = obj.get("bids")
    _require(isinstance(bids_raw, list) and bids_raw, "bids", "need a nonempty array")
    bids = []
    for k, entry in enumerate(bids_raw):
        path = f"bids[{k}]"
        _require(isinstance(entry, dict), path, "expected an object")
        owner = entry.get("owner")
        _require(isinstance(owner, str) and owner, f"{path}.owner", "need a nonempty string")
        vec_raw = entry.get("vector")
        _require(isinstance(vec_raw, list), f"{path}.vector", "expected an array")
        _require(
            len(vec_raw) == len(goods),
            f"{path}.vector",
            f"expected {len(goods)} entries, got {len(vec_raw)}",
        )
        vector = tuple(
            _number(v, f"{path}.vector[{j}]", mode) for j, v in enumerate(vec_raw)
        )
        for j, v in enumerate(vector):
            _require(v >= 0, f"{path}.vector[{j}]", "bid values must be nonnegative")
        budget = _number(entry.get("budget"), f"{path}.budget", mode)
        _require(budget >= 0, f"{path}.budget", "budget must be nonnegative")
        _require(
            budget == 0 or any(v > 0 for v in vector),
            f"{path}.vector",
            "a funded bid needs at least one positive value",
        )
        bids.append(ArcticBid(owner, vector, budget))
    return BidCollection(goods, tuple(bids), mode)


def flatten_bids(collection: BidCollection) -> FlattenedMarket:
    """One pseudo-buyer per funded bid; zero-budget bids are dropped loudly."""
    buyers = []
    owners = []
    per_owner = {}
    for bid in collection.bids:
        if bid.budget == 0:
            warnings.warn(f"dropping zero-budget bid by owner {bid.owner!r}")
            continue
        per_owner[bid.owner] = per_owner.get(bid.owner, 0) + 1
        buyers.append(
            Buyer(f"{bid.owner}#{per_owner[bid.owner]}", bid.vector, bid.budget)
        )
        owners.append(bid.owner)
    market = Market(collection.goods, tuple(buyers), collection.mode)
    return FlattenedMarket(market, tuple(owners))


def reaggregate(owners: Sequence[str], allocation, prices):
    """Combine pseudo-buyer bundles back into per-owner bundles and spends.

    Owners are reported in first-appearance order; each gets the sum of its
    bids' bundles and the money those bundles cost at `prices`.
    """
    if len(owners) != len(allocation):
        raise MarketError("owner map and allocation sizes differ")
    order = []
    bundles = {}
    for owner, bundle in zip(owners, allocation):
        if owner not in bundles:
            order.append(owner)
            bundles[owner] = list(bundle)
        else:
            for k, qty in enumerate(bundle):
                bundles[owner][k] = bundles[owner][k] + qty
    out = []
    for owner in order:
        bundle = tuple(bundles[owner])
        spend = 0
        for price, qty in zip(prices, bundle):
            spend = spend + price * qty
        out.append((owner, bundle, spend))
    return tuple(out)


def _as_object(source) -> dict:
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as exc:
            raise ParseError("$", f"not valid JSON: {exc}") from None
    _require(isinstance(source, dict), "$", "top level must be an object")
    return source


def load_market(source, mode: Optional[NumericMode] = None) -> LoadedMarket:
    obj = _as_object(source)
    kind = obj.get("kind")
    _require(
        kind in (KIND_MARKET, KIND_ARCTIC),
        "kind",
        'expected "market" or "arctic"',
    )
    if kind == KIND_ARCTIC:
        collection = parse_bid_collection(obj, mode)
        flat = flatten_bids(collection)
        return LoadedMarket(kind, flat.market, flat.owners, collection)
    if mode is None:
        mode = _infer_mode(obj)
    _check_costs(obj, mode)
    goods = _parse_goods(obj, mode)
    buyers_raw = obj.get("buyers")
    _require(isinstance(buyers_raw, list) and buyers_raw, "buyers", "need a nonempty array")
    buyers = []
    for k, entry in enumerate(buyers_raw):
        path = f"buyers[{k}]"
        _require(isinstance(entry, dict), path, "expected an object")
        name = entry.get("name")
        _require(isinstance(name, str) and name, f"{path}.name", "need a nonempty string")
        vec_raw = entry.get("values")
        _require(isinstance(vec_raw, list), f"{path}.values", "expected an array")
        _require(
            len(vec_raw) == len(goods),
            f"{path}.values",
            f"expected {len(goods)} entries, got {len(vec_raw)}",
        )
        values = tuple(
            _number(v, f"{path}.values[{j}]", mode) for j, v in enumerate(vec_raw)
        )
        for j, v in enumerate(values):
            _require(v >= 0, f"{path}.values[{j}]", "values must be nonnegative")
        budget = _number(entry.get("budget"), f"{path}.budget", mode)
        _require(budget >= 0, f"{path}.budget", "budget must be nonnegative")
        buyers.append(Buyer(name, values, budget))
    market = Market(goods, tuple(buyers), mode)
    return LoadedMarket(kind, market, None, None)


def parse_market(source, mode: Optional[NumericMode] = None) -> Market:
    """Market from JSON text, bytes, or a decoded object (arctic inputs are
    flattened; use load_market to keep the owner mapping)."""
    return load_market(source, mode).market


def serialize_market(market: Market) -> str:
    obj = {
        "kind": KIND_MARKET,
        "goods": [
            {"name": g.name, "supply": number_to_json(g.supply)} for g in market.goods
        ],
        "buyers": [
            {
                "name": b.name,
                "values": [number_to_json(v) for v in b.values],
                "budget": number_to_json(b.budget),
            }
            for b in market.buyers
        ],
    }
    return json.dumps(obj, indent=2) + "\n"


def serialize_bid_collection(collection: BidCollection) -> str:
    obj = {
        "kind": KIND_ARCTIC,
        "goods": [
            {"name": g.name, "supply": number_to_json(g.supply)}
            for g in collection.goods
        ],
        "bids": [
            {
                "owner": bid.owner,
                "vector": [number_to_json(v) for v in bid.vector],
                "budget": number_to_json(bid.budget),
            }
            for bid in collection.bids
        ],
    }
    return json.dumps(obj, indent=2) + "\n"


def load_market_csv(
    text: str,
    supplies: Sequence,
    kind: str = KIND_MARKET,
    mode: Optional[NumericMode] = None,
) -> LoadedMarket:
    """Buyer (or bid) table from CSV with header name,budget,v_1,...,v_n.

    The CSV carries no supplies, so they are passed separately and must match
    the value columns in number. Goods are named g1..gn.
    """
    _require(kind in (KIND_MARKET, KIND_ARCTIC), "kind", 'expected "market" or "arctic"')
    rows = list(csv.reader(io.StringIO(text)))
    _require(bool(rows), "csv", "empty input")
    header = [h.strip() for h in rows[0]]
    n = len(header) - 2
    _require(
        n >= 1 and header[0] == "name" and header[1] == "budget"
        and header[2:] == [f"v_{j + 1}" for j in range(n)],
        "csv.header",
        "expected name,budget,v_1,...,v_n",
    )
    _require(
        len(supplies) == n,
        "csv",
        f"{n} value columns but {len(supplies)} supplies given",
    )
    body = [r for r in rows[1:] if r and any(cell.strip() for cell in r)]
    _require(bool(body), "csv", "no data rows")
    if mode is None:
        tokens = list(supplies)
        for r in body:
            tokens.extend(r[1:])
        mode = EXACT if all(_token_is_exact(t) for t in tokens) else FLOAT_DEFAULT
    goods = []
    for j, s in enumerate(supplies):
        supply = _number(s, f"supply[{j}]", mode)
        _require(supply >= 0, f"supply[{j}]", "supply must be nonnegative")
        goods.append(Good(f"g{j + 1}", supply))
    entries = []
    for k, r in enumerate(body):
        path = f"csv.row[{k + 1}]"
        _require(len(r) == n + 2, path, f"expected {n + 2} cells, got {len(r)}")
        name = r[0].strip()
        _require(bool(name), path, "need a nonempty name")
        budget = _number(r[1].strip(), f"{path}.budget", mode)
        _require(budget >= 0, f"{path}.budget", "budget must be nonnegative")
        vector = tuple(
            _number(cell.strip(), f"{path}.v_{j + 1}", mode)
            for j, cell in enumerate(r[2:])
        )
        for j, v in enumerate(vector):
            _require(v >= 0, f"{path}.v_{j + 1}", "values must be nonnegative")
        entries.append((name, vector, budget))
    if kind == KIND_ARCTIC:
        collection = BidCollection(
            tuple(goods),
            tuple(ArcticBid(name, vec, budget) for name, vec, budget in entries),
            mode,
        )
        flat = flatten_bids(collection)
        return LoadedMarket(kind, flat.market, flat.owners, collection)
    buyers = tuple(Buyer(name, vec, budget) for name, vec, budget in entries)
    return LoadedMarket(kind, Market(tuple(goods), buyers, mode), None, None)
