"""Periodic double-sided auction with uniform pay-as-cleared pricing.

Bids and asks are limit orders for a single 15-minute delivery slot.
Each clearing matches the crossing region greedily in price-time priority,
executes every trade at one price (the midpoint of the marginal matched
bid and ask, rounded half away from zero) and leaves residual quantity in
the book for later clearings.  Energy that never finds a counterparty is
settled against the retailer at fixed tariffs, and metered deviations from
the contracted position settle at balancing prices.
"""
from __future__ import annotations

from dataclasses import dataclass

from .core import MarketParams, cash_microeur, round_div_half_away

BUY = "buy"
SELL = "sell"


class MarketOrderError(ValueError):
    pass


class DeliveryInPast(MarketOrderError):
    pass


class ZeroQty(MarketOrderError):
    pass


@dataclass(slots=True)
class Order:
    """Resting limit order; qty_wh shrinks as fills occur."""

    agent: str
    side: str
    delivery_step: int
    qty_wh: int
    limit_mct: int
    seq: int                     # global arrival counter, breaks price ties


@dataclass(frozen=True, slots=True)
class Trade:
    buyer: str
    seller: str
    delivery_step: int
    qty_wh: int
    price_mct: int
    cleared_at: int              # timestep the auction ran


@dataclass(frozen=True, slots=True)
class ClearingResult:
    delivery_step: int
    cleared_at: int
    price_mct: int | None        # None when nothing crossed
    volume_wh: int
    trades: tuple[Trade, ...]


class OrderBook:
    """Per-delivery-slot books with cancel-replace semantics.

    An agent holds at most one resting order per (delivery slot, side);
    posting again replaces it and refreshes its time priority.
    """

    def __init__(self) -> None:
        self._slots: dict[int, dict[tuple[str, str], Order]] = {}
        self._seq = 0

    def post(self, agent: str, side: str, delivery_step: int, qty_wh: int,
             limit_mct: int, now: int) -> Order:
        if side not in (BUY, SELL):
            raise MarketOrderError(f"unknown side {side!r}")
        if delivery_step <= now:
            raise DeliveryInPast(
                f"delivery step {delivery_step} not after current step {now}")
        if qty_wh <= 0:
            raise ZeroQty("orders need a positive quantity")
        if not 0 <= limit_mct <= 100_000:
            raise MarketOrderError("limit price outside [0, 100000] Mct")
        self._seq += 1
        order = Order(agent, side, delivery_step, qty_wh, limit_mct, self._seq)
        self._slots.setdefault(delivery_step, {})[(agent, side)] = order
        return order

    def cancel(self, agent: str, delivery_step: int, side: str | None = None) -> None:
        """Remove the agent's resting order(s) for a slot; missing is a no-op."""
        book = self._slots.get(delivery_step)
        if not book:
            return
        sides = (BUY, SELL) if side is None else (side,)
        for s in sides:
            book.pop((agent, s), None)
        if not book:
            del self._slots[delivery_step]

    def open_orders(self, delivery_step: int) -> list[Order]:
        return list(self._slots.get(delivery_step, {}).values())

    def open_slots(self) -> list[int]:
        return sorted(self._slots)

    def purge_slot(self, delivery_step: int) -> None:
        self._slots.pop(delivery_step, None)

    def has_both_sides(self, delivery_step: int) -> bool:
        book = self._slots.get(delivery_step)
        if not book:
            return False
        saw_buy = saw_sell = False
        for (_, side) in book:
            saw_buy |= side == BUY
            saw_sell |= side == SELL
            if saw_buy and saw_sell:
                return True
        return False


def clear_auction(book: OrderBook, delivery_step: int, now: int) -> ClearingResult:
    """Match the crossing region of one slot at a uniform price.

    Bids sort by limit descending, asks ascending, ties by arrival.  The
    marginal (last matched) bid and ask set the clearing price at their
    midpoint, rounded half away from zero.  Partially filled orders keep
    their residual quantity and time priority.
    """
    orders = book._slots.get(delivery_step)
    if not orders:
        return ClearingResult(delivery_step, now, None, 0, ())
    bids = sorted((o for o in orders.values() if o.side == BUY),
                  key=lambda o: (-o.limit_mct, o.seq))
    asks = sorted((o for o in orders.values() if o.side == SELL),
                  key=lambda o: (o.limit_mct, o.seq))
    fills: list[tuple[Order, Order, int]] = []
    marginal_bid = marginal_ask = None
    bi = ai = 0
    bid_left = bids[0].qty_wh if bids else 0
    ask_left = asks[0].qty_wh if asks else 0
    while bi < len(bids) and ai < len(asks):
        bid, ask = bids[bi], asks[ai]
        if bid.limit_mct < ask.limit_mct:
            break
        qty = min(bid_left, ask_left)
        fills.append((bid, ask, qty))
        marginal_bid, marginal_ask = bid, ask
        bid_left -= qty
        ask_left -= qty
        if bid_left == 0:
            bi += 1
            bid_left = bids[bi].qty_wh if bi < len(bids) else 0
        if ask_left == 0:
            ai += 1
            ask_left = asks[ai].qty_wh if ai < len(asks) else 0
    if not fills:
        return ClearingResult(delivery_step, now, None, 0, ())

    price = round_div_half_away(
        marginal_bid.limit_mct + marginal_ask.limit_mct, 2)
    trades = []
    volume = 0
    for bid, ask, qty in fills:
        trades.append(Trade(bid.agent, ask.agent, delivery_step, qty,
                            price, now))
        volume += qty
        for order in (bid, ask):
            order.qty_wh -= qty
            if order.qty_wh == 0:
                book.cancel(order.agent, delivery_step, order.side)
    return ClearingResult(delivery_step, now, price, volume, tuple(trades))


# ---------------------------------------------------------------------------
# retailer settlement
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class SettlementLeg:
    """One settled quantity: positive cash means the agent pays."""

    buy_wh: int
    sell_wh: int
    cash_mueur: int


_ZERO_LEG = SettlementLeg(0, 0, 0)


def wholesale_gate(residual_wh: int, params: MarketParams) -> SettlementLeg:
    """Settle a residual position against the retailer at fixed tariffs.

    Positive residual is an outstanding purchase (pay energy_price_buy),
    negative an outstanding sale (earn feed_in_tariff).  In runs without a
    local market every exchange settles here.
    """
    if residual_wh > 0:
        return SettlementLeg(residual_wh, 0,
                             cash_microeur(residual_wh, params.energy_price_buy))
    if residual_wh < 0:
        qty = -residual_wh
        return SettlementLeg(0, qty, -cash_microeur(qty, params.feed_in_tariff))
    return _ZERO_LEG


def settle_balancing(metered_net_wh: int, contracted_net_wh: int,
                     params: MarketParams, lem_enabled: bool) -> SettlementLeg:
    """Settle the deviation between metered and contracted net energy.

    Extra energy drawn beyond the contract is bought at the balancing buy
    price; energy not taken (or extra injection) is sold at the balancing
    sell price.  Without a local market the deviation settles at the plain
    retail tariffs instead, so imbalance carries no penalty there.
    """
    deviation = metered_net_wh - contracted_net_wh
    if lem_enabled:
        buy_price = params.balancing_price_buy
        sell_price = params.balancing_price_sell
    else:
        buy_price = params.energy_price_buy
        sell_price = params.feed_in_tariff
    if deviation > 0:
        return SettlementLeg(deviation, 0, cash_microeur(deviation, buy_price))
    if deviation < 0:
        qty = -deviation
        return SettlementLeg(0, qty, -cash_microeur(qty, sell_price))
    return _ZERO_LEG
