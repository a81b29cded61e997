#pragma once

#include <memory>
#include <string_view>

#include <json.hpp>

#include "arena/agent/policy.hpp"
#include "arena/market/market_spec.hpp"

namespace arena::agent {

/// Reference agents, deterministic for a given observation stream.
///
///   buy_and_hold  {symbols?: [..]}  invest all cash equally at the first
///                 decision, then hold. Defaults to the baseline symbol.
///   equal_weight  {symbols?: [..], rebalance_every?: k}  rebalance to equal
///                 value weights on decisions 0, k, 2k, ...
///   random        {seed: n, trade_probability?: p, max_orders?: m}  seeded
///                 random orders, deliberately sometimes unaffordable.
///   momentum      {lookback: n, top_k?: k, symbols?: [..]}  hold the top_k
///                 symbols by trailing close-to-close return.
///
/// Throws Error(invalid_params) for unknown kinds or bad params.
std::unique_ptr<Policy> make_scripted_policy(std::string_view kind, const nlohmann::json& params,
                                             const market::MarketSpec& spec);

/// Largest quantity whose cost (fees included) fits in `cash` and respects
/// the market's quantity rules. 0 when nothing is affordable.
double affordable_quantity(double cash, double price, const market::MarketSpec& spec);

/// Rounds a quantity down to something the market accepts (0 if below one lot).
double round_quantity(double qty, const market::MarketSpec& spec);

}  // namespace arena::agent
