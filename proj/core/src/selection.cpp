#include "meshprox/selection.hpp"

#include <limits>

namespace meshprox::selection {

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "min_load") return Strategy::kMinLoad;
  if (name == "min_delay") return Strategy::kMinDelay;
  if (name == "min_hop") return Strategy::kMinHop;
  return std::nullopt;
}

std::string_view strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::kMinLoad:
      return "min_load";
    case Strategy::kMinDelay:
      return "min_delay";
    case Strategy::kMinHop:
      return "min_hop";
  }
  return "unknown";
}

std::vector<Strategy> all_strategies() {
  return {Strategy::kMinLoad, Strategy::kMinDelay, Strategy::kMinHop};
}

double score_min_load(const TableRow& row) {
  return row.predicted_rtt_ms + row.load_ms;
}

namespace {

double row_score(const TableRow& row, Strategy strategy) {
  switch (strategy) {
    case Strategy::kMinLoad:
      return score_min_load(row);
    case Strategy::kMinDelay:
      return row.predicted_rtt_ms;
    case Strategy::kMinHop:
      return static_cast<double>(row.hops);
  }
  return std::numeric_limits<double>::infinity();
}

bool row_fresh(const TableRow& row, std::int64_t now_round,
               std::int64_t staleness_rounds) {
  return row.freshness_round >= 0 &&
         now_round - row.freshness_round <= staleness_rounds;
}

}  // namespace

SelectOutcome select(SelectionTable& table, Strategy strategy,
                     std::int64_t now_round, std::int64_t staleness_rounds) {
  SelectOutcome out;
  const bool dynamic = strategy != Strategy::kMinHop;

  const ProxyId* best = nullptr;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& [id, row] : table.rows) {
    if (!row.available) continue;
    if (!row_fresh(row, now_round, staleness_rounds)) out.stale.push_back(id);
    if (dynamic && !row_fresh(row, now_round, staleness_rounds)) continue;
    const double score = row_score(row, strategy);
    // Map order makes the first strictly better entry win, so ties resolve
    // toward the lower proxy id.
    if (score < best_score) {
      best = &id;
      best_score = score;
    }
  }

  const std::optional<ProxyId> previous = table.current;
  auto current_it =
      previous.has_value() ? table.rows.find(*previous) : table.rows.end();
  const bool current_usable =
      current_it != table.rows.end() && current_it->second.available;

  std::optional<ProxyId> chosen;
  if (!current_usable) {
    if (best != nullptr) chosen = *best;
  } else if (!dynamic) {
    // Static strategy: stay put while the current proxy is up.
    chosen = previous;
  } else if (best == nullptr) {
    // No fresh alternative; keep serving from the current proxy.
    chosen = previous;
  } else if (*best == *previous) {
    chosen = previous;
  } else if (!row_fresh(current_it->second, now_round, staleness_rounds)) {
    // The current row's score is no longer trustworthy; move to the best
    // fresh candidate without hysteresis.
    chosen = *best;
  } else {
    const double current_score = row_score(current_it->second, strategy);
    chosen = (best_score + table.hysteresis_ms < current_score) ? *best
                                                                : previous;
  }

  out.selected = chosen;
  out.switched = previous.has_value() && chosen.has_value() &&
                 *previous != *chosen;
  table.current = chosen;
  return out;
}

}  // namespace meshprox::selection
