#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "meshprox/ids.hpp"

namespace meshprox::selection {

enum class Strategy { kMinLoad, kMinDelay, kMinHop };

std::optional<Strategy> parse_strategy(std::string_view name);
std::string_view strategy_name(Strategy strategy);
std::vector<Strategy> all_strategies();

struct TableRow {
  double predicted_rtt_ms = 0.0;
  double load_ms = 0.0;
  int hops = 1;
  // Origin round of the newest load report backing this row; -1 before any
  // report was seen.
  std::int64_t freshness_round = -1;
  bool available = true;
};

struct SelectionTable {
  std::map<ProxyId, TableRow> rows;
  std::optional<ProxyId> current;
  // A candidate must beat the current choice by at least this margin to
  // trigger a switch; damps oscillation between near-equal proxies.
  double hysteresis_ms = 50.0;
};

// Combined cost used by the load-aware strategy.
double score_min_load(const TableRow& row);

struct SelectOutcome {
  std::optional<ProxyId> selected;
  bool switched = false;
  // Rows excluded for exceeding the staleness bound; candidates for
  // recovery probing.
  std::vector<ProxyId> stale;
};

// Pick a proxy under the given strategy and update table.current.
//
// The two dynamic strategies rank eligible rows by their score and apply
// hysteresis against the current choice; ties break toward the lower proxy
// id. The static strategy ranks by hop count once and never moves while the
// current choice stays available. Rows are eligible when available and,
// for the dynamic strategies, younger than the staleness bound.
SelectOutcome select(SelectionTable& table, Strategy strategy,
                     std::int64_t now_round, std::int64_t staleness_rounds);

}  // namespace meshprox::selection
