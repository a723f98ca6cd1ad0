#pragma once

#include <string>
#include <vector>

#include "medcal/strategies.hpp"

namespace medcal::detail {

/// Throws BudgetOutOfRange unless 1 <= m <= N.
void check_selection_size(const FeatureBank& bank, std::size_t m);

/// Params shared by every strategy: M, metric, seed.
std::map<std::string, std::string> base_params(std::size_t m, const StrategyConfig& cfg);

/// Appends the lowest-index samples not yet selected until `picks` has m
/// entries.
void fill_lowest_unselected(std::vector<std::size_t>& picks, std::size_t n, std::size_t m);

}  // namespace medcal::detail
