#include <charconv>
#include <cmath>
#include <string>

#include "medcal/strategies.hpp"

namespace medcal {

std::string Budget::to_string() const {
  return is_fraction_ ? format_double(fraction_) : std::to_string(count_);
}

Budget parse_budget(std::string_view text) {
  const bool looks_fractional = text.find_first_of(".eE") != std::string_view::npos;
  if (!looks_fractional) {
    std::size_t m = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), m);
    if (res.ec == std::errc() && res.ptr == text.data() + text.size()) return Budget::count(m);
  } else {
    double f = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), f);
    if (res.ec == std::errc() && res.ptr == text.data() + text.size()) return Budget::fraction(f);
  }
  throw Error(ErrorCode::kBudgetOutOfRange, "cannot parse budget '" + std::string(text) + "'");
}

std::size_t resolve_budget(std::size_t n_train, const Budget& budget) {
  if (n_train == 0) throw Error(ErrorCode::kBudgetOutOfRange, "empty pool");
  if (budget.is_fraction()) {
    const double f = budget.fraction_value();
    if (!(f > 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::kBudgetOutOfRange,
                  "fraction " + format_double(f) + " outside (0, 1]");
    }
    // The small slack keeps products such as 0.29 * 100 from flooring to 28.
    const double exact = f * static_cast<double>(n_train);
    auto m = static_cast<std::size_t>(std::floor(exact * (1.0 + 1e-12)));
    if (m < 1) m = 1;
    if (m > n_train) m = n_train;
    return m;
  }
  const std::size_t m = budget.count_value();
  if (m < 1 || m > n_train) {
    throw Error(ErrorCode::kBudgetOutOfRange,
                "count " + std::to_string(m) + " outside [1, " + std::to_string(n_train) + "]");
  }
  return m;
}

}  // namespace medcal
