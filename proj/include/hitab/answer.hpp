#pragma once

// Answer equality: numbers within tolerance, strings after normalization,
// multi-valued answers as multisets.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "hitab/interpreter.hpp"

namespace hitab {

inline constexpr double kAnswerRelTol = 1e-6;
inline constexpr double kAnswerAbsTol = 1e-9;

namespace detail {

inline std::optional<double> numeric_view(const CellValue& v) {
  if (v.is_number()) return v.as_number();
  if (v.kind() == ValueKind::Text) {
    const auto parsed = normalize_quantity(v.as_string());
    if (parsed.is_number()) return parsed.as_number();
  }
  return std::nullopt;
}

inline bool numbers_close(double a, double b) {
  const double diff = std::abs(a - b);
  return diff <= kAnswerAbsTol || diff <= kAnswerRelTol * std::max(std::abs(a), std::abs(b));
}

}  // namespace detail

inline bool values_match(const CellValue& a, const CellValue& b) {
  const auto x = detail::numeric_view(a);
  const auto y = detail::numeric_view(b);
  if (x && y) return detail::numbers_close(*x, *y);
  if (x || y) return false;
  return text::normalize_header_text(a.render()) == text::normalize_header_text(b.render());
}

// Multiset equality under values_match, via bipartite matching.
inline bool match_answer(const std::vector<CellValue>& predicted, const std::vector<CellValue>& gold) {
  if (predicted.size() != gold.size()) return false;
  const std::size_t n = gold.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (values_match(predicted[i], gold[j])) adj[i].push_back(j);
    }
    if (adj[i].empty()) return false;
  }
  std::vector<int> gold_to_pred(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<char> seen(n, 0);
    auto augment = [&](auto&& self, std::size_t u) -> bool {
      for (auto v : adj[u]) {
        if (seen[v]) continue;
        seen[v] = 1;
        if (gold_to_pred[v] < 0 || self(self, static_cast<std::size_t>(gold_to_pred[v]))) {
          gold_to_pred[v] = static_cast<int>(u);
          return true;
        }
      }
      return false;
    };
    if (!augment(augment, i)) return false;
  }
  return true;
}

inline bool match_answer(const ExecValue& predicted, const HierTable& table, const std::vector<CellValue>& gold) {
  return match_answer(answer_values(predicted, table), gold);
}

}  // namespace hitab
