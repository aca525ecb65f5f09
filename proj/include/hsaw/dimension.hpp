#pragma once

#include <string>
#include <type_traits>
#include <utility>

#include "hsaw/error.hpp"

namespace hsaw {

inline constexpr int min_dimension = 2;
inline constexpr int max_dimension = 5;

/// Calls f(std::integral_constant<int, D>{}) for the runtime dimension d.
template <typename F>
decltype(auto) with_dimension(int d, F&& f) {
  switch (d) {
    case 2: return std::forward<F>(f)(std::integral_constant<int, 2>{});
    case 3: return std::forward<F>(f)(std::integral_constant<int, 3>{});
    case 4: return std::forward<F>(f)(std::integral_constant<int, 4>{});
    case 5: return std::forward<F>(f)(std::integral_constant<int, 5>{});
    default:
      throw ConfigError("unsupported dimension d = " + std::to_string(d) + " (supported: 2..5)");
  }
}

}  // namespace hsaw
