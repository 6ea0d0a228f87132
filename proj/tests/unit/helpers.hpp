#pragma once

#include "causalcast/error.hpp"
#include "causalcast/panel.hpp"

#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#define CHECK_KIND(expr, expected_kind)                                   \
  do {                                                                    \
    bool thrown_ = false;                                                 \
    try {                                                                 \
      (void)(expr);                                                       \
    } catch (const causalcast::Error& e_) {                               \
      thrown_ = true;                                                     \
      CHECK_MESSAGE(e_.kind() == (expected_kind), e_.what());             \
    }                                                                     \
    CHECK_MESSAGE(thrown_, "expected causalcast::Error from " #expr);     \
  } while (0)

namespace testing {

inline std::vector<causalcast::MonthStamp> months(causalcast::MonthStamp start, int count) {
  std::vector<causalcast::MonthStamp> out;
  for (int i = 0; i < count; ++i) out.push_back(start.plus(i));
  return out;
}

inline std::vector<std::string> names(int d) {
  std::vector<std::string> out;
  for (int j = 1; j <= d; ++j) out.push_back("X" + std::to_string(j));
  return out;
}

inline causalcast::AlignedPanel random_panel(int rows, int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  causalcast::Vector y(rows);
  causalcast::Matrix X(rows, d);
  for (int i = 0; i < rows; ++i) {
    y[i] = n01(rng);
    for (int j = 0; j < d; ++j) X(i, j) = n01(rng);
  }
  return {months({2001, 1}, rows), y, X, names(d), {}, true, "Y"};
}

}  // namespace testing
