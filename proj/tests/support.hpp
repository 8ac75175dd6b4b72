#pragma once

#include <catch_amalgamated.hpp>

#include "slowlight/error.hpp"

// Runs `expr` and checks it throws slowlight::Error with the given code.
#define REQUIRE_ERROR_CODE(expr, expected_code)                     \
  do {                                                              \
    bool thrown_ = false;                                           \
    try {                                                           \
      (void)(expr);                                                 \
    } catch (const slowlight::Error& e_) {                          \
      thrown_ = true;                                               \
      CHECK(e_.code() == (expected_code));                          \
    }                                                               \
    CHECK(thrown_);                                                 \
  } while (false)

namespace slowlight::test {

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace slowlight::test
