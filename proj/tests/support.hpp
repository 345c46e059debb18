#pragma once

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "commoncv/error.hpp"

namespace testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(COMMONCV_DATA_DIR) / name;
}

template <class F>
commoncv::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const commoncv::Error& e) {
    return e.code();
  }
  FAIL("no commoncv::Error thrown");
  return commoncv::ErrorCode::IoError;
}

inline double round_to(double x, int digits) {
  const double scale = std::pow(10.0, digits);
  return std::round(x * scale) / scale;
}

}  // namespace testing
