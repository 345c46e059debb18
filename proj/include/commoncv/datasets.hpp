#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "commoncv/model.hpp"

namespace commoncv::datasets {

/// MCV survey summaries, 1995 and 1996 (n, mean, sd).
Study mcv_surveys();

struct RawGroup {
  std::string_view label;
  std::vector<double> values;
};

/// Survival times of patients from four hospitals. Hospital 4 has mean 154.6
/// and variance 8894.7.
const std::vector<RawGroup>& hospital_survival();

/// Hospital 4 with 174 and 265 in place of 147 and 256 (mean 158.2).
const std::vector<double>& hospital4_listing_variant();

Study hospitals();

}  // namespace commoncv::datasets
