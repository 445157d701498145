#pragma once

#include <string>
#include <vector>

#include "eprsim/measure.hpp"

namespace eprsim::io {

/// Round-trip-exact decimal rendering (shortest of %g / %.17g).
std::string format_double(double v);

/// Frozen CSV column order; downstream plotting scripts depend on it.
/// settings is a JSON object serialized into one quoted field.
inline constexpr const char* csv_header = "estimator,value,std_error,shots,seed,settings";

std::string csv_row(const ExperimentResult& r);
std::string csv_table(const std::vector<ExperimentResult>& results);

nlohmann::ordered_json result_to_json(const ExperimentResult& r);

}  // namespace eprsim::io
