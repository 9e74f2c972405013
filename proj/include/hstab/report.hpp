#pragma once

// Serialization of sweep reports and fit results: a fixed-header CSV for
// plotting tools, ordered JSON for everything else. All formatting is
// locale-free and reproducible byte for byte.

#include <string>
#include <vector>

#include "json.hpp"

#include "hstab/fitter.hpp"
#include "hstab/interactions.hpp"

namespace hstab {

// fixed CSV header; one row per sweep point, fit columns repeated per row
inline const char* csv_header() { return "quantity,eps,value,err_estimate,slope,predicted,verdict"; }

std::string to_csv(const std::vector<ScalingReport>& reports);

nlohmann::ordered_json to_json(const ScalingReport& report);
nlohmann::ordered_json to_json(const FitResult& result);

// write atomically enough for reports (truncate + write); throws IoError
void write_text(const std::string& path, const std::string& content);

}  // namespace hstab
