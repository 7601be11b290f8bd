#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tomomax/estimators.h"
#include "tomomax/lfp.h"
#include "tomomax/risk.h"

namespace tomomax {

using Json = nlohmann::json;

// Non-finite doubles are written as the strings "inf", "-inf" and "nan"; finite
// ones use the shortest representation that round-trips exactly.
Json number_to_json(double x);
double number_from_json(const Json &j);

Json to_json(const Vec3 &r, int dim);
Vec3 vec_from_json(const Json &j);

Json to_json(const BlochState &state);
BlochState state_from_json(const Json &j);

Json to_json(const ExperimentDesign &design);
ExperimentDesign design_from_json(const Json &j);

Json to_json(const Dataset &dataset);
Dataset dataset_from_json(const Json &j);

Json to_json(const DiscretePrior &prior);
DiscretePrior prior_from_json(const Json &j);

Json to_json(const TabulatedEstimator &estimator);
TabulatedEstimator estimator_from_json(const Json &j);

/// With a non-empty `estimator_path` the table is referenced instead of embedded.
Json to_json(const LfpResult &result, const std::string &estimator_path = {});
/// `base_dir` resolves a relative estimator path.
LfpResult lfp_from_json(const Json &j, const std::string &base_dir = {});

Json to_json(const RiskReport &report);

/// Pretty-printed JSON with sorted keys and a trailing newline.
std::string dump(const Json &j);
Json parse_json(const std::string &text, const std::string &source = "input");

std::string read_file(const std::string &path);
/// Writes to a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string &path, const std::string &content);

/// Formats doubles with 17 significant digits ("inf"/"nan" when non-finite).
std::string format_double(double x);
std::string to_csv(const std::vector<std::string> &header, const std::vector<std::vector<double>> &rows);

}  // namespace tomomax
