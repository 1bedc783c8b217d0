#pragma once

#include <string>

#include <json.hpp>

#include "arinfo/informativity.hpp"

namespace arinfo {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

nlohmann::json to_json(const NoiseModel& noise);
nlohmann::json to_json(const Controller& c);
Controller controller_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ArSystem& sys);
ArSystem system_from_json(const nlohmann::json& j);

nlohmann::json to_json(const StabilityReport& r);
/// `verification` may be null when no trials were run.
nlohmann::json to_json(const SynthesisResult& r, const VerificationReport* verification);

/// Parses the CLI noise spec: exact, energy:path, per-sample:eps,
/// per-sample-aggregate:eps, covariance:path[,mu].
NoiseModel parse_noise_spec(const std::string& spec, int p, int n);

/// Reads a whitespace separated square matrix.
Matrix read_matrix_file(const std::string& path);

}  // namespace arinfo
