#pragma once

#include "identikit/estimation.hpp"
#include "identikit/fim.hpp"
#include "identikit/profile.hpp"
#include "identikit/recovery.hpp"
#include "identikit/sobol.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace identikit {

using json = nlohmann::json;

// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double value);
double parse_number(const std::string& text);

json to_json(const FimReport& report);
json to_json(const LocalIdentifiability& local);
json to_json(const ConfidenceEllipsoid& ellipsoid);
json to_json(const EstimateResult& result);
json to_json(const MultiStartResult& result);
json to_json(const ProfileCurve& curve);
json to_json(const SobolReport& report, const std::vector<std::string>& names);
json to_json(const RecoveryTrial& trial);
json to_json(const RecoveryReport& report);
json to_json(const Design& design);

// Sidecar metadata for a dataset CSV: design, σ, seed, generating parameter.
json dataset_metadata(const Dataset& data);

std::string dataset_csv(const Dataset& data);                   // time,replicate,value
std::string estimates_csv(const std::vector<EstimateResult>& results); // start_index,objective,converged,theta...
std::string profile_csv(const ProfileCurve& curve);             // theta_i,profile_loglik,converged
std::string sobol_csv(const SobolReport& report, const std::vector<std::string>& names);
std::string recovery_csv(const RecoveryReport& report);

Dataset read_dataset(const std::string& csv, const json& metadata);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

} // namespace identikit
