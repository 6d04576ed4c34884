#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace yarnscope::cli {

inline constexpr const char* kReportSchema = "yarnscope.report/1";
inline constexpr const char* kConfigEnv = "YARNSCOPE_CONFIG";

/// Every tunable with its default, grouped by pipeline.
nlohmann::json default_config();

/// Overlays `overrides` on `base`. Unknown sections or keys, and values whose
/// type differs from the default, raise ParameterError.
nlohmann::json merge_config(const nlohmann::json& base, const nlohmann::json& overrides);

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`; `in` feeds "-" image arguments.
/// Exit codes: 0 success, 2 usage/input/parameter error, 3 analysis error.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace yarnscope::cli
