#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fraclap/study.hpp"

namespace fraclap::cli {

struct CliOptions {
    StudyConfig config;
    bool audit = false;
};

// Parses the flag list (without argv[0]). Throws validation_error on unknown
// flags, malformed numerics or out-of-contract values.
CliOptions parse(const std::vector<std::string>& args);

inline StudyConfig parse_config(const std::vector<std::string>& args) {
    return parse(args).config;
}

// Full pipeline: parse -> run study (or audits) -> emit. Exit codes:
// 0 success, 2 validation failure, 3 solver failure, 4 compression failure.
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fraclap::cli
