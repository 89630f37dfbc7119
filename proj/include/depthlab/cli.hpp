#pragma once

#include "depthlab/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace depthlab
{

/// Exit codes: 0 success, 1 input error, 2 numerical failure.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Headerless comma-separated numbers, one observation per row. Errors name row and column.
SampleMatrix parse_data_csv(const std::string &text);
SampleMatrix load_data_csv(const std::string &path);

}  // namespace depthlab
