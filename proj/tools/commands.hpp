#pragma once

#include "runconfig.hpp"

namespace gsmtl::cli {

void cmd_generate(const RunConfig& cfg);
void cmd_fit(const RunConfig& cfg);
void cmd_benchmark(const RunConfig& cfg);
void cmd_export_smatrix(const RunConfig& cfg);

}  // namespace gsmtl::cli
