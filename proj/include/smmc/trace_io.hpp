#pragma once

#include <filesystem>

#include "smmc/trace.hpp"

namespace smmc {

/// Header `t,phi_dr,...,v_lyap,v_1..v_N`, one row per sample, 17 significant
/// digits so that read_trace_csv reproduces every value exactly.
void write_trace_csv(const SimTrace& trace, const std::filesystem::path& path);

/// Inverse of write_trace_csv. Step-rate activity columns are not restored.
SimTrace read_trace_csv(const std::filesystem::path& path);

}  // namespace smmc
