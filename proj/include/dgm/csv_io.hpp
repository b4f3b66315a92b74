#pragma once

// Plain CSV artifacts: datasets, training histories and evaluation grids.
// Numbers are written in shortest round-trip form; missing values are empty.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "dgm/metrics.hpp"
#include "dgm/sampler.hpp"
#include "dgm/trainer.hpp"

namespace dgm {

/// Shortest text that parses back to exactly `v`; empty for NaN.
std::string format_number(double v);

/// Columns x0..x{d-1},region with region in {interior, boundary}.
std::string dataset_csv(const Dataset& dataset);

/// Columns iter,J,residual,divergence,boundary,errL1,errL2,lr,wall_ms.
std::string history_csv(const std::vector<HistoryRecord>& records);
/// Inverse of history_csv. Throws IoError on a malformed table.
std::vector<HistoryRecord> parse_history_csv(std::string_view text);

/// Columns x,y[,z],U1..Ud,P and, when the exact solution is known, u1..ud,p,errU,errP.
std::string eval_grid_csv(const EvalGrid& grid);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace dgm
