#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "wbc/runtime/runtime.hpp"

namespace wbc::cli {

struct BenchCell {
  int levels = 2;
  bool orientation3d = false;
  bool multiThreaded = true;
  std::string label() const;  // e.g. "2-level 2D multi"
  std::string configName() const;  // e.g. "dreamer_2level_2d.yaml"
};

struct BenchRow {
  BenchCell cell;
  std::array<runtime::RunningStat, runtime::kPhaseCount> phases;
  runtime::RunningStat total;
};

struct BenchOptions {
  std::string robotPath;
  std::string configDirectory;
  int cycles = 1000;
  int warmup = 200;
};

/// The 12 cells: {2,3,5 levels} x {2D,3D} x {multi,single}.
std::vector<BenchCell> benchMatrix();

/// Runs each cell under the lockstep clock and records servo-side phase
/// latencies over `cycles` consecutive cycles after a warmup.
BenchRow runBenchCell(const BenchOptions& options, const BenchCell& cell);
std::vector<BenchRow> runBench(const BenchOptions& options, std::ostream* progress = nullptr);

/// Seven columns: configuration, the five phases and the cycle total, each
/// as mean±std in milliseconds.
void writeBenchCsv(const std::vector<BenchRow>& rows, std::ostream& out);
void writeBenchTable(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace wbc::cli
