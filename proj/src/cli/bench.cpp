#include "wbc/cli/bench.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "wbc/runtime/session.hpp"

namespace wbc::cli {

std::string BenchCell::label() const {
  return std::to_string(levels) + "-level " + (orientation3d ? "3D" : "2D") + (multiThreaded ? " multi" : " single");
}

std::string BenchCell::configName() const {
  return "dreamer_" + std::to_string(levels) + "level_" + (orientation3d ? "3d" : "2d") + ".yaml";
}

std::vector<BenchCell> benchMatrix() {
  std::vector<BenchCell> cells;
  for (int levels : {2, 3, 5})
    for (bool threeD : {false, true})
      for (bool multi : {true, false}) cells.push_back({levels, threeD, multi});
  return cells;
}

BenchRow runBenchCell(const BenchOptions& options, const BenchCell& cell) {
  auto spec = config::loadFile((std::filesystem::path(options.configDirectory) / cell.configName()).string());
  auto& f = spec.framework;
  f.singleThreadedModel = f.singleThreadedTasks = !cell.multiThreaded;
  f.robotInterface = sim::InterfaceKind::Lockstep;
  f.servoClock = "lockstep";
  f.logLevel = "warn";
  runtime::RuntimeOptions ro;
  ro.logDirectory = std::filesystem::temp_directory_path().string();
  runtime::Session session(std::move(spec), rbd::loadDescriptionFile(options.robotPath), std::move(ro));
  auto& rt = session.runtime();
  rt.run(static_cast<std::uint64_t>(options.warmup));
  rt.resetStats();
  rt.run(static_cast<std::uint64_t>(options.cycles));
  BenchRow row;
  row.cell = cell;
  for (int p = 0; p < runtime::kPhaseCount; ++p) row.phases[p] = rt.phaseStat(static_cast<runtime::Phase>(p));
  row.total = rt.cycleStat();
  return row;
}

std::vector<BenchRow> runBench(const BenchOptions& options, std::ostream* progress) {
  std::vector<BenchRow> rows;
  for (const auto& cell : benchMatrix()) {
    rows.push_back(runBenchCell(options, cell));
    if (progress) *progress << "  " << cell.label() << " done\n" << std::flush;
  }
  return rows;
}

namespace {

std::string cellText(const runtime::RunningStat& s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << s.mean * 1e3 << "±" << s.stddev() * 1e3;
  return out.str();
}

std::vector<std::string> header() {
  std::vector<std::string> h{"configuration"};
  for (int p = 0; p < runtime::kPhaseCount; ++p) h.emplace_back(runtime::toString(static_cast<runtime::Phase>(p)));
  h.emplace_back("total");
  return h;
}

std::vector<std::string> cells(const BenchRow& row) {
  std::vector<std::string> c{row.cell.label()};
  for (const auto& p : row.phases) c.push_back(cellText(p));
  c.push_back(cellText(row.total));
  return c;
}

// Display width of UTF-8 text.
std::size_t width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
  return n;
}

}  // namespace

void writeBenchCsv(const std::vector<BenchRow>& rows, std::ostream& out) {
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << fields[i];
    out << "\n";
  };
  line(header());
  for (const auto& r : rows) line(cells(r));
}

void writeBenchTable(const std::vector<BenchRow>& rows, std::ostream& out) {
  std::vector<std::vector<std::string>> table{header()};
  for (const auto& r : rows) table.push_back(cells(r));
  std::vector<std::size_t> widths(table[0].size(), 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], width(row[i]));
  out << "servo latency per phase, mean±std in ms\n";
  for (const auto& row : table) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      const std::string pad(widths[i] - width(row[i]) + 2, ' ');
      out << (i == 0 ? row[i] + pad : pad + row[i]);
    }
    out << "\n";
  }
}

}  // namespace wbc::cli
