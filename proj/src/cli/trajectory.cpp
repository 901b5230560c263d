#include "wbc/cli/trajectory.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "yaml_util.hpp"

namespace wbc::cli {

std::vector<Track> parseTrajectories(std::string_view text) {
  const YAML::Node root = yaml::load(text);
  if (!root || root.IsNull()) throw ValidationError("trajectory file is empty");
  yaml::requireSequence(root, "trajectory file");
  if (root.size() == 0) throw ValidationError("trajectory file is empty");
  std::vector<Track> tracks;
  for (const auto& node : root) {
    yaml::requireMap(node, "trajectory entry");
    yaml::checkKeys(node, {"parameter", "waypoints"}, "trajectory entry");
    const std::string parameter = yaml::asString(yaml::required(node, "parameter", "trajectory entry"), "parameter");
    const YAML::Node points = yaml::required(node, "waypoints", "trajectory entry");
    yaml::requireSequence(points, "waypoints");
    std::vector<task::Waypoint> waypoints;
    for (const auto& p : points) {
      yaml::requireMap(p, "waypoint");
      yaml::checkKeys(p, {"t", "value"}, "waypoint");
      const double t = yaml::asDouble(yaml::required(p, "t", "waypoint"), "t");
      const YAML::Node v = yaml::required(p, "value", "waypoint");
      Vector value;
      if (v.IsSequence()) {
        const auto values = yaml::asDoubles(v, "value");
        value = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
      } else {
        value = Vector::Constant(1, yaml::asDouble(v, "value"));
      }
      waypoints.push_back({t, value});
    }
    try {
      tracks.push_back({parameter, task::TrajectorySpline(std::move(waypoints))});
    } catch (const Error& e) {
      throw ValidationError("trajectory for '" + parameter + "': " + e.what());
    }
  }
  return tracks;
}

std::vector<Track> loadTrajectories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read trajectory file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parseTrajectories(text.str());
}

GoalStreamer::GoalStreamer(runtime::Runtime& runtime, std::vector<Track> tracks, double rate)
    : runtime_(runtime), tracks_(std::move(tracks)), period_(1.0 / rate) {
  for (const auto& t : tracks_) {
    const param::BindingConfig* binding = nullptr;
    for (const auto& b : runtime_.spec().bindings)
      if (b.parameter == t.parameter && b.direction == param::Direction::Input) binding = &b;
    if (!binding) throw config::DanglingReferenceError("no input binding for '" + t.parameter + "'", t.parameter);
    const param::Parameter* p = runtime_.registry().lookup(t.parameter);
    if (!p) throw config::DanglingReferenceError("no parameter '" + t.parameter + "'", t.parameter);
    const Eigen::Index size = p->kind() == param::ParamKind::Vector ? p->vector().size() : 1;
    if (size != t.spline.dimension())
      throw DimensionError("trajectory for '" + t.parameter + "' has " + std::to_string(t.spline.dimension()) +
                           " entries, parameter has " + std::to_string(size));
    if (binding->transportType != "udp" && binding->transportType != "intra")
      throw Error("cannot stream to transport '" + binding->transportType + "'");
    routes_.push_back({binding->topic, binding->transportType == "udp"});
  }
}

double GoalStreamer::endTime() const {
  double end = 0.0;
  for (const auto& t : tracks_) end = std::max(end, t.spline.endTime());
  return end;
}

void GoalStreamer::send(const Route& route, const Vector& value) {
  ++sent_;
  if (!route.udp) {
    runtime_.bus()->publish(route.topic, value);
    return;
  }
  const auto before = runtime_.bindings().receivedInputs();
  param::udpSend("127.0.0.1", runtime_.udpPort(), route.topic, value);
  if (runtime_.clock().kind() != runtime::ClockKind::Lockstep) return;
  const double deadline = runtime::wallSeconds() + 1.0;
  while (runtime_.bindings().receivedInputs() == before) {
    if (runtime::wallSeconds() > deadline) throw Error("goal on '" + route.topic + "' was not received within 1 s");
    std::this_thread::yield();
  }
}

void GoalStreamer::update(double elapsed) {
  if (elapsed + 1e-9 < next_) return;
  next_ += period_;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    const auto& spline = tracks_[i].spline;
    // One last sample at the end point, then stop sending.
    if (elapsed - period_ > spline.endTime()) continue;
    send(routes_[i], spline.evaluate(elapsed).value);
  }
}

const TaskError* TrackingReport::find(const std::string& task) const {
  for (const auto& t : tasks)
    if (t.task == task) return &t;
  return nullptr;
}

TrackingReport runTrajectory(runtime::Session& session, const std::vector<Track>& tracks, double duration) {
  auto& rt = session.runtime();
  GoalStreamer streamer(rt, tracks);
  if (duration < 0.0) duration = streamer.endTime() + kSettleSeconds;
  const auto& entries = rt.tasks().entries();
  std::vector<runtime::RunningStat> stats(entries.size());
  std::vector<double> worst(entries.size(), 0.0);
  TrackingReport report;
  const double start = rt.clock().now();
  const double end = start + duration - 0.5 * rt.clock().period();
  while (rt.clock().now() < end) {
    streamer.update(rt.clock().now() - start);
    const auto r = rt.step();
    ++report.cycles;
    if (r.commandWritten) {
      report.finite = report.finite && rt.command().finite();
      report.maxEffort = std::max(report.maxEffort, rt.command().effort.cwiseAbs().maxCoeff());
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (!entries[i].task->enabled()) continue;
      const double e = entries[i].task->active().error.norm();
      stats[i].add(e);
      worst[i] = std::max(worst[i], e);
    }
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].task->enabled()) continue;
    report.tasks.push_back({entries[i].task->name(), stats[i].mean, stats[i].stddev(),
                            entries[i].task->active().error.norm(), worst[i]});
  }
  report.duration = rt.clock().now() - start;
  report.goalsSent = streamer.sent();
  return report;
}

void printReport(const TrackingReport& report, std::ostream& out) {
  out << "tracking report: " << report.cycles << " cycles, " << std::fixed << std::setprecision(3) << report.duration
      << " s, " << report.goalsSent << " goals sent\n";
  out << std::left << std::setw(24) << "task" << std::right << std::setw(14) << "mean" << std::setw(14) << "std"
      << std::setw(14) << "terminal" << std::setw(14) << "max" << "\n";
  out << std::scientific << std::setprecision(4);
  for (const auto& t : report.tasks)
    out << std::left << std::setw(24) << t.task << std::right << std::setw(14) << t.mean << std::setw(14) << t.stddev
        << std::setw(14) << t.terminal << std::setw(14) << t.max << "\n";
  out << "max |effort| " << report.maxEffort << (report.finite ? "" : ", non-finite commands seen") << "\n";
  out << std::defaultfloat;
}

}  // namespace wbc::cli
