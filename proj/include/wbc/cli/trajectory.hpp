#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wbc/runtime/session.hpp"
#include "wbc/task/spline.hpp"

namespace wbc::cli {

/// Timed waypoints for one goal parameter.
struct Track {
  std::string parameter;
  task::TrajectorySpline spline;
};

/// YAML list of {parameter, waypoints: [{t, value}]}. Throws ParseError for
/// malformed files and ValidationError for an empty list or bad waypoints.
std::vector<Track> parseTrajectories(std::string_view text);
std::vector<Track> loadTrajectories(const std::string& path);

/// Sends spline goals to the controller through the input binding of each
/// parameter, the way an external goal generator would.
class GoalStreamer {
 public:
  /// Throws DanglingReferenceError when a parameter has no input binding and
  /// DimensionError when the waypoint size differs from the parameter.
  GoalStreamer(runtime::Runtime& runtime, std::vector<Track> tracks, double rate = 100.0);

  /// Sends every goal due at `elapsed` seconds since streaming began. Under
  /// the lockstep clock UDP goals are awaited so runs stay deterministic.
  void update(double elapsed);
  double endTime() const;
  std::uint64_t sent() const { return sent_; }

 private:
  struct Route {
    std::string topic;
    bool udp = false;
  };
  void send(const Route& route, const Vector& value);

  runtime::Runtime& runtime_;
  std::vector<Track> tracks_;
  std::vector<Route> routes_;
  double period_;
  double next_ = 0.0;
  std::uint64_t sent_ = 0;
};

struct TaskError {
  std::string task;
  double mean = 0.0, stddev = 0.0, terminal = 0.0, max = 0.0;
};

struct TrackingReport {
  std::vector<TaskError> tasks;
  double duration = 0.0;
  std::uint64_t cycles = 0;
  std::uint64_t goalsSent = 0;
  double maxEffort = 0.0;
  bool finite = true;  // every written command was finite
  const TaskError* find(const std::string& task) const;
};

inline constexpr double kSettleSeconds = 4.0;

/// Runs the controller for `duration` seconds of clock time (defaults to the
/// trajectory end plus kSettleSeconds) while streaming goals, recording the
/// error norm of every enabled task each cycle.
TrackingReport runTrajectory(runtime::Session& session, const std::vector<Track>& tracks, double duration = -1.0);

void printReport(const TrackingReport& report, std::ostream& out);

}  // namespace wbc::cli
