#include "sccp/csv.hpp"

#include <cstdio>
#include <sstream>

namespace sccp {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << "t";
  for (const std::string& v : traj.var_names) os << "," << v;
  os << ",mode\n";
  for (size_t i = 0; i < traj.times.size(); ++i) {
    os << g17(traj.times[i]);
    for (const double x : traj.samples[i]) os << "," << g17(x);
    os << "," << traj.modes[i] << "\n";
  }
}

void write_events_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,kind,transition,detail\n";
  for (const Event& ev : traj.events)
    os << g17(ev.t) << "," << to_string(ev.kind) << "," << ev.transition << "," << ev.detail
       << "\n";
}

void write_ensemble_csv(std::ostream& os, const EnsembleResult& res) {
  os << "t";
  for (const std::string& v : res.var_names) os << ",mean_" << v;
  for (const std::string& v : res.var_names) os << ",var_" << v;
  os << "\n";
  for (size_t i = 0; i < res.times.size(); ++i) {
    os << g17(res.times[i]);
    for (const double x : res.mean[i]) os << "," << g17(x);
    for (const double x : res.variance[i]) os << "," << g17(x);
    os << "\n";
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

std::string events_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_events_csv(os, traj);
  return os.str();
}

std::string ensemble_csv(const EnsembleResult& res) {
  std::ostringstream os;
  write_ensemble_csv(os, res);
  return os.str();
}

}  // namespace sccp
