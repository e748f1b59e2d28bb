#pragma once

#include <ostream>
#include <string>

#include "sccp/simulate.hpp"

namespace sccp {

// 17 significant digits, enough to reproduce any double exactly.
std::string g17(double v);

// Header `t,<Y names...>,mode`, one row per grid point.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

// Header `t,kind,transition,detail`.
void write_events_csv(std::ostream& os, const Trajectory& traj);

// Header `t,<mean_Y...>,<var_Y...>`.
void write_ensemble_csv(std::ostream& os, const EnsembleResult& res);

std::string trajectory_csv(const Trajectory& traj);
std::string events_csv(const Trajectory& traj);
std::string ensemble_csv(const EnsembleResult& res);

}  // namespace sccp
