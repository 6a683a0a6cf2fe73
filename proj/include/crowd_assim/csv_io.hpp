#pragma once

#include <filesystem>
#include <cstdio>
#include <string>
#include <vector>

#include "crowd_assim/experiment_suite.hpp"
#include "crowd_assim/particle_filter.hpp"
#include "crowd_assim/station_model.hpp"

namespace crowd_assim {

inline constexpr const char* kWindowHeader =
    "window,iteration,nu_before,nu_after,weight_var,error_var,active_agents,flat_l2_before,"
    "flat_l2_after";
inline constexpr const char* kGridHeader =
    "n_agents,n_particles,sigma_p,sigma_m,repetitions,E_before,E_after,E_variant_times_np";
inline constexpr const char* kCollisionHeader = "n_agents,seed,collisions,lin_r2,quad_r2,quad_coeff";
inline constexpr const char* kTrajectoryHeader = "iteration,agent,status,x,y";

/// 17 significant digits, so values round-trip exactly.
std::string format_real(double v);

std::string window_row(const WindowRecord& r);
std::string grid_row(const CellResult& c);

void write_window_csv(const std::vector<WindowRecord>& records, const std::filesystem::path& path);
void write_grid_csv(const std::vector<CellResult>& cells, const std::filesystem::path& path);
void write_collision_csv(const CollisionStudy& study, const std::filesystem::path& path);

/// Streams one row per agent per iteration.
class TrajectoryWriter {
 public:
  explicit TrajectoryWriter(const std::filesystem::path& path);
  ~TrajectoryWriter();
  TrajectoryWriter(const TrajectoryWriter&) = delete;
  TrajectoryWriter& operator=(const TrajectoryWriter&) = delete;

  void write(const ModelState& state);
  void close();

 private:
  std::filesystem::path path_;
  std::FILE* file_ = nullptr;
};

/// Reads back a grid CSV written by write_grid_csv. Only the columns in the
/// file are filled in.
std::vector<CellResult> read_grid_csv(const std::filesystem::path& path);

std::string status_name(AgentStatus s);

}  // namespace crowd_assim
