#include "crowd_assim/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "crowd_assim/errors.hpp"

namespace crowd_assim {

namespace {

// Binary mode keeps line endings LF on every platform.
std::FILE* open_for_write(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return f;
}

void put(std::FILE* f, const std::string& line, const std::filesystem::path& path) {
  if (std::fputs(line.c_str(), f) < 0 || std::fputc('\n', f) == EOF) {
    throw std::runtime_error("write failed for '" + path.string() + "'");
  }
}

void finish(std::FILE* f, const std::filesystem::path& path) {
  if (std::fclose(f) != 0) throw std::runtime_error("close failed for '" + path.string() + "'");
}

template <typename Rows>
void write_file(const std::filesystem::path& path, const char* header, const Rows& rows) {
  std::FILE* f = open_for_write(path);
  try {
    put(f, header, path);
    for (const std::string& row : rows) put(f, row, path);
  } catch (...) {
    std::fclose(f);
    throw;
  }
  finish(f, path);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string window_row(const WindowRecord& r) {
  return std::to_string(r.window_index) + ',' + std::to_string(r.iteration) + ',' +
         format_real(r.nu_before) + ',' + format_real(r.nu_after) + ',' +
         format_real(r.weight_variance) + ',' + format_real(r.error_variance) + ',' +
         std::to_string(r.active_agents) + ',' + format_real(r.flat_l2_before) + ',' +
         format_real(r.flat_l2_after);
}

std::string grid_row(const CellResult& c) {
  return std::to_string(c.key.n_agents) + ',' + std::to_string(c.key.n_particles) + ',' +
         format_real(c.key.sigma_p) + ',' + format_real(c.sigma_m) + ',' +
         std::to_string(c.repetitions) + ',' + format_real(c.e_before) + ',' +
         format_real(c.e_after) + ',' + format_real(c.e_after_times_np);
}

void write_window_csv(const std::vector<WindowRecord>& records, const std::filesystem::path& path) {
  std::vector<std::string> rows;
  rows.reserve(records.size());
  for (const auto& r : records) rows.push_back(window_row(r));
  write_file(path, kWindowHeader, rows);
}

void write_grid_csv(const std::vector<CellResult>& cells, const std::filesystem::path& path) {
  std::vector<std::string> rows;
  rows.reserve(cells.size());
  for (const auto& c : cells) rows.push_back(grid_row(c));
  write_file(path, kGridHeader, rows);
}

void write_collision_csv(const CollisionStudy& study, const std::filesystem::path& path) {
  const double quad = study.quadratic.coefficients.size() > 2 ? study.quadratic.coefficients[2] : 0.0;
  const std::string fit = format_real(study.linear.r_squared) + ',' +
                          format_real(study.quadratic.r_squared) + ',' + format_real(quad);
  std::vector<std::string> rows;
  rows.reserve(study.rows.size());
  for (const auto& r : study.rows) {
    rows.push_back(std::to_string(r.n_agents) + ',' + std::to_string(r.seed) + ',' +
                   std::to_string(r.collisions) + ',' + fit);
  }
  write_file(path, kCollisionHeader, rows);
}

TrajectoryWriter::TrajectoryWriter(const std::filesystem::path& path)
    : path_(path), file_(open_for_write(path)) {
  put(file_, kTrajectoryHeader, path_);
}

TrajectoryWriter::~TrajectoryWriter() {
  if (file_) std::fclose(file_);
}

void TrajectoryWriter::write(const ModelState& state) {
  for (std::size_t i = 0; i < state.n_agents(); ++i) {
    const Point p = state.reported_position(i);
    put(file_,
        std::to_string(state.iteration) + ',' + std::to_string(i) + ',' +
            status_name(state.agents[i].status) + ',' + format_real(p.x) + ',' + format_real(p.y),
        path_);
  }
}

void TrajectoryWriter::close() {
  if (!file_) return;
  std::FILE* f = file_;
  file_ = nullptr;
  finish(f, path_);
}

std::vector<CellResult> read_grid_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kGridHeader) {
    throw std::runtime_error("'" + path.string() + "' is not a grid file");
  }
  std::vector<CellResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw std::runtime_error("'" + path.string() + "': malformed row '" + line + "'");
    CellResult c;
    c.key = {std::stoull(f[0]), std::stoull(f[1]), std::stod(f[2])};
    c.sigma_m = std::stod(f[3]);
    c.repetitions = std::stoull(f[4]);
    c.e_before = std::stod(f[5]);
    c.e_after = std::stod(f[6]);
    c.e_after_times_np = std::stod(f[7]);
    out.push_back(std::move(c));
  }
  return out;
}

std::string status_name(AgentStatus s) {
  switch (s) {
    case AgentStatus::kUnstarted: return "unstarted";
    case AgentStatus::kActive: return "active";
    case AgentStatus::kFinished: return "finished";
  }
  return "unknown";
}

}  // namespace crowd_assim
