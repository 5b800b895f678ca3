#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "cli/output.hpp"
#include "kpod/workflow.hpp"

namespace kpod::cli {

struct OfflineArgs {
  OfflineConfig config;
  std::filesystem::path out;
  int spectrum_rows = 10;
};

struct OnlineArgs {
  std::filesystem::path model;
  Strategy strategy = Strategy::kpod;
  int base_level = 1;
  // adv1d
  double velocity = 1.5;
  int steps = 200;
  // adv2d
  double source = 0.0;
  double angle = 45.0;
  bool reference_full = false;
  std::filesystem::path solution = "solution.csv";
  std::filesystem::path trace = "trace.csv";
  Index qpod_columns = kDefaultQpodColumns;
};

struct BenchArgs {
  std::string table;
  Format format = Format::csv;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> model;
  int base_level = 1;
  int ns = 200;
  std::uint64_t seed = adv2d::kDefaultSeed2D;
  double h = 0.02;
  int jobs = 1;
  Index qpod_columns = kDefaultQpodColumns;
};

struct MeshArgs {
  std::string action;  // generate | inspect
  double h = 0.02;
  double hole_radius = 0.3;
  std::filesystem::path file;
};

void cmd_offline(const OfflineArgs& args, std::ostream& out);
void cmd_online(const OnlineArgs& args, std::ostream& out);
void cmd_bench(const BenchArgs& args, std::ostream& out);
void cmd_mesh(const MeshArgs& args, std::ostream& out);

}  // namespace kpod::cli
