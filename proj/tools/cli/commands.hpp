#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "config.hpp"

namespace afsi::cli {

/// Formulations named by complete, reduced or both.
std::vector<Formulation> parse_formulations(const std::string& name);

int cmd_solve_fsi(const CaseConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_adjoint(const CaseConfig& cfg, const std::filesystem::path& out, const std::string& formulation,
                std::ostream& log);
int cmd_verify_fd(const CaseConfig& cfg, const std::filesystem::path& out, const std::string& formulation,
                  std::ostream& log);
int cmd_refine_study(const CaseConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_map_test(const CaseConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_export_vtk(const CaseConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Writes the beam-in-channel meshes (three interface resolutions) and
/// beam.ini into `dir`.
std::filesystem::path seed_beam_case(const std::filesystem::path& dir);

/// Full command line: returns the process exit code (0 success, 1 numerical
/// failure, 2 input error). Errors are reported as one JSON object on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace afsi::cli
