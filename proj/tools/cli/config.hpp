#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "afsi/coupling.hpp"
#include "afsi/errors.hpp"
#include "afsi/verify.hpp"

namespace afsi::cli {

/// Input error tied to a file on disk; the path is reported in the error JSON.
class FileError : public InputError {
public:
  FileError(const std::string& what, std::filesystem::path path) : InputError(what), path_(std::move(path)) {}
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

struct FdSettings {
  FdConfig fd;
  /// Number of evenly spaced design nodes sampled when no explicit node list is given; 0 samples all.
  int samples = 12;
  double tolerance = 1e-2;
};

struct RefineSettings {
  std::vector<std::filesystem::path> fluid_meshes;
  std::vector<std::filesystem::path> structure_meshes;
  std::vector<double> stiffness_scales{1.0};
};

/// Parsed case configuration. Relative paths are resolved against the
/// directory of the configuration file.
struct CaseConfig {
  std::filesystem::path source;
  std::filesystem::path fluid_mesh;
  std::filesystem::path structure_mesh;
  std::filesystem::path output{"out"};

  FsiProblem problem;  // meshes left empty until load_problem
  /// Rigid structure: the fluid is solved once on the undeformed geometry.
  bool rigid = false;
  std::vector<ObjectiveSpec> objectives;
  CouplingConfig coupling;
  std::string formulation = "complete";
  FdSettings fd;
  RefineSettings refine;

  /// FNV-1a digest of the canonical configuration text and the referenced mesh files.
  std::string hash;
};

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

/// Throws ParseError on malformed INI text and ConfigError on unknown keys
/// or invalid values. File references are not checked.
CaseConfig parse_case_config(std::istream& in, const std::filesystem::path& base_dir,
                             const std::string& source = "<stream>");
/// Parses, checks that referenced files exist and computes the hash.
CaseConfig load_case_config(const std::filesystem::path& path);

/// Canonical "section.key = value" listing of every recognised setting.
std::string canonical_text(const CaseConfig& cfg);
void write_case_config(const CaseConfig& cfg, std::ostream& out);

FsiProblem load_problem(const CaseConfig& cfg);
FsiProblem load_problem(const CaseConfig& cfg, const std::filesystem::path& fluid_mesh,
                        const std::filesystem::path& structure_mesh);

}  // namespace afsi::cli
