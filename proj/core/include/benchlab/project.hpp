#pragma once

#include <string>
#include <vector>

#include "benchlab/model.hpp"
#include "benchlab/report.hpp"
#include "benchlab/stats.hpp"

namespace benchlab {

struct ProjectSettings {
    SummaryMode mode = SummaryMode::Mean;
    NoiseThresholds thresholds;
};

// Everything a project directory declares: the spec file plus the logs the
// store and journal manage next to it.
struct Project {
    std::string dir;
    std::string spec_path;
    std::string spec_file_hash;
    ProjectSettings settings;
    std::vector<BenchmarkSpec> specs;
    std::vector<QualitativeClaim> claims;

    const BenchmarkSpec* find_spec(const std::string& id) const;
};

// Conventional file names inside a project directory.
std::string project_spec_path(const std::string& dir);
std::string project_journal_path(const std::string& dir);

// Strict loader: unknown fields anywhere in the document are an error, as are
// missing required ones. Throws LoadError / MissingFileError.
Project load_project(const std::string& dir);

// Writes a small self-contained example spec file (refuses to overwrite).
void write_sample_project(const std::string& dir);

}  // namespace benchlab
