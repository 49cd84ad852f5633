#pragma once

// Plain-text key = value run configuration: parsing, defaulting and
// validation. The key schema is documented in the README.

#include <map>
#include <string>

#include "chb/cahnhilliard.hpp"

namespace chb {

struct OutputOptions {
  std::string dir = "out";
  int fields_every = 0;  // VTK snapshot cadence in steps; 0 disables
};

struct RunConfig {
  int n = 16;
  ModelConfig model;
  OutputOptions output;
  // Campaign parameters.
  std::vector<double> k_list;      // sweep-k
  std::vector<double> eps_list;    // sweep-eps
  std::vector<double> delta_list;  // stability
  std::vector<int> mms_levels{4, 8, 16, 32};
  // Provenance.
  std::string source_path;
  unsigned long long source_hash = 0;

  void validate() const;  // structural checks + model.validate()
};

// Parses "a.b.c = value" lines ('#' comments, blank lines ignored). Throws
// ConfigError for unreadable files or malformed lines, ValidationError for
// unknown keys or inadmissible values.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& origin);

}  // namespace chb
