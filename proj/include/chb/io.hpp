#pragma once

// Legacy ASCII VTK export (unstructured grids) and the versioned per-run CSV
// time series. Floating-point formatting is fixed so that identical runs
// produce bit-identical files.

#include <map>
#include <string>

#include "chb/diagnostics.hpp"

namespace chb {

// Bulk mesh with point data; velocity (if present) is written as a 3-vector
// with zero z-component, pressure as a scalar.
void write_vtk_bulk(const std::string& path, const Discretization& disc,
                    const std::map<std::string, Eigen::VectorXd>& point_fields,
                    const FlowSolution* flow = nullptr);

// Boundary polyline with surface point data.
void write_vtk_surface(const std::string& path, const Discretization& disc,
                       const std::map<std::string, Eigen::VectorXd>& point_fields);

// Column order documented in the header line (schema v1).
std::string timeseries_csv_header();
std::string timeseries_csv_row(const DiagnosticsRecord& rec);

std::string format_double(double v);  // shortest round-trip formatting

// FNV-1a content hash used for provenance and determinism checks.
unsigned long long fnv1a_hash(const std::string& bytes);

}  // namespace chb
