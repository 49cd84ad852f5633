#include "chb/io.hpp"

#include <cstdio>
#include <fstream>

#include "chb/errors.hpp"

namespace chb {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

unsigned long long fnv1a_hash(const std::string& bytes) {
  unsigned long long h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

void write_vtk_header(std::ofstream& os, const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
}

}  // namespace

void write_vtk_bulk(const std::string& path, const Discretization& disc,
                    const std::map<std::string, Eigen::VectorXd>& point_fields,
                    const FlowSolution* flow) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_vtk_bulk: cannot open " + path);
  const BulkMesh& mesh = disc.geom.bulk;
  write_vtk_header(os, "chb bulk fields");
  os << "POINTS " << mesh.num_nodes() << " double\n";
  for (const auto& p : mesh.nodes)
    os << format_double(p.x()) << " " << format_double(p.y()) << " 0\n";
  os << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "CELL_TYPES " << mesh.num_triangles() << "\n";
  for (int t = 0; t < mesh.num_triangles(); ++t) os << "5\n";
  os << "POINT_DATA " << mesh.num_nodes() << "\n";
  for (const auto& [name, field] : point_fields) {
    if (field.size() != mesh.num_nodes())
      throw DomainError("write_vtk_bulk: field '" + name + "' has wrong length");
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < field.size(); ++i) os << format_double(field[i]) << "\n";
  }
  if (flow && !flow->is_zero()) {
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < mesh.num_nodes(); ++i) os << format_double(flow->pressure[i]) << "\n";
    os << "VECTORS velocity double\n";
    // P2 velocities sampled at the vertices.
    for (int i = 0; i < mesh.num_nodes(); ++i)
      os << format_double(flow->velocity[2 * i]) << " "
         << format_double(flow->velocity[2 * i + 1]) << " 0\n";
  }
}

void write_vtk_surface(const std::string& path, const Discretization& disc,
                       const std::map<std::string, Eigen::VectorXd>& point_fields) {
  std::ofstream os(path);
  if (!os) throw ConfigError("write_vtk_surface: cannot open " + path);
  const auto& geom = disc.geom;
  const int S = geom.surface.num_nodes();
  write_vtk_header(os, "chb surface fields");
  os << "POINTS " << S << " double\n";
  for (int k = 0; k < S; ++k) {
    const Vec2& p = geom.bulk.nodes[geom.trace_map.to_bulk[k]];
    os << format_double(p.x()) << " " << format_double(p.y()) << " 0\n";
  }
  os << "CELLS " << S << " " << 3 * S << "\n";
  for (int k = 0; k < S; ++k) os << "2 " << k << " " << (k + 1) % S << "\n";
  os << "CELL_TYPES " << S << "\n";
  for (int k = 0; k < S; ++k) os << "3\n";
  os << "POINT_DATA " << S << "\n";
  for (const auto& [name, field] : point_fields) {
    if (field.size() != S)
      throw DomainError("write_vtk_surface: field '" + name + "' has wrong length");
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < field.size(); ++i) os << format_double(field[i]) << "\n";
  }
}

std::string timeseries_csv_header() {
  return "# chb-timeseries v1\n"
         "t,energy_total,energy_bulk_dirichlet,energy_bulk_potential,"
         "energy_surf_dirichlet,energy_surf_potential,energy_robin,"
         "mass_bulk,mass_surf,diss_viscous,diss_permeability,diss_friction,"
         "diss_mobility_bulk,diss_mobility_surf,mismatch_l2,newton_iters,"
         "newton_residual,brinkman_div_residual,brinkman_energy_residual,"
         "energy_balance_residual,dt\n";
}

std::string timeseries_csv_row(const DiagnosticsRecord& r) {
  std::string row;
  auto add = [&row](double v) {
    row += format_double(v);
    row += ',';
  };
  add(r.t);
  add(r.energy.total);
  add(r.energy.bulk_dirichlet);
  add(r.energy.bulk_potential);
  add(r.energy.surf_dirichlet);
  add(r.energy.surf_potential);
  add(r.energy.robin);
  add(r.mass_bulk);
  add(r.mass_surf);
  add(r.dissipation.viscous);
  add(r.dissipation.permeability);
  add(r.dissipation.friction);
  add(r.dissipation.mob_bulk);
  add(r.dissipation.mob_surf);
  add(r.mismatch);
  row += std::to_string(r.newton_iters);
  row += ',';
  add(r.newton_residual);
  add(r.brinkman_div_residual);
  add(r.brinkman_energy_residual);
  add(r.energy_balance_residual);
  row += format_double(r.dt_used);
  row += '\n';
  return row;
}

}  // namespace chb
