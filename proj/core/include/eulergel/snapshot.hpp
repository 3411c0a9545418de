#pragma once

// ASCII field snapshots on a uniform lattice (box corners included).
// File layout:
//   # field <name>
//   dims <n0> [<n1> [<n2>]]
//   lower <x0> ...
//   upper <x0> ...
//   time <t>
//   components <c>
// followed by one line per lattice point (axis 0 slowest), 9 significant
// digits. Stored values are already rounded to 9 digits, so reading a file
// back reproduces them bitwise.

#include <array>
#include <string>
#include <vector>

#include "eulergel/solver.hpp"

namespace eulergel {

struct Snapshot {
  std::string field;
  int dim = 2;
  std::array<int, 3> dims{1, 1, 1};
  std::array<double, 3> lower{0.0, 0.0, 0.0};
  std::array<double, 3> upper{1.0, 1.0, 1.0};
  double time = 0.0;
  int components = 1;
  std::vector<double> values;

  std::size_t points() const noexcept {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
           static_cast<std::size_t>(dims[2]);
  }
  double at(std::size_t point, int component = 0) const {
    return values[point * static_cast<std::size_t>(components) +
                  static_cast<std::size_t>(component)];
  }
};

/// Nearest double to the 9-significant-digit decimal form of x.
double round9(double x);

/// Lattice coordinate i of n along an axis of the box.
double lattice_coordinate(const Box& box, int axis, int i, int n);

/// Samples nodal values (one vector per component) on the lattice through
/// the grid's nodal interpolant, axis by axis.
Snapshot sample_nodal(const QuadGrid& grid, const std::string& field,
                      const std::vector<Eigen::VectorXd>& nodal, double time, int lattice);

/// rho, v, detF, z, mu sampled from a solver state.
std::vector<Snapshot> sample_fields(const Solver& solver, const FieldState& state, int lattice);

std::string snapshot_filename(const std::string& field, std::size_t index);

void write_snapshot(const std::string& path, const Snapshot& snap);
Snapshot read_snapshot(const std::string& path);

/// Writes every field of `state` into dir as <field>_t<index>.dat.
void export_fields(const Solver& solver, const FieldState& state, std::size_t index,
                   const std::string& dir, int lattice);

}  // namespace eulergel
