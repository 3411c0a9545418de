#include "eulergel/snapshot.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eulergel/errors.hpp"

namespace eulergel {

namespace {

std::string fmt9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Applies the 1D interpolation along one axis of a (n0, n1, n2, c) array.
std::vector<double> contract(const std::vector<double>& in, std::array<int, 3>& shape, int comps,
                             int axis, const Eigen::MatrixXd& interp) {
  std::array<int, 3> out_shape = shape;
  out_shape[static_cast<std::size_t>(axis)] = static_cast<int>(interp.rows());
  const std::size_t total = static_cast<std::size_t>(out_shape[0]) * out_shape[1] * out_shape[2] *
                            static_cast<std::size_t>(comps);
  std::vector<double> out(total, 0.0);
  auto index = [comps](const std::array<int, 3>& s, int i0, int i1, int i2, int c) {
    return ((static_cast<std::size_t>(i0) * s[1] + i1) * s[2] + i2) * comps + c;
  };
  for (int i0 = 0; i0 < out_shape[0]; ++i0)
    for (int i1 = 0; i1 < out_shape[1]; ++i1)
      for (int i2 = 0; i2 < out_shape[2]; ++i2) {
        const std::array<int, 3> o{i0, i1, i2};
        const int row = o[static_cast<std::size_t>(axis)];
        for (int k = 0; k < shape[static_cast<std::size_t>(axis)]; ++k) {
          std::array<int, 3> src = o;
          src[static_cast<std::size_t>(axis)] = k;
          const double wk = interp(row, k);
          for (int c = 0; c < comps; ++c)
            out[index(out_shape, i0, i1, i2, c)] += wk * in[index(shape, src[0], src[1], src[2], c)];
        }
      }
  shape = out_shape;
  return out;
}

}  // namespace

double round9(double x) { return std::strtod(fmt9(x).c_str(), nullptr); }

double lattice_coordinate(const Box& box, int axis, int i, int n) {
  const auto ua = static_cast<std::size_t>(axis);
  if (i == n - 1) return box.upper[ua];
  return box.lower[ua] + box.length(axis) * static_cast<double>(i) / static_cast<double>(n - 1);
}

Snapshot sample_nodal(const QuadGrid& grid, const std::string& field,
                      const std::vector<Eigen::VectorXd>& nodal, double time, int lattice) {
  const Box& box = grid.box();
  const int d = box.dim;
  const int comps = static_cast<int>(nodal.size());
  Snapshot snap;
  snap.field = field;
  snap.dim = d;
  snap.time = time;
  snap.components = comps;
  for (int a = 0; a < d; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    snap.dims[ua] = lattice;
    snap.lower[ua] = box.lower[ua];
    snap.upper[ua] = box.upper[ua];
  }

  std::array<int, 3> shape{1, 1, 1};
  for (int a = 0; a < d; ++a) shape[static_cast<std::size_t>(a)] = grid.count(a);
  std::vector<double> data(grid.size() * static_cast<std::size_t>(comps));
  for (std::size_t n = 0; n < grid.size(); ++n)
    for (int c = 0; c < comps; ++c)
      data[n * static_cast<std::size_t>(comps) + static_cast<std::size_t>(c)] =
          nodal[static_cast<std::size_t>(c)](static_cast<Eigen::Index>(n));

  for (int a = 0; a < d; ++a) {
    Eigen::MatrixXd interp(lattice, grid.count(a));
    for (int i = 0; i < lattice; ++i)
      interp.row(i) = grid.interpolation_row(a, lattice_coordinate(box, a, i, lattice));
    data = contract(data, shape, comps, a, interp);
  }
  for (double& x : data) x = round9(x);
  snap.values = std::move(data);
  return snap;
}

std::vector<Snapshot> sample_fields(const Solver& solver, const FieldState& state, int lattice) {
  const QuadGrid& grid = solver.grid();
  const int d = grid.dim();
  const auto nn = static_cast<Eigen::Index>(grid.size());
  const TransportState& ts = state.transport;

  Eigen::VectorXd rho(nn), detf(nn);
  for (Eigen::Index n = 0; n < nn; ++n) {
    rho(n) = ts.rho[static_cast<std::size_t>(n)];
    detf(n) = det(ts.f[static_cast<std::size_t>(n)]);
  }
  std::vector<Eigen::VectorXd> v;
  for (int i = 0; i < d; ++i) v.push_back(solver.velocity_tables().value[static_cast<std::size_t>(i)] * state.v);

  std::vector<Snapshot> out;
  out.push_back(sample_nodal(grid, "rho", {rho}, state.time, lattice));
  out.push_back(sample_nodal(grid, "v", v, state.time, lattice));
  out.push_back(sample_nodal(grid, "detF", {detf}, state.time, lattice));
  out.push_back(sample_nodal(grid, "z", {solver.nodal_scalar(state.z)}, state.time, lattice));
  out.push_back(sample_nodal(grid, "mu", {solver.nodal_scalar(state.mu)}, state.time, lattice));
  return out;
}

std::string snapshot_filename(const std::string& field, std::size_t index) {
  return field + "_t" + std::to_string(index) + ".dat";
}

void write_snapshot(const std::string& path, const Snapshot& snap) {
  std::ostringstream os;
  os << "# field " << snap.field << "\ndims";
  for (int a = 0; a < snap.dim; ++a) os << ' ' << snap.dims[static_cast<std::size_t>(a)];
  os << "\nlower";
  for (int a = 0; a < snap.dim; ++a) os << ' ' << fmt17(snap.lower[static_cast<std::size_t>(a)]);
  os << "\nupper";
  for (int a = 0; a < snap.dim; ++a) os << ' ' << fmt17(snap.upper[static_cast<std::size_t>(a)]);
  os << "\ntime " << fmt17(snap.time) << "\ncomponents " << snap.components << '\n';
  const auto c = static_cast<std::size_t>(snap.components);
  for (std::size_t p = 0; p < snap.points(); ++p) {
    for (std::size_t k = 0; k < c; ++k) os << (k ? " " : "") << fmt9(snap.values[p * c + k]);
    os << '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write snapshot '" + path + "'");
  out << os.str();
  if (!out) throw IoError("write failed for snapshot '" + path + "'");
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read snapshot '" + path + "'");
  auto bad = [&path](const std::string& what) {
    return IoError("malformed snapshot '" + path + "': " + what);
  };
  Snapshot snap;
  std::string line, tag;
  auto next = [&](const std::string& expect) {
    if (!std::getline(in, line)) throw bad("missing " + expect + " line");
    std::istringstream ls(line);
    ls >> tag;
    if (tag != expect) throw bad("expected '" + expect + "', got '" + tag + "'");
    return ls;
  };
  {
    auto ls = next("#");
    ls >> tag >> snap.field;
    if (tag != "field") throw bad("expected '# field'");
  }
  {
    auto ls = next("dims");
    int n = 0;
    snap.dim = 0;
    while (ls >> n) {
      if (snap.dim == 3) throw bad("too many dims");
      snap.dims[static_cast<std::size_t>(snap.dim++)] = n;
    }
    if (snap.dim == 0) throw bad("empty dims");
  }
  for (const char* key : {"lower", "upper"}) {
    auto ls = next(key);
    auto& target = std::string(key) == "lower" ? snap.lower : snap.upper;
    for (int a = 0; a < snap.dim; ++a) {
      std::string s;
      if (!(ls >> s)) throw bad(std::string("short ") + key + " line");
      target[static_cast<std::size_t>(a)] = std::strtod(s.c_str(), nullptr);
    }
  }
  {
    auto ls = next("time");
    std::string s;
    ls >> s;
    snap.time = std::strtod(s.c_str(), nullptr);
  }
  {
    auto ls = next("components");
    if (!(ls >> snap.components) || snap.components < 1) throw bad("bad component count");
  }
  const std::size_t expected = snap.points() * static_cast<std::size_t>(snap.components);
  snap.values.reserve(expected);
  std::string tok;
  while (in >> tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw bad("non-numeric value '" + tok + "'");
    snap.values.push_back(x);
  }
  if (snap.values.size() != expected)
    throw bad("expected " + std::to_string(expected) + " values, found " +
              std::to_string(snap.values.size()));
  return snap;
}

void export_fields(const Solver& solver, const FieldState& state, std::size_t index,
                   const std::string& dir, int lattice) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
  for (const Snapshot& s : sample_fields(solver, state, lattice))
    write_snapshot((std::filesystem::path(dir) / snapshot_filename(s.field, index)).string(), s);
}

}  // namespace eulergel
