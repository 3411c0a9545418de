#include "eulergel/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "eulergel/errors.hpp"
#include "eulergel/expression.hpp"

namespace eulergel {

namespace {

const std::set<std::string> kSections = {"domain",  "spaces",  "material", "regularization",
                                         "loads",   "initial", "time",     "output"};

std::string scalar_text(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) throw ConfigError(key, "expected a scalar value");
  return n.Scalar();
}

class Reader {
 public:
  Reader(const YAML::Node& root, const std::string& section, Config& cfg)
      : node_(root[section]), prefix_(section), cfg_(cfg) {
    if (node_ && !node_.IsMap() && !node_.IsNull())
      throw ConfigError(section, "expected a mapping of keys");
  }

  double number(const std::string& key, double def) {
    const auto opt = get(key);
    const YAML::Node n = opt.value_or(YAML::Node());
    double v = def;
    if (opt) {
      const std::string s = scalar_text(n, dotted(key));
      try {
        Expression e = Expression::parse(s);
        if (!e.is_constant()) throw ConfigError(dotted(key), "expected a constant number");
        v = e(0.0);
      } catch (const ExpressionError&) {
        throw ConfigError(dotted(key), "expected a number, got \"" + s + "\"");
      }
      if (!std::isfinite(v)) throw ConfigError(dotted(key), "value is not finite");
    }
    resolve(key, format(v));
    return v;
  }

  int integer(const std::string& key, int def) {
    const auto opt = get(key);
    const YAML::Node n = opt.value_or(YAML::Node());
    int v = def;
    if (opt) {
      const std::string s = scalar_text(n, dotted(key));
      std::size_t pos = 0;
      try {
        v = std::stoi(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos == 0 || pos != s.size()) {
        // Accept integral floating values written as e.g. "8.0".
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0' || d != std::floor(d))
          throw ConfigError(dotted(key), "expected an integer, got \"" + s + "\"");
        v = static_cast<int>(d);
      }
    }
    resolve(key, std::to_string(v));
    return v;
  }

  std::string text(const std::string& key, const std::string& def) {
    const auto opt = get(key);
    const YAML::Node n = opt.value_or(YAML::Node());
    const std::string v = opt ? scalar_text(n, dotted(key)) : def;
    resolve(key, v);
    return v;
  }

  Expression expression(const std::string& key, const std::string& def) {
    const std::string s = text(key, def);
    return parse_expr(s, dotted(key));
  }

  std::vector<std::string> list(const std::string& key, const std::vector<std::string>& def) {
    const auto opt = get(key);
    const YAML::Node n = opt.value_or(YAML::Node());
    std::vector<std::string> out = def;
    if (opt) {
      out.clear();
      if (n.IsSequence()) {
        for (const auto& item : n) out.push_back(scalar_text(item, dotted(key)));
      } else {
        out.push_back(scalar_text(n, dotted(key)));
      }
    }
    std::string joined = "[";
    for (std::size_t i = 0; i < out.size(); ++i) joined += (i ? ", " : "") + out[i];
    resolve(key, joined + "]");
    return out;
  }

  std::vector<std::vector<std::string>> matrix(const std::string& key,
                                               const std::vector<std::vector<std::string>>& def) {
    const auto opt = get(key);
    const YAML::Node n = opt.value_or(YAML::Node());
    auto out = def;
    if (opt) {
      out.clear();
      if (!n.IsSequence()) throw ConfigError(dotted(key), "expected a list of rows");
      for (const auto& row : n) {
        if (!row.IsSequence()) throw ConfigError(dotted(key), "expected a list of rows");
        std::vector<std::string> r;
        for (const auto& item : row) r.push_back(scalar_text(item, dotted(key)));
        out.push_back(r);
      }
    }
    std::string joined = "[";
    for (std::size_t i = 0; i < out.size(); ++i) {
      joined += i ? ", [" : "[";
      for (std::size_t j = 0; j < out[i].size(); ++j) joined += (j ? ", " : "") + out[i][j];
      joined += "]";
    }
    resolve(key, joined + "]");
    return out;
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key)) throw ConfigError(dotted(key), "unknown key");
    }
  }

  std::string dotted(const std::string& key) const { return prefix_ + "." + key; }

  static Expression parse_expr(const std::string& s, const std::string& key) {
    try {
      return Expression::parse(s);
    } catch (const ExpressionError& e) {
      throw ConfigError(key, e.what());
    }
  }

 private:
  std::optional<YAML::Node> get(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_.IsMap()) return std::nullopt;
    YAML::Node n = node_[key];
    if (!n || n.IsNull()) return std::nullopt;
    return n;
  }

  void resolve(const std::string& key, const std::string& value) {
    cfg_.resolved.emplace_back(dotted(key), value);
  }

  // Shortest text that reads back to the same double.
  static std::string format(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }

  YAML::Node node_;
  std::string prefix_;
  Config& cfg_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ConfigError(key, message);
}

std::vector<Expression> expressions(const std::vector<std::string>& items, int d,
                                    const std::string& key) {
  require(static_cast<int>(items.size()) == d, key,
          "expected " + std::to_string(d) + " components, got " + std::to_string(items.size()));
  std::vector<Expression> out;
  for (const auto& s : items) out.push_back(Reader::parse_expr(s, key));
  return out;
}

bool all_zero(const std::vector<Expression>& e) {
  for (const auto& x : e)
    if (!x.is_constant() || x(0.0) != 0.0) return false;
  return true;
}

VectorField vector_field(std::vector<Expression> e) {
  return [e = std::move(e)](double t, const Vec& x) {
    Vec v(static_cast<int>(e.size()));
    for (std::size_t i = 0; i < e.size(); ++i) v[static_cast<int>(i)] = e[i](t, x);
    return v;
  };
}

// Lattice of sample points used to validate initial data.
std::vector<Vec> sample_points(const Box& box, int per_axis) {
  std::vector<Vec> pts;
  const int d = box.dim;
  const int total = static_cast<int>(std::pow(per_axis, d));
  for (int idx = 0; idx < total; ++idx) {
    Vec p(d);
    int rem = idx;
    for (int a = d - 1; a >= 0; --a) {
      const int i = rem % per_axis;
      rem /= per_axis;
      const auto ua = static_cast<std::size_t>(a);
      p[a] = box.lower[ua] + box.length(a) * i / (per_axis - 1);
    }
    pts.push_back(p);
  }
  return pts;
}

void set_override(YAML::Node root, const std::string& dotted, const std::string& value) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) throw ConfigError(dotted, "override key must be section.key");
  const std::string section = dotted.substr(0, dot), key = dotted.substr(dot + 1);
  if (!kSections.count(section)) throw ConfigError(section, "unknown section");
  if (!root[section] || root[section].IsNull()) root[section] = YAML::Node(YAML::NodeType::Map);
  root[section][key] = value;
}

}  // namespace

std::vector<std::string> sweep_keys(const std::string& param) {
  if (param == "epsilon") return {"regularization.epsilon"};
  if (param == "yosida_k") return {"regularization.yosida_k"};
  if (param == "eps_F") return {"regularization.eps_F"};
  if (param == "dt") return {"time.dt"};
  if (param == "degree") return {"spaces.velocity_degree", "spaces.content_degree"};
  throw ConfigError("sweep.param", "unknown sweep parameter '" + param +
                                       "' (expected epsilon, yosida_k, dt, degree or eps_F)");
}

Config parse_config(const std::string& yaml_text, const Overrides& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("<document>", std::string("YAML syntax error: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("<document>", "top level must be a mapping of sections");
  for (const auto& kv : root) {
    const std::string s = kv.first.as<std::string>();
    if (!kSections.count(s)) throw ConfigError(s, "unknown section");
  }
  for (const auto& [k, v] : overrides) set_override(root, k, v);

  Config cfg;
  Scenario& sc = cfg.scenario;

  {
    Reader r(root, "domain", cfg);
    const int d = r.integer("dim", 2);
    require(d >= 1 && d <= 3, "domain.dim", "must be 1, 2 or 3");
    sc.box.dim = d;
    const auto lower = r.list("lower", std::vector<std::string>(static_cast<std::size_t>(d), "0"));
    const auto upper = r.list("upper", std::vector<std::string>(static_cast<std::size_t>(d), "1"));
    const auto periodic =
        r.list("periodic", std::vector<std::string>(static_cast<std::size_t>(d), "false"));
    require(static_cast<int>(lower.size()) == d, "domain.lower", "needs one entry per dimension");
    require(static_cast<int>(upper.size()) == d, "domain.upper", "needs one entry per dimension");
    require(static_cast<int>(periodic.size()) == d, "domain.periodic", "needs one entry per dimension");
    for (int a = 0; a < d; ++a) {
      const auto ua = static_cast<std::size_t>(a);
      const Expression lo = Reader::parse_expr(lower[ua], "domain.lower");
      const Expression hi = Reader::parse_expr(upper[ua], "domain.upper");
      sc.box.lower[ua] = lo(0.0);
      sc.box.upper[ua] = hi(0.0);
      require(sc.box.upper[ua] > sc.box.lower[ua], "domain.upper", "must exceed domain.lower");
      const std::string& p = periodic[ua];
      require(p == "true" || p == "false", "domain.periodic", "entries must be true or false");
      sc.box.periodic[ua] = p == "true";
    }
    r.finish();
  }
  const int d = sc.box.dim;

  {
    Reader r(root, "spaces", cfg);
    sc.degree_v = r.integer("velocity_degree", 8);
    sc.degree_z = r.integer("content_degree", 8);
    sc.quad_extra = r.integer("quad_extra", 3);
    require(sc.degree_v >= 2, "spaces.velocity_degree", "must be at least 2");
    require(sc.degree_z >= 1, "spaces.content_degree", "must be at least 1");
    require(sc.quad_extra >= 0, "spaces.quad_extra", "must be non-negative");
    r.finish();
  }

  {
    Reader r(root, "material", cfg);
    MaterialModel& m = sc.material;
    m.dim = d;
    const std::string law = r.text("swelling", "affine");
    require(law == "affine" || law == "constant", "material.swelling", "must be affine or constant");
    m.swelling.kind = law == "affine" ? SwellingLaw::Kind::affine : SwellingLaw::Kind::constant;
    m.swelling.lambda0 = r.number("lambda0", 1.0);
    m.swelling.beta = r.number("beta", 0.3);
    m.energy.mu1 = r.number("mu1", 1.0);
    m.energy.a1 = r.number("a1", 0.5);
    m.energy.mu2 = r.number("mu2", 0.0);
    m.energy.a2 = r.number("a2", 0.0);
    m.energy.bulk = r.number("bulk", 2.0);
    m.energy.kappa = r.number("kappa", 0.5);
    m.energy.kappa_h = r.number("kappa_h", 2.0);
    m.energy.h1 = r.number("h1", 0.0);
    m.dissipation.eta0 = r.number("eta0", 0.5);
    m.dissipation.eta1 = r.number("eta1", 0.0);
    m.dissipation.eta_bulk = r.number("eta_bulk", 0.0);
    m.dissipation.nu = r.number("nu", 1e-3);
    m.dissipation.p = r.number("p", 3.0);
    const std::string mob = r.text("mobility", "constant");
    require(mob == "constant" || mob == "inverse_det", "material.mobility",
            "must be constant or inverse_det");
    m.mobility.kind = mob == "constant" ? Mobility::Kind::constant : Mobility::Kind::inverse_det;
    m.mobility.m0 = r.number("m0", 0.1);
    m.mobility.floor = r.number("mobility_floor", 1e-4);
    m.convexity_modulus = r.number("convexity_modulus", 0.5 * m.energy.kappa_h);
    r.finish();

    require(m.swelling.lambda0 > 0.0, "material.lambda0", "must be positive");
    for (const auto& [key, v] : {std::pair<const char*, double>{"mu1", m.energy.mu1},
                                 {"mu2", m.energy.mu2},
                                 {"bulk", m.energy.bulk},
                                 {"kappa", m.energy.kappa},
                                 {"kappa_h", m.energy.kappa_h},
                                 {"eta0", m.dissipation.eta0},
                                 {"eta_bulk", m.dissipation.eta_bulk}})
      require(v >= 0.0, std::string("material.") + key, "must be non-negative");
    require(m.dissipation.nu > 0.0, "material.nu", "hyperviscosity must be positive");
    require(m.dissipation.p >= 2.0, "material.p", "must be at least 2");
    require(m.mobility.m0 > 0.0, "material.m0", "must be positive");
    require(m.mobility.floor > 0.0, "material.mobility_floor", "must be positive");
  }

  {
    Reader r(root, "regularization", cfg);
    sc.reg.epsilon = r.number("epsilon", 0.05);
    sc.reg.yosida_k = r.number("yosida_k", 1e3);
    sc.reg.eps_f = r.number("eps_F", 0.0);
    sc.reg.r = r.number("r", 3.0);
    r.finish();
    require(sc.reg.epsilon > 0.0, "regularization.epsilon", "must be positive");
    require(sc.reg.yosida_k > 0.0, "regularization.yosida_k", "must be positive");
    require(sc.reg.eps_f >= 0.0, "regularization.eps_F", "must be non-negative");
    require(sc.reg.r > 2.0, "regularization.r", "must exceed 2");
  }

  const std::vector<std::string> zeros(static_cast<std::size_t>(d), "0");
  {
    Reader r(root, "loads", cfg);
    auto g = expressions(r.list("gravity", zeros), d, "loads.gravity");
    auto f = expressions(r.list("traction", zeros), d, "loads.traction");
    const Expression h = r.expression("influx", "0");
    sc.loads.transfer = r.number("transfer", 0.0);
    r.finish();
    require(sc.loads.transfer >= 0.0, "loads.transfer", "must be non-negative");
    if (!all_zero(g)) sc.loads.gravity = vector_field(std::move(g));
    if (!all_zero(f)) sc.loads.traction = vector_field(std::move(f));
    if (!(h.is_constant() && h(0.0) == 0.0))
      sc.loads.influx = [h](double t, const Vec& x) { return h(t, x); };
  }

  {
    Reader r(root, "initial", cfg);
    auto v = expressions(r.list("velocity", zeros), d, "initial.velocity");
    std::vector<std::vector<std::string>> ident(static_cast<std::size_t>(d),
                                                std::vector<std::string>(static_cast<std::size_t>(d), "0"));
    for (int a = 0; a < d; ++a) ident[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] = "1";
    const auto fm = r.matrix("deformation", ident);
    const Expression z0 = r.expression("content", "0.5");
    const Expression rho = r.expression("density", "1");
    r.finish();

    require(static_cast<int>(fm.size()) == d, "initial.deformation", "needs d rows");
    std::vector<Expression> fe;
    for (const auto& row : fm) {
      require(static_cast<int>(row.size()) == d, "initial.deformation", "needs d entries per row");
      for (const auto& s : row) fe.push_back(Reader::parse_expr(s, "initial.deformation"));
    }
    if (!all_zero(v)) {
      auto vf = vector_field(std::move(v));
      sc.initial.velocity = [vf](const Vec& x) { return vf(0.0, x); };
    }
    sc.initial.deformation = [fe, d](const Vec& x) {
      Tensor2 f(d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) f(i, j) = fe[static_cast<std::size_t>(i * d + j)](0.0, x);
      return f;
    };
    sc.initial.content = [z0](const Vec& x) { return z0(0.0, x); };
    sc.initial.density = [rho](const Vec& x) { return rho(0.0, x); };

    for (const Vec& x : sample_points(sc.box, 17)) {
      const double z = sc.initial.content(x);
      require(z >= 0.0 && z <= 1.0, "initial.content",
              "initial content must lie in [0, 1] (got " + std::to_string(z) + ")");
      require(det(sc.initial.deformation(x)) > 0.0, "initial.deformation",
              "initial deformation gradient must have det F > 0");
      require(sc.initial.density(x) > 0.0, "initial.density", "density must be positive");
    }
  }

  {
    Reader r(root, "time", cfg);
    sc.t_end = r.number("end", 1.0);
    sc.dt = r.number("dt", 1e-3);
    sc.options.newton_atol = r.number("newton_atol", 1e-10);
    sc.options.newton_rtol = r.number("newton_rtol", 1e-8);
    sc.options.newton_max = r.integer("newton_max", 25);
    sc.options.max_halvings = r.integer("max_halvings", 6);
    sc.options.cfl = r.number("cfl", 0.5);
    r.finish();
    require(sc.t_end > 0.0, "time.end", "must be positive");
    require(sc.dt > 0.0, "time.dt", "must be positive");
    require(sc.options.newton_max >= 1, "time.newton_max", "must be at least 1");
    require(sc.options.max_halvings >= 0, "time.max_halvings", "must be non-negative");
    require(sc.options.cfl > 0.0, "time.cfl", "must be positive");
  }

  {
    Reader r(root, "output", cfg);
    cfg.output.snapshot_every = r.integer("snapshot_every", 0);
    cfg.output.lattice = r.integer("lattice", 65);
    r.finish();
    require(cfg.output.snapshot_every >= 0, "output.snapshot_every", "must be non-negative");
    require(cfg.output.lattice >= 2, "output.lattice", "must be at least 2");
  }
  return cfg;
}

Config load_config(const std::string& path, const Overrides& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace eulergel
