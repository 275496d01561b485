#include "evolver/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "evolver/averaging.hpp"
#include "evolver/catalog.hpp"
#include "evolver/degree.hpp"
#include "evolver/error.hpp"
#include "evolver/expr.hpp"
#include "evolver/random.hpp"
#include "evolver/semigroup.hpp"
#include "evolver/wave.hpp"

namespace evolver {

namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorKind::kConfiguration, msg); }

bool is_config_kind(ErrorKind kind) {
  return kind == ErrorKind::kConfiguration || kind == ErrorKind::kSyntax ||
         kind == ErrorKind::kUnknownIdentifier || kind == ErrorKind::kUnboundVariable;
}

// Typed access to one JSON object; unread keys are rejected by finish().
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_->is_object()) config_error(path_ + " must be an object");
  }

  const json* raw(const std::string& key) {
    used_.insert(key);
    if (!node_) return nullptr;
    const auto it = node_->find(key);
    return it == node_->end() ? nullptr : &*it;
  }

  std::optional<double> opt_number(const std::string& key) {
    const json* v = raw(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) config_error(where(key) + " must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) config_error(where(key) + " must be finite");
    return x;
  }

  double number(const std::string& key, double def) { return opt_number(key).value_or(def); }

  double positive(const std::string& key, double def) {
    const double x = number(key, def);
    if (!(x > 0.0)) config_error(where(key) + " must be positive");
    return x;
  }

  int integer(const std::string& key, int def, int lo, int hi) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_number_integer()) config_error(where(key) + " must be an integer");
    const auto x = v->get<long long>();
    if (x < lo || x > hi) {
      config_error(where(key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    const json* v = raw(key);
    if (!v) return def;
    return number_list(*v, where(key));
  }

  std::vector<int> integers(const std::string& key, std::vector<int> def, int lo, int hi) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_array() || v->empty()) config_error(where(key) + " must be a nonempty array");
    std::vector<int> out;
    for (const auto& e : *v) {
      if (!e.is_number_integer() || e.get<long long>() < lo || e.get<long long>() > hi) {
        config_error(where(key) + " entries must be integers in [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + "]");
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  std::string text(const std::string& key, const std::string& def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_string()) config_error(where(key) + " must be a string");
    return v->get<std::string>();
  }

  bool flag(const std::string& key, bool def) {
    const json* v = raw(key);
    if (!v) return def;
    if (!v->is_boolean()) config_error(where(key) + " must be a boolean");
    return v->get<bool>();
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (!used_.count(key)) config_error("unknown key " + where(key));
    }
  }

  static std::vector<double> number_list(const json& v, const std::string& what) {
    if (!v.is_array() || v.empty()) config_error(what + " must be a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !std::isfinite(e.get<double>())) config_error(what + " entries must be finite numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  std::string where(const std::string& key) const { return path_ + "." + key; }

  const json* node_;
  std::string path_;
  std::set<std::string> used_;
};

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

// ---------------------------------------------------------------- expressions

Expr expression(const json& value, const std::set<std::string>& allowed, const std::string& what) {
  Expr e;
  if (value.is_number()) {
    const double x = value.get<double>();
    if (!std::isfinite(x)) config_error(what + " must be finite");
    e = x < 0.0 ? Expr::negate(Expr::number(-x)) : Expr::number(x);
  } else if (value.is_string()) {
    e = parse_expr(value.get<std::string>());
  } else {
    config_error(what + " must be a number or an expression string");
  }
  for (const auto& v : e.free_variables()) {
    if (!allowed.count(v)) config_error(what + " may not use variable '" + v + "'");
  }
  return e;
}

std::function<double(double)> time_function(const Expr& e, double period) {
  return [e, period](double t) { return e.eval(Bindings{t, std::nullopt, period}); };
}

std::function<double(double, double)> state_function(const Expr& e, double period) {
  return [e, period](double t, double s) { return e.eval(Bindings{t, s, period}); };
}

// --------------------------------------------------------------------- models

double sampled_rate(const GeneratorFamily& family) {
  const Matrix g = family.metric_or_identity();
  double rate = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 256; ++i) rate = std::min(rate, dissipativity_rate(family.at(family.period * i / 256), g));
  return rate;
}

ModelSetup inline_linear(const json& node) {
  Section sec(&node, "model");
  sec.text("type", "linear");
  const double period = sec.positive("T", 1.0);
  const json* a = sec.raw("A");
  if (!a || !a->is_array() || a->empty()) config_error("model.A must be a square array of rows");
  const auto d = static_cast<Eigen::Index>(a->size());
  if (d > kMaxDim) config_error("model.A exceeds the dimension limit");
  std::vector<Expr> entries;
  for (const auto& row : *a) {
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d) config_error("model.A must be square");
    for (const auto& e : row) entries.push_back(expression(e, {"t", "T"}, "model.A entry"));
  }
  std::vector<Expr> forcing;
  if (const json* f = sec.raw("F")) {
    if (!f->is_array() || static_cast<Eigen::Index>(f->size()) != d) config_error("model.F must have dim entries");
    for (const auto& e : *f) forcing.push_back(expression(e, {"t", "s", "T"}, "model.F entry"));
  }
  const double lipschitz = sec.number("lipschitz", 0.0);
  const double growth = sec.number("growth", 0.0);
  const std::optional<double> omega = sec.opt_number("omega");
  sec.finish();

  GeneratorFamily family;
  family.dim = d;
  family.period = period;
  family.generator = [entries, d, period](double t) {
    Matrix m(d, d);
    const Bindings b{t, std::nullopt, period};
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = entries[i * d + j].eval(b);
    return m;
  };
  family.omega = omega ? *omega : sampled_rate(family);

  NonlinearField field = zero_field(d, period);
  if (!forcing.empty()) {
    field.eval = [forcing, period](double t, const Vector& x) {
      Vector out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = forcing[i].eval(Bindings{t, x(i), period});
      return out;
    };
  }
  field.lipschitz = lipschitz;
  field.growth = growth;
  return ModelSetup{"inline", std::move(family), std::move(field), Region::ball(Vector::Zero(d), 1.0),
                    std::nullopt, std::nullopt};
}

ModelSetup inline_wave(const json& node) {
  Section sec(&node, "model");
  sec.text("type", "wave");
  WaveParams p;
  p.period = sec.positive("T", 2.0 * std::numbers::pi);
  p.ell = sec.positive("ell", std::numbers::pi);
  p.k = sec.integer("k", 1, 1, 64);
  if (const json* e = sec.raw("eigenvalues")) {
    p.eigenvalues = Section::number_list(*e, "model.eigenvalues");
  }
  const json* beta = sec.raw("beta");
  if (!beta) config_error("model.beta is required for wave models");
  p.beta = time_function(expression(*beta, {"t", "T"}, "model.beta"), p.period);
  if (const json* f = sec.raw("f")) p.f = state_function(expression(*f, {"t", "s", "T"}, "model.f"), p.period);
  p.lipschitz = sec.number("L", 0.0);
  p.growth = sec.number("c", 0.0);
  p.f_inf = sec.number("f_inf", 0.0);
  p.eta = sec.opt_number("eta");
  p.check_resonance = sec.flag("check_resonance", true);
  sec.finish();
  return wave_setup("inline-wave", p);
}

ModelSetup load_model(const json& cfg, const std::string& fallback) {
  const auto it = cfg.find("model");
  if (it == cfg.end()) return catalog_model(fallback);
  if (it->is_string()) return catalog_model(it->get<std::string>());
  if (!it->is_object()) config_error("model must be a catalog name or an object");
  const auto type = it->find("type");
  if (type != it->end() && type->is_string() && type->get<std::string>() == "wave") return inline_wave(*it);
  return inline_linear(*it);
}

Region load_region(const json* node, const Region& fallback, Eigen::Index dim) {
  if (!node) return fallback;
  Section sec(node, "region");
  const std::string kind = sec.text("kind", "ball");
  Region region = fallback;
  if (kind == "ball") {
    const Vector center = to_vector(sec.numbers("center", std::vector<double>(dim, 0.0)));
    region = Region::ball(center, sec.positive("radius", 1.0));
  } else if (kind == "box") {
    const json* lo = sec.raw("lower");
    const json* hi = sec.raw("upper");
    if (!lo || !hi) config_error("region.lower and region.upper are required for boxes");
    region = Region::box(to_vector(Section::number_list(*lo, "region.lower")),
                         to_vector(Section::number_list(*hi, "region.upper")));
  } else {
    config_error("region.kind must be ball or box");
  }
  sec.finish();
  if (region.dim() != dim) config_error("region dimension does not match the model");
  return region;
}

// -------------------------------------------------------------------- reports

std::string cell(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}
std::string cell(int x) { return std::to_string(x); }
std::string cell(bool x) { return x ? "true" : "false"; }
template <typename T>
std::string cell(const std::optional<T>& x) {
  return x ? cell(*x) : std::string();
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  json metrics = json::object();
  json thresholds = json::object();
  std::vector<std::string> failed;

  void check(const std::string& name, bool ok) {
    if (!ok) failed.push_back(name);
  }
};

struct Context {
  const json& cfg;
  Section numeric;
  std::uint64_t seed;
  bool running = false;
};

double ls_rate(const std::vector<int>& ns, const std::vector<double>& errors) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (errors[i] > 0.0 && std::isfinite(errors[i])) {
      xs.push_back(std::log(ns[i]));
      ys.push_back(-std::log(errors[i]));
    }
  }
  if (xs.size() < 2) return 0.0;
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<double> descending(std::vector<double> v, const std::string& what) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || (i && !(v[i] < v[i - 1]))) config_error(what + " must be positive and strictly descending");
  }
  return v;
}

// ---------------------------------------------------------------- experiments

void run_chernoff(Context& ctx, Report& rep) {
  auto& num = ctx.numeric;
  const int contractions = num.integer("contractions", 200, 0, 100000);
  const int max_dim = num.integer("max_dim", 6, 1, 32);
  const int n_max = num.integer("n_max", 64, 1, 1 << 16);
  const int generators = num.integer("generators", 3, 0, 100);
  const int dim = num.integer("dim", 3, 1, 64);
  const std::vector<int> ns = num.integers("ns", {64, 128, 256, 512, 1024, 2048, 4096}, 1, 1 << 20);
  const std::string preset = num.text("preset", "uniform");
  const double horizon = num.positive("t", 1.0);
  if (preset != "uniform" && preset != "ceil") config_error("numeric.preset must be uniform or ceil");
  std::vector<std::pair<std::string, Matrix>> cases;
  if (ctx.cfg.contains("model")) {
    const ModelSetup m = load_model(ctx.cfg, "");
    cases.emplace_back(m.name, m.family.at(0.0));
  }
  num.finish();
  ctx.running = true;

  Rng rng(ctx.seed);
  int violations = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < contractions; ++i) {
    const int d = rng.uniform_int(1, max_dim);
    const Matrix m = rng.matrix(d, d);
    const Matrix contraction = m / (operator_norm(m) * (1.0 + 0.5 * rng.unit()));
    const Vector x = rng.vector(d);
    const int n = rng.uniform_int(1, n_max);
    const DefectBound b = chernoff_defect(contraction, x, n);
    if (b.lhs > b.rhs + 1e-9) ++violations;
    if (b.rhs > 0.0) worst_ratio = std::max(worst_ratio, b.lhs / b.rhs);
  }
  for (int g = 0; g < generators; ++g) {
    const Matrix b = rng.matrix(dim, dim);
    const Matrix c = rng.matrix(dim, dim);
    cases.emplace_back("random-" + std::to_string(g),
                       Matrix(-(b.transpose() * b) / dim - 0.1 * Matrix::Identity(dim, dim) + 0.5 * (c - c.transpose())));
  }

  rep.columns = {"case", "n", "k", "lambda", "power_error", "sum_error"};
  SequenceSpec seq;
  seq.preset = preset == "ceil" ? SequencePreset::kCeil : SequencePreset::kUniform;
  seq.t = horizon;
  seq.ns = ns;
  double worst_power = 0.0;
  double worst_sum = 0.0;
  bool all_converged = true;
  for (const auto& [name, a] : cases) {
    const ChernoffScheme scheme = resolvent_scheme([a](double) { return a; });
    Rng xr(ctx.seed + 1);
    const Vector x = xr.vector(a.rows());
    const ConvergenceTable power = chernoff_power_limit(scheme, seq, x);
    const ConvergenceTable sum = chernoff_sum_limit(scheme, seq, x);
    for (std::size_t i = 0; i < power.rows.size(); ++i) {
      const SequenceTerm& term = power.rows[i].term;
      rep.rows.push_back({name, cell(term.n), cell(term.k), cell(term.lambda), cell(power.rows[i].error),
                          cell(sum.rows[i].error)});
    }
    worst_power = std::max(worst_power, power.rows.back().error);
    worst_sum = std::max(worst_sum, sum.rows.back().error);
    all_converged = all_converged && power.converged && sum.converged;
    rep.metrics["rate_power"][name] = power.measured_rate;
  }
  rep.metrics["defect_samples"] = contractions;
  rep.metrics["defect_violations"] = violations;
  rep.metrics["max_defect_ratio"] = worst_ratio;
  rep.metrics["final_power_error"] = worst_power;
  rep.metrics["final_sum_error"] = worst_sum;
  rep.metrics["converged"] = all_converged;
  rep.thresholds["defect_slack"] = 1e-9;
  rep.thresholds["final_error"] = 1e-3;
  rep.check("defect_violations", violations == 0);
  rep.check("final_power_error", cases.empty() || worst_power < 1e-3);
  rep.check("final_sum_error", cases.empty() || worst_sum < 1e-3);
  rep.check("converged", all_converged);
}

Matrix rk4_fundamental(const GeneratorFamily& family, int steps) {
  const double h = family.period / steps;
  Matrix y = Matrix::Identity(family.dim, family.dim);
  for (int i = 0; i < steps; ++i) {
    const double t = h * i;
    const Matrix a0 = family.at(t);
    const Matrix am = family.at(t + 0.5 * h);
    const Matrix a1 = family.at(t + h);
    const Matrix k1 = a0 * y;
    const Matrix k2 = am * (y + 0.5 * h * k1);
    const Matrix k3 = am * (y + 0.5 * h * k2);
    const Matrix k4 = a1 * (y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

void run_evolsys(Context& ctx, Report& rep) {
  auto& num = ctx.numeric;
  const ModelSetup m = load_model(ctx.cfg, "rotation-damped-2d");
  const std::vector<int> ns = num.integers("ns", {256, 512, 1024, 2048, 4096}, 1, EvolutionSystem::kMaxSubdivisions);
  const int rk4_steps = num.integer("rk4_steps", 8192, 16, 1 << 20);
  const int samples = num.integer("contraction_samples", 11, 2, 101);
  const std::vector<double> eps = num.numbers("eps", {1e-1, 1e-2, 1e-3, 1e-4});
  const int continuity_n = num.integer("continuity_n", 1024, 1, EvolutionSystem::kMaxSubdivisions);
  num.finish();
  ctx.running = true;

  const GeneratorFamily& family = m.family;
  const FamilyReport fr = validate(family);
  const Matrix reference = rk4_fundamental(family, rk4_steps);
  rep.columns = {"n", "rk4_gap", "cocycle_defect", "contraction_excess"};
  std::vector<double> gaps;
  double worst_cocycle = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (int n : ns) {
    const EvolutionSystem r(family, n);
    const double gap = operator_norm(r.monodromy() - reference);
    double cocycle = 0.0;
    for (int a = 0; a <= 8; ++a)
      for (int b = a; b <= 8; ++b)
        for (int c = b; c <= 8; ++c) {
          const double p = family.period;
          cocycle = std::max(cocycle, cocycle_defect(r, p * c / 8, p * b / 8, p * a / 8));
        }
    const double excess = contraction_check(r, family.omega, samples);
    gaps.push_back(gap);
    worst_cocycle = std::max(worst_cocycle, cocycle);
    worst_excess = std::max(worst_excess, excess);
    rep.rows.push_back({cell(n), cell(gap), cell(cocycle), cell(excess)});
  }
  const double order = ls_rate(ns, gaps);

  const Eigen::Index d = family.dim;
  const Matrix ones = Matrix::Constant(d, d, 1.0 / d);
  const Vector v = Vector::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  json continuity = json::array();
  bool bound_holds = true;
  double lo_slope = std::numeric_limits<double>::infinity();
  double hi_slope = 0.0;
  for (double e : eps) {
    GeneratorFamily second = family;
    const auto inner = family.generator;
    const double period = family.period;
    second.generator = [inner, ones, e, period](double t) {
      return Matrix(inner(t) + e * std::cos(2.0 * std::numbers::pi * t / period) * ones);
    };
    const ContinuityGap gap = family_continuity_gap(family, second, continuity_n, v);
    continuity.push_back({{"eps", e}, {"lhs", gap.lhs}, {"rhs", gap.rhs}});
    bound_holds = bound_holds && gap.lhs <= gap.rhs;
    lo_slope = std::min(lo_slope, gap.lhs / e);
    hi_slope = std::max(hi_slope, gap.lhs / e);
  }
  const bool linear = lo_slope > 0.0 && hi_slope <= 3.0 * lo_slope;

  rep.metrics["family_valid"] = fr.ok();
  rep.metrics["family_issues"] = fr.issues;
  rep.metrics["final_rk4_gap"] = gaps.back();
  rep.metrics["measured_order"] = order;
  rep.metrics["cocycle_defect"] = worst_cocycle;
  rep.metrics["contraction_excess"] = worst_excess;
  rep.metrics["continuity"] = continuity;
  rep.metrics["continuity_slope_spread"] = lo_slope > 0.0 ? hi_slope / lo_slope : 0.0;
  rep.thresholds["rk4_gap"] = 1e-3;
  rep.thresholds["order"] = 0.9;
  rep.thresholds["cocycle_defect"] = 1e-12;
  rep.thresholds["contraction_excess"] = 1e-9;
  rep.thresholds["continuity_slope_spread"] = 3.0;
  rep.check("family_valid", fr.ok());
  rep.check("final_rk4_gap", gaps.back() < 1e-3);
  rep.check("measured_order", order >= 0.9);
  rep.check("cocycle_defect", worst_cocycle <= 1e-12);
  rep.check("contraction_excess", worst_excess <= 1e-9);
  rep.check("continuity_bound", bound_holds);
  rep.check("continuity_slope_spread", linear);
}

SweepOptions sweep_options(Section& num, int n_def, int grid_def) {
  SweepOptions opt;
  opt.n = num.integer("n", n_def, 1, EvolutionSystem::kMaxSubdivisions);
  opt.mild.grid = num.integer("grid", grid_def, 1, 1 << 16);
  opt.mild.tol = num.positive("picard_tol", 1e-12);
  opt.mild.max_iter = num.integer("picard_max_iter", 500, 1, 100000);
  opt.fixed_point.tol = num.positive("tol", 1e-10);
  return opt;
}

void run_branching(Context& ctx, Report& rep) {
  auto& num = ctx.numeric;
  const ModelSetup m = load_model(ctx.cfg, "scalar-linear");
  const Region region = load_region(ctx.cfg.contains("region") ? &ctx.cfg["region"] : nullptr, m.region, m.family.dim);
  const std::vector<double> lambdas =
      descending(num.numbers("lambdas", {1.0, 0.3, 0.1, 0.03, 0.01, 3e-3, 1e-3}), "numeric.lambdas");
  const SweepOptions opt = sweep_options(num, 1024, 512);
  num.finish();
  ctx.running = true;

  const BranchingTable table = branching_experiment(m.family, m.field, lambdas, region, opt);
  const Eigen::Index d = m.family.dim;
  rep.columns = {"lambda"};
  for (Eigen::Index i = 0; i < d; ++i) rep.columns.push_back("x_" + std::to_string(i + 1));
  for (const char* c : {"defect", "residual", "sup_gap", "newton_iters", "picard_iters", "status"}) rep.columns.push_back(c);
  for (const auto& row : table.rows) {
    std::vector<std::string> r{cell(row.lambda)};
    for (Eigen::Index i = 0; i < d; ++i) r.push_back(row.x.size() ? cell(row.x(i)) : std::string());
    const bool ok = row.status == "ok";
    r.push_back(ok ? cell(row.defect) : "");
    r.push_back(ok ? cell(row.residual) : "");
    r.push_back(ok ? cell(row.sup_gap) : "");
    r.push_back(cell(row.newton_iters));
    r.push_back(cell(row.picard_iters));
    r.push_back(row.status);
    rep.rows.push_back(std::move(r));
  }
  const double first = table.rows.front().defect;
  const double last = table.rows.back().defect;
  rep.metrics["initial_defect"] = first;
  rep.metrics["final_defect"] = last;
  rep.metrics["defect_ratio"] = first > 0.0 ? last / first : 0.0;
  rep.metrics["monotone"] = table.monotone;
  if (table.averaged_zero) rep.metrics["averaged_zero"] = vector_json(*table.averaged_zero);
  rep.thresholds["defect_ratio"] = 1e-2;
  const bool rows_ok = std::all_of(table.rows.begin(), table.rows.end(), [](const auto& r) { return r.status == "ok"; });
  rep.check("fixed_points", rows_ok);
  rep.check("monotone", table.monotone);
  rep.check("defect_ratio", table.passed);
}

VectorField complex_power(int m, double c) {
  return [m, c](const Vector& x) {
    double re = 1.0;
    double im = 0.0;
    for (int i = 0; i < m; ++i) {
      const double r = re * x(0) - im * x(1);
      im = re * x(1) + im * x(0);
      re = r;
    }
    return Vector{{re - c, im}};
  };
}

void run_degree(Context& ctx, Report& rep) {
  auto& num = ctx.numeric;
  DegreeOptions opt;
  opt.grid = num.integer("grid", 16, 1, 64);
  opt.boundary_resolution = num.integer("boundary_resolution", 256, 4, 1 << 16);
  const int winding_samples = num.integer("winding_samples", 256, 4, 1 << 16);
  num.finish();

  std::vector<const json*> specs;
  if (ctx.cfg.contains("fields")) {
    if (!ctx.cfg["fields"].is_array() || ctx.cfg["fields"].empty()) config_error("fields must be a nonempty array");
    for (const auto& f : ctx.cfg["fields"]) specs.push_back(&f);
  } else if (ctx.cfg.contains("field")) {
    specs.push_back(&ctx.cfg["field"]);
  } else {
    config_error("degree experiments need field or fields");
  }
  struct Job {
    std::string label;
    VectorField g;
    Region region;
    std::optional<int> expected;
  };
  std::vector<Job> jobs;
  std::optional<ModelSetup> model;
  for (const json* spec : specs) {
    Section sec(spec, "field");
    const std::string kind = sec.text("kind", "");
    const std::string label = sec.text("name", kind);
    const int dim = sec.integer("dim", 2, 1, 4);
    const json* expected = sec.raw("expected");
    if (expected && !expected->is_number_integer()) config_error("field.expected must be an integer");
    Job job{label, {}, Region::ball(Vector::Zero(dim), 1.0), std::nullopt};
    if (expected) job.expected = expected->get<int>();
    if (kind == "identity") {
      job.g = [](const Vector& x) { return x; };
    } else if (kind == "antipodal") {
      job.g = [](const Vector& x) { return Vector(-x); };
    } else if (kind == "complex-power") {
      job.g = complex_power(sec.integer("m", 2, 1, 12), sec.number("c", 0.25));
      job.region = Region::ball(Vector::Zero(2), 1.0);
    } else if (kind == "linear") {
      const json* mat = sec.raw("matrix");
      if (!mat || !mat->is_array()) config_error("field.matrix is required for linear fields");
      const auto d = static_cast<Eigen::Index>(mat->size());
      if (d < 1 || d > 4) config_error("field.matrix must be at most 4 x 4");
      Matrix a(d, d);
      for (Eigen::Index i = 0; i < d; ++i) {
        const auto row = Section::number_list((*mat)[i], "field.matrix row");
        if (static_cast<Eigen::Index>(row.size()) != d) config_error("field.matrix must be square");
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = row[j];
      }
      job.g = [a](const Vector& x) { return Vector(a * x); };
      job.region = Region::ball(Vector::Zero(d), 1.0);
    } else if (kind == "averaged") {
      if (!model) model = load_model(ctx.cfg, "rotation-damped-2d");
      const AveragedField avg = average(model->family, model->field);
      job.g = [avg](const Vector& x) { return avg(x); };
      job.region = model->region;
    } else {
      config_error("field.kind must be identity, antipodal, complex-power, linear or averaged");
    }
    if (const json* r = sec.raw("region")) job.region = load_region(r, job.region, job.region.dim());
    sec.finish();
    jobs.push_back(std::move(job));
  }
  if (!model && ctx.cfg.contains("model")) config_error("model is only used by averaged fields");
  ctx.running = true;

  rep.columns = {"field", "dim", "degree", "winding", "zeros", "boundary_min"};
  for (const auto& job : jobs) {
    const DegreeResult res = brouwer_degree_detailed(job.g, job.region, opt);
    std::optional<int> winding;
    if (job.region.dim() == 2) winding = winding_number_2d(job.g, job.region, winding_samples);
    rep.rows.push_back({job.label, cell(static_cast<int>(job.region.dim())), cell(res.degree), cell(winding),
                        cell(static_cast<int>(res.zeros.size())), cell(res.boundary_min)});
    rep.metrics["degree"][job.label] = res.degree;
    if (winding) {
      rep.metrics["winding"][job.label] = *winding;
      rep.check(job.label + ".winding", *winding == res.degree);
    }
    if (job.expected) rep.check(job.label + ".expected", *job.expected == res.degree);
  }
}

AveragingOptions averaging_options(Section& num) {
  AveragingOptions opt;
  opt.sweep = sweep_options(num, 512, 256);
  opt.degree.grid = num.integer("degree_grid", 6, 1, 64);
  opt.degree.boundary_resolution = num.integer("boundary_resolution", 64, 4, 1 << 16);
  opt.winding_samples = num.integer("winding_samples", 128, 4, 1 << 16);
  return opt;
}

void run_averaging(Context& ctx, Report& rep) {
  auto& num = ctx.numeric;
  const ModelSetup m = load_model(ctx.cfg, "rotation-damped-2d");
  const Region region = load_region(ctx.cfg.contains("region") ? &ctx.cfg["region"] : nullptr, m.region, m.family.dim);
  const std::vector<double> lambdas =
      descending(num.numbers("lambdas", {1.0, 0.5, 0.1, 0.05, 0.01}), "numeric.lambdas");
  const AveragingOptions opt = averaging_options(num);
  num.finish();
  ctx.running = true;

  const AveragingReport report = averaging_degree_check(m.family, m.field, region, lambdas, opt);
  rep.columns = {"lambda", "admissible", "boundary_min", "degree", "winding", "status"};
  for (const auto& row : report.rows) {
    rep.rows.push_back({cell(row.lambda), cell(row.admissible), row.admissible ? cell(row.boundary_min) : "",
                        cell(row.degree), cell(row.winding), row.status});
  }
  rep.metrics["averaged_degree"] = report.averaged_degree;
  if (report.averaged_winding) rep.metrics["averaged_winding"] = *report.averaged_winding;
  if (report.lambda0) rep.metrics["lambda0"] = *report.lambda0;
  rep.metrics["consistent"] = report.consistent;
  rep.check("lambda0", report.lambda0.has_value());
  rep.check("degree_equality", report.consistent);
}

void run_continuation(Context& ctx, Report& rep) {
  auto& num = ctx.numeric;
  const ModelSetup m = load_model(ctx.cfg, "scalar-linear");
  const Region region = load_region(ctx.cfg.contains("region") ? &ctx.cfg["region"] : nullptr, m.region, m.family.dim);
  std::vector<double> lambdas = num.numbers("lambdas", {0.05, 0.25, 0.5, 0.75, 1.0});
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0) || (i && !(lambdas[i] > lambdas[i - 1]))) {
      config_error("numeric.lambdas must be positive and strictly ascending");
    }
  }
  const AveragingOptions opt = averaging_options(num);
  num.finish();
  ctx.running = true;

  rep.columns = {"lambda", "admissible", "boundary_min", "degree", "status"};
  bool all_admissible = true;
  std::optional<int> common;
  bool constant = true;
  for (double lambda : lambdas) {
    const TranslationOperator phi(m.family, m.field, lambda, opt.sweep.n, opt.sweep.mild);
    const VectorField g = [&phi](const Vector& x) { return Vector(x - phi(x)); };
    std::string status = "ok";
    std::optional<int> degree;
    double bmin = 0.0;
    try {
      bmin = require_admissible(g, region, opt.degree.boundary_resolution);
      degree = brouwer_degree(g, region, opt.degree);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kInadmissibleRegion) throw;
      status = std::string(to_string(e.kind()));
      all_admissible = false;
    }
    if (degree) {
      if (common && *common != *degree) constant = false;
      common = degree;
    }
    rep.rows.push_back({cell(lambda), cell(status == "ok"), status == "ok" ? cell(bmin) : "", cell(degree), status});
  }
  rep.check("no_boundary_fixed_points", all_admissible);
  rep.check("degree_constant", constant);
  rep.check("degree_nonzero", common.has_value() && *common != 0);
  if (common) rep.metrics["degree"] = *common;
  if (all_admissible && common && *common != 0) {
    const TranslationOperator phi(m.family, m.field, lambdas.back(), opt.sweep.n, opt.sweep.mild);
    const FixedPointResult fp = fixed_point(phi, region.center(), FixedPointMethod::kNewton, opt.sweep.fixed_point);
    rep.metrics["periodic_point"] = vector_json(fp.point);
    rep.metrics["periodic_residual"] = fp.residual;
    rep.check("periodic_point_in_region", region.contains(fp.point));
  }
}

const WaveSystem& require_wave(const ModelSetup& m) {
  if (!m.wave) config_error("wave experiments need a wave model");
  return *m.wave;
}

void run_wave_periodic(Context& ctx, Report& rep) {
  auto& num = ctx.numeric;
  const ModelSetup m = load_model(ctx.cfg, "wave-k3");
  const WaveSystem& w = require_wave(m);
  const double lambda = num.positive("lambda", 1.0);
  PeriodicOptions popt;
  popt.n = num.integer("n", 4096, 1, EvolutionSystem::kMaxSubdivisions);
  popt.mild.grid = num.integer("grid", 2048, 1, 1 << 16);
  popt.fixed_point.tol = num.positive("tol", 1e-10);
  const std::vector<double> lambdas =
      num.numbers("lambdas", {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0});
  const int k = w.model.modes();
  const int k_prime = num.integer("k_prime", k < 8 ? 8 : std::min(64, k + 1), 1, 64);
  const int points = num.integer("invariance_points", 10, 1, 100);
  const int samples = num.integer("contraction_samples", 11, 2, 101);
  Vector x_init = Vector::Zero(w.model.dim());
  if (const json* x = num.raw("x_init")) {
    x_init = to_vector(Section::number_list(*x, "numeric.x_init"));
    if (x_init.size() != w.model.dim()) config_error("numeric.x_init must have 2k entries");
  }
  num.finish();
  ctx.running = true;

  const EvolutionSystem r(w.family, popt.n);
  const double excess = contraction_check(r, w.eta.numeric_rate, samples);

  std::optional<double> invariance;
  if (m.wave_params && !m.wave_params->eigenvalues && k_prime > k) {
    WaveParams larger = *m.wave_params;
    larger.k = k_prime;
    larger.eta = w.model.eta();
    const WaveSystem big = build_wave_model(larger);
    const EvolutionSystem rb(big.family, popt.n);
    const double p = w.model.period();
    invariance = 0.0;
    for (int i = 0; i < points; ++i) {
      const double s = p * (0.037 + 0.9 * i / points);
      const double t = s + 0.6 * (p - s);
      invariance = std::max(*invariance, spectral_invariance_gap(r, rb, t, s));
    }
  }

  const NondegeneracyReport nd = linear_nondegeneracy(w, lambdas, popt.n);
  rep.columns = {"lambda", "distance_to_one", "spectral_radius", "nondegenerate"};
  for (const auto& row : nd.rows) {
    rep.rows.push_back({cell(row.lambda), cell(row.distance_to_one), cell(row.spectral_radius), cell(row.nondegenerate)});
  }

  const PeriodicWave pw = find_periodic_wave(w, lambda, x_init, popt);
  const TranslationOperator phi(w.family, w.field, lambda, popt.n, popt.mild);
  const double closure = metric_norm(phi(pw.x) - pw.x, w.model.metric());

  rep.metrics["eta"] = w.eta.eta;
  rep.metrics["analytic_rate"] = w.eta.analytic_rate;
  rep.metrics["numeric_rate"] = w.eta.numeric_rate;
  rep.metrics["contraction_excess"] = excess;
  if (invariance) rep.metrics["invariance_gap"] = *invariance;
  rep.metrics["kernel_trivial"] = nd.kernel_trivial;
  rep.metrics["averaged_det"] = nd.averaged_det;
  rep.metrics["periodic_point"] = vector_json(pw.x);
  rep.metrics["periodic_residual"] = pw.residual;
  rep.metrics["reintegration_gap"] = closure;
  rep.thresholds["rate_slack"] = 1e-9;
  rep.thresholds["contraction_excess"] = 1e-9;
  rep.thresholds["invariance_gap"] = 1e-10;
  rep.thresholds["unit_distance"] = 1e-8;
  rep.thresholds["periodic_residual"] = 1e-6;
  rep.check("rate_bound", w.eta.numeric_rate >= w.eta.analytic_rate - 1e-9);
  rep.check("contraction_excess", excess <= 1e-9);
  if (invariance) rep.check("invariance_gap", *invariance <= 1e-10);
  rep.check("nondegenerate", nd.nondegenerate);
  rep.check("periodic_residual", pw.residual <= 1e-6);
  rep.check("reintegration_gap", closure <= 1e-6);
}

void run_wave_energy(Context& ctx, Report& rep) {
  auto& num = ctx.numeric;
  const ModelSetup m = load_model(ctx.cfg, "wave-k3");
  const WaveSystem& w = require_wave(m);
  const std::vector<int> grids = num.integers("grids", {2048, 4096}, 2, 1 << 15);
  const int factor = num.integer("n_factor", 2, 1, 16);
  const double lambda = num.positive("lambda", 1.0);
  const double tol = num.positive("picard_tol", 1e-12);
  Vector x0 = Vector::Zero(w.model.dim());
  x0(0) = 1.0;
  if (const json* x = num.raw("x0")) {
    x0 = to_vector(Section::number_list(*x, "numeric.x0"));
    if (x0.size() != w.model.dim()) config_error("numeric.x0 must have 2k entries");
  }
  for (int g : grids) {
    if (g * factor > EvolutionSystem::kMaxSubdivisions) config_error("grid * n_factor exceeds 2^14");
  }
  num.finish();
  ctx.running = true;

  rep.columns = {"grid", "n", "residual"};
  std::vector<double> residuals;
  for (int g : grids) {
    const Propagator p(EvolutionSystem(scaled(w.family, lambda), g * factor), TimeGrid{0.0, w.model.period(), g});
    const Trajectory traj = mild_solve(p, w.field, x0, lambda, MildOptions{g, tol, 500});
    const std::vector<Vector> forcing = wave_forcing(w.model, traj, lambda);
    const double res = energy_residual(traj, w.model, forcing, lambda);
    residuals.push_back(res);
    rep.rows.push_back({cell(g), cell(g * factor), cell(res)});
  }
  rep.metrics["residual"] = residuals.front();
  json ratios = json::array();
  bool halving = true;
  for (std::size_t i = 1; i < residuals.size(); ++i) {
    const double ratio = residuals[i] / residuals[i - 1];
    ratios.push_back(ratio);
    halving = halving && ratio >= 0.3 && ratio <= 0.7;
  }
  rep.metrics["refinement_ratios"] = ratios;
  rep.thresholds["residual"] = 1e-3;
  rep.thresholds["ratio_low"] = 0.3;
  rep.thresholds["ratio_high"] = 0.7;
  rep.check("residual", residuals.front() < 1e-3);
  rep.check("refinement_ratio", halving);
}

const std::map<std::string, std::function<void(Context&, Report&)>>& registry() {
  static const std::map<std::string, std::function<void(Context&, Report&)>> table{
      {"chernoff", run_chernoff},         {"evolsys", run_evolsys},
      {"branching", run_branching},       {"degree", run_degree},
      {"averaging", run_averaging},       {"continuation", run_continuation},
      {"wave-periodic", run_wave_periodic}, {"wave-energy", run_wave_energy},
  };
  return table;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) fail(ErrorKind::kConfiguration, "cannot write " + path.string());
}

std::string csv_text(const Report& rep) {
  std::ostringstream out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(rep.columns);
  for (const auto& row : rep.rows) line(row);
  return out.str();
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"chernoff", "evolsys", "branching", "degree",
                                              "averaging", "continuation", "wave-periodic", "wave-energy"};
  return names;
}

RunResult run_experiment(const std::string& experiment, const std::string& config_text, const RunOptions& options) {
  RunResult result;
  const auto start = std::chrono::steady_clock::now();
  const auto entry = registry().find(experiment);
  if (entry == registry().end()) {
    return {2, "unknown experiment '" + experiment + "'", {"configuration"}};
  }
  json cfg;
  try {
    cfg = json::parse(config_text);
  } catch (const json::parse_error& e) {
    return {2, std::string("malformed JSON config: ") + e.what(), {"configuration"}};
  }
  if (!cfg.is_object()) return {2, "config must be a JSON object", {"configuration"}};

  Report rep;
  std::optional<Context> ctx;
  json summary = json::object();
  try {
    static const std::set<std::string> known{"experiment", "model", "numeric", "region", "field", "fields", "output"};
    for (const auto& [key, value] : cfg.items()) {
      if (!known.count(key)) config_error("unknown key " + key);
    }
    if (cfg.contains("experiment") && cfg["experiment"] != experiment) {
      config_error("config is for experiment " + cfg["experiment"].dump() + ", not " + experiment);
    }
    if (cfg.contains("output")) {
      Section out(&cfg["output"], "output");
      out.text("format", "csv");
      out.finish();
    }
    ctx.emplace(Context{cfg, Section(cfg.contains("numeric") ? &cfg["numeric"] : nullptr, "numeric"), 1, false});
    const json* seed = ctx->numeric.raw("seed");
    if (seed) {
      if (!seed->is_number_unsigned()) config_error("numeric.seed must be a nonnegative integer");
      ctx->seed = seed->get<std::uint64_t>();
    }
    if (options.seed) ctx->seed = *options.seed;
    entry->second(*ctx, rep);
  } catch (const Error& e) {
    const bool config = !ctx || !ctx->running || is_config_kind(e.kind());
    if (config) return {2, e.what(), {std::string(to_string(e.kind()))}};
    summary["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
    rep.failed.push_back(std::string(to_string(e.kind())));
  }

  try {
    std::filesystem::create_directories(options.out_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    return {2, std::string("cannot create output directory: ") + e.what(), {"configuration"}};
  }
  const bool pass = rep.failed.empty();
  summary["schema"] = 1;
  summary["experiment"] = experiment;
  summary["seed"] = ctx->seed;
  summary["verdict"] = pass ? "pass" : "fail";
  summary["metrics"] = rep.metrics;
  summary["thresholds"] = rep.thresholds;
  summary["failed"] = rep.failed;
  if (options.timing) {
    summary["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  try {
    if (!summary.contains("error")) write_file(options.out_dir / (experiment + ".csv"), csv_text(rep));
    write_file(options.out_dir / (experiment + ".summary.json"), summary.dump(2) + "\n");
  } catch (const Error& e) {
    return {2, e.what(), {"configuration"}};
  }
  result.exit_code = pass ? 0 : 1;
  result.failed = rep.failed;
  if (pass) {
    result.message = experiment + ": pass";
  } else {
    std::string names;
    for (const auto& f : rep.failed) names += (names.empty() ? "" : ", ") + f;
    result.message = experiment + ": fail (" + names + ")";
    if (summary.contains("error")) result.message += ": " + summary["error"]["message"].get<std::string>();
  }
  return result;
}

RunResult run_experiment_file(const std::string& experiment, const std::filesystem::path& config_path,
                              const RunOptions& options) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) return {2, "cannot read config " + config_path.string(), {"configuration"}};
  std::ostringstream text;
  text << in.rdbuf();
  return run_experiment(experiment, text.str(), options);
}

}  // namespace evolver
