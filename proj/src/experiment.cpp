#include "chaoskit/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "chaoskit/moments.hpp"
#include "chaoskit/montecarlo.hpp"
#include "chaoskit/parallel.hpp"
#include "chaoskit/serialize.hpp"
#include "chaoskit/wiener.hpp"

namespace chaoskit {

using nlohmann::json;

namespace {

struct NamedExperiment {
  Experiment tag;
  const char* name;
};

constexpr NamedExperiment kExperiments[] = {
    {Experiment::ChaosCheck, "chaos-check"},     {Experiment::FmtVerify, "fmt-verify"},
    {Experiment::JointVerify, "joint-verify"},   {Experiment::BoundCheck, "bound-check"},
    {Experiment::Thm33Check, "thm33-check"},     {Experiment::ProductFormulaCheck, "product-formula-check"},
};

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& x : kExperiments)
    if (x.tag == e) return x.name;
  return "?";
}

Experiment experiment_from_name(const std::string& name) {
  for (const auto& x : kExperiments)
    if (name == x.name) return x.tag;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

BasisKind parse_kind(const json& j) {
  if (!j.is_object()) throw ConfigError("basis must be an object {\"kind\": ..., \"params\": [...]}");
  try {
    return BasisKind::from_name(j.at("kind").get<std::string>(), j.value("params", std::vector<double>{}));
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

Eigen::MatrixXd parse_matrix(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("target must be a non-empty square array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ConfigError("target must be square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

std::vector<int> parse_grid(const json& j) {
  auto grid = j.get<std::vector<int>>();
  if (grid.empty()) throw ConfigError("n_grid must not be empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < 1) throw ConfigError("n_grid entries must be >= 1");
    if (k > 0 && grid[k] <= grid[k - 1]) throw ConfigError("n_grid must be strictly increasing");
  }
  return grid;
}

SequenceEntry parse_sequence(const json& j) {
  if (!j.is_object()) throw ConfigError("sequence must be an object");
  const auto family = j.at("family").get<std::string>();
  const BasisKind kind = j.contains("basis") ? parse_kind(j.at("basis")) : BasisKind::hermite();
  SequenceEntry entry;
  if (family == "spread") {
    SpreadSpec s{kind, j.at("p").get<int>(), j.value("scale", 1.0)};
    if (s.p < 1) throw ConfigError("spread: p must be >= 1");
    if (!std::isfinite(s.scale) || s.scale == 0.0) throw ConfigError("spread: scale must be finite and nonzero");
    entry.spec = s;
  } else if (family == "pair_mixed") {
    PairMixedSpec s{j.at("p1").get<int>(), j.at("p2").get<int>(), j.at("rho").get<double>(), kind};
    if (s.p1 < 1 || s.p2 < 1) throw ConfigError("pair_mixed: orders must be >= 1");
    if (!(std::abs(s.rho) <= 1.0)) throw ConfigError("pair_mixed: |rho| must not exceed 1");
    entry.spec = s;
  } else {
    throw ConfigError("unknown sequence family '" + family + "'");
  }
  if (j.contains("target")) entry.target = parse_matrix(j.at("target"));
  if (j.contains("n_grid")) entry.n_grid = parse_grid(j.at("n_grid"));
  return entry;
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("tolerance '") + name + "' must be > 0");
}

}  // namespace

ExperimentConfig parse_config(const json& doc, Experiment experiment) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  try {
    if (doc.contains("experiment") && experiment_from_name(doc.at("experiment").get<std::string>()) != experiment)
      throw ConfigError("config is for experiment '" + doc.at("experiment").get<std::string>() +
                        "' but '" + experiment_name(experiment) + "' was requested");
    if (doc.contains("sequence")) cfg.sequences.push_back(parse_sequence(doc.at("sequence")));
    if (doc.contains("sequences"))
      for (const auto& s : doc.at("sequences")) cfg.sequences.push_back(parse_sequence(s));
    if (doc.contains("n_grid")) cfg.n_grid = parse_grid(doc.at("n_grid"));
    cfg.seed = doc.value("seed", std::uint64_t{0});
    cfg.n_samples = doc.value("n_samples", std::size_t{100000});
    if (doc.contains("out")) cfg.out = doc.at("out").get<std::string>();
    if (doc.contains("tolerances")) {
      const auto& t = doc.at("tolerances");
      cfg.tolerances.abs = t.value("abs", cfg.tolerances.abs);
      cfg.tolerances.chaos = t.value("chaos", cfg.tolerances.chaos);
      cfg.tolerances.thm33 = t.value("thm33", cfg.tolerances.thm33);
      cfg.tolerances.product = t.value("product", cfg.tolerances.product);
      cfg.tolerances.sigma = t.value("sigma", cfg.tolerances.sigma);
    }
    cfg.expect_chaotic = doc.value("expect_chaotic", true);
    if (doc.contains("final_threshold")) cfg.final_threshold = doc.at("final_threshold").get<double>();
    cfg.instances = doc.value("instances", cfg.instances);
    if (doc.contains("families"))
      for (const auto& f : doc.at("families")) cfg.families.push_back(parse_kind(f));
    cfg.max_order = doc.value("max_order", cfg.max_order);
    cfg.max_dim = doc.value("max_dim", cfg.max_dim);
    if (doc.contains("t_grid")) cfg.t_grid = doc.at("t_grid").get<std::vector<double>>();
    cfg.t_max_norm = doc.value("t_max_norm", cfg.t_max_norm);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  require_positive(cfg.tolerances.abs, "abs");
  require_positive(cfg.tolerances.chaos, "chaos");
  require_positive(cfg.tolerances.thm33, "thm33");
  require_positive(cfg.tolerances.product, "product");
  require_positive(cfg.tolerances.sigma, "sigma");

  switch (experiment) {
    case Experiment::ChaosCheck:
    case Experiment::FmtVerify:
    case Experiment::JointVerify:
    case Experiment::BoundCheck:
      if (cfg.sequences.empty()) throw ConfigError("experiment needs a 'sequence' or 'sequences' entry");
      for (const auto& s : cfg.sequences)
        if (!s.n_grid && cfg.n_grid.empty()) throw ConfigError("n_grid is required");
      break;
    case Experiment::Thm33Check:
    case Experiment::ProductFormulaCheck:
      if (cfg.instances < 1) throw ConfigError("instances must be >= 1");
      break;
  }
  if (experiment == Experiment::FmtVerify)
    for (const auto& s : cfg.sequences)
      if (!std::holds_alternative<SpreadSpec>(s.spec)) throw ConfigError("fmt-verify needs spread sequences");
  if (experiment == Experiment::BoundCheck) {
    if (cfg.n_samples < 2) throw ConfigError("n_samples must be >= 2");
    if (cfg.t_grid.empty()) throw ConfigError("t_grid must not be empty");
    require_positive(cfg.t_max_norm, "t_max_norm");
  }
  if (experiment == Experiment::Thm33Check && cfg.families.empty())
    cfg.families = {BasisKind::hermite(), BasisKind::laguerre(0.0), BasisKind::jacobi(2.0, 2.0)};
  if (experiment == Experiment::ProductFormulaCheck && (cfg.max_order < 1 || cfg.max_dim < 1))
    throw ConfigError("max_order and max_dim must be >= 1");
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, Experiment experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, experiment);
}

Eigen::MatrixXd default_target(const SequenceSpec& spec) {
  if (const auto* s = std::get_if<SpreadSpec>(&spec)) return Eigen::MatrixXd::Constant(1, 1, s->scale * s->scale);
  const auto& pm = std::get<PairMixedSpec>(spec);
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(2, 2);
  if (pm.p1 == pm.p2) c(0, 1) = c(1, 0) = pm.rho;
  return c;
}

// ---------------------------------------------------------------------------
// Output

std::string RunResult::csv() const {
  std::ostringstream os;
  for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
    os << '\n';
  }
  return os.str();
}

void write_outputs(const RunResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "report.csv", std::ios::binary);
  csv << result.csv();
  std::ofstream js(out_dir / "report.json", std::ios::binary);
  js << result.report.dump(2) << '\n';
  if (!csv || !js) throw Error("failed to write reports to " + out_dir.string());
}

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json fmt_json(const FmtReport& r) {
  json j{{"m2", r.m2}, {"m4", r.m4}, {"var_gamma", r.var_gamma}, {"chaotic", r.chaotic},
         {"mean", r.mean}, {"centered", r.centered}};
  j["eigenvalue"] = r.eigenvalue ? json(*r.eigenvalue) : json(nullptr);
  return j;
}

json joint_json(const JointReport& r) {
  json comps = json::array();
  for (const auto& c : r.components) comps.push_back(fmt_json(c));
  return json{{"components", comps},         {"eigenvalues", r.eigenvalues},
              {"cov", matrix_json(r.cov)},   {"mixed22", matrix_json(r.mixed22)},
              {"isserlis", matrix_json(r.isserlis)}, {"r_matrix", matrix_json(r.r_matrix)},
              {"var_gamma", matrix_json(r.var_gamma)}, {"prop31", r.prop31},
              {"chaotic_vector", r.chaotic_vector}};
}

json spec_json(const SequenceSpec& spec) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SpreadSpec>) {
          return json{{"family", "spread"}, {"basis", {{"kind", s.kind.family_name()}, {"params", s.kind.params()}}},
                      {"p", s.p}, {"scale", s.scale}};
        } else {
          return json{{"family", "pair_mixed"},
                      {"basis", {{"kind", s.kind.family_name()}, {"params", s.kind.params()}}},
                      {"p1", s.p1}, {"p2", s.p2}, {"rho", s.rho}};
        }
      },
      spec);
}

std::string spec_label(const SequenceSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        std::ostringstream os;
        if constexpr (std::is_same_v<T, SpreadSpec>) {
          os << "spread(" << s.kind.label() << ";p=" << s.p;
          if (s.scale != 1.0) os << ";scale=" << format_double(s.scale);
          os << ')';
        } else {
          os << "pair_mixed(" << s.kind.label() << ";p1=" << s.p1 << ";p2=" << s.p2 << ";rho=" << format_double(s.rho)
             << ')';
        }
        return os.str();
      },
      spec);
}

const std::vector<int>& grid_of(const ExperimentConfig& cfg, const SequenceEntry& e) {
  return e.n_grid ? *e.n_grid : cfg.n_grid;
}

std::mt19937_64 instance_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto eng = instance_engine(seed, stream, index);
  return eng();
}

json base_report(const ExperimentConfig& cfg) {
  json seqs = json::array();
  for (const auto& s : cfg.sequences) {
    json j = spec_json(s.spec);
    if (s.target) j["target"] = matrix_json(*s.target);
    if (s.n_grid) j["n_grid"] = *s.n_grid;
    seqs.push_back(std::move(j));
  }
  return json{{"experiment", experiment_name(cfg.experiment)},
              {"seed", cfg.seed},
              {"config",
               {{"sequences", seqs},
                {"n_grid", cfg.n_grid},
                {"n_samples", cfg.n_samples},
                {"tolerances",
                 {{"abs", cfg.tolerances.abs},
                  {"chaos", cfg.tolerances.chaos},
                  {"thm33", cfg.tolerances.thm33},
                  {"product", cfg.tolerances.product},
                  {"sigma", cfg.tolerances.sigma}}}}}};
}

void finish(RunResult& result) {
  result.exit_code = result.failures.empty() ? 0 : 1;
  result.report["pass"] = result.failures.empty();
  result.report["failures"] = result.failures;
}

// ---------------------------------------------------------------------------
// chaos-check

RunResult run_chaos_check(const ExperimentConfig& cfg) {
  RunResult result;
  result.columns = {"sequence", "n", "i", "j", "lambda_i", "lambda_j", "bound", "product_norm",
                    "max_offending_eigenvalue", "max_offending_relative", "chaotic"};
  result.report = base_report(cfg);
  result.report["expect_chaotic"] = cfg.expect_chaotic;
  json entries = json::array();

  for (const auto& entry : cfg.sequences) {
    const auto& grid = grid_of(cfg, entry);
    struct Item {
      std::vector<double> lambdas;
      std::vector<std::tuple<std::size_t, std::size_t, ChaosCheck>> pairs;
    };
    std::vector<Item> items(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
      const auto fs = make_sequence(entry.spec, grid[k]);
      for (const auto& f : fs) {
        const auto lam = eigenfunction_eigenvalue(f, cfg.tolerances.chaos);
        items[k].lambdas.push_back(lam.value_or(std::nan("")));
      }
      for (std::size_t i = 0; i < fs.size(); ++i)
        for (std::size_t j = i; j < fs.size(); ++j)
          items[k].pairs.emplace_back(i, j, is_jointly_chaotic(fs[i], fs[j], cfg.tolerances.chaos));
    });
    const std::string label = spec_label(entry.spec);
    json per_n = json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      json pj = json::array();
      for (const auto& [i, j, check] : items[k].pairs) {
        double worst_lam = 0.0, worst_rel = 0.0;
        json off = json::array();
        for (const auto& o : check.offending) {
          off.push_back({{"eigenvalue", o.eigenvalue}, {"mass", o.mass}, {"relative", o.relative}});
          if (o.relative > worst_rel) {
            worst_rel = o.relative;
            worst_lam = o.eigenvalue;
          }
        }
        result.rows.push_back({label, fmt(grid[k]), fmt(i), fmt(j), fmt(items[k].lambdas[i]),
                               fmt(items[k].lambdas[j]), fmt(check.bound), fmt(check.product_norm), fmt(worst_lam),
                               fmt(worst_rel), fmt(check.chaotic)});
        pj.push_back({{"i", i}, {"j", j}, {"chaotic", check.chaotic}, {"bound", check.bound},
                      {"product_norm", check.product_norm}, {"offending", off}});
        if (check.chaotic != cfg.expect_chaotic)
          result.failures.push_back(label + " n=" + std::to_string(grid[k]) + " pair (" + std::to_string(i) + "," +
                                    std::to_string(j) + "): chaotic=" + fmt(check.chaotic) +
                                    ", expected " + fmt(cfg.expect_chaotic));
      }
      per_n.push_back({{"n", grid[k]}, {"eigenvalues", items[k].lambdas}, {"pairs", pj}});
    }
    entries.push_back({{"sequence", spec_json(entry.spec)}, {"results", per_n}});
  }
  result.report["results"] = entries;
  finish(result);
  return result;
}

// ---------------------------------------------------------------------------
// fmt-verify

RunResult run_fmt_verify(const ExperimentConfig& cfg) {
  RunResult result;
  result.columns = {"sequence", "n", "lambda", "m2", "m4", "m4_expected", "var_gamma", "var_gamma_expected",
                    "chaotic", "pass"};
  result.report = base_report(cfg);
  json entries = json::array();
  const double tol = cfg.tolerances.abs;

  for (const auto& entry : cfg.sequences) {
    const auto& spec = std::get<SpreadSpec>(entry.spec);
    const auto& grid = grid_of(cfg, entry);
    // A single normalized eigenfunction; independence across coordinates gives
    // m4(F_n) − 3 = (m4(G) − 3)/n and Var Γ(F_n) = Var Γ(G)/n.
    const auto g = spread(spec.kind, spec.p, 1);
    const double m4_g = moment4(g);
    const double vg_g = var_gamma(g, g);
    const double s2 = spec.scale * spec.scale;

    std::vector<FmtReport> reports(grid.size());
    parallel_for(grid.size(), [&](std::size_t k) {
      reports[k] = fmt_report(make_sequence(entry.spec, grid[k])[0]);
    });

    const std::string label = spec_label(entry.spec);
    json per_n = json::array();
    double m4_sup = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto& r = reports[k];
      const double n = grid[k];
      const double m4_exp = s2 * s2 * (3.0 + (m4_g - 3.0) / n);
      const double vg_exp = s2 * s2 * vg_g / n;
      const bool ok = std::abs(r.m4 - m4_exp) <= tol && std::abs(r.var_gamma - vg_exp) <= tol &&
                      std::abs(r.m2 - s2) <= tol;
      m4_sup = std::max(m4_sup, r.m4);
      result.rows.push_back({label, fmt(grid[k]), fmt(r.eigenvalue.value_or(std::nan(""))), fmt(r.m2), fmt(r.m4),
                             fmt(m4_exp), fmt(r.var_gamma), fmt(vg_exp), fmt(r.chaotic), fmt(ok)});
      json j = fmt_json(r);
      j["n"] = grid[k];
      j["m4_expected"] = m4_exp;
      j["var_gamma_expected"] = vg_exp;
      j["pass"] = ok;
      per_n.push_back(std::move(j));
      if (!ok) {
        std::ostringstream os;
        os << label << " n=" << grid[k] << ": m4=" << format_double(r.m4) << " (expected " << format_double(m4_exp)
           << "), var_gamma=" << format_double(r.var_gamma) << " (expected " << format_double(vg_exp) << ")";
        result.failures.push_back(os.str());
      }
    }
    // Bounded fourth moments along the sequence (uniform-integrability diagnostic).
    entries.push_back({{"sequence", spec_json(entry.spec)},
                       {"single_m4", m4_g},
                       {"single_var_gamma", vg_g},
                       {"m4_sup", m4_sup},
                       {"results", per_n}});
  }
  result.report["results"] = entries;
  finish(result);
  return result;
}

// ---------------------------------------------------------------------------
// joint-verify

RunResult run_joint_verify(const ExperimentConfig& cfg) {
  RunResult result;
  result.columns = {"sequence", "n", "i", "j", "lambda_i", "lambda_j", "cov", "mixed22", "isserlis",
                    "r_ij", "var_gamma_ij", "prop31"};
  result.report = base_report(cfg);
  if (cfg.final_threshold) result.report["final_threshold"] = *cfg.final_threshold;
  json entries = json::array();
  const double tol = cfg.tolerances.abs;

  for (const auto& entry : cfg.sequences) {
    const auto& grid = grid_of(cfg, entry);
    const GaussianTarget target(entry.target ? *entry.target : default_target(entry.spec));
    const std::string label = spec_label(entry.spec);

    const auto* pm = std::get_if<PairMixedSpec>(&entry.spec);
    double m4_g = 0.0;
    if (pm && pm->p1 == pm->p2) {
      const auto g = spread(pm->kind, pm->p1, 1);
      m4_g = moment4(g);
    }

    std::vector<JointReport> reports(grid.size());
    std::vector<double> expansion_residual(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t k) {
      const auto fs = make_sequence(entry.spec, grid[k]);
      reports[k] = joint_report(fs, target);
      if (pm && pm->p1 == pm->p2) {
        // mixed22 = C_ii C_jj + 2ρ_n² + |ρ_n| (m4(G) − 3)/n off the diagonal, 3 + (m4(G) − 3)/n on it.
        const auto& r = reports[k];
        const double n = grid[k];
        double worst = 0.0;
        for (Eigen::Index i = 0; i < 2; ++i) {
          for (Eigen::Index j = 0; j < 2; ++j) {
            const double rho = r.cov(i, j);
            const double expected =
                r.cov(i, i) * r.cov(j, j) + 2.0 * rho * rho + std::abs(rho) * (m4_g - 3.0) / n;
            worst = std::max(worst, std::abs(r.mixed22(i, j) - expected));
          }
        }
        expansion_residual[k] = worst;
      }
    });

    json per_n = json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const auto& r = reports[k];
      const auto d = r.cov.rows();
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          result.rows.push_back({label, fmt(grid[k]), fmt(static_cast<int>(i)), fmt(static_cast<int>(j)),
                                 fmt(r.eigenvalues[static_cast<std::size_t>(i)]),
                                 fmt(r.eigenvalues[static_cast<std::size_t>(j)]), fmt(r.cov(i, j)),
                                 fmt(r.mixed22(i, j)), fmt(r.isserlis(i, j)), fmt(r.r_matrix(i, j)),
                                 fmt(r.var_gamma(i, j)), fmt(r.prop31)});
      json j = joint_json(r);
      j["n"] = grid[k];
      if (pm && pm->p1 == pm->p2) j["expansion_residual"] = expansion_residual[k];
      per_n.push_back(std::move(j));
    }

    // Gates: non-increasing |r_ij|, |mixed22 − isserlis| and prop31 along the grid;
    // exact expansion of mixed22; optional final threshold on the off-diagonal entries.
    auto name_at = [&](std::size_t k) { return label + " n=" + std::to_string(grid[k]); };
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const auto& prev = reports[k - 1];
      const auto& cur = reports[k];
      if (cur.prop31 > prev.prop31 + tol)
        result.failures.push_back(name_at(k) + ": prop31 increased from " + format_double(prev.prop31) + " to " +
                                  format_double(cur.prop31));
      for (Eigen::Index i = 0; i < cur.cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < cur.cov.cols(); ++j) {
          const std::string ij = " (" + std::to_string(i) + "," + std::to_string(j) + ")";
          if (std::abs(cur.r_matrix(i, j)) > std::abs(prev.r_matrix(i, j)) + tol)
            result.failures.push_back(name_at(k) + ij + ": |r_ij| increased");
          if (std::abs(cur.mixed22(i, j) - cur.isserlis(i, j)) >
              std::abs(prev.mixed22(i, j) - prev.isserlis(i, j)) + tol)
            result.failures.push_back(name_at(k) + ij + ": |mixed22 - isserlis| increased");
        }
      }
    }
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (expansion_residual[k] > tol)
        result.failures.push_back(name_at(k) + ": mixed22 deviates from its exact expansion by " +
                                  format_double(expansion_residual[k]));
    if (cfg.final_threshold && !grid.empty()) {
      const std::size_t k = grid.size() - 1;
      const auto& r = reports[k];
      const double th = *cfg.final_threshold;
      if (r.prop31 >= th)
        result.failures.push_back(name_at(k) + ": prop31 " + format_double(r.prop31) + " not below " +
                                  format_double(th));
      for (Eigen::Index i = 0; i < r.cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.cov.cols(); ++j) {
          if (i == j) continue;
          const std::string ij = " (" + std::to_string(i) + "," + std::to_string(j) + ")";
          if (std::abs(r.r_matrix(i, j)) >= th)
            result.failures.push_back(name_at(k) + ij + ": |r_ij| " + format_double(std::abs(r.r_matrix(i, j))) +
                                      " not below " + format_double(th));
          const double gap = std::abs(r.mixed22(i, j) - r.isserlis(i, j));
          if (gap >= th)
            result.failures.push_back(name_at(k) + ij + ": |mixed22 - isserlis| " + format_double(gap) +
                                      " not below " + format_double(th));
        }
      }
    }
    entries.push_back({{"sequence", spec_json(entry.spec)}, {"target", matrix_json(target.cov())},
                       {"results", per_n}});
  }
  result.report["results"] = entries;
  finish(result);
  return result;
}

// ---------------------------------------------------------------------------
// bound-check

std::vector<std::vector<double>> t_points(const std::vector<double>& axis, std::size_t d, double max_norm) {
  std::vector<std::vector<double>> out;
  std::vector<std::size_t> pos(d, 0);
  for (;;) {
    std::vector<double> t(d);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      t[i] = axis[pos[i]];
      norm2 += t[i] * t[i];
    }
    if (std::sqrt(norm2) <= max_norm) out.push_back(std::move(t));
    std::size_t i = 0;
    for (; i < d; ++i) {
      if (++pos[i] < axis.size()) break;
      pos[i] = 0;
    }
    if (i == d) break;
  }
  return out;
}

RunResult run_bound_check(const ExperimentConfig& cfg) {
  RunResult result;
  result.columns = {"sequence", "n", "t", "t_norm", "gap", "std_error", "prop31", "allowed", "pass"};
  result.report = base_report(cfg);
  result.report["t_grid"] = cfg.t_grid;
  result.report["t_max_norm"] = cfg.t_max_norm;
  json entries = json::array();

  for (std::size_t e = 0; e < cfg.sequences.size(); ++e) {
    const auto& entry = cfg.sequences[e];
    const auto& grid = grid_of(cfg, entry);
    const GaussianTarget target(entry.target ? *entry.target : default_target(entry.spec));
    const std::string label = spec_label(entry.spec);
    json per_n = json::array();
    for (const int n : grid) {
      const auto fs = make_sequence(entry.spec, n);
      if (fs.size() != target.dim()) throw ConfigError(label + ": target dimension does not match the vector");
      const double bound = prop31_bound(fs, target);
      const auto batch = sample(fs[0].space(), cfg.n_samples, derived_seed(cfg.seed, e, static_cast<std::uint64_t>(n)));
      std::vector<std::vector<double>> values;
      for (const auto& f : fs) values.push_back(evaluate(f, batch));

      json pts = json::array();
      for (const auto& t : t_points(cfg.t_grid, fs.size(), cfg.t_max_norm)) {
        double norm2 = 0.0;
        std::string t_str;
        for (std::size_t i = 0; i < t.size(); ++i) {
          norm2 += t[i] * t[i];
          t_str += (i ? ";" : "") + format_double(t[i]);
        }
        const auto cf = cf_gap_from_values(values, target, t);
        const double allowed = norm2 * bound + cfg.tolerances.sigma * cf.std_error;
        const bool ok = cf.gap <= allowed;
        result.rows.push_back({label, fmt(n), t_str, fmt(std::sqrt(norm2)), fmt(cf.gap), fmt(cf.std_error),
                               fmt(bound), fmt(allowed), fmt(ok)});
        pts.push_back({{"t", t}, {"gap", cf.gap}, {"std_error", cf.std_error}, {"allowed", allowed}, {"pass", ok}});
        if (!ok)
          result.failures.push_back(label + " n=" + std::to_string(n) + " t=" + t_str + ": gap " +
                                    format_double(cf.gap) + " exceeds " + format_double(allowed));
      }
      per_n.push_back({{"n", n}, {"prop31", bound}, {"points", pts}});
    }
    entries.push_back({{"sequence", spec_json(entry.spec)}, {"target", matrix_json(target.cov())},
                       {"results", per_n}});
  }
  result.report["results"] = entries;
  finish(result);
  return result;
}

// ---------------------------------------------------------------------------
// thm33-check

constexpr int kThm33MaxDegree = 4;

RunResult run_thm33_check(const ExperimentConfig& cfg) {
  RunResult result;
  result.columns = {"instance", "family", "coords", "terms", "eta", "lambda_max", "lhs", "rhs", "pass"};
  result.report = base_report(cfg);
  json fams = json::array();
  for (const auto& k : cfg.families) fams.push_back(k.label());
  result.report["families"] = fams;
  result.report["instances"] = cfg.instances;

  // One space per (family, coordinate count) so the linearization caches are shared.
  std::vector<std::vector<SpacePtr>> spaces;
  for (const auto& kind : cfg.families) {
    auto basis = make_basis(kind, kThm33MaxDegree);
    std::vector<SpacePtr> per_dim;
    for (std::size_t d = 1; d <= 3; ++d)
      per_dim.push_back(std::make_shared<const ProductSpace>(std::vector<BasisPtr>(d, basis)));
    spaces.push_back(std::move(per_dim));
  }

  struct Row {
    std::size_t family;
    std::size_t coords;
    std::size_t terms;
    SpectralInequality sides;
    double eta;
  };
  const auto count = static_cast<std::size_t>(cfg.instances);
  std::vector<Row> rows(count);
  parallel_for(count, [&](std::size_t k) {
    auto eng = instance_engine(cfg.seed, 33, k);
    std::uniform_int_distribution<int> deg(0, kThm33MaxDegree);
    std::normal_distribution<double> coef(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t family = k % cfg.families.size();
    const std::size_t coords = 1 + static_cast<std::size_t>(eng() % 3);
    const auto& space = spaces[family][coords - 1];
    SpectralFn f(space);
    const std::size_t terms = 1 + static_cast<std::size_t>(eng() % 8);
    for (std::size_t t = 0; t < terms; ++t) {
      MultiIndex alpha = space->zero_index();
      for (auto& a : alpha.degrees) a = deg(eng);
      f.add(alpha, coef(eng));
    }
    const double top = f.max_eigenvalue();
    // Every fifth instance sits on the boundary η = λ_max.
    const double eta = (k % 5 == 0) ? top : top + unit(eng) * (1.0 + top);
    rows[k] = {family, coords, f.size(), thm33_sides(f, eta), eta};
  });

  std::size_t violations = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const auto& r = rows[k];
    const bool ok = r.sides.precondition_ok && r.sides.holds(cfg.tolerances.thm33);
    result.rows.push_back({fmt(k), cfg.families[r.family].label(), fmt(r.coords), fmt(r.terms), fmt(r.eta),
                           fmt(r.sides.top_eigenvalue), fmt(r.sides.lhs), fmt(r.sides.rhs), fmt(ok)});
    if (!ok) {
      ++violations;
      result.failures.push_back("instance " + std::to_string(k) + ": lhs " + format_double(r.sides.lhs) +
                                " > rhs " + format_double(r.sides.rhs));
    }
  }
  result.report["violations"] = violations;
  finish(result);
  return result;
}

// ---------------------------------------------------------------------------
// product-formula-check

RunResult run_product_formula_check(const ExperimentConfig& cfg) {
  RunResult result;
  result.columns = {"instance", "p", "m", "lhs", "rhs", "abs_err", "pass"};
  result.report = base_report(cfg);
  result.report["instances"] = cfg.instances;
  result.report["max_order"] = cfg.max_order;
  result.report["max_dim"] = cfg.max_dim;

  std::vector<std::vector<SpacePtr>> spaces(static_cast<std::size_t>(cfg.max_order));
  for (int p = 1; p <= cfg.max_order; ++p)
    for (int m = 1; m <= cfg.max_dim; ++m) spaces[static_cast<std::size_t>(p - 1)].push_back(wiener_space(m, 2 * p));

  struct Row {
    int p;
    int m;
    ProductFormulaCheck check;
  };
  const auto count = static_cast<std::size_t>(cfg.instances);
  std::vector<Row> rows(count);
  parallel_for(count, [&](std::size_t k) {
    auto eng = instance_engine(cfg.seed, 6, k);
    const int p = 1 + static_cast<int>(eng() % static_cast<std::uint64_t>(cfg.max_order));
    const int m = 1 + static_cast<int>(eng() % static_cast<std::uint64_t>(cfg.max_dim));
    std::uniform_int_distribution<int> num(-4, 4);
    std::uniform_int_distribution<int> den(1, 4);
    auto random_kernel = [&] {
      SymTensor t(m, p);
      RawTensor shape(m, p);
      for (std::size_t flat = 0; flat < shape.size(); ++flat) {
        auto idx = shape.unflatten(flat);
        if (!std::is_sorted(idx.begin(), idx.end())) continue;
        t.set(idx, static_cast<double>(num(eng)) / den(eng));
      }
      return t;
    };
    const auto f = random_kernel();
    const auto g = random_kernel();
    rows[k] = {p, m, product_formula_check(f, g, spaces[static_cast<std::size_t>(p - 1)][static_cast<std::size_t>(m - 1)])};
  });

  for (std::size_t k = 0; k < count; ++k) {
    const auto& r = rows[k];
    const bool ok = r.check.agrees(cfg.tolerances.product);
    result.rows.push_back({fmt(k), fmt(r.p), fmt(r.m), fmt(r.check.lhs), fmt(r.check.rhs),
                           fmt(std::abs(r.check.lhs - r.check.rhs)), fmt(ok)});
    if (!ok)
      result.failures.push_back("instance " + std::to_string(k) + ": lhs " + format_double(r.check.lhs) +
                                " != rhs " + format_double(r.check.rhs));
  }
  finish(result);
  return result;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::ChaosCheck:
      return run_chaos_check(cfg);
    case Experiment::FmtVerify:
      return run_fmt_verify(cfg);
    case Experiment::JointVerify:
      return run_joint_verify(cfg);
    case Experiment::BoundCheck:
      return run_bound_check(cfg);
    case Experiment::Thm33Check:
      return run_thm33_check(cfg);
    case Experiment::ProductFormulaCheck:
      return run_product_formula_check(cfg);
  }
  throw ConfigError("unhandled experiment");
}

}  // namespace chaoskit
