#pragma once

// Command-line front end for the secperc library. Everything lives in this
// header so the tests can drive the CLI in-process.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "secperc/secperc.hpp"

namespace secperc::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInvalidConfig = 2, kNumericalFailure = 3 };

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  std::string bound_kind = "analytic";  // bound: analytic | lattice
  double lambda = 1.0;
  int dim = 2;
  bool dim_set = false;
  std::vector<double> window;  // side lengths; empty selects 20 per axis
  std::optional<double> r, s;
  std::string variant = "B";
  std::string bound_side = "lower";
  std::string mode = "U";
  std::string side = "out";
  bool dry = false;
  std::size_t trials = 100;
  std::optional<std::uint64_t> seed;
  bool seed_generated = false;
  std::optional<double> margin;
  double tol = kDefaultBoundTol;
  std::size_t generations = 100;
  std::uint64_t cap = kDefaultProgenyCap;
  double step = 0.0;
  int table = 1;
  double scale = 0.1;
  std::string out;
  std::string format = "json";
  unsigned threads = default_thread_count();
  bool keep_trials = false;
};

inline std::vector<double> parse_window(const std::string& text) {
  std::vector<double> sides;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, 'x')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != part.size() || part.empty() || !(v > 0.0) || !std::isfinite(v))
      throw ConfigError("invalid --window '" + text + "' (expected positive sides like 40x40)");
    sides.push_back(v);
  }
  if (sides.empty()) throw ConfigError("invalid --window '" + text + "'");
  return sides;
}

inline std::string format_window(const std::vector<double>& sides) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < sides.size(); ++i) os << (i ? "x" : "") << sides[i];
  return os.str();
}

// ---- config file ----

namespace detail {

template <class T>
T json_get(const nlohmann::json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace detail

// Keys mirror the long flag names, with '-' replaced by '_'.
inline void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  using detail::json_get;
  for (const auto& [key, v] : j.items()) {
    if (key == "lambda") cfg.lambda = json_get<double>(v, key);
    else if (key == "dim") cfg.dim = json_get<int>(v, key), cfg.dim_set = true;
    else if (key == "window") cfg.window = v.is_string() ? parse_window(v.get<std::string>()) : json_get<std::vector<double>>(v, key);
    else if (key == "r") cfg.r = json_get<double>(v, key);
    else if (key == "s") cfg.s = json_get<double>(v, key);
    else if (key == "variant") cfg.variant = json_get<std::string>(v, key);
    else if (key == "bound") cfg.bound_side = json_get<std::string>(v, key);
    else if (key == "mode") cfg.mode = json_get<std::string>(v, key);
    else if (key == "side") cfg.side = json_get<std::string>(v, key);
    else if (key == "dry") cfg.dry = json_get<bool>(v, key);
    else if (key == "trials") cfg.trials = json_get<std::size_t>(v, key);
    else if (key == "seed") cfg.seed = json_get<std::uint64_t>(v, key);
    else if (key == "margin") cfg.margin = json_get<double>(v, key);
    else if (key == "tol") cfg.tol = json_get<double>(v, key);
    else if (key == "generations") cfg.generations = json_get<std::size_t>(v, key);
    else if (key == "cap") cfg.cap = json_get<std::uint64_t>(v, key);
    else if (key == "step") cfg.step = json_get<double>(v, key);
    else if (key == "table") cfg.table = json_get<int>(v, key);
    else if (key == "scale") cfg.scale = json_get<double>(v, key);
    else if (key == "out") cfg.out = json_get<std::string>(v, key);
    else if (key == "format") cfg.format = json_get<std::string>(v, key);
    else if (key == "threads") cfg.threads = json_get<unsigned>(v, key);
    else if (key == "keep_trials") cfg.keep_trials = json_get<bool>(v, key);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

// ---- resolution and validation ----

inline bool is_randomized(const RunConfig& cfg) {
  const auto& c = cfg.command;
  return c == "sample" || c == "graph" || c == "components" || c == "degrees" || c == "branching" || c == "mc" ||
         (c == "reproduce" && cfg.table == 2);
}

inline void resolve_seed(RunConfig& cfg) {
  if (cfg.seed || !is_randomized(cfg)) return;
  if (const char* env = std::getenv("SECPERC_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      cfg.seed = v;
      return;
    } catch (const std::exception&) {
      throw ConfigError(std::string("SECPERC_SEED is not an unsigned integer: ") + env);
    }
  }
  std::random_device rd;
  cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  cfg.seed_generated = true;
}

inline void validate(RunConfig& cfg) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(std::isfinite(cfg.lambda) && cfg.lambda >= 0.0, "--lambda must be finite and >= 0");
  if (!cfg.window.empty()) {
    if (!cfg.dim_set) cfg.dim = static_cast<int>(cfg.window.size());
    require(cfg.dim == static_cast<int>(cfg.window.size()), "--window has a different number of sides than --dim");
  }
  require(cfg.dim >= 1 && cfg.dim <= kMaxGridDim, "--dim must lie in [1, 8]");
  if (cfg.window.empty()) cfg.window.assign(static_cast<std::size_t>(cfg.dim), 20.0);
  require(cfg.variant == "U" || cfg.variant == "O" || cfg.variant == "B", "--variant must be U, O or B");
  require(cfg.bound_side == "lower" || cfg.bound_side == "upper", "--bound must be lower or upper");
  require(cfg.side == "in" || cfg.side == "out", "--side must be in or out");
  require(cfg.format == "csv" || cfg.format == "json", "--format must be csv or json");
  require(cfg.bound_kind == "analytic" || cfg.bound_kind == "lattice", "bound kind must be analytic or lattice");
  require(cfg.tol > 0.0, "--tol must be > 0");
  require(cfg.trials > 0, "--trials must be positive");
  require(cfg.generations > 0 && cfg.cap > 0, "--generations and --cap must be positive");
  require(cfg.step >= 0.0, "--step must be >= 0");
  require(cfg.table == 1 || cfg.table == 2, "--table must be 1 or 2");
  require(cfg.scale > 0.0 && cfg.scale <= 1.0, "--scale must lie in (0, 1]");
  require(cfg.threads > 0, "--threads must be positive");
  if (cfg.r) require(*cfg.r > 0.0, "--r must be > 0");
  if (cfg.s) require(*cfg.s >= 0.0, "--s must be >= 0");
  try {
    percolation_mode_from_string(cfg.mode);
  } catch (const std::invalid_argument&) {
    throw ConfigError("--mode must be one of U, O, I, S, B");
  }
  const bool needs_positive_lambda = cfg.command == "branching" || cfg.command == "mc" ||
                                     (cfg.command == "bound" && cfg.bound_kind == "analytic");
  if (needs_positive_lambda) require(cfg.lambda > 0.0, "--lambda must be > 0 for " + cfg.command);
  if (cfg.command == "mc" || cfg.command == "reproduce") require(cfg.dim == 2, cfg.command + " is two-dimensional");
}

// Resolved configuration as written into output headers. The thread count is
// left out because results do not depend on it.
inline nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json j = {{"command", cfg.command}};
  const auto& c = cfg.command;
  auto put_seed = [&] {
    j["seed"] = *cfg.seed;
    if (cfg.seed_generated) j["seed_generated"] = true;
  };
  if (c == "sample" || c == "graph" || c == "components" || c == "degrees") {
    j["lambda"] = cfg.dry ? 0.0 : cfg.lambda;
    j["dim"] = cfg.dim;
    j["window"] = format_window(cfg.window);
    put_seed();
  }
  if (c == "components") {
    j["mode"] = cfg.mode;
    j["margin"] = cfg.margin ? *cfg.margin : default_margin(Window::from_sides(cfg.window));
  }
  if (c == "degrees") {
    j["side"] = cfg.side;
    j["dry"] = cfg.dry;
    j["margin"] = cfg.margin ? *cfg.margin : default_margin(Window::from_sides(cfg.window));
  }
  if (c == "branching") {
    j["lambda"] = cfg.lambda;
    j["trials"] = cfg.trials;
    j["generations"] = cfg.generations;
    j["cap"] = cfg.cap;
    put_seed();
  }
  if (c == "bound") {
    j["kind"] = cfg.bound_kind;
    if (cfg.bound_kind == "analytic") {
      j["variant"] = cfg.variant;
      j["lambda"] = cfg.lambda;
      j["tol"] = cfg.tol;
      if (cfg.r) j["r"] = *cfg.r;
      if (cfg.s) j["s"] = *cfg.s;
    }
  }
  if (c == "mc") {
    j["variant"] = cfg.variant;
    j["bound"] = cfg.bound_side;
    j["lambda"] = cfg.lambda;
    j["r"] = cfg.r.value_or(10.0);
    j["s"] = cfg.s.value_or(0.0);
    j["trials"] = cfg.trials;
    j["step"] = cfg.step;
    put_seed();
  }
  if (c == "reproduce") {
    j["table"] = cfg.table;
    if (cfg.table == 2) {
      j["scale"] = cfg.scale;
      put_seed();
    } else {
      j["tol"] = cfg.tol;
    }
  }
  j["format"] = cfg.format;
  return j;
}

// ---- reproduction ----

struct Table1Result {
  Table1Row published;
  BoundReport computed;
  bool pass = false;
};

inline constexpr double kTable1Tolerance = 0.002;

inline std::vector<Table1Result> reproduce_table1(double tol = kDefaultBoundTol) {
  std::vector<Table1Result> out;
  OptimizeOptions opt;
  opt.tol = tol;
  for (const auto& row : table1_reference()) {
    Table1Result res{row, optimize_bound(row.variant, row.lambda, opt), false};
    const auto& c = res.computed;
    res.pass = std::abs(c.p - row.p) <= kTable1Tolerance && c.p <= 1.0 - kGoodEventThreshold && c.r >= 1.60 &&
               c.r <= 1.72 && c.s >= 2.9 && c.s <= 3.4;
    out.push_back(res);
  }
  return out;
}

struct Table2Result {
  Table2Row published;
  TrialBatch batch;
  double band_lo = 0.0, band_hi = 0.0;
  bool pass = false;
};

inline double published_ratio(const Table2Row& row) {
  return static_cast<double>(row.successes) / static_cast<double>(row.trials);
}

// Row i draws its trials from master seed (seed, i) mixed through SplitMix64.
inline std::uint64_t row_master(std::uint64_t seed, std::size_t row) {
  std::uint64_t st = seed ^ (0x632BE59BD9B4E019ULL * (row + 1));
  return splitmix64(st);
}

// At scale < 1 a row passes when its success frequency lies in the 3 sigma
// binomial band around the published ratio; at full scale the confidence
// must be at least as strong as the published one.
inline Table2Result reproduce_table2_row(std::size_t index, double scale, std::uint64_t seed, unsigned threads) {
  const Table2Row& row = table2_reference().at(index);
  TrialConfig tc;
  tc.variant = row.variant;
  tc.bound_side = row.side;
  tc.lambda = row.lambda;
  tc.r = row.r;
  tc.s = row.s;
  tc.trials = static_cast<std::size_t>(std::ceil(scale * static_cast<double>(row.trials) - 1e-9));
  tc.master = row_master(seed, index);
  Table2Result res{row, run_trials(tc, threads), 0.0, 0.0, false};
  const double p = published_ratio(row);
  const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(tc.trials));
  res.band_lo = p - 3.0 * sigma;
  res.band_hi = p + 3.0 * sigma;
  const double f = res.batch.frequency();
  res.pass = scale < 1.0 ? (f >= res.band_lo && f <= res.band_hi)
                         : res.batch.confidence.log10_confidence <= static_cast<double>(row.log10_confidence);
  return res;
}

// ---- output ----

inline void write_artifact(const RunConfig& cfg, const std::function<void(std::ostream&)>& csv, nlohmann::json payload) {
  if (cfg.out.empty()) return;
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + cfg.out);
  if (cfg.format == "csv") {
    f << "# config " << to_json(cfg).dump() << '\n';
    csv(f);
  } else {
    payload["config"] = to_json(cfg);
    f << payload.dump(2) << '\n';
  }
  if (!f) throw std::runtime_error("failed writing " + cfg.out);
}

inline Window window_of(const RunConfig& cfg) { return Window::from_sides(cfg.window); }

inline SecrecyGraph sample_graph(const RunConfig& cfg) {
  const Window w = window_of(cfg);
  const double lambda = cfg.dry ? 0.0 : cfg.lambda;
  return build_graph(sample_ppp(PointKind::Black, 1.0, w, Seed{*cfg.seed, 0}),
                     sample_ppp(PointKind::Red, lambda, w, Seed{*cfg.seed, 1}));
}

inline Variant variant_of(const RunConfig& cfg) { return variant_from_string(cfg.variant); }

// ---- subcommands ----

inline nlohmann::json cmd_sample(const RunConfig& cfg) {
  const Window w = window_of(cfg);
  const double lambda = cfg.dry ? 0.0 : cfg.lambda;
  const auto blacks = sample_ppp(PointKind::Black, 1.0, w, Seed{*cfg.seed, 0});
  const auto reds = sample_ppp(PointKind::Red, lambda, w, Seed{*cfg.seed, 1});
  write_artifact(
      cfg,
      [&](std::ostream& os) {
        os.precision(17);
        os << "kind";
        for (int a = 0; a < w.dim(); ++a) os << ",x" << a + 1;
        os << '\n';
        for (const PointSet* ps : {&blacks, &reds})
          for (std::size_t i = 0; i < ps->size(); ++i) {
            os << to_string(ps->kind());
            for (double x : ps->point(i)) os << ',' << x;
            os << '\n';
          }
      },
      {{"blacks", to_json(blacks, Seed{*cfg.seed, 0})}, {"reds", to_json(reds, Seed{*cfg.seed, 1})}});
  return {{"blacks", blacks.size()}, {"reds", reds.size()}};
}

inline nlohmann::json cmd_graph(const RunConfig& cfg) {
  const auto g = sample_graph(cfg);
  write_artifact(cfg, [&](std::ostream& os) { write_edges_csv(os, g); }, to_json(g));
  return {{"vertices", g.vertex_count()}, {"edges", g.edge_count()}, {"reds", g.reds().size()}};
}

// CSV labels: U and B components for modes U and B, strongly connected
// components for S, O and I.
inline nlohmann::json cmd_components(const RunConfig& cfg) {
  const auto g = sample_graph(cfg);
  const auto mode = percolation_mode_from_string(cfg.mode);
  const double margin = cfg.margin ? *cfg.margin : default_margin(g.blacks().window());
  const auto stats = escape_fraction(g, mode, margin);
  const auto dg = g.digraph();
  ComponentLabeling lab;
  if (mode == PercolationMode::U) lab = undirected_components(variant_view(dg, GraphVariant::U));
  else if (mode == PercolationMode::B) lab = undirected_components(variant_view(dg, GraphVariant::B), LabelMode::B);
  else lab = strongly_connected_components(dg);
  const auto sizes = lab.component_sizes();
  const std::size_t largest = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
  nlohmann::json summary = to_json(stats);
  summary["components"] = lab.component_count;
  summary["largest_component"] = largest;
  summary["vertices"] = g.vertex_count();
  write_artifact(cfg, [&](std::ostream& os) { write_labels_csv(os, lab); },
                 {{"stats", to_json(stats)}, {"label_mode", to_string(lab.mode)}, {"labels", lab.labels},
                  {"components", lab.component_count}, {"largest_component", largest}});
  return summary;
}

inline nlohmann::json cmd_degrees(const RunConfig& cfg) {
  const auto g = sample_graph(cfg);
  const double margin = cfg.margin ? *cfg.margin : default_margin(g.blacks().window());
  const auto side = cfg.side == "in" ? DegreeSide::In : DegreeSide::Out;
  const auto h = empirical_degree_hist(g, side, margin);
  const double lambda = cfg.dry ? 0.0 : cfg.lambda;

  nlohmann::json summary = {{"side", cfg.side},   {"vertices", g.vertex_count()}, {"n", h.n},
                            {"mean", h.mean()}, {"variance", h.variance()}};
  if (!h.counts.empty()) {
    auto mode = h.counts.begin();
    for (auto it = h.counts.begin(); it != h.counts.end(); ++it)
      if (it->second > mode->second) mode = it;
    summary["mode_k"] = mode->first;
  }
  // Reference law, when one is known.
  std::function<double(std::size_t)> pmf;
  if (lambda > 0.0 && side == DegreeSide::Out) pmf = [lambda](std::size_t k) { return outdegree_pmf(lambda, k); };
  if (lambda > 0.0 && side == DegreeSide::In && cfg.dim == 1)
    pmf = [lambda](std::size_t k) { return indegree_pmf_d1(lambda, k); };
  if (pmf && h.n > 0) {
    const auto gof = chi_square_gof(h.counts, pmf);
    summary["gof"] = {{"statistic", gof.statistic}, {"dof", gof.dof}, {"p_value", gof.p_value}};
    try {
      const auto bg = degree_batch_gof(g, side, margin, pmf);
      summary["gof_blocks"] = {{"statistic", bg.statistic}, {"dof", {bg.dof, bg.dof2}}, {"p_value", bg.p_value}};
    } catch (const std::invalid_argument&) {
      // Too few vertices to split into blocks.
    }
    summary["theory_mean"] = 1.0 / lambda;
  }
  nlohmann::json counts = nlohmann::json::array();
  for (const auto& [k, c] : h.counts) counts.push_back({k, c});
  nlohmann::json payload = summary;
  payload["counts"] = counts;
  write_artifact(cfg, [&](std::ostream& os) { write_csv(os, h); }, payload);
  return summary;
}

inline nlohmann::json cmd_branching(const RunConfig& cfg) {
  const auto s = gw_batch(cfg.lambda, cfg.trials, cfg.generations, cfg.cap, *cfg.seed);
  nlohmann::json summary = to_json(s);
  summary["extinction_probability"] = extinction_probability(cfg.lambda);
  write_artifact(
      cfg,
      [&](std::ostream& os) {
        os.precision(17);
        os << "lambda,runs,extinct_frac,capped_frac,extinction_probability\n"
           << s.lambda << ',' << s.runs << ',' << s.extinct_frac << ',' << s.capped_frac << ','
           << extinction_probability(cfg.lambda) << '\n';
      },
      summary);
  return summary;
}

inline nlohmann::json cmd_bound(const RunConfig& cfg) {
  if (cfg.bound_kind == "lattice") {
    const double lambda = hexagon_bound();
    nlohmann::json j = {{"lambda_u_upper", lambda},
                        {"delta", hexagon_optimal_delta(lambda)},
                        {"residual", hexagon_optimal_value(lambda) - 0.5}};
    write_artifact(
        cfg,
        [&](std::ostream& os) {
          os.precision(17);
          os << "lambda_u_upper,delta\n" << lambda << ',' << hexagon_optimal_delta(lambda) << '\n';
        },
        j);
    return j;
  }
  BoundReport rep;
  if (cfg.r && cfg.s) {
    rep = rolling_ball_bound(variant_of(cfg), cfg.lambda, *cfg.r, *cfg.s, cfg.tol);
  } else {
    if (cfg.r || cfg.s) throw ConfigError("bound analytic: give both --r and --s, or neither to optimise");
    OptimizeOptions opt;
    opt.tol = cfg.tol;
    rep = optimize_bound(variant_of(cfg), cfg.lambda, opt);
  }
  write_artifact(
      cfg,
      [&](std::ostream& os) {
        write_bound_csv_header(os);
        write_bound_csv_row(os, rep);
      },
      to_json(rep));
  return to_json(rep);
}

inline nlohmann::json cmd_mc(const RunConfig& cfg) {
  TrialConfig tc;
  tc.variant = variant_of(cfg);
  tc.bound_side = bound_side_from_string(cfg.bound_side);
  tc.lambda = cfg.lambda;
  tc.r = cfg.r.value_or(10.0);
  tc.s = cfg.s.value_or(0.0);
  tc.trials = cfg.trials;
  tc.master = *cfg.seed;
  tc.step = cfg.step;
  const auto batch = run_trials(tc, cfg.threads);
  write_artifact(
      cfg,
      [&](std::ostream& os) {
        write_table2_csv_header(os);
        write_table2_csv_row(os, batch);
      },
      to_json(batch, cfg.keep_trials));
  nlohmann::json summary = to_json(batch, false);
  summary["frequency"] = batch.frequency();
  return summary;
}

inline nlohmann::json cmd_reproduce(const RunConfig& cfg, std::ostream& progress) {
  std::size_t passed = 0;
  if (cfg.table == 1) {
    const auto rows = reproduce_table1(cfg.tol);
    nlohmann::json jrows = nlohmann::json::array();
    for (const auto& r : rows) {
      passed += r.pass ? 1 : 0;
      jrows.push_back({{"variant", to_string(r.published.variant)}, {"lambda", r.published.lambda},
                       {"published", {{"r", r.published.r}, {"s", r.published.s}, {"p", r.published.p}}},
                       {"computed", to_json(r.computed)}, {"tolerance", kTable1Tolerance}, {"pass", r.pass}});
    }
    write_artifact(
        cfg,
        [&](std::ostream& os) {
          os.precision(10);
          os << "variant,lambda,published_r,published_s,published_p,r,s,p,tolerance,pass\n";
          for (const auto& r : rows)
            os << to_string(r.published.variant) << ',' << r.published.lambda << ',' << r.published.r << ',' << r.published.s << ','
               << r.published.p << ',' << r.computed.r << ',' << r.computed.s << ',' << r.computed.p << ','
               << kTable1Tolerance << ',' << (r.pass ? "pass" : "fail") << '\n';
        },
        {{"rows", jrows}});
    return {{"table", 1}, {"rows", rows.size()}, {"passed", passed}};
  }

  std::vector<Table2Result> rows;
  for (std::size_t i = 0; i < table2_reference().size(); ++i) {
    rows.push_back(reproduce_table2_row(i, cfg.scale, *cfg.seed, cfg.threads));
    const auto& r = rows.back();
    passed += r.pass ? 1 : 0;
    progress << "row " << i + 1 << ": " << to_string(r.published.variant) << '-' << to_string(r.published.side) << ' '
             << r.batch.successes << '/' << r.batch.outcomes.size() << (r.pass ? " pass" : " fail") << std::endl;
  }
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json b = to_json(r.batch, cfg.keep_trials);
    b["frequency"] = r.batch.frequency();
    jrows.push_back({{"published",
                      {{"successes", r.published.successes},
                       {"trials", r.published.trials},
                       {"ratio", published_ratio(r.published)},
                       {"log10_confidence", r.published.log10_confidence}}},
                     {"computed", b},
                     {"band", {r.band_lo, r.band_hi}},
                     {"pass", r.pass}});
  }
  write_artifact(
      cfg,
      [&](std::ostream& os) {
        os.precision(10);
        os << "variant,bound,lambda,r,s,published_successes,published_trials,published_ratio,published_log10_confidence,"
              "successes,trials,frequency,band_lo,band_hi,log10_confidence,pass\n";
        for (const auto& r : rows)
          os << to_string(r.published.variant) << ',' << to_string(r.published.side) << ',' << r.published.lambda << ','
             << r.published.r << ',' << r.published.s << ',' << r.published.successes << ',' << r.published.trials << ','
             << published_ratio(r.published) << ',' << r.published.log10_confidence << ',' << r.batch.successes << ','
             << r.batch.outcomes.size() << ',' << r.batch.frequency() << ',' << r.band_lo << ',' << r.band_hi << ','
             << r.batch.confidence.log10_confidence << ',' << (r.pass ? "pass" : "fail") << '\n';
      },
      {{"rows", jrows}});
  return {{"table", 2}, {"scale", cfg.scale}, {"rows", rows.size()}, {"passed", passed}};
}

inline nlohmann::json dispatch(const RunConfig& cfg, std::ostream& err) {
  const auto& c = cfg.command;
  if (c == "sample") return cmd_sample(cfg);
  if (c == "graph") return cmd_graph(cfg);
  if (c == "components") return cmd_components(cfg);
  if (c == "degrees") return cmd_degrees(cfg);
  if (c == "branching") return cmd_branching(cfg);
  if (c == "bound") return cmd_bound(cfg);
  if (c == "mc") return cmd_mc(cfg);
  if (c == "reproduce") return cmd_reproduce(cfg, err);
  throw ConfigError("unknown command " + c);
}

// ---- argument parsing ----

// Raw flag storage; a flag only overrides the config when it was given.
struct FlagValues {
  double lambda = 0, r = 0, s = 0, margin = 0, tol = 0, step = 0, scale = 0;
  int dim = 0, table = 0;
  std::string window, variant, bound, mode, side, out, format, config;
  std::size_t trials = 0, generations = 0;
  std::uint64_t seed = 0, cap = 0;
  unsigned threads = 0;
  bool keep_trials = false, dry = false;
};

inline void apply_flags(RunConfig& cfg, const CLI::App& sub, const FlagValues& f) {
  auto given = [&](const char* name) {
    const CLI::Option* o = sub.get_option_no_throw(name);
    return o && o->count() > 0;
  };
  if (given("--lambda")) cfg.lambda = f.lambda;
  if (given("--dim")) cfg.dim = f.dim, cfg.dim_set = true;
  if (given("--window")) cfg.window = parse_window(f.window);
  if (given("--r")) cfg.r = f.r;
  if (given("--s")) cfg.s = f.s;
  if (given("--variant")) cfg.variant = f.variant;
  if (given("--bound")) cfg.bound_side = f.bound;
  if (given("--mode")) cfg.mode = f.mode;
  if (given("--side")) cfg.side = f.side;
  if (given("--dry")) cfg.dry = f.dry;
  if (given("--trials")) cfg.trials = f.trials;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--margin")) cfg.margin = f.margin;
  if (given("--tol")) cfg.tol = f.tol;
  if (given("--generations")) cfg.generations = f.generations;
  if (given("--cap")) cfg.cap = f.cap;
  if (given("--step")) cfg.step = f.step;
  if (given("--table")) cfg.table = f.table;
  if (given("--scale")) cfg.scale = f.scale;
  if (given("--out")) cfg.out = f.out;
  if (given("--format")) cfg.format = f.format;
  if (given("--threads")) cfg.threads = f.threads;
  if (given("--keep-trials")) cfg.keep_trials = f.keep_trials;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Secrecy-graph percolation: sampling, graphs, degree laws, bounds and Monte-Carlo trials", "secperc"};
  app.require_subcommand(1);
  FlagValues f;
  std::string bound_kind;

  auto common_io = [&](CLI::App* s) {
    s->add_option("--config", f.config, "JSON config file; flags override its values");
    s->add_option("--out", f.out, "Output file (no artifact is written without it)");
    s->add_option("--format", f.format, "Output format: csv or json (default json)");
  };
  auto spatial = [&](CLI::App* s) {
    s->add_option("--lambda", f.lambda, "Red (eavesdropper) intensity; blacks have intensity 1");
    s->add_option("--dim", f.dim, "Dimension (default 2)");
    s->add_option("--window", f.window, "Window side lengths, e.g. 40x40 (default 20 per axis)");
    s->add_option("--seed", f.seed, "Master seed (falls back to SECPERC_SEED, else generated and recorded)");
    s->add_flag("--dry", f.dry, "Use zero red intensity");
  };
  auto margin = [&](CLI::App* s) {
    s->add_option("--margin", f.margin, "Core margin from the window faces (default 10% of the shortest side)");
  };
  auto variant = [&](CLI::App* s) { s->add_option("--variant", f.variant, "Graph variant: U, O or B (default B)"); };
  auto threads = [&](CLI::App* s) { s->add_option("--threads", f.threads, "Worker threads (default: all cores)"); };

  auto* sample = app.add_subcommand("sample", "Sample black and red Poisson processes");
  spatial(sample);
  common_io(sample);

  auto* graph = app.add_subcommand("graph", "Build the directed secrecy graph");
  spatial(graph);
  common_io(graph);

  auto* comps = app.add_subcommand("components", "Component labels and the boundary-escape fraction");
  spatial(comps);
  margin(comps);
  comps->add_option("--mode", f.mode, "Percolation mode: U, O, I, S or B (default U)");
  common_io(comps);

  auto* degrees = app.add_subcommand("degrees", "Empirical degree histogram with a goodness-of-fit test");
  spatial(degrees);
  margin(degrees);
  degrees->add_option("--side", f.side, "Degree side: in or out (default out)");
  common_io(degrees);

  auto* branching = app.add_subcommand("branching", "Galton-Watson runs with geometric offspring of mean 1/lambda");
  branching->add_option("--lambda", f.lambda, "Red intensity (offspring mean 1/lambda)");
  branching->add_option("--trials", f.trials, "Number of runs (default 100)");
  branching->add_option("--generations", f.generations, "Maximum generations per run (default 100)");
  branching->add_option("--cap", f.cap, "Total-progeny cap per run (default 1000000)");
  branching->add_option("--seed", f.seed, "Master seed");
  common_io(branching);

  auto* bound = app.add_subcommand("bound", "Analytic rolling-ball bound or hexagonal-lattice bound");
  bound->add_option("kind", bound_kind, "analytic or lattice")->required();
  bound->add_option("--lambda", f.lambda, "Red intensity (analytic)");
  variant(bound);
  bound->add_option("--r", f.r, "Rolling-disc radius; with --s evaluates instead of optimising");
  bound->add_option("--s", f.s, "Clearance parameter");
  bound->add_option("--tol", f.tol, "Quadrature tolerance (default 1e-9)");
  common_io(bound);

  auto* mc = app.add_subcommand("mc", "Monte-Carlo lower/upper-bound trials with binomial confidence");
  variant(mc);
  mc->add_option("--bound", f.bound, "Trial type: lower or upper (default lower)");
  mc->add_option("--lambda", f.lambda, "Red intensity");
  mc->add_option("--r", f.r, "Disc radius (default 10)");
  mc->add_option("--s", f.s, "Clearance between discs and square boundaries (default 0)");
  mc->add_option("--trials", f.trials, "Number of trials (default 100)");
  mc->add_option("--seed", f.seed, "Master seed; trial i uses substream i");
  mc->add_option("--step", f.step, "Exposure-region boundary step (default 0.05/sqrt(lambda*pi))");
  mc->add_flag("--keep-trials", f.keep_trials, "Include per-trial outcomes in JSON output");
  threads(mc);
  common_io(mc);

  auto* repro = app.add_subcommand("reproduce", "Side-by-side reproduction of the bound and simulation tables");
  repro->add_option("--table", f.table, "Table: 1 (analytic bounds) or 2 (Monte-Carlo)")->required();
  repro->add_option("--scale", f.scale, "Fraction of the published trial counts for table 2 (default 0.1)");
  repro->add_option("--seed", f.seed, "Master seed for table 2");
  repro->add_option("--tol", f.tol, "Quadrature tolerance for table 1");
  repro->add_flag("--keep-trials", f.keep_trials, "Include per-trial outcomes in JSON output");
  threads(repro);
  common_io(repro);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kInvalidConfig;
  }

  CLI::App* sub = app.get_subcommands().front();
  RunConfig cfg;
  try {
    cfg.command = sub->get_name();
    if (cfg.command == "bound") cfg.bound_kind = bound_kind;
    if (!f.config.empty()) apply_json(cfg, load_json_file(f.config));
    apply_flags(cfg, *sub, f);
    validate(cfg);
    resolve_seed(cfg);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }

  try {
    nlohmann::json summary = dispatch(cfg, err);
    summary["command"] = cfg.command;
    if (cfg.seed) summary["seed"] = *cfg.seed;
    if (!cfg.out.empty()) summary["out"] = cfg.out;
    out << summary.dump() << std::endl;
    return kOk;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
}

}  // namespace secperc::cli
