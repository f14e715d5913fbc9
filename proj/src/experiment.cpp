#include "sgda/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "sgda/plot.hpp"

namespace sgda {

namespace fs = std::filesystem;

namespace {

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError("config field '" + field + "' must be a number");
  return j.get<double>();
}

long positive_integer(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<long>() < 1)
    throw ConfigError("config field '" + field + "' must be a positive integer");
  return j.get<long>();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("output: cannot write '" + path.string() + "'");
  out << text;
}

void write_trace(const fs::path& dir, const IterateTrace& trace) {
  std::ofstream out(dir / "trace.csv", std::ios::binary);
  if (!out) throw ConfigError("output: cannot write '" + (dir / "trace.csv").string() + "'");
  write_trace_csv(out, trace);
  // wall_ns varies between runs; everything else is reproducible.
  json meta = {{"columns", {"t", "rx", "ry", "ry_kind", "rz", "f", "psi", "phi", "wall_ns", "residual"}},
               {"nondeterministic", {"wall_ns"}}};
  write_file(dir / "trace.columns.json", meta.dump(2) + "\n");
}

bool is_numerical_stop(StopReason r) {
  return r == StopReason::diverged || r == StopReason::region_violation;
}

// Log-spaced subsample of a best-so-far curve, always keeping the endpoints.
std::vector<std::pair<double, double>> thin_curve(const std::vector<std::pair<double, double>>& curve,
                                                  int per_decade = 50) {
  std::vector<std::pair<double, double>> out;
  double next = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].first >= next || i + 1 == curve.size()) {
      out.push_back(curve[i]);
      next = std::max(curve[i].first + 1, curve[i].first * std::pow(10.0, 1.0 / per_decade));
    }
  }
  return out;
}

json curve_json(const std::vector<std::pair<double, double>>& curve) {
  json arr = json::array();
  for (const auto& [t, r] : curve) arr.push_back({t, r});
  return arr;
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  if (!doc.contains("problem")) throw ConfigError("config field 'problem' is missing");
  cfg.problem = doc.at("problem");

  if (doc.contains("algorithm")) {
    if (!doc.at("algorithm").is_string()) throw ConfigError("config field 'algorithm' must be a string");
    try {
      cfg.algorithm = parse_algorithm(doc.at("algorithm").get<std::string>());
    } catch (const ConfigError&) {
      throw ConfigError("config field 'algorithm' has unknown value '" +
                        doc.at("algorithm").get<std::string>() + "'");
    }
  }

  const json params = doc.value("params", json{{"auto", json::object()}});
  if (params.is_string() && params.get<std::string>() == "auto") {
    cfg.safety = 0.99;
  } else {
    if (!params.is_object()) throw ConfigError("config field 'params' must be an object");
    const bool has_auto = params.contains("auto"), has_explicit = params.contains("explicit");
    if (has_auto == has_explicit)
      throw ConfigError("config field 'params' needs exactly one of 'auto' or 'explicit'");
    if (has_auto) {
      const json& a = params.at("auto");
      cfg.safety = a.is_number() ? a.get<double>()
                   : a.contains("safety") ? number(a.at("safety"), "params.auto.safety")
                                          : 0.99;
      if (!(*cfg.safety > 0 && *cfg.safety <= 1))
        throw ConfigError("config field 'params.auto.safety' must lie in (0, 1]");
    } else {
      const json& e = params.at("explicit");
      SolverParams p;
      const bool gda = cfg.algorithm == Algorithm::gda;
      auto field = [&](const char* key, double fallback, bool required) {
        if (e.contains(key)) return number(e.at(key), std::string("params.explicit.") + key);
        if (required) throw ConfigError(std::string("config field 'params.explicit.") + key + "' is missing");
        return fallback;
      };
      p.p = field("p", 0.0, !gda);
      p.c = field("c", 0.0, true);
      p.alpha = field("alpha", 0.0, true);
      p.beta = field("beta", 1.0, !gda);
      if (!(p.c > 0) || !(p.alpha > 0) || !(p.beta > 0 && p.beta <= 1) || p.p < 0)
        throw ConfigError("config field 'params.explicit' needs c, alpha > 0, p >= 0, beta in (0, 1]");
      cfg.explicit_params = p;
    }
  }

  if (doc.contains("horizon")) {
    const json& h = doc.at("horizon");
    if (h.contains("max_iter")) cfg.horizon.max_iter = positive_integer(h.at("max_iter"), "horizon.max_iter");
    if (h.contains("tol")) {
      cfg.horizon.tol = number(h.at("tol"), "horizon.tol");
      if (cfg.horizon.tol < 0) throw ConfigError("config field 'horizon.tol' must be non-negative");
    }
  }
  if (doc.contains("theorem1_T") && !doc.at("theorem1_T").is_null())
    cfg.theorem1_T = positive_integer(doc.at("theorem1_T"), "theorem1_T");

  if (doc.contains("diagnostics")) {
    const json& d = doc.at("diagnostics");
    if (d.is_string()) {
      if (d.get<std::string>() != "none") throw ConfigError("config field 'diagnostics' has unknown value");
    } else {
      const std::string mode = d.value("mode", std::string("custom"));
      if (mode != "none" && mode != "residuals-exact" && mode != "potential" && mode != "custom")
        throw ConfigError("config field 'diagnostics.mode' has unknown value '" + mode + "'");
      if (d.contains("every")) {
        const long k = positive_integer(d.at("every"), "diagnostics.every");
        if (mode == "residuals-exact") cfg.record.exact_every = k;
        if (mode == "potential") cfg.record.exact_every = cfg.record.potential_every = k;
      }
      if (d.contains("exact_every"))
        cfg.record.exact_every = positive_integer(d.at("exact_every"), "diagnostics.exact_every");
      if (d.contains("potential_every"))
        cfg.record.potential_every = positive_integer(d.at("potential_every"), "diagnostics.potential_every");
      if (d.contains("inner_tol")) {
        cfg.record.inner_tol = number(d.at("inner_tol"), "diagnostics.inner_tol");
        if (!(cfg.record.inner_tol > 0)) throw ConfigError("config field 'diagnostics.inner_tol' must be positive");
      }
    }
  }
  if (doc.contains("record")) {
    const json& r = doc.at("record");
    if (r.contains("stride")) cfg.record.stride = positive_integer(r.at("stride"), "record.stride");
    if (r.contains("timing")) cfg.record.timing = r.at("timing").get<bool>();
    if (r.contains("psi")) cfg.record.psi = r.at("psi").get<bool>();
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_integer() || doc.at("seed").get<long long>() < 0)
      throw ConfigError("config field 'seed' must be a non-negative integer");
    cfg.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("output")) cfg.output = doc.at("output").get<std::string>();
  if (doc.contains("synthetic")) {
    const json& s = doc.at("synthetic");
    ExperimentConfig::Synthetic syn;
    if (s.contains("exponent")) syn.exponent = number(s.at("exponent"), "synthetic.exponent");
    if (s.contains("scale")) syn.scale = number(s.at("scale"), "synthetic.scale");
    if (s.contains("length")) syn.length = positive_integer(s.at("length"), "synthetic.length");
    cfg.synthetic = syn;
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
  }
  return parse_config(doc);
}

Instance build_instance(const ExperimentConfig& config) {
  json spec = config.problem;
  if (spec.is_object() && spec.value("type", std::string()) == "finite-max-quadratic" && !spec.contains("seed"))
    spec["seed"] = config.seed;
  return instance_from_json(spec);
}

SolverParams resolve_params(const ExperimentConfig& config, const MinMaxProblem& problem) {
  const int N = config.algorithm == Algorithm::smoothed_bgda ? problem.block_count() : 1;
  SolverParams p;
  if (config.explicit_params) {
    p = *config.explicit_params;
    p.N = N;
    if (config.theorem1_T && p.beta >= 1.0 / std::sqrt(static_cast<double>(*config.theorem1_T)))
      throw ConfigError("config field 'params.explicit.beta' must be below 1/sqrt(theorem1_T)");
  } else {
    try {
      p = derive_params(problem.lipschitz_L, N, config.safety.value_or(0.99), config.theorem1_T);
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("config field 'params.auto': ") + e.what());
    }
  }
  return p;
}

Experiment run_experiment(const ExperimentConfig& config) {
  Experiment ex{build_instance(config), {}, {}};
  ex.params = resolve_params(config, ex.instance.problem);
  const SolverState s0 = initial_state(ex.instance.problem, ex.instance.x0, ex.instance.y0, ex.instance.z0);
  ex.result = run(ex.instance.problem, config.algorithm, ex.params, s0, config.horizon, config.record);
  ex.result.trace.meta.seed = config.seed;
  return ex;
}

json summary_json(const Experiment& ex) {
  const MinMaxProblem& problem = ex.instance.problem;
  const IterateTrace& trace = ex.result.trace;
  const SolverState& s = ex.result.state;
  json j;
  j["problem_id"] = problem.id;
  j["algorithm"] = trace.meta.algorithm;
  j["seed"] = trace.meta.seed;
  j["L"] = problem.lipschitz_L;
  j["params"] = params_to_json(ex.params);
  j["theory_compliant"] = theory_compliant(ex.params, problem.lipschitz_L);
  const std::string violation = compliance_violation(ex.params, problem.lipschitz_L);
  if (!violation.empty()) j["compliance_note"] = violation;
  try {
    j["constants"] = constants_to_json(constants(problem.lipschitz_L, ex.params));
  } catch (const ParameterError& e) {
    j["constants"] = nullptr;
    j["constants_note"] = e.what();
  }
  j["stop_reason"] = to_string(trace.stop);
  if (!trace.message.empty()) j["message"] = trace.message;
  j["iterations"] = s.t;
  j["records"] = trace.records.size();
  j["final_residual"] = trace.records.empty() ? json(nullptr) : json(trace.records.back().residual);
  j["final_state"] = {{"t", s.t},
                      {"x", vector_to_json(s.x)},
                      {"y", vector_to_json(s.y)},
                      {"z", vector_to_json(s.z)}};
  j["certificate"] = nullptr;
  if (s.t == ex.result.prev_state.t + 1) {
    try {
      const bool gda = trace.meta.algorithm == to_string(Algorithm::gda);
      const Certificate cert = gda ? gda_certificate(problem, ex.result.prev_state, s, ex.params.c, ex.params.alpha)
                                   : certificate(problem, ex.result.prev_state, s, ex.params);
      j["certificate"] = {{"epsilon", cert.epsilon}, {"lambda_bar", cert.lambda_bar},
                          {"u_norm", cert.u_norm},   {"v_norm", cert.v_norm},
                          {"kappa", cert.kappa},     {"u", vector_to_json(cert.u)},
                          {"v", vector_to_json(cert.v)}};
    } catch (const Error& e) {
      j["certificate_note"] = e.what();
    }
  }
  return j;
}

json first_decades(const std::vector<std::pair<double, double>>& best, int k_hi, int k_lo) {
  json out = json::object();
  std::size_t i = 0;
  for (int k = k_hi; k >= k_lo; --k) {
    const double level = std::pow(10.0, k);
    while (i < best.size() && best[i].second > level) ++i;
    out["1e" + std::to_string(k)] = i < best.size() ? json(best[i].first) : json(nullptr);
  }
  return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  try {
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto dash = item.find('-', 1);
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(item));
      } else {
        const auto a = std::stoull(item.substr(0, dash)), b = std::stoull(item.substr(dash + 1));
        if (b < a) throw ConfigError("seeds: empty range '" + item + "'");
        for (auto s = a; s <= b; ++s) seeds.push_back(s);
      }
    }
  } catch (const std::logic_error&) {
    throw ConfigError("seeds: cannot parse '" + text + "'");
  }
  return seeds;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, bool svg, std::ostream& log) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    const fs::path dir = out_dir.empty() ? fs::path(cfg.output) : fs::path(out_dir);
    if (dir.empty()) throw ConfigError("config field 'output' is missing and no --out given");
    Experiment ex = run_experiment(cfg);
    fs::create_directories(dir);
    write_trace(dir, ex.result.trace);
    write_file(dir / "summary.json", summary_json(ex).dump(2) + "\n");
    if (svg) {
      write_file(dir / "residuals.svg",
                 loglog_svg(ex.instance.problem.id + " / " + ex.result.trace.meta.algorithm,
                            {{"residual", best_so_far(ex.result.trace)}}, "iteration",
                            "best residual so far"));
    }
    log << "stop: " << to_string(ex.result.trace.stop) << " after " << ex.result.state.t
        << " iterations\n";
    if (!ex.result.trace.message.empty()) log << ex.result.trace.message << '\n';
    return is_numerical_stop(ex.result.trace.stop) ? kExitNumerical : kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GenerationError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

int cmd_compare(const std::string& config_a, const std::string& config_b,
                const std::string& out_dir, std::ostream& log) {
  try {
    const ExperimentConfig a = load_config(config_a);
    const ExperimentConfig b = load_config(config_b);
    const Instance ia = build_instance(a), ib = build_instance(b);
    if (ia.description != ib.description)
      throw ConfigError("compare: configs reference different problems");
    if (a.horizon.max_iter != b.horizon.max_iter || a.horizon.tol != b.horizon.tol)
      throw ConfigError("compare: configs use different horizons");

    json out = json::object();
    std::vector<Series> series;
    int code = kExitOk;
    for (const auto* cfg : {&a, &b}) {
      const std::string key = cfg == &a ? "a" : "b";
      Experiment ex = run_experiment(*cfg);
      const auto best = best_so_far(ex.result.trace);
      json entry = {{"algorithm", ex.result.trace.meta.algorithm},
                    {"params", params_to_json(ex.params)},
                    {"stop_reason", to_string(ex.result.trace.stop)},
                    {"iterations", ex.result.state.t},
                    {"min_residual", best.empty() ? json(nullptr) : json(best.back().second)},
                    {"first_reach", first_decades(best)},
                    {"curve", curve_json(thin_curve(best))}};
      out[key] = std::move(entry);
      series.push_back({key + ": " + ex.result.trace.meta.algorithm, thin_curve(best)});
      if (is_numerical_stop(ex.result.trace.stop)) code = kExitNumerical;
    }
    out["problem_id"] = ia.problem.id;
    out["horizon"] = {{"max_iter", a.horizon.max_iter}, {"tol", a.horizon.tol}};
    const fs::path dir = out_dir;
    fs::create_directories(dir);
    write_file(dir / "comparison.json", out.dump(2) + "\n");
    write_file(dir / "comparison.svg",
               loglog_svg(ia.problem.id, series, "iteration", "best residual so far"));
    log << "a: min " << out["a"]["min_residual"] << ", b: min " << out["b"]["min_residual"] << '\n';
    return code;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

namespace {

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::optional<double> slope;
  std::string excluded;
  std::string stop;
  long iterations = 0;
};

// Strict complementarity at a known solution; instances without one pass.
bool assumptions_hold(const Instance& inst) {
  if (!inst.finite_max || !inst.finite_max->reference) return true;
  const auto& ref = *inst.finite_max->reference;
  try {
    return check_strict_complementarity(*inst.finite_max, ref.x, ref.y, 1e-8) > 0;
  } catch (const PreconditionError&) {
    return false;
  }
}

SeedOutcome run_seed(const ExperimentConfig& base, std::uint64_t seed, double t_lo, double t_hi,
                     const fs::path& dir) {
  SeedOutcome o;
  o.seed = seed;
  ExperimentConfig cfg = base;
  cfg.seed = seed;
  IterateTrace trace;
  if (cfg.synthetic) {
    const auto& syn = *cfg.synthetic;
    trace.meta.problem_id = "synthetic";
    trace.meta.seed = seed;
    for (long t = 0; t < syn.length; ++t) {
      TraceRecord r;
      r.t = t;
      r.residual = r.rx = syn.scale * std::pow(static_cast<double>(t + 1), syn.exponent);
      trace.records.push_back(r);
    }
    o.stop = to_string(StopReason::max_iter);
    o.iterations = syn.length;
  } else {
    if (cfg.problem.is_object() && cfg.problem.value("type", std::string()) == "finite-max-quadratic")
      cfg.problem["seed"] = seed;
    Experiment ex;
    try {
      ex.instance = build_instance(cfg);
    } catch (const GenerationError&) {
      o.excluded = "assumption check failed";
      return o;
    }
    if (!assumptions_hold(ex.instance)) {
      o.excluded = "assumption check failed";
      return o;
    }
    ex.params = resolve_params(cfg, ex.instance.problem);
    const SolverState s0 = initial_state(ex.instance.problem, ex.instance.x0, ex.instance.y0, ex.instance.z0);
    ex.result = run(ex.instance.problem, cfg.algorithm, ex.params, s0, cfg.horizon, cfg.record);
    ex.result.trace.meta.seed = seed;
    o.stop = to_string(ex.result.trace.stop);
    o.iterations = ex.result.state.t;
    fs::create_directories(dir);
    write_trace(dir, ex.result.trace);
    write_file(dir / "summary.json", summary_json(ex).dump(2) + "\n");
    if (is_numerical_stop(ex.result.trace.stop)) {
      o.excluded = o.stop;
      return o;
    }
    trace = std::move(ex.result.trace);
  }
  try {
    o.slope = fit_rate(trace, t_lo, t_hi);
  } catch (const InsufficientDataError& e) {
    o.excluded = std::string("insufficient data: ") + e.what();
  }
  return o;
}

}  // namespace

int cmd_rate(const std::string& config_path, const std::vector<std::uint64_t>& seeds, double t_lo,
             double t_hi, const std::string& out_dir, std::ostream& log, unsigned jobs) {
  try {
    if (seeds.size() < 3) throw ConfigError("rate: at least 3 seeds are required");
    if (!(t_lo > 0 && t_hi > t_lo)) throw ConfigError("rate: window must satisfy 0 < lo < hi");
    const ExperimentConfig cfg = load_config(config_path);
    const fs::path dir = out_dir;
    fs::create_directories(dir);

    std::vector<SeedOutcome> outcomes(seeds.size());
    std::vector<std::string> failures(seeds.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i; (i = next++) < seeds.size();) {
        try {
          outcomes[i] = run_seed(cfg, seeds[i], t_lo, t_hi, dir / ("seed-" + std::to_string(seeds[i])));
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    };
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, seeds.size()));
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < jobs; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    for (const auto& f : failures)
      if (!f.empty()) throw ConfigError(f);

    json per_seed = json::array();
    std::vector<double> slopes;
    for (const auto& o : outcomes) {
      json e = {{"seed", o.seed}, {"stop_reason", o.stop}, {"iterations", o.iterations}};
      e["slope"] = o.slope ? json(*o.slope) : json(nullptr);
      e["excluded"] = o.excluded.empty() ? json(nullptr) : json(o.excluded);
      if (o.slope && o.excluded.empty()) slopes.push_back(*o.slope);
      per_seed.push_back(std::move(e));
    }
    json out = {{"window", {t_lo, t_hi}}, {"seeds", per_seed}, {"used", slopes.size()}};
    if (!slopes.empty()) {
      double mean = 0;
      for (double s : slopes) mean += s;
      mean /= static_cast<double>(slopes.size());
      double var = 0;
      for (double s : slopes) var += (s - mean) * (s - mean);
      out["mean"] = mean;
      out["std"] = slopes.size() > 1 ? std::sqrt(var / static_cast<double>(slopes.size() - 1)) : 0.0;
    } else {
      out["mean"] = nullptr;
      out["std"] = nullptr;
    }
    write_file(dir / "rate.json", out.dump(2) + "\n");
    log << "rate: " << slopes.size() << " of " << seeds.size() << " seeds used, mean slope "
        << out["mean"] << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace sgda
