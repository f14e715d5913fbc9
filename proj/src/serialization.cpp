#include "sgda/serialization.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sgda {

namespace {

const json& require(const json& j, const std::string& key, const std::string& field) {
  if (!j.is_object() || !j.contains(key))
    throw ConfigError("config field '" + field + "." + key + "' is missing");
  return j.at(key);
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError("config field '" + field + "' must be a number");
  return j.get<double>();
}

long integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError("config field '" + field + "' must be an integer");
  return j.get<long>();
}

Region region_from_json(const json& j, Index n, const std::string& field) {
  if (j.contains("radius")) return Region::cube(n, number(j.at("radius"), field + ".radius"));
  Region r{vector_from_json(require(j, "lo", field), field + ".lo"),
           vector_from_json(require(j, "hi", field), field + ".hi")};
  if (r.lo.size() != n || r.hi.size() != n) throw ConfigError("config field '" + field + "' has wrong dimension");
  return r;
}

json region_to_json(const Region& r) {
  if (!r.bounded()) return json();
  return {{"lo", vector_to_json(r.lo)}, {"hi", vector_to_json(r.hi)}};
}

json reference_to_json(const ReferenceSolution& ref) {
  return {{"x", vector_to_json(ref.x)}, {"y", vector_to_json(ref.y)}, {"value", ref.value}};
}

FiniteMaxSpec generator_from_json(const json& j) {
  FiniteMaxSpec spec;
  if (j.is_null()) return spec;
  const std::string f = "problem.generator";
  if (j.contains("eig_lo")) spec.eig_lo = number(j.at("eig_lo"), f + ".eig_lo");
  if (j.contains("eig_hi")) spec.eig_hi = number(j.at("eig_hi"), f + ".eig_hi");
  if (j.contains("anchor_eig")) spec.anchor_eig = number(j.at("anchor_eig"), f + ".anchor_eig");
  if (j.contains("center_scale")) spec.center_scale = number(j.at("center_scale"), f + ".center_scale");
  if (j.contains("offset_scale")) spec.offset_scale = number(j.at("offset_scale"), f + ".offset_scale");
  if (j.contains("region_radius")) spec.region_radius = number(j.at("region_radius"), f + ".region_radius");
  if (j.contains("x0_scale")) spec.x0_scale = number(j.at("x0_scale"), f + ".x0_scale");
  if (j.contains("strict_complementarity")) {
    if (!j.at("strict_complementarity").is_boolean())
      throw ConfigError("config field '" + f + ".strict_complementarity' must be a boolean");
    spec.strict_complementarity = j.at("strict_complementarity").get<bool>();
  }
  if (j.contains("min_gap")) spec.min_gap = number(j.at("min_gap"), f + ".min_gap");
  if (j.contains("max_attempts")) spec.max_attempts = static_cast<int>(integer(j.at("max_attempts"), f + ".max_attempts"));
  return spec;
}

json generator_to_json(const FiniteMaxSpec& s) {
  return {{"eig_lo", s.eig_lo},           {"eig_hi", s.eig_hi},
          {"anchor_eig", s.anchor_eig},   {"center_scale", s.center_scale},
          {"offset_scale", s.offset_scale}, {"region_radius", s.region_radius},
          {"x0_scale", s.x0_scale},       {"strict_complementarity", s.strict_complementarity},
          {"min_gap", s.min_gap},         {"max_attempts", s.max_attempts}};
}

Instance from_finite_max(FiniteMaxProblem fm, json description) {
  Instance inst;
  auto shared = std::make_shared<const FiniteMaxProblem>(std::move(fm));
  inst.problem = shared->problem();
  inst.x0 = shared->default_x0 ? *shared->default_x0 : Vector(Vector::Zero(shared->n()));
  inst.y0 = Vector::Constant(shared->m(), 1.0 / static_cast<double>(shared->m()));
  inst.finite_max = std::move(shared);
  inst.description = std::move(description);
  return inst;
}

void apply_init(Instance& inst, const json& spec) {
  if (!spec.contains("init")) return;
  const json& init = spec.at("init");
  if (init.contains("x")) inst.x0 = vector_from_json(init.at("x"), "problem.init.x");
  if (init.contains("y")) inst.y0 = vector_from_json(init.at("y"), "problem.init.y");
  if (init.contains("z")) inst.z0 = vector_from_json(init.at("z"), "problem.init.z");
  if (inst.x0.size() != inst.problem.n || inst.y0.size() != inst.problem.m ||
      (inst.z0 && inst.z0->size() != inst.problem.n))
    throw ConfigError("config field 'problem.init' has wrong dimensions");
}

}  // namespace

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const json& j, const std::string& field) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) throw ConfigError("config field '" + field + "' must be an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = number(j[i], field);
  return v;
}

json matrix_to_json(const Matrix& A) {
  json data = json::array();
  for (Index i = 0; i < A.rows(); ++i)
    for (Index k = 0; k < A.cols(); ++k) data.push_back(A(i, k));
  return {{"rows", A.rows()}, {"cols", A.cols()}, {"data", std::move(data)}};
}

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (j.is_object()) {
    const Index rows = integer(require(j, "rows", field), field + ".rows");
    const Index cols = integer(require(j, "cols", field), field + ".cols");
    const json& data = require(j, "data", field);
    if (!data.is_array() || static_cast<Index>(data.size()) != rows * cols)
      throw ConfigError("config field '" + field + ".data' must hold rows*cols numbers");
    Matrix A(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index k = 0; k < cols; ++k) A(i, k) = number(data[static_cast<std::size_t>(i * cols + k)], field);
    return A;
  }
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    const Index rows = static_cast<Index>(j.size());
    const Index cols = static_cast<Index>(j[0].size());
    Matrix A(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      if (static_cast<Index>(j[static_cast<std::size_t>(i)].size()) != cols)
        throw ConfigError("config field '" + field + "' is ragged");
      for (Index k = 0; k < cols; ++k) A(i, k) = number(j[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)], field);
    }
    return A;
  }
  throw ConfigError("config field '" + field + "' must be a matrix");
}

json feasible_set_to_json(const FeasibleSet& set) {
  const auto& v = set.variant();
  if (const auto* b = std::get_if<FeasibleSet::Box>(&v))
    return {{"type", "box"}, {"lo", vector_to_json(b->lo)}, {"hi", vector_to_json(b->hi)}};
  if (const auto* b = std::get_if<FeasibleSet::Ball>(&v))
    return {{"type", "l2-ball"}, {"center", vector_to_json(b->center)}, {"radius", b->radius}};
  return {{"type", set.kind()}};
}

FeasibleSet feasible_set_from_json(const json& j, Index dim, const std::string& field) {
  if (j.is_null()) return FeasibleSet::whole_space(dim);
  const std::string type = require(j, "type", field).get<std::string>();
  if (type == "whole-space") return FeasibleSet::whole_space(dim);
  if (type == "simplex") return FeasibleSet::simplex(dim);
  if (type == "box") {
    auto bound = [&](const char* key) {
      const json& b = require(j, key, field);
      Vector v = b.is_number() ? Vector(Vector::Constant(dim, b.get<double>()))
                               : vector_from_json(b, field + "." + key);
      if (v.size() != dim) throw ConfigError("config field '" + field + "." + key + "' has wrong dimension");
      return v;
    };
    try {
      return FeasibleSet::box(bound("lo"), bound("hi"));
    } catch (const DomainError& e) {
      throw ConfigError("config field '" + field + "': " + e.what());
    }
  }
  if (type == "l2-ball") {
    Vector center = j.contains("center") ? vector_from_json(j.at("center"), field + ".center")
                                         : Vector(Vector::Zero(dim));
    if (center.size() != dim) throw ConfigError("config field '" + field + ".center' has wrong dimension");
    const double r = number(require(j, "radius", field), field + ".radius");
    if (!(r > 0)) throw ConfigError("config field '" + field + ".radius' must be positive");
    return FeasibleSet::ball(std::move(center), r);
  }
  throw ConfigError("config field '" + field + ".type' has unknown value '" + type + "'");
}

json params_to_json(const SolverParams& p) {
  return {{"p", p.p}, {"c", p.c}, {"alpha", p.alpha}, {"beta", p.beta}, {"N", p.N}};
}

json constants_to_json(const Constants& k) {
  return {{"sigma1", k.sigma1},     {"sigma2", k.sigma2}, {"sigma3", k.sigma3},
          {"sigma3_multi", k.sigma3_multi}, {"L_d", k.L_d}, {"kappa", k.kappa},
          {"lambda_bar", k.lambda_bar}};
}

json finite_max_to_json(const FiniteMaxProblem& fm) {
  if (!fm.quadratics()) throw ConfigError("serialize: only quadratic finite-max instances are serializable");
  json comps = json::array();
  for (const auto& q : *fm.quadratics())
    comps.push_back({{"A", matrix_to_json(q.A)}, {"b", vector_to_json(q.b)}, {"c", q.c}});
  const MinMaxProblem& p = fm.problem();
  json j = {{"type", "finite-max"},
            {"id", p.id},
            {"n", p.n},
            {"m", p.m},
            {"components", std::move(comps)},
            {"X", feasible_set_to_json(p.X)},
            {"region", region_to_json(p.operating_region)},
            {"L", p.lipschitz_L}};
  if (fm.seed) j["seed"] = *fm.seed;
  if (fm.default_x0) j["x0"] = vector_to_json(*fm.default_x0);
  if (fm.reference) j["reference"] = reference_to_json(*fm.reference);
  if (p.lower_bound) j["lower_bound"] = *p.lower_bound;
  if (p.blocks) j["blocks"] = static_cast<int>(p.blocks->size());
  return j;
}

json instance_to_json(const Instance& inst) {
  if (inst.finite_max && inst.finite_max->quadratics()) {
    json j = finite_max_to_json(*inst.finite_max);
    j["init"] = {{"x", vector_to_json(inst.x0)}, {"y", vector_to_json(inst.y0)}};
    if (inst.z0) j["init"]["z"] = vector_to_json(*inst.z0);
    return j;
  }
  return inst.description;
}

Instance instance_from_json(const json& spec) {
  if (!spec.is_object()) throw ConfigError("config field 'problem' must be an object");
  if (spec.contains("path")) {
    const std::string path = spec.at("path").get<std::string>();
    std::ifstream in(path);
    if (!in) throw ConfigError("config field 'problem.path': cannot read '" + path + "'");
    json loaded;
    try {
      in >> loaded;
    } catch (const json::exception& e) {
      throw ConfigError("config field 'problem.path': invalid JSON in '" + path + "': " + e.what());
    }
    return instance_from_json(loaded);
  }

  const std::string type = require(spec, "type", "problem").get<std::string>();
  Instance inst;
  if (type == "zero") {
    const Index n = spec.contains("n") ? integer(spec.at("n"), "problem.n") : 1;
    const Index m = spec.contains("m") ? integer(spec.at("m"), "problem.m") : 1;
    inst.problem = make_zero_problem(n, m);
    inst.x0 = Vector::Zero(n);
    inst.y0 = inst.problem.proj_Y(Vector::Zero(m));
    inst.description = spec;
  } else if (type == "bilinear") {
    const Matrix A = matrix_from_json(require(spec, "A", "problem"), "problem.A");
    const Vector b = spec.contains("b") ? vector_from_json(spec.at("b"), "problem.b") : Vector(Vector::Zero(A.rows()));
    const Vector d = spec.contains("d") ? vector_from_json(spec.at("d"), "problem.d") : Vector(Vector::Zero(A.cols()));
    FeasibleSet X = feasible_set_from_json(spec.value("X", json()), A.rows(), "problem.X");
    FeasibleSet Y = feasible_set_from_json(spec.value("Y", json()), A.cols(), "problem.Y");
    std::optional<Region> region;
    if (spec.contains("region")) region = region_from_json(spec.at("region"), A.rows(), "problem.region");
    inst.problem = make_bilinear(A, b, d, std::move(X), std::move(Y), region);
    inst.x0 = Vector::Zero(A.rows());
    inst.y0 = inst.problem.proj_Y(Vector::Zero(A.cols()));
    inst.description = spec;
  } else if (type == "finite-max-quadratic") {
    const Index n = integer(require(spec, "n", "problem"), "problem.n");
    const Index m = integer(require(spec, "m", "problem"), "problem.m");
    const long seed = spec.contains("seed") ? integer(spec.at("seed"), "problem.seed") : 0;
    const FiniteMaxSpec gen = generator_from_json(spec.value("generator", json()));
    json desc = {{"type", type}, {"n", n}, {"m", m}, {"seed", seed}, {"generator", generator_to_json(gen)}};
    inst = from_finite_max(make_finite_max_quadratic(n, m, static_cast<std::uint64_t>(seed), gen), desc);
  } else if (type == "finite-max") {
    const json& comps = require(spec, "components", "problem");
    if (!comps.is_array() || comps.empty()) throw ConfigError("config field 'problem.components' must be a non-empty array");
    std::vector<QuadraticMap> quads;
    for (std::size_t i = 0; i < comps.size(); ++i) {
      const std::string f = "problem.components[" + std::to_string(i) + "]";
      QuadraticMap q;
      q.A = matrix_from_json(require(comps[i], "A", f), f + ".A");
      q.b = comps[i].contains("b") ? vector_from_json(comps[i].at("b"), f + ".b") : Vector(Vector::Zero(q.A.rows()));
      q.c = comps[i].contains("c") ? number(comps[i].at("c"), f + ".c") : 0.0;
      quads.push_back(std::move(q));
    }
    const Index n = quads.front().A.rows();
    FeasibleSet X = feasible_set_from_json(spec.value("X", json()), n, "problem.X");
    Region region = spec.contains("region") && !spec.at("region").is_null()
                        ? region_from_json(spec.at("region"), n, "problem.region")
                        : Region::cube(n, 3.0);
    std::optional<double> L;
    if (spec.contains("L")) L = number(spec.at("L"), "problem.L");
    FiniteMaxProblem fm(spec.value("id", std::string("finite-max")), std::move(quads), std::move(X),
                        std::move(region), L);
    if (spec.contains("seed")) fm.seed = static_cast<std::uint64_t>(integer(spec.at("seed"), "problem.seed"));
    if (spec.contains("x0")) fm.default_x0 = vector_from_json(spec.at("x0"), "problem.x0");
    if (spec.contains("reference")) {
      const json& r = spec.at("reference");
      fm.reference = ReferenceSolution{vector_from_json(require(r, "x", "problem.reference"), "problem.reference.x"),
                                       vector_from_json(require(r, "y", "problem.reference"), "problem.reference.y"),
                                       number(require(r, "value", "problem.reference"), "problem.reference.value")};
    }
    if (spec.contains("lower_bound")) fm.set_lower_bound(number(spec.at("lower_bound"), "problem.lower_bound"));
    inst = from_finite_max(std::move(fm), spec);
  } else if (type == "hand-two" || type == "hand-three" || type == "degenerate-pair") {
    FiniteMaxProblem fm = type == "hand-two"     ? make_hand_two_component()
                          : type == "hand-three" ? make_hand_three_component()
                                                 : make_degenerate_pair();
    inst = from_finite_max(std::move(fm), spec);
  } else if (type == "robust-regression") {
    const Matrix features = matrix_from_json(require(spec, "features", "problem"), "problem.features");
    const Vector labels = vector_from_json(require(spec, "labels", "problem"), "problem.labels");
    Region region = spec.contains("region") ? region_from_json(spec.at("region"), features.cols(), "problem.region")
                                            : Region::cube(features.cols(), 3.0);
    inst = from_finite_max(make_robust_regression(features, labels, std::move(region)), spec);
  } else {
    throw ConfigError("config field 'problem.type' has unknown value '" + type + "'");
  }

  if (spec.contains("blocks")) {
    const long count = integer(spec.at("blocks"), "problem.blocks");
    if (inst.finite_max) {
      auto fm = std::make_shared<FiniteMaxProblem>(*inst.finite_max);
      fm->set_blocks(static_cast<int>(count));
      inst.problem = fm->problem();
      inst.finite_max = std::move(fm);
    } else {
      if (count < 1 || count > inst.problem.n) throw ConfigError("config field 'problem.blocks' out of range");
      std::vector<BlockRange> blocks;
      Index start = 0;
      for (long b = 0; b < count; ++b) {
        const Index size = inst.problem.n / count + (b < inst.problem.n % count ? 1 : 0);
        blocks.push_back({start, size});
        start += size;
      }
      inst.problem.blocks = std::move(blocks);
      inst.problem.validate();
    }
  }
  apply_init(inst, spec);
  return inst;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const IterateTrace& trace) {
  out << "t,rx,ry,ry_kind,rz,f,psi,phi,wall_ns,residual\n";
  auto opt = [&](const std::optional<double>& v) {
    if (v) out << format_double(*v);
  };
  for (const auto& r : trace.records) {
    out << r.t << ',' << format_double(r.rx) << ',' << format_double(r.ry) << ','
        << to_string(r.ry_kind) << ',';
    opt(r.rz);
    out << ',' << format_double(r.f) << ',';
    opt(r.psi);
    out << ',';
    opt(r.phi);
    out << ',';
    if (r.wall_ns > 0) out << r.wall_ns;
    out << ',' << format_double(r.residual) << '\n';
  }
}

IterateTrace read_trace_csv(std::istream& in) {
  IterateTrace trace;
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,rx,ry", 0) != 0)
    throw ConfigError("trace csv: missing header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 10) cells.emplace_back();
    auto opt = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::stod(s);
    };
    TraceRecord r;
    r.t = std::stol(cells[0]);
    r.rx = std::stod(cells[1]);
    r.ry = std::stod(cells[2]);
    r.ry_kind = cells[3] == "exact" ? ResidualKind::exact
                : cells[3] == "step" ? ResidualKind::step
                                     : ResidualKind::surrogate;
    r.rz = opt(cells[4]);
    r.f = std::stod(cells[5]);
    r.psi = opt(cells[6]);
    r.phi = opt(cells[7]);
    r.wall_ns = cells[8].empty() ? 0 : std::stoll(cells[8]);
    r.residual = std::stod(cells[9]);
    trace.records.push_back(r);
  }
  return trace;
}

}  // namespace sgda
