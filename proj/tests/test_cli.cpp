#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "sgda_cli_test";

fs::path write_config(const std::string& name, const json& doc) {
  fs::create_directories(kRoot);
  const fs::path path = kRoot / name;
  std::ofstream(path) << doc.dump(2);
  return path;
}

struct Outcome {
  int code;
  std::string err;
};

Outcome cli(const std::string& args) {
  const fs::path err = kRoot / "stderr.txt";
  fs::create_directories(kRoot);
  const std::string cmd = std::string(SGDA_CLI_PATH) + " " + args + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string read(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(read(p)); }

// Trace text with the wall-clock column blanked.
std::string without_wall(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream cells(line);
    std::string cell;
    int k = 0;
    while (std::getline(cells, cell, ',')) {
      if (k != 8) out << cell;
      out << ',';
      ++k;
    }
    out << '\n';
  }
  return out.str();
}

const json kBilinear = {{"type", "bilinear"},
                        {"A", {{1.0}}},
                        {"Y", {{"type", "box"}, {"lo", -1}, {"hi", 1}}},
                        {"init", {{"x", {1.0}}, {"y", {1.0}}}}};

}  // namespace

TEST_CASE("zero objective run") {
  const auto cfg = write_config("zero.json", {{"problem", {{"type", "zero"}, {"n", 2}, {"m", 3}}},
                                              {"algorithm", "smoothed-gda"},
                                              {"horizon", {{"max_iter", 10}}}});
  const fs::path out = kRoot / "zero";
  REQUIRE(cli("run --config " + cfg.string() + " --out " + out.string()).code == 0);
  const std::string csv = read(out / "trace.csv");
  std::stringstream ss(csv);
  std::string header, row, extra;
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK_FALSE(static_cast<bool>(std::getline(ss, extra)));
  CHECK(header.rfind("t,rx,ry,ry_kind,rz,f,psi,phi,wall_ns", 0) == 0);
  CHECK(row.rfind("0,0,0,surrogate,0,", 0) == 0);
  const json summary = read_json(out / "summary.json");
  CHECK(summary["stop_reason"] == "tol-reached");
  CHECK(summary["final_residual"] == 0.0);
}

TEST_CASE("configuration errors exit with 1 and name the field") {
  const auto bad = write_config("bad.json", {{"problem", {{"type", "zero"}}}, {"algorithm", "sgd"}});
  const Outcome o = cli("run --config " + bad.string() + " --out " + (kRoot / "bad").string());
  CHECK(o.code == 1);
  CHECK(o.err.find("'algorithm'") != std::string::npos);

  const auto both = write_config("both.json", {{"problem", {{"type", "zero"}}},
                                               {"params", {{"auto", json::object()},
                                                           {"explicit", {{"c", 0.1}, {"alpha", 0.1}}}}}});
  const Outcome b = cli("run --config " + both.string() + " --out " + (kRoot / "both").string());
  CHECK(b.code == 1);
  CHECK(b.err.find("'params'") != std::string::npos);

  const auto stride = write_config("stride.json", {{"problem", {{"type", "zero"}}}, {"record", {{"stride", 0}}}});
  CHECK(cli("run --config " + stride.string() + " --out " + (kRoot / "s").string()).code == 1);

  std::ofstream(kRoot / "garbage.json") << "{not json";
  CHECK(cli("run --config " + (kRoot / "garbage.json").string() + " --out " + (kRoot / "g").string()).code == 1);
  CHECK(cli("run --config " + (kRoot / "missing.json").string() + " --out " + (kRoot / "g").string()).code == 1);
}

TEST_CASE("hand-solved instance converges to its solution") {
  const auto cfg = write_config("hand.json", {{"problem", {{"type", "hand-two"}}},
                                              {"algorithm", "smoothed-gda"},
                                              {"params", {{"auto", {{"safety", 0.99}}}}},
                                              {"horizon", {{"max_iter", 5000000}, {"tol", 1e-6}}},
                                              {"record", {{"stride", 1000}}}});
  const fs::path out = kRoot / "hand";
  REQUIRE(cli("run --config " + cfg.string() + " --out " + out.string()).code == 0);
  const json s = read_json(out / "summary.json");
  CHECK(s["stop_reason"] == "tol-reached");
  CHECK(std::abs(s["final_state"]["x"][0].get<double>()) < 1e-4);
  for (const char* key : {"p", "c", "alpha", "beta", "N"}) CHECK(s["params"].contains(key));
  for (const char* key : {"sigma1", "sigma2", "sigma3", "L_d", "kappa", "lambda_bar"})
    CHECK(s["constants"].contains(key));
  CHECK(s["certificate"]["u_norm"].get<double>() <=
        s["certificate"]["lambda_bar"].get<double>() * s["certificate"]["epsilon"].get<double>());
}

TEST_CASE("runs are reproducible and plots do not change numbers") {
  const auto cfg = write_config("repro.json", {{"problem", {{"type", "finite-max-quadratic"}, {"n", 5}, {"m", 3}}},
                                               {"seed", 12},
                                               {"horizon", {{"max_iter", 500}}},
                                               {"diagnostics", {{"mode", "potential"}, {"every", 50}}}});
  REQUIRE(cli("run --config " + cfg.string() + " --out " + (kRoot / "r1").string()).code == 0);
  REQUIRE(cli("run --config " + cfg.string() + " --out " + (kRoot / "r2").string() + " --svg").code == 0);
  CHECK(without_wall(read(kRoot / "r1" / "trace.csv")) == without_wall(read(kRoot / "r2" / "trace.csv")));
  CHECK(read(kRoot / "r1" / "summary.json") == read(kRoot / "r2" / "summary.json"));
  const std::string svg = read(kRoot / "r2" / "residuals.svg");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("href") == std::string::npos);
  CHECK(read_json(kRoot / "r1" / "trace.columns.json")["nondeterministic"][0] == "wall_ns");
}

TEST_CASE("numerical failure exits with 2") {
  json problem = kBilinear;
  problem["Y"] = {{"type", "whole-space"}};
  problem["region"] = {{"radius", 5.0}};
  const auto cfg = write_config("blowup.json", {{"problem", problem},
                                                {"algorithm", "gda"},
                                                {"params", {{"explicit", {{"c", 3.0}, {"alpha", 3.0}}}}},
                                                {"horizon", {{"max_iter", 100}}}});
  const fs::path out = kRoot / "blowup";
  CHECK(cli("run --config " + cfg.string() + " --out " + out.string()).code == 2);
  CHECK(read_json(out / "summary.json")["stop_reason"] == "region-violation");
}

TEST_CASE("compare separates GDA from the smoothed scheme") {
  const json horizon = {{"max_iter", 1000000}, {"tol", 1e-6}};
  const auto a = write_config("ca.json", {{"problem", kBilinear},
                                          {"algorithm", "gda"},
                                          {"params", {{"explicit", {{"c", 0.1}, {"alpha", 0.1}}}}},
                                          {"horizon", horizon},
                                          {"record", {{"timing", false}}}});
  const auto b = write_config("cb.json", {{"problem", kBilinear},
                                          {"algorithm", "smoothed-gda"},
                                          {"horizon", horizon},
                                          {"record", {{"timing", false}}}});
  const fs::path out = kRoot / "cmp";
  REQUIRE(cli("compare --config-a " + a.string() + " --config-b " + b.string() + " --out " + out.string()).code == 0);
  const json c = read_json(out / "comparison.json");
  CHECK(c["a"]["min_residual"].get<double>() > 0.5);
  CHECK(c["b"]["min_residual"].get<double>() <= 1e-6);
  CHECK(c["a"]["first_reach"]["1e-1"].is_null());
  CHECK_FALSE(c["b"]["first_reach"]["1e-6"].is_null());
  CHECK(fs::exists(out / "comparison.svg"));

  const fs::path same = kRoot / "cmp_same";
  REQUIRE(cli("compare --config-a " + b.string() + " --config-b " + b.string() + " --out " + same.string()).code == 0);
  const json s = read_json(same / "comparison.json");
  CHECK(s["a"]["curve"] == s["b"]["curve"]);

  json other = kBilinear;
  other["A"] = {{2.0}};
  const auto d = write_config("cd.json", {{"problem", other}, {"algorithm", "smoothed-gda"}, {"horizon", horizon}});
  CHECK(cli("compare --config-a " + a.string() + " --config-b " + d.string() + " --out " + out.string()).code == 1);
}

TEST_CASE("rate: synthetic injection, exclusions and seed count") {
  const auto syn = write_config("syn.json", {{"problem", {{"type", "zero"}}},
                                             {"synthetic", {{"exponent", -0.5}, {"length", 100000}}}});
  const fs::path out = kRoot / "rate_syn";
  REQUIRE(cli("rate --config " + syn.string() + " --seeds 0-3 --window 1000,100000 --out " + out.string()).code == 0);
  const json r = read_json(out / "rate.json");
  CHECK(std::abs(r["mean"].get<double>() + 0.5) < 1e-6);
  CHECK(r["used"] == 4);

  const auto deg = write_config("deg.json", {{"problem", {{"type", "degenerate-pair"}}}, {"horizon", {{"max_iter", 100}}}});
  const fs::path dout = kRoot / "rate_deg";
  REQUIRE(cli("rate --config " + deg.string() + " --seeds 0,1,2 --window 10,100 --out " + dout.string()).code == 0);
  const json d = read_json(dout / "rate.json");
  for (const auto& s : d["seeds"]) CHECK(s["excluded"] == "assumption check failed");
  CHECK(d["used"] == 0);

  CHECK(cli("rate --config " + syn.string() + " --seeds 0,1 --window 10,100 --out " + out.string()).code == 1);
}
