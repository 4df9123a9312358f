#include "wkam/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "wkam/error.hpp"

namespace wkam::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigurationError(path + ": " + what);
}

const json* member(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!ok.count(it.key())) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
}

const json& object_at(const json& parent, const std::string& key, const std::string& path) {
  const json* v = member(parent, key);
  if (!v) fail(path, "missing");
  if (!v->is_object()) fail(path, "must be an object");
  return *v;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "must be a number");
  return v.get<double>();
}

void read_positive(const json& obj, const char* key, const std::string& path, double& out) {
  if (const json* v = member(obj, key)) {
    out = number(*v, path + "." + key);
    if (!(out > 0.0)) fail(path + "." + key, "must be positive");
  }
}

void read_int(const json& obj, const char* key, const std::string& path, int& out, int minimum) {
  if (const json* v = member(obj, key)) {
    if (!v->is_number_integer()) fail(path + "." + key, "must be an integer");
    const long long x = v->get<long long>();
    if (x < minimum || x > 1'000'000'000LL) fail(path + "." + key, "must be >= " + std::to_string(minimum));
    out = static_cast<int>(x);
  }
}

void read_seed(const json& v, const std::string& path, std::uint64_t& out) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    fail(path, "must be a nonnegative integer");
  out = v.get<std::uint64_t>();
}

std::vector<double> eps_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "must be a nonempty array");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double e = number(v[i], path + "[" + std::to_string(i) + "]");
    if (!(e > 0.0)) fail(path, "entries must be positive");
    if (!out.empty() && !(e < out.back())) fail(path, "must be strictly decreasing");
    out.push_back(e);
  }
  return out;
}

Potential potential(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "must be an object");
  check_keys(v, path, {"terms"});
  const json* terms = member(v, "terms");
  if (!terms) fail(path + ".terms", "missing");
  if (!terms->is_array()) fail(path + ".terms", "must be an array");
  std::vector<PotentialTerm> out;
  for (std::size_t i = 0; i < terms->size(); ++i) {
    const std::string tp = path + ".terms[" + std::to_string(i) + "]";
    const json& t = (*terms)[i];
    if (!t.is_array() || (t.size() != 3 && t.size() != 4))
      fail(tp, "must be [freq, c_cos, c_sin] or [freq_x, freq_t, c_cos, c_sin]");
    const std::size_t nf = t.size() - 2;
    PotentialTerm term;
    for (std::size_t k = 0; k < nf; ++k)
      if (!t[k].is_number_integer()) fail(tp, "frequencies must be integers");
    term.freq_x = t[0].get<int>();
    term.freq_t = nf == 2 ? t[1].get<int>() : 0;
    term.c_cos = number(t[nf], tp);
    term.c_sin = number(t[nf + 1], tp);
    out.push_back(term);
  }
  return Potential(std::move(out));
}

}  // namespace

bool OutputConfig::csv() const { return std::find(formats.begin(), formats.end(), "csv") != formats.end(); }
bool OutputConfig::json() const { return std::find(formats.begin(), formats.end(), "json") != formats.end(); }

HamiltonianModel ExperimentConfig::build_model() const {
  switch (model.family) {
    case Family::Mechanical: return HamiltonianModel::mechanical(model.potential, model.growth_constant);
    case Family::ShiftedKinetic:
      return HamiltonianModel::shifted_kinetic(model.potential, model.momentum_shift, model.growth_constant);
    case Family::TravelingWave:
      return HamiltonianModel::traveling_wave(model.potential, model.wind, model.growth_constant);
  }
  throw ConfigurationError("model.family: unknown");
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) fail("<root>", "must be an object");
  check_keys(doc, "", {"model", "grid", "numerics", "sweep", "stochastic", "example", "output"});
  ExperimentConfig c;
  c.raw = doc;

  const json& m = object_at(doc, "model", "model");
  check_keys(m, "model", {"family", "potential", "momentum_shift", "wind", "growth_constant"});
  const json* fam = member(m, "family");
  if (!fam || !fam->is_string()) fail("model.family", "must be a string");
  try {
    c.model.family = parse_family(fam->get<std::string>());
  } catch (const ConfigurationError& e) {
    fail("model.family", e.what());
  }
  if (const json* p = member(m, "potential")) c.model.potential = potential(*p, "model.potential");
  if (const json* v = member(m, "momentum_shift")) c.model.momentum_shift = number(*v, "model.momentum_shift");
  read_int(m, "wind", "model", c.model.wind, 1);
  read_positive(m, "growth_constant", "model", c.model.growth_constant);
  if (c.model.family == Family::TravelingWave && !c.model.potential.period_divides(c.model.wind))
    fail("model.potential", "must be 1/wind-periodic for TravelingWave");
  if (c.model.family == Family::TravelingWave && c.model.potential.time_dependent())
    fail("model.potential", "TravelingWave takes a potential of y only");

  if (const json* g = member(doc, "grid")) {
    if (!g->is_object()) fail("grid", "must be an object");
    check_keys(*g, "grid", {"nx", "nt"});
    read_int(*g, "nx", "grid", c.grid.nx, 8);
    read_int(*g, "nt", "grid", c.grid.nt, 2);
  }

  if (const json* n = member(doc, "numerics")) {
    if (!n->is_object()) fail("numerics", "must be an object");
    check_keys(*n, "numerics", {"vmax", "cell_tol", "barrier_tol", "shoot_tol", "slope_tol", "grid_tol", "aubry_tol",
                                "fd_tol", "limit_tol", "max_periods", "seeds"});
    auto& nc = c.numerics;
    read_positive(*n, "vmax", "numerics", nc.vmax);
    read_positive(*n, "cell_tol", "numerics", nc.cell_tol);
    read_positive(*n, "barrier_tol", "numerics", nc.barrier_tol);
    read_positive(*n, "shoot_tol", "numerics", nc.shoot_tol);
    read_positive(*n, "slope_tol", "numerics", nc.slope_tol);
    read_positive(*n, "grid_tol", "numerics", nc.grid_tol);
    read_positive(*n, "aubry_tol", "numerics", nc.aubry_tol);
    read_positive(*n, "fd_tol", "numerics", nc.fd_tol);
    read_positive(*n, "limit_tol", "numerics", nc.limit_tol);
    read_int(*n, "max_periods", "numerics", nc.max_periods, 1);
    if (const json* s = member(*n, "seeds")) {
      if (!s->is_array()) fail("numerics.seeds", "must be an array");
      for (std::size_t i = 0; i < s->size(); ++i) {
        std::uint64_t v = 0;
        read_seed((*s)[i], "numerics.seeds[" + std::to_string(i) + "]", v);
        nc.seeds.push_back(v);
      }
    }
  }

  if (const json* s = member(doc, "sweep")) {
    if (!s->is_object()) fail("sweep", "must be an object");
    check_keys(*s, "sweep", {"eps_list"});
    if (const json* e = member(*s, "eps_list")) c.sweep.eps_list = eps_list(*e, "sweep.eps_list");
  }

  if (!c.numerics.seeds.empty()) c.stochastic.seed = c.numerics.seeds.front();
  if (const json* s = member(doc, "stochastic")) {
    if (!s->is_object()) fail("stochastic", "must be an object");
    check_keys(*s, "stochastic", {"n_paths", "dt", "delta", "kappa", "seed", "eps_list", "lax_epsilon", "lax_kappa",
                                  "lax_paths", "lax_dt"});
    auto& sc = c.stochastic;
    read_int(*s, "n_paths", "stochastic", sc.n_paths, 2);
    read_positive(*s, "dt", "stochastic", sc.dt);
    read_positive(*s, "delta", "stochastic", sc.delta);
    if (sc.delta >= 0.5) fail("stochastic.delta", "must be below 1/2");
    read_positive(*s, "kappa", "stochastic", sc.kappa);
    if (const json* v = member(*s, "seed")) read_seed(*v, "stochastic.seed", sc.seed);
    if (const json* e = member(*s, "eps_list")) sc.eps_list = eps_list(*e, "stochastic.eps_list");
    read_positive(*s, "lax_epsilon", "stochastic", sc.lax_epsilon);
    read_positive(*s, "lax_kappa", "stochastic", sc.lax_kappa);
    read_int(*s, "lax_paths", "stochastic", sc.lax_paths, 2);
    read_positive(*s, "lax_dt", "stochastic", sc.lax_dt);
  }

  if (const json* e = member(doc, "example")) {
    if (!e->is_object()) fail("example", "must be an object");
    check_keys(*e, "example", {"k", "potential", "grid"});
    c.example.enabled = true;
    read_int(*e, "k", "example", c.example.k, 1);
    const json* p = member(*e, "potential");
    if (!p) fail("example.potential", "missing");
    c.example.potential = potential(*p, "example.potential");
    if (!c.example.potential.period_divides(c.example.k)) fail("example.potential", "must be 1/k-periodic");
    if (const json* g = member(*e, "grid")) {
      if (!g->is_object()) fail("example.grid", "must be an object");
      check_keys(*g, "example.grid", {"nx", "nt"});
      read_int(*g, "nx", "example.grid", c.example.grid.nx, 8);
      read_int(*g, "nt", "example.grid", c.example.grid.nt, 2);
    }
  } else if (c.model.family == Family::TravelingWave) {
    c.example.enabled = true;
    c.example.k = c.model.wind;
    c.example.potential = c.model.potential;
    c.example.grid = c.grid;
  }

  if (const json* o = member(doc, "output")) {
    if (!o->is_object()) fail("output", "must be an object");
    check_keys(*o, "output", {"directory", "formats"});
    if (const json* d = member(*o, "directory")) {
      if (!d->is_string()) fail("output.directory", "must be a string");
      c.output.directory = d->get<std::string>();
    }
    if (const json* f = member(*o, "formats")) {
      if (!f->is_array()) fail("output.formats", "must be an array");
      c.output.formats.clear();
      for (const auto& x : *f) {
        if (!x.is_string() || (x != "csv" && x != "json")) fail("output.formats", "entries must be \"csv\" or \"json\"");
        c.output.formats.push_back(x.get<std::string>());
      }
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("config: cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigurationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (seed) {
    if (!doc.is_object()) fail("<root>", "must be an object");
    doc["stochastic"]["seed"] = *seed;
  }
  return parse_config(doc);
}

}  // namespace wkam::cli
