#include "kss/json_io.hpp"

#include <cstdio>

#include "kss/errors.hpp"

namespace kss {
namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(where + "." + key + ": missing");
  return *it;
}

int integer_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_integer()) {
    throw ConfigError(where + "." + key + ": expected an integer");
  }
  return v.get<int>();
}

double number_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

const Json& array_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array");
  return v;
}

std::string indexed(const std::string& where, const char* key, std::size_t i) {
  return where + "." + key + "[" + std::to_string(i) + "]";
}

}  // namespace

MixedSpectrum spectrum_from_json(const Json& j, const std::string& where) {
  const Json& terms = array_field(j, "terms", where);
  std::vector<SpectrumTerm> out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string at = indexed(where, "terms", i);
    out.push_back({integer_field(terms[i], "p", at), number_field(terms[i], "w", at)});
  }
  return MixedSpectrum(std::move(out));
}

Json to_json(const MixedSpectrum& spectrum) {
  Json terms = Json::array();
  for (const auto& t : spectrum.terms()) {
    terms.push_back({{"p", t.degree}, {"w", t.weight}});
  }
  return {{"terms", terms}};
}

SystemSpec system_spec_from_json(const Json& j, const std::string& where) {
  const int n = integer_field(j, "N", where);
  const int k = integer_field(j, "K", where);
  const Json& spectra = array_field(j, "spectra", where);
  if (static_cast<int>(spectra.size()) != k) {
    throw ConfigError(where + ".spectra: has " + std::to_string(spectra.size()) +
                      " entries but K = " + std::to_string(k));
  }
  std::vector<MixedSpectrum> out;
  for (std::size_t i = 0; i < spectra.size(); ++i) {
    out.push_back(spectrum_from_json(spectra[i], indexed(where, "spectra", i)));
  }
  return SystemSpec(n, std::move(out));
}

Json to_json(const SystemSpec& spec) {
  Json spectra = Json::array();
  for (const auto& s : spec.spectra()) spectra.push_back(to_json(s));
  return {{"N", spec.sphere_dim()}, {"K", spec.equation_count()}, {"spectra", spectra}};
}

PolynomialSystem polynomial_system_from_json(const Json& j) {
  const std::string where = "system";
  const int n = integer_field(j, "N", where);
  const Json& equations = array_field(j, "equations", where);
  std::vector<Polynomial> polys;
  for (std::size_t k = 0; k < equations.size(); ++k) {
    const std::string at = indexed(where, "equations", k);
    if (!equations[k].is_array()) throw ConfigError(at + ": expected an array");
    std::vector<Monomial> terms;
    for (std::size_t i = 0; i < equations[k].size(); ++i) {
      const std::string term_at = at + "[" + std::to_string(i) + "]";
      const Json& alpha = array_field(equations[k][i], "alpha", term_at);
      Monomial m;
      for (const auto& e : alpha) {
        if (!e.is_number_integer()) throw ConfigError(term_at + ".alpha: expected integers");
        m.exponents.push_back(e.get<int>());
      }
      m.coefficient = number_field(equations[k][i], "c", term_at);
      terms.push_back(std::move(m));
    }
    polys.emplace_back(n + 1, std::move(terms));
  }
  std::uint64_t seed = 0;
  if (const auto it = j.find("seed"); it != j.end()) seed = it->get<std::uint64_t>();
  return PolynomialSystem(n, std::move(polys), seed);
}

Json to_json(const PolynomialSystem& system) {
  Json equations = Json::array();
  for (const auto& eq : system.equations()) {
    Json terms = Json::array();
    for (std::size_t i = 0; i < eq.size(); ++i) {
      const auto e = eq.exponents(i);
      terms.push_back({{"alpha", std::vector<int>(e.begin(), e.end())},
                       {"c", eq.coefficient(i)}});
    }
    equations.push_back(std::move(terms));
  }
  return {{"N", system.sphere_dim()},
          {"K", system.equation_count()},
          {"seed", system.seed()},
          {"equations", equations}};
}

Json to_json(const MomentReport& report) {
  return {{"first_moment", report.first_moment},
          {"equation_factors", report.equation_factors},
          {"volume_factor", report.volume_factor}};
}

Json to_json(const KacRiceReport& report) {
  Json nodes = Json::array();
  for (const auto& n : report.nodes) {
    nodes.push_back({{"r", n.r},
                     {"D_hat", n.d_hat},
                     {"D_se", n.d_se},
                     {"integrand", n.integrand},
                     {"weight", n.weight},
                     {"cumulative", n.cumulative}});
  }
  return {{"first_moment", report.first_moment},
          {"continuous_part", report.continuous_part},
          {"continuous_part_se", report.continuous_part_se},
          {"diagonal_atom", report.diagonal_atom},
          {"antipodal_atom", report.antipodal_atom},
          {"second_moment", report.second_moment},
          {"second_moment_se", report.second_moment_se},
          {"variance_ratio", report.variance_ratio},
          {"variance_ratio_se", report.variance_ratio_se},
          {"interval", {report.interval_lo, report.interval_hi}},
          {"quadrature_nodes", report.quadrature_nodes},
          {"samples_per_node", report.samples_per_node},
          {"seed", report.seed},
          {"nodes", nodes}};
}

Json to_json(const ZeroCountResult& result, bool with_roots) {
  Json j = {{"count", result.count},
            {"measure", result.measure},
            {"measure_se", result.measure_se},
            {"max_residual", result.max_residual},
            {"dedupe_radius", result.dedupe_radius},
            {"saturated", result.saturated},
            {"degenerate", result.degenerate},
            {"n_starts", result.n_starts},
            {"n_converged", result.n_converged}};
  if (with_roots) {
    Json roots = Json::array();
    for (const auto& r : result.roots) {
      roots.push_back(std::vector<double>(r.data(), r.data() + r.size()));
    }
    j["roots"] = roots;
  }
  return j;
}

Json to_json(const EmpiricalMoments& m) {
  return {{"n_trials", m.n_trials},
          {"n_used", m.n_used},
          {"mean", m.mean},
          {"variance", m.variance},
          {"std_error", m.std_error},
          {"second_moment", m.second_moment},
          {"second_moment_se", m.second_moment_se},
          {"normalized_variance", m.normalized_variance},
          {"expected", m.expected},
          {"saturated", m.saturated},
          {"degenerate", m.degenerate}};
}

std::string config_hash(const Json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kss
