#include "msgfem/config.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <functional>
#include <map>
#include <sstream>

#include "msgfem/io.hpp"

namespace msgfem {

ConfigError::ConfigError(int line, std::string key, const std::string& message)
    : std::invalid_argument(line > 0 ? "line " + std::to_string(line) + ", key '" + key + "': " + message
                                     : "key '" + key + "': " + message),
      line_(line), key_(std::move(key)) {}

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize(a) == serialize(b); }

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& v, int line, const std::string& key) {
  T out{};
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError(line, key, "cannot parse '" + v + "' as a number");
  return out;
}

double parse_double(const std::string& v, int line, const std::string& key) {
  if (v == "inf")
    return std::numeric_limits<double>::infinity();
  return parse_number<double>(v, line, key);
}

bool parse_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1")
    return true;
  if (v == "false" || v == "0")
    return false;
  throw ConfigError(line, key, "expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&, int, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  using K = CoefficientSpec::Kind;
  static const std::map<std::string, Setter> table{
      {"mesh_n", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.mesh_n = parse_number<int>(v, l, k); }},
      {"grid_m", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.grid_m = parse_number<int>(v, l, k); }},
      {"overlap", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.overlap = parse_number<int>(v, l, k); }},
      {"oversampling", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.oversampling = parse_number<int>(v, l, k); }},
      {"gamma0_sq", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.gamma0_sq = parse_double(v, l, k); }},
      {"coefficient",
       [](RunConfig& c, const std::string& v, int l, const std::string& k) {
         static const std::map<std::string, K> kinds{{"constant", K::constant}, {"checkerboard", K::checkerboard},
                                                     {"channels", K::channels}, {"log_uniform", K::log_uniform}};
         const auto it = kinds.find(v);
         if (it == kinds.end())
           throw ConfigError(l, k, "unknown coefficient kind '" + v + "'");
         c.coefficient.kind = it->second;
       }},
      {"coefficient_value", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.coefficient.value = parse_double(v, l, k); }},
      {"contrast", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.coefficient.contrast = parse_double(v, l, k); }},
      {"block", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.coefficient.block = parse_number<int>(v, l, k); }},
      {"channels", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.coefficient.count = parse_number<int>(v, l, k); }},
      {"nu_min", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.coefficient.nu_min = parse_double(v, l, k); }},
      {"nu_max", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.coefficient.nu_max = parse_double(v, l, k); }},
      {"seed", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.seed = parse_number<std::uint64_t>(v, l, k); }},
      {"source",
       [](RunConfig& c, const std::string& v, int l, const std::string& k) {
         if (v == "constant")
           c.source.kind = SourceSpec::Kind::constant;
         else if (v == "sine")
           c.source.kind = SourceSpec::Kind::sine;
         else
           throw ConfigError(l, k, "unknown source kind '" + v + "'");
       }},
      {"source_value", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.source.value = parse_double(v, l, k); }},
      {"coarse_rule",
       [](RunConfig& c, const std::string& v, int l, const std::string& k) {
         if (v == "fixed")
           c.coarse_rule.kind = CoarseRule::Kind::fixed;
         else if (v == "threshold")
           c.coarse_rule.kind = CoarseRule::Kind::threshold;
         else
           throw ConfigError(l, k, "unknown coarse rule '" + v + "'");
       }},
      {"coarse_n", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.coarse_rule.count = parse_number<int>(v, l, k); }},
      {"coarse_tau", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.coarse_rule.tau = parse_double(v, l, k); }},
      {"sweep_nj",
       [](RunConfig& c, const std::string& v, int l, const std::string& k) {
         c.sweep_nj.clear();
         std::stringstream ss(v);
         std::string item;
         while (std::getline(ss, item, ','))
           c.sweep_nj.push_back(parse_number<int>(trim(item), l, k));
       }},
      {"fit_modes", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.fit_modes = parse_number<int>(v, l, k); }},
      {"eigen_export", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.eigen_export = parse_number<int>(v, l, k); }},
      {"checks", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.checks = parse_bool(v, l, k); }},
      {"samples", [](RunConfig& c, const std::string& v, int l, const std::string& k) { c.samples = parse_number<int>(v, l, k); }},
      {"out_dir", [](RunConfig& c, const std::string& v, int, const std::string&) { c.out_dir = v; }},
  };
  return table;
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok)
    throw ConfigError(0, key, message);
}

} // namespace

void validate(const RunConfig& c) {
  require(c.mesh_n >= 1, "mesh_n", "mesh needs n >= 1");
  require(c.grid_m >= 1 && c.grid_m <= c.mesh_n, "grid_m", "decomposition needs 1 <= m <= mesh_n");
  require(c.overlap >= 2, "overlap", "decomposition needs overlap >= 2");
  require(c.oversampling >= 1, "oversampling", "decomposition needs oversampling >= 1");
  require(c.gamma0_sq > 0.0 && std::isfinite(c.gamma0_sq), "gamma0_sq", "penalty needs gamma0^2 > 0");
  const auto& k = c.coefficient;
  require(k.value > 0.0, "coefficient_value", "coefficient must be positive");
  require(k.contrast >= 1.0 && std::isfinite(k.contrast), "contrast", "contrast must be >= 1");
  using K = CoefficientSpec::Kind;
  require(k.block >= 1 && (k.kind != K::checkerboard || c.mesh_n % k.block == 0), "block",
          "checkerboard block must divide mesh_n");
  require(k.count >= 1 && (k.kind != K::channels || 2 * k.count <= c.mesh_n), "channels",
          "channels needs 1 <= count <= mesh_n / 2");
  require(k.nu_min > 0.0 && k.nu_max >= k.nu_min, "nu_min", "log_uniform needs 0 < nu_min <= nu_max");
  require(c.coarse_rule.count >= 0, "coarse_n", "coarse_n must be >= 0");
  require(c.coarse_rule.tau >= 0.0, "coarse_tau", "coarse_tau must be >= 0");
  for (int n : c.sweep_nj)
    require(n >= 0, "sweep_nj", "sweep entries must be >= 0");
  require(c.fit_modes >= 5, "fit_modes", "decay fit needs at least 5 modes");
  require(c.eigen_export >= 0, "eigen_export", "eigen_export must be >= 0");
  require(c.samples >= 1, "samples", "samples must be >= 1");
  require(!c.out_dir.empty(), "out_dir", "output directory must be set");
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string content = trim(raw.substr(0, raw.find('#')));
    if (content.empty())
      continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, content, "expected 'key = value'");
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end())
      throw ConfigError(line, key, "unknown key");
    if (!seen.emplace(key, line).second)
      throw ConfigError(line, key, "key given twice");
    if (value.empty() && key != "sweep_nj")
      throw ConfigError(line, key, "missing value");
    it->second(config, value, line, key);
  }
  try {
    validate(config);
  } catch (const ConfigError& e) {
    const auto it = seen.find(e.key());
    if (it == seen.end())
      throw;
    std::string message = e.what();
    message = message.substr(message.find(": ") + 2);
    throw ConfigError(it->second, e.key(), message);
  }
  return config;
}

std::string serialize(const RunConfig& c) {
  static const char* kinds[] = {"constant", "checkerboard", "channels", "log_uniform"};
  std::ostringstream os;
  os << "mesh_n = " << c.mesh_n << '\n'
     << "grid_m = " << c.grid_m << '\n'
     << "overlap = " << c.overlap << '\n'
     << "oversampling = " << c.oversampling << '\n'
     << "gamma0_sq = " << format_double(c.gamma0_sq) << '\n'
     << "coefficient = " << kinds[static_cast<int>(c.coefficient.kind)] << '\n'
     << "coefficient_value = " << format_double(c.coefficient.value) << '\n'
     << "contrast = " << format_double(c.coefficient.contrast) << '\n'
     << "block = " << c.coefficient.block << '\n'
     << "channels = " << c.coefficient.count << '\n'
     << "nu_min = " << format_double(c.coefficient.nu_min) << '\n'
     << "nu_max = " << format_double(c.coefficient.nu_max) << '\n'
     << "seed = " << c.seed << '\n'
     << "source = " << (c.source.kind == SourceSpec::Kind::sine ? "sine" : "constant") << '\n'
     << "source_value = " << format_double(c.source.value) << '\n'
     << "coarse_rule = " << (c.coarse_rule.kind == CoarseRule::Kind::threshold ? "threshold" : "fixed") << '\n'
     << "coarse_n = " << c.coarse_rule.count << '\n'
     << "coarse_tau = " << format_double(c.coarse_rule.tau) << '\n'
     << "sweep_nj =";
  for (std::size_t i = 0; i < c.sweep_nj.size(); ++i)
    os << (i ? "," : " ") << c.sweep_nj[i];
  os << '\n'
     << "fit_modes = " << c.fit_modes << '\n'
     << "eigen_export = " << c.eigen_export << '\n'
     << "checks = " << (c.checks ? "true" : "false") << '\n'
     << "samples = " << c.samples << '\n'
     << "out_dir = " << c.out_dir << '\n';
  return os.str();
}

} // namespace msgfem
