#include "cvmdi/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "cvmdi/error.hpp"

namespace cvmdi {
namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"channel", {"l_ac_km", "l_bc_km", "alpha_db_per_km", "eps1_snu", "eps2_snu"}},
      {"modulation", {"v_a_snu", "v_b_snu"}},
      {"reconciliation", {"beta"}},
      {"finite",
       {"n_total", "est_fraction", "eps_pe", "eps_smooth", "eps_pa", "include_variance_intervals",
        "iab_at_worst"}},
      {"detector", {"eta", "v_el_snu", "eta_halfwidth", "v_el_halfwidth"}},
      {"mode", {"mode", "seed"}},
  };
  return s;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Document = std::map<std::string, std::map<std::string, Entry>>;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

void put(Document& doc, const std::string& section, const std::string& key,
         const std::string& value, int line, bool allow_replace) {
  const auto sec = schema().find(section);
  if (sec == schema().end()) {
    throw ConfigError("unknown section [" + section + "]", line, section);
  }
  if (!sec->second.count(key)) {
    throw ConfigError("unknown key '" + key + "' in [" + section + "]", line, key);
  }
  auto& slot = doc[section];
  if (!allow_replace && slot.count(key)) {
    throw ConfigError("duplicate key '" + key + "' in [" + section + "]", line, key);
  }
  slot[key] = Entry{value, line};
}

const Entry* find(const Document& doc, const std::string& section, const std::string& key) {
  const auto sec = doc.find(section);
  if (sec == doc.end()) return nullptr;
  const auto it = sec->second.find(key);
  return it == sec->second.end() ? nullptr : &it->second;
}

double to_double(const Entry& e, const std::string& key) {
  const char* begin = e.value.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE) {
    throw ConfigError("value '" + e.value + "' for '" + key + "' is not a number", e.line, key);
  }
  return v;
}

double number(const Document& doc, const std::string& section, const std::string& key) {
  const Entry* e = find(doc, section, key);
  if (!e) throw ConfigError("missing required key '" + key + "' in [" + section + "]", 0, key);
  return to_double(*e, key);
}

double number_or(const Document& doc, const std::string& section, const std::string& key,
                 double fallback) {
  const Entry* e = find(doc, section, key);
  return e ? to_double(*e, key) : fallback;
}

bool boolean_or(const Document& doc, const std::string& section, const std::string& key,
                bool fallback) {
  const Entry* e = find(doc, section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  throw ConfigError("value '" + e->value + "' for '" + key + "' is not a boolean", e->line, key);
}

ScenarioConfig build(const Document& doc) {
  ScenarioConfig cfg;
  ProtocolParams& p = cfg.scenario.protocol;
  FiniteSizeParams& fs = cfg.scenario.finite;
  EstimationPolicy& policy = cfg.scenario.policy;

  p.l_ac = number(doc, "channel", "l_ac_km");
  p.l_bc = number(doc, "channel", "l_bc_km");
  p.alpha = number_or(doc, "channel", "alpha_db_per_km", 0.2);
  p.eps1 = number(doc, "channel", "eps1_snu");
  p.eps2 = number(doc, "channel", "eps2_snu");
  p.v_a = number(doc, "modulation", "v_a_snu");
  p.v_b = number_or(doc, "modulation", "v_b_snu", p.v_a);
  p.beta = number(doc, "reconciliation", "beta");

  fs.n_total = number(doc, "finite", "n_total");
  fs.est_fraction = number_or(doc, "finite", "est_fraction", fs.est_fraction);
  fs.eps_pe = number_or(doc, "finite", "eps_pe", fs.eps_pe);
  fs.eps_smooth = number_or(doc, "finite", "eps_smooth", fs.eps_smooth);
  fs.eps_pa = number_or(doc, "finite", "eps_pa", fs.eps_pa);
  policy.include_variance_intervals =
      boolean_or(doc, "finite", "include_variance_intervals", policy.include_variance_intervals);
  policy.iab_at_worst = boolean_or(doc, "finite", "iab_at_worst", policy.iab_at_worst);

  if (doc.count("detector")) {
    p.detector = DetectorModel{number(doc, "detector", "eta"),
                               number_or(doc, "detector", "v_el_snu", 0.0)};
    policy.eta_halfwidth = number_or(doc, "detector", "eta_halfwidth", 0.0);
    policy.v_el_halfwidth = number_or(doc, "detector", "v_el_halfwidth", 0.0);
  }

  if (const Entry* e = find(doc, "mode", "mode")) {
    if (e->value == "theory") {
      cfg.mode = RunMode::kTheory;
    } else if (e->value == "montecarlo") {
      cfg.mode = RunMode::kMonteCarlo;
    } else {
      throw ConfigError("mode must be 'theory' or 'montecarlo', got '" + e->value + "'", e->line,
                        "mode");
    }
  }
  if (const Entry* e = find(doc, "mode", "seed")) {
    const bool digits = e->value.find_first_not_of("0123456789") == std::string::npos;
    errno = 0;
    const unsigned long long s = digits ? std::strtoull(e->value.c_str(), nullptr, 10) : 0;
    if (!digits || errno == ERANGE) {
      throw ConfigError("seed must be an unsigned 64-bit integer", e->line, "seed");
    }
    cfg.seed = s;
  }

  try {
    p.validate();
    fs.validate();
  } catch (const DomainError& err) {
    throw ConfigError(err.what());
  }
  if (policy.eta_halfwidth < 0.0 || policy.v_el_halfwidth < 0.0) {
    throw ConfigError("detector half-widths must be >= 0");
  }
  return cfg;
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
  Document doc;
  std::string section;
  std::string raw;
  int line = 0;
  bool any = false;
  while (std::getline(in, raw)) {
    ++line;
    std::string text = raw;
    if (const auto c = text.find_first_of("#;"); c != std::string::npos) text.erase(c);
    text = trim(text);
    if (text.empty()) continue;
    any = true;
    if (text.front() == '[') {
      if (text.back() != ']') throw ConfigError("malformed section header '" + text + "'", line);
      section = trim(text.substr(1, text.size() - 2));
      if (!schema().count(section)) {
        throw ConfigError("unknown section [" + section + "]", line, section);
      }
      doc[section];
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + text + "'", line);
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' outside any section", line, key);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line, key);
    put(doc, section, key, value, line, false);
  }
  if (!any && overrides.empty()) throw ConfigError("empty configuration");

  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    const auto dot = o.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ConfigError("override '" + o + "' is not of the form section.key=value");
    }
    const std::string sec = trim(o.substr(0, dot));
    const std::string key = trim(o.substr(dot + 1, eq - dot - 1));
    const std::string value = trim(o.substr(eq + 1));
    if (value.empty()) throw ConfigError("empty value in override '" + o + "'", 0, key);
    put(doc, sec, key, value, 0, true);
  }
  return build(doc);
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return parse_config(in, overrides);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what(), 0, e.key());
  }
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

ResultRow make_row(const std::string& variable, double value, const Scenario& scenario,
                   const KeyRateReport& report) {
  ResultRow r;
  r.variable = variable;
  r.value = value;
  r.l_ac_km = scenario.protocol.l_ac;
  r.l_bc_km = scenario.protocol.l_bc;
  r.v_a_snu = scenario.protocol.v_a;
  r.v_b_snu = scenario.protocol.v_b;
  r.n_total = scenario.asymptotic ? INFINITY : scenario.finite.n_total;
  r.beta = scenario.protocol.beta;
  r.i_ab = report.i_ab;
  r.chi_be_worst = report.chi_be_worst;
  r.delta_n = report.delta_n;
  r.k = report.k;
  r.status = to_string(report.status);
  r.worst_corner = report.worst_corner.code();
  return r;
}

const std::string& result_csv_header() {
  static const std::string h =
      "variable,value,l_ac_km,l_bc_km,v_a_snu,v_b_snu,n_total,beta,i_ab,chi_be_worst,delta_n,k,"
      "status,worst_corner";
  return h;
}

std::string format_row(const ResultRow& r) {
  std::string out = r.variable;
  for (double x : {r.value, r.l_ac_km, r.l_bc_km, r.v_a_snu, r.v_b_snu, r.n_total, r.beta, r.i_ab,
                   r.chi_be_worst, r.delta_n, r.k}) {
    out += ',';
    out += format_number(x);
  }
  out += ',' + r.status + ',' + r.worst_corner;
  return out;
}

void write_result_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << result_csv_header() << '\n';
  for (const auto& r : rows) out << format_row(r) << '\n';
}

std::vector<ResultRow> read_result_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != result_csv_header()) {
    throw ConfigError("result CSV: missing or unexpected header");
  }
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(trim(line));
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 14) throw ConfigError("result CSV: expected 14 columns", lineno);
    auto num = [&](int i) {
      char* end = nullptr;
      const double v = std::strtod(cells[i].c_str(), &end);
      if (end == cells[i].c_str() || *end != '\0') {
        throw ConfigError("result CSV: bad number '" + cells[i] + "'", lineno);
      }
      return v;
    };
    ResultRow r;
    r.variable = cells[0];
    r.value = num(1);
    r.l_ac_km = num(2);
    r.l_bc_km = num(3);
    r.v_a_snu = num(4);
    r.v_b_snu = num(5);
    r.n_total = num(6);
    r.beta = num(7);
    r.i_ab = num(8);
    r.chi_be_worst = num(9);
    r.delta_n = num(10);
    r.k = num(11);
    r.status = cells[12];
    r.worst_corner = cells[13];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace cvmdi
