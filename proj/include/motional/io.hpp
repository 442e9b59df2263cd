#pragma once

// File formats. States and densities are JSON {"dim", "re", "im"}
// (row-major for matrices); traces and tables are CSV with 17 significant
// digits so that seeded pipelines round-trip bit for bit.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "motional/decoherence.hpp"
#include "motional/fit.hpp"
#include "motional/fock.hpp"
#include "motional/forced.hpp"
#include "motional/signal.hpp"
#include "motional/tomography.hpp"

namespace motional {
namespace io {

using nlohmann::json;

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void require_keys(const json& j, std::initializer_list<const char*> keys,
                         const std::string& what) {
  for (const char* k : keys)
    if (!j.contains(k))
      throw std::invalid_argument(what + ": missing field '" + k + "'");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) known = true;
    if (!known)
      throw std::invalid_argument(what + ": unknown field '" + it.key() + "'");
  }
}

// ---- states ----

inline json state_to_json(const StateVector& s) {
  json j;
  j["dim"] = s.dim();
  std::vector<double> re(s.dim()), im(s.dim());
  for (int n = 0; n < s.dim(); ++n) {
    re[n] = s.amplitudes[n].real();
    im[n] = s.amplitudes[n].imag();
  }
  j["re"] = re;
  j["im"] = im;
  return j;
}

inline json density_to_json(const DensityMatrix& rho) {
  json j;
  const int d = rho.dim();
  j["dim"] = d;
  std::vector<double> re(d * d), im(d * d);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c) {
      re[r * d + c] = rho.entries(r, c).real();
      im[r * d + c] = rho.entries(r, c).imag();
    }
  j["re"] = re;
  j["im"] = im;
  return j;
}

// A {"dim","re","im"} file holds a state when the arrays have dim entries
// and a density when they have dim^2.
inline bool json_is_density(const json& j) {
  require_keys(j, {"dim", "re", "im"}, "state file");
  const int d = j.at("dim").get<int>();
  const std::size_t len = j.at("re").size();
  if (len == static_cast<std::size_t>(d)) return false;
  if (len == static_cast<std::size_t>(d) * static_cast<std::size_t>(d)) return true;
  throw std::invalid_argument("state file: re/im length matches neither dim nor dim^2");
}

inline StateVector state_from_json(const json& j) {
  require_keys(j, {"dim", "re", "im"}, "state file");
  const int d = j.at("dim").get<int>();
  if (d < 1) throw std::invalid_argument("state file: dim must be >= 1");
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (static_cast<int>(re.size()) != d || static_cast<int>(im.size()) != d)
    throw std::invalid_argument("state file: re/im must have dim entries");
  StateVector s{Eigen::VectorXcd(d)};
  for (int n = 0; n < d; ++n) s.amplitudes[n] = cxd(re[n], im[n]);
  return s;
}

inline DensityMatrix density_from_json(const json& j) {
  require_keys(j, {"dim", "re", "im"}, "density file");
  const int d = j.at("dim").get<int>();
  if (d < 1) throw std::invalid_argument("density file: dim must be >= 1");
  const auto re = j.at("re").get<std::vector<double>>();
  const auto im = j.at("im").get<std::vector<double>>();
  if (re.size() != static_cast<std::size_t>(d) * d || im.size() != re.size())
    throw std::invalid_argument("density file: re/im must have dim^2 entries");
  DensityMatrix rho{Eigen::MatrixXcd(d, d)};
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      rho.entries(r, c) = cxd(re[r * d + c], im[r * d + c]);
  return rho;
}

inline json spin_motion_to_json(const SpinMotionState& s) {
  json j;
  j["dim"] = s.dim();
  std::vector<double> dre(s.dim()), dim_(s.dim()), ure(s.dim()), uim(s.dim());
  for (int n = 0; n < s.dim(); ++n) {
    dre[n] = s.down[n].real();
    dim_[n] = s.down[n].imag();
    ure[n] = s.up[n].real();
    uim[n] = s.up[n].imag();
  }
  j["down_re"] = dre;
  j["down_im"] = dim_;
  j["up_re"] = ure;
  j["up_im"] = uim;
  return j;
}

// ---- force profiles ----

inline json force_to_json(const ForceProfile& p) {
  json j;
  switch (p.kind) {
    case ForceProfile::Kind::Constant:
      j["kind"] = "constant";
      j["value"] = p.value;
      break;
    case ForceProfile::Kind::Sinusoid:
      j["kind"] = "sinusoid";
      j["amplitude"] = p.amplitude;
      j["frequency"] = p.frequency;
      j["phase"] = p.phase;
      break;
    case ForceProfile::Kind::Table:
      j["kind"] = "table";
      j["breakpoints"] = p.breakpoints;
      j["values"] = p.values;
      break;
  }
  return j;
}

inline ForceProfile force_from_json(const json& j) {
  if (!j.contains("kind"))
    throw std::invalid_argument("force profile: missing field 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    require_keys(j, {"kind", "value"}, "force profile (constant)");
    return ForceProfile::constant(j.at("value").get<double>());
  }
  if (kind == "sinusoid") {
    if (j.contains("phase"))
      require_keys(j, {"kind", "amplitude", "frequency", "phase"},
                   "force profile (sinusoid)");
    else
      require_keys(j, {"kind", "amplitude", "frequency"},
                   "force profile (sinusoid)");
    return ForceProfile::sinusoid(j.at("amplitude").get<double>(),
                                  j.at("frequency").get<double>(),
                                  j.value("phase", 0.0));
  }
  if (kind == "table") {
    require_keys(j, {"kind", "breakpoints", "values"}, "force profile (table)");
    return ForceProfile::table(j.at("breakpoints").get<std::vector<double>>(),
                               j.at("values").get<std::vector<double>>());
  }
  throw std::invalid_argument("force profile: unknown kind '" + kind + "'");
}

// ---- fit results ----

inline json fit_to_json(const FitResult& r) {
  json params = json::object();
  json se = json::object();
  for (std::size_t i = 0; i < r.param_names.size(); ++i) {
    params[r.param_names[i]] = r.params[static_cast<int>(i)];
    const int k = static_cast<int>(i);
    se[r.param_names[i]] =
        r.covariance.size() > 0 ? std::sqrt(std::max(0.0, r.covariance(k, k))) : 0.0;
  }
  json j;
  j["params"] = params;
  j["stderr"] = se;
  j["residual_norm"] = r.residual_norm;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  if (!r.active_constraints.empty()) j["active_constraints"] = r.active_constraints;
  return j;
}

// ---- CSV ----

inline std::string trace_to_csv(const SignalTrace& tr) {
  std::string out = tr.has_shots() ? "abscissa,value,shots\n" : "abscissa,value\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    out += fmt17(tr.abscissa[i]);
    out += ',';
    out += fmt17(tr.values[i]);
    if (tr.has_shots()) {
      out += ',';
      out += std::to_string(tr.shots[i]);
    }
    out += '\n';
  }
  return out;
}

namespace detail_csv {

inline std::vector<std::vector<std::string>> parse(const std::string& text,
                                                   const std::string& header,
                                                   const std::string& alt_header = "") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header && (alt_header.empty() || line != alt_header))
    throw std::invalid_argument("csv: expected header '" + header + "', got '" +
                                line + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

inline double num(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("csv: bad number '" + s + "'");
  return v;
}

}  // namespace detail_csv

inline SignalTrace trace_from_csv(const std::string& text) {
  const auto rows =
      detail_csv::parse(text, "abscissa,value", "abscissa,value,shots");
  SignalTrace tr;
  for (const auto& r : rows) {
    if (r.size() < 2 || r.size() > 3)
      throw std::invalid_argument("trace csv: expected 2 or 3 columns");
    tr.abscissa.push_back(detail_csv::num(r[0]));
    tr.values.push_back(detail_csv::num(r[1]));
    if (r.size() == 3) tr.shots.push_back(std::lround(detail_csv::num(r[2])));
  }
  if (!tr.shots.empty() && tr.shots.size() != tr.abscissa.size())
    throw std::invalid_argument("trace csv: ragged shots column");
  tr.validate();
  return tr;
}

inline std::string populations_to_csv(const Eigen::VectorXd& pops) {
  std::string out = "n,p\n";
  for (int n = 0; n < pops.size(); ++n) {
    out += std::to_string(n);
    out += ',';
    out += fmt17(pops[n]);
    out += '\n';
  }
  return out;
}

inline Eigen::VectorXd populations_from_csv(const std::string& text) {
  const auto rows = detail_csv::parse(text, "n,p");
  Eigen::VectorXd pops(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 2)
      throw std::invalid_argument("populations csv: expected 2 columns");
    if (std::lround(detail_csv::num(rows[i][0])) != static_cast<long>(i))
      throw std::invalid_argument("populations csv: n column must be 0,1,2,...");
    pops[static_cast<int>(i)] = detail_csv::num(rows[i][1]);
  }
  return pops;
}

inline std::string qtable_to_csv(const QTable& t) {
  std::string out = "p,k,q\n";
  for (int r = 0; r < t.rows(); ++r) {
    const int p = r - t.count_n;
    for (int k = 0; k <= t.kmax(); ++k) {
      out += std::to_string(p);
      out += ',';
      out += std::to_string(k);
      out += ',';
      out += fmt17(t.values(r, k));
      out += '\n';
    }
  }
  return out;
}

inline QTable qtable_from_csv(const std::string& text) {
  const auto rows = detail_csv::parse(text, "p,k,q");
  if (rows.empty()) throw std::invalid_argument("qtable csv: no data rows");
  long pmin = 0, pmax = 0, kmax = 0;
  bool first = true;
  for (const auto& r : rows) {
    if (r.size() != 3) throw std::invalid_argument("qtable csv: expected 3 columns");
    const long p = std::lround(detail_csv::num(r[0]));
    const long k = std::lround(detail_csv::num(r[1]));
    if (first) {
      pmin = pmax = p;
      first = false;
    }
    pmin = std::min(pmin, p);
    pmax = std::max(pmax, p);
    kmax = std::max(kmax, k);
  }
  if (pmin != -(pmax + 1))
    throw std::invalid_argument("qtable csv: point index must run -N..N-1");
  const int count_n = static_cast<int>(pmax + 1);
  QTable t;
  t.count_n = count_n;
  t.values = Eigen::MatrixXd::Constant(2 * count_n, kmax + 1, -1.0);
  for (const auto& r : rows) {
    const long p = std::lround(detail_csv::num(r[0]));
    const long k = std::lround(detail_csv::num(r[1]));
    t.values(static_cast<int>(p + count_n), static_cast<int>(k)) =
        detail_csv::num(r[2]);
  }
  if ((t.values.array() < 0.0).any())
    throw std::invalid_argument("qtable csv: missing (p,k) entries");
  return t;
}

inline std::string wigner_to_csv(const WignerField& f) {
  std::string out = "re_alpha,im_alpha,w\n";
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    out += fmt17(f.points[i].real());
    out += ',';
    out += fmt17(f.points[i].imag());
    out += ',';
    out += fmt17(f.values[i]);
    out += '\n';
  }
  return out;
}

inline std::string stats_to_csv(const EnsembleStats& s) {
  std::string out =
      "t,mean_dtheta_sq,se,re_phase,im_phase,se_phase,amp_diff,se_amp\n";
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    out += fmt17(s.times[i]);
    out += ',';
    out += fmt17(s.mean_dtheta_sq[i]);
    out += ',';
    out += fmt17(s.se_dtheta_sq[i]);
    out += ',';
    out += fmt17(s.mean_phase_factor[i].real());
    out += ',';
    out += fmt17(s.mean_phase_factor[i].imag());
    out += ',';
    out += fmt17(s.se_phase[i]);
    out += ',';
    out += fmt17(s.mean_amp_diffusion[i]);
    out += ',';
    out += fmt17(s.se_amp[i]);
    out += '\n';
  }
  return out;
}

// ---- files & digests ----

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// FNV-1a 64-bit digest, hex-encoded; enough to pin outputs in a manifest.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

}  // namespace io
}  // namespace motional
