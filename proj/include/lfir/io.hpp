#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "estimators.hpp"
#include "realization.hpp"

namespace lfir {

using nlohmann::json;

// 17 significant digits round-trip any double exactly.
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

namespace detail {

inline json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline MatrixXd matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array()) throw ParseError(name + ": expected an array of rows");
  const std::size_t nrows = j.size();
  if (nrows == 0) return MatrixXd(0, 0);
  if (!j[0].is_array()) throw ParseError(name + ": rows must be arrays");
  const std::size_t ncols = j[0].size();
  MatrixXd m(nrows, ncols);
  for (std::size_t i = 0; i < nrows; ++i) {
    if (!j[i].is_array() || j[i].size() != ncols)
      throw ParseError(name + ": ragged rows");
    for (std::size_t k = 0; k < ncols; ++k) {
      if (!j[i][k].is_number()) throw ParseError(name + ": non-numeric entry");
      m(i, k) = j[i][k].get<double>();
    }
  }
  if (!m.allFinite()) throw ParseError(name + ": non-finite entry");
  return m;
}

inline json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path + " for reading");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_json_file(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
  if (!f.good()) throw IoError("write to " + path + " failed");
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline double parse_csv_double(const std::string& field, const std::string& path, long line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != field.size() || field.empty()) {
    std::ostringstream os;
    os << path << ":" << line_no << ": cannot parse \"" << field << "\" as a number";
    throw ParseError(os.str());
  }
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << path << ":" << line_no << ": non-finite value \"" << field << "\"";
    throw ParseError(os.str());
  }
  return v;
}

}  // namespace detail

inline void save_model_json(const std::string& path, const StateSpaceModel& mod) {
  json j;
  j["A"] = detail::matrix_to_json(mod.A);
  j["B"] = detail::matrix_to_json(mod.B);
  j["Bw"] = detail::matrix_to_json(mod.Bw);
  j["C"] = detail::matrix_to_json(mod.C);
  j["D"] = detail::matrix_to_json(mod.D);
  detail::save_json_file(path, j);
}

// Bw defaults to B and D to zero when the file omits them.
inline StateSpaceModel load_model_json(const std::string& path) {
  const json j = detail::load_json_file(path);
  for (const char* key : {"A", "B", "C"})
    if (!j.contains(key)) throw ParseError(path + ": missing key \"" + key + "\"");
  const MatrixXd a = detail::matrix_from_json(j["A"], "A");
  const MatrixXd b = detail::matrix_from_json(j["B"], "B");
  const MatrixXd c = detail::matrix_from_json(j["C"], "C");
  const MatrixXd bw = j.contains("Bw") ? detail::matrix_from_json(j["Bw"], "Bw") : b;
  const MatrixXd d =
      j.contains("D") ? detail::matrix_from_json(j["D"], "D") : MatrixXd::Zero(c.rows(), b.cols());
  try {
    return make_state_space(a, b, bw, c, d);
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_controller_json(const std::string& path, const Controller& ctrl) {
  json j;
  if (std::holds_alternative<ZeroController>(ctrl)) {
    j["type"] = "zero";
  } else if (const auto* sf = std::get_if<LinearStateFeedback>(&ctrl)) {
    j["type"] = "state_feedback";
    j["K"] = detail::matrix_to_json(sf->K);
  } else {
    const auto& of = std::get<LinearOutputFeedback>(ctrl);
    j["type"] = "output_feedback";
    j["Ac"] = detail::matrix_to_json(of.Ac);
    j["Bc"] = detail::matrix_to_json(of.Bc);
    j["Cc"] = detail::matrix_to_json(of.Cc);
  }
  detail::save_json_file(path, j);
}

inline Controller load_controller_json(const std::string& path) {
  const json j = detail::load_json_file(path);
  if (!j.contains("type") || !j["type"].is_string())
    throw ParseError(path + ": missing controller \"type\"");
  const std::string type = j["type"].get<std::string>();
  if (type == "zero") return ZeroController{};
  if (type == "state_feedback") {
    if (!j.contains("K")) throw ParseError(path + ": state_feedback needs \"K\"");
    return LinearStateFeedback{detail::matrix_from_json(j["K"], "K")};
  }
  if (type == "output_feedback") {
    for (const char* key : {"Ac", "Bc", "Cc"})
      if (!j.contains(key)) throw ParseError(path + ": output_feedback needs \"" + key + "\"");
    return LinearOutputFeedback{detail::matrix_from_json(j["Ac"], "Ac"),
                                detail::matrix_from_json(j["Bc"], "Bc"),
                                detail::matrix_from_json(j["Cc"], "Cc")};
  }
  throw ParseError(path + ": unknown controller type \"" + type + "\"");
}

// Columns: k, then the signal groups in canonical order. u and y are
// mandatory; c, f, w, v, x are written when the trajectory carries them.
inline void save_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  const long len = traj.length();
  struct Group {
    const char* name;
    const MatrixXd* data;
  };
  const std::vector<Group> groups = {{"u", &traj.u}, {"y", &traj.y}, {"c", &traj.c},
                                     {"f", &traj.f}, {"w", &traj.w}, {"v", &traj.v},
                                     {"x", &traj.x}};
  f << "k";
  for (const Group& g : groups) {
    if (g.data->cols() != len) continue;
    for (Eigen::Index i = 0; i < g.data->rows(); ++i) f << "," << g.name << "_" << (i + 1);
  }
  f << "\n";
  for (long k = 0; k < len; ++k) {
    f << k;
    for (const Group& g : groups) {
      if (g.data->cols() != len) continue;
      for (Eigen::Index i = 0; i < g.data->rows(); ++i)
        f << "," << format_double((*g.data)(i, k));
    }
    f << "\n";
  }
  if (!f.good()) throw IoError("write to " + path + " failed");
}

inline Trajectory load_trajectory_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path + " for reading");
  std::string line;
  if (!std::getline(f, line)) throw ParseError(path + ": empty file");
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.empty() || header[0] != "k")
    throw ParseError(path + ":1: first column must be \"k\"");

  const std::vector<std::string> canon = {"u", "y", "c", "f", "w", "v", "x"};
  std::map<std::string, int> counts;
  std::size_t canon_pos = 0;
  for (std::size_t i = 1; i < header.size(); ++i) {
    const std::string& tok = header[i];
    const std::size_t us = tok.rfind('_');
    if (us == std::string::npos || us == 0)
      throw ParseError(path + ":1: malformed column name \"" + tok + "\"");
    const std::string name = tok.substr(0, us);
    int idx = 0;
    try {
      idx = std::stoi(tok.substr(us + 1));
    } catch (const std::exception&) {
      throw ParseError(path + ":1: malformed column index in \"" + tok + "\"");
    }
    while (canon_pos < canon.size() && canon[canon_pos] != name) {
      if (counts.count(canon[canon_pos]) == 0) counts[canon[canon_pos]] = 0;
      ++canon_pos;
    }
    if (canon_pos >= canon.size())
      throw ParseError(path + ":1: unknown or out-of-order column group \"" + name + "\"");
    if (idx != counts[name] + 1) {
      std::ostringstream os;
      os << path << ":1: column \"" << tok << "\" breaks the contiguous 1-based numbering";
      throw ParseError(os.str());
    }
    counts[name] = idx;
  }
  if (counts["u"] < 1 || counts["y"] < 1)
    throw ParseError(path + ":1: u and y column groups are mandatory");
  for (const char* name : {"c", "f"})
    if (counts.count(name) && counts[name] > 0 && counts[name] != counts["u"])
      throw ParseError(path + ":1: group " + std::string(name) +
                       " must have as many columns as u");
  if (counts.count("v") && counts["v"] > 0 && counts["v"] != counts["y"])
    throw ParseError(path + ":1: group v must have as many columns as y");

  std::vector<std::vector<double>> table;
  long line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      std::ostringstream os;
      os << path << ":" << line_no << ": expected " << header.size() << " fields, got "
         << fields.size();
      throw ParseError(os.str());
    }
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i)
      row[i] = detail::parse_csv_double(fields[i], path, line_no);
    const long expected_k = static_cast<long>(table.size());
    if (row[0] != static_cast<double>(expected_k)) {
      std::ostringstream os;
      os << path << ":" << line_no << ": k = " << row[0] << ", expected " << expected_k;
      throw ParseError(os.str());
    }
    table.push_back(std::move(row));
  }
  const long len = static_cast<long>(table.size());
  if (len == 0) throw ParseError(path + ": no data rows");

  Trajectory traj;
  std::size_t col = 1;
  auto take = [&](const std::string& name) {
    const int rows = counts.count(name) ? counts[name] : 0;
    if (rows == 0) return MatrixXd();
    MatrixXd m(rows, len);
    for (int i = 0; i < rows; ++i)
      for (long k = 0; k < len; ++k) m(i, k) = table[k][col + i];
    col += rows;
    return m;
  };
  traj.u = take("u");
  traj.y = take("y");
  traj.c = take("c");
  traj.f = take("f");
  traj.w = take("w");
  traj.v = take("v");
  traj.x = take("x");
  return traj;
}

// One row per coefficient entry: lag_index,out_row,in_col,value with
// out_row and in_col 1-based and lags ascending from -d to r.
inline void save_estimates_csv(const std::string& path, const LaurentBlock& blk) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "lag_index,out_row,in_col,value\n";
  for (int lag = -blk.d; lag <= blk.r; ++lag) {
    const MatrixXd& h = blk.coeff(lag);
    for (Eigen::Index i = 0; i < h.rows(); ++i)
      for (Eigen::Index j = 0; j < h.cols(); ++j)
        f << lag << "," << (i + 1) << "," << (j + 1) << "," << format_double(h(i, j)) << "\n";
  }
  if (!f.good()) throw IoError("write to " + path + " failed");
}

inline LaurentBlock load_estimates_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open " + path + " for reading");
  std::string line;
  if (!std::getline(f, line)) throw ParseError(path + ": empty file");
  if (line != "lag_index,out_row,in_col,value")
    throw ParseError(path + ":1: expected header lag_index,out_row,in_col,value");
  struct Entry {
    int lag, row, col;
    double value;
  };
  std::vector<Entry> entries;
  int min_lag = 0, max_lag = 0, max_row = 0, max_col = 0;
  long line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != 4) {
      std::ostringstream os;
      os << path << ":" << line_no << ": expected 4 fields, got " << fields.size();
      throw ParseError(os.str());
    }
    Entry e;
    const double lag = detail::parse_csv_double(fields[0], path, line_no);
    const double row = detail::parse_csv_double(fields[1], path, line_no);
    const double col = detail::parse_csv_double(fields[2], path, line_no);
    e.value = detail::parse_csv_double(fields[3], path, line_no);
    e.lag = static_cast<int>(lag);
    e.row = static_cast<int>(row);
    e.col = static_cast<int>(col);
    if (lag != e.lag || row != e.row || col != e.col || e.row < 1 || e.col < 1) {
      std::ostringstream os;
      os << path << ":" << line_no << ": indices must be integers with 1-based rows and columns";
      throw ParseError(os.str());
    }
    min_lag = std::min(min_lag, e.lag);
    max_lag = std::max(max_lag, e.lag);
    max_row = std::max(max_row, e.row);
    max_col = std::max(max_col, e.col);
    entries.push_back(e);
  }
  if (entries.empty()) throw ParseError(path + ": no coefficient rows");

  LaurentBlock blk;
  blk.d = -min_lag;
  blk.r = max_lag;
  blk.coeffs.assign(static_cast<std::size_t>(blk.mu()), MatrixXd::Zero(max_row, max_col));
  std::vector<std::vector<bool>> seen(static_cast<std::size_t>(blk.mu()),
                                      std::vector<bool>(max_row * max_col, false));
  for (const Entry& e : entries) {
    const std::size_t li = static_cast<std::size_t>(e.lag + blk.d);
    const std::size_t flat = static_cast<std::size_t>((e.row - 1) * max_col + (e.col - 1));
    if (seen[li][flat]) {
      std::ostringstream os;
      os << path << ": duplicate entry for lag " << e.lag << ", row " << e.row << ", col "
         << e.col;
      throw ParseError(os.str());
    }
    seen[li][flat] = true;
    blk.coeffs[li](e.row - 1, e.col - 1) = e.value;
  }
  for (const auto& lag_seen : seen)
    for (bool s : lag_seen)
      if (!s) throw ParseError(path + ": incomplete coefficient grid");
  return blk;
}

inline void save_diagnostics_json(const std::string& path, const InstrumentDiagnostics& diag) {
  json j;
  j["s_iv"] = diag.s_iv;
  j["lambda_iv"] = diag.lambda_iv;
  if (diag.has_triangularity)
    j["triangularity_residual"] = diag.triangularity_residual;
  else
    j["triangularity_residual"] = nullptr;
  j["N"] = diag.N;
  j["r"] = diag.r;
  j["d"] = diag.d;
  detail::save_json_file(path, j);
}

inline BoundInputs load_bound_inputs_json(const std::string& path) {
  const json j = detail::load_json_file(path);
  BoundInputs in;
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ParseError(path + ": \"" + key + "\" must be a number");
    return j[key].get<double>();
  };
  in.rho_s = num("rho_s", in.rho_s);
  in.rho_u_inv = num("rho_u_inv", in.rho_u_inv);
  in.phi_s = num("phi_s", in.phi_s);
  in.phi_u = num("phi_u", in.phi_u);
  in.stable_tail_norm = num("stable_tail_norm", in.stable_tail_norm);
  in.unstable_tail_norm = num("unstable_tail_norm", in.unstable_tail_norm);
  in.gamma_norm = num("gamma_norm", in.gamma_norm);
  in.gamma_cl_s = num("gamma_cl_s", in.gamma_cl_s);
  in.gamma_cl_u = num("gamma_cl_u", in.gamma_cl_u);
  in.sigma_c = num("sigma_c", in.sigma_c);
  in.sigma_w = num("sigma_w", in.sigma_w);
  in.sigma_v = num("sigma_v", in.sigma_v);
  in.m = static_cast<int>(num("m", in.m));
  in.p = static_cast<int>(num("p", in.p));
  in.l = static_cast<int>(num("l", in.l));
  in.r = static_cast<int>(num("r", in.r));
  in.d = static_cast<int>(num("d", in.d));
  in.N = num("N", in.N);
  in.delta = num("delta", in.delta);
  in.lambda_iv = num("lambda_iv", in.lambda_iv);
  if (j.contains("constants")) {
    const json& c = j["constants"];
    auto cnum = [&](const char* key, double fallback) {
      return c.contains(key) ? c[key].get<double>() : fallback;
    };
    in.constants.c0 = cnum("c0", in.constants.c0);
    in.constants.c_w = cnum("c_w", in.constants.c_w);
    in.constants.c_v = cnum("c_v", in.constants.c_v);
    in.constants.c_es = cnum("c_es", in.constants.c_es);
    in.constants.c_eu = cnum("c_eu", in.constants.c_eu);
    in.constants.kappa_w = cnum("kappa_w", in.constants.kappa_w);
  }
  return in;
}

inline void save_bound_report_json(const std::string& path, const BoundReport& rep,
                                   const BoundInputs& in) {
  json j;
  j["chi_N"] = rep.chi_N;
  j["N_w"] = rep.N_w;
  j["M_v"] = rep.M_v;
  j["D_s"] = rep.D_s;
  j["M_s"] = rep.M_s;
  j["D_u"] = rep.D_u;
  j["M_u"] = rep.M_u;
  j["sigma_e_s"] = rep.sigma_e_s;
  j["sigma_e_u"] = rep.sigma_e_u;
  j["beta_w"] = rep.beta_w;
  j["beta_v"] = rep.beta_v;
  j["beta_es"] = rep.beta_es;
  j["beta_eu"] = rep.beta_eu;
  j["bound_value"] = rep.bound_value;
  j["sample_size_required"] = rep.sample_size_required;
  j["sample_size_satisfied"] = rep.sample_size_satisfied;
  j["constants"] = {{"c0", rep.constants.c0},     {"c_w", rep.constants.c_w},
                    {"c_v", rep.constants.c_v},   {"c_es", rep.constants.c_es},
                    {"c_eu", rep.constants.c_eu}, {"kappa_w", rep.constants.kappa_w}};
  j["inputs"] = {{"rho_s", in.rho_s},
                 {"rho_u_inv", in.rho_u_inv},
                 {"sigma_c", in.sigma_c},
                 {"sigma_w", in.sigma_w},
                 {"sigma_v", in.sigma_v},
                 {"m", in.m},
                 {"p", in.p},
                 {"l", in.l},
                 {"r", in.r},
                 {"d", in.d},
                 {"N", in.N},
                 {"delta", in.delta},
                 {"lambda_iv", in.lambda_iv}};
  detail::save_json_file(path, j);
}

inline void save_frequency_csv(const std::string& path, const std::vector<double>& omegas,
                               const std::vector<MatrixXcd>& responses) {
  if (omegas.size() != responses.size())
    throw DimensionError("save_frequency_csv: omega and response counts differ");
  std::ofstream f(path);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "omega,out,in,mag_db,phase_deg\n";
  constexpr double kRadToDeg = 180.0 / 3.14159265358979323846;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    const MatrixXcd& g = responses[k];
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) {
        const double mag = std::max(std::abs(g(i, j)), 1e-300);
        f << format_double(omegas[k]) << "," << (i + 1) << "," << (j + 1) << ","
          << format_double(20.0 * std::log10(mag)) << ","
          << format_double(std::arg(g(i, j)) * kRadToDeg) << "\n";
      }
  }
  if (!f.good()) throw IoError("write to " + path + " failed");
}

inline void save_reconstructed_json(const std::string& path, const ReconstructedModel& rec) {
  json j;
  j["parts"]["stable"] = {{"A", detail::matrix_to_json(rec.stable.A)},
                          {"B", detail::matrix_to_json(rec.stable.B)},
                          {"C", detail::matrix_to_json(rec.stable.C)},
                          {"order", rec.stable.order}};
  j["parts"]["unstable"] = {{"A", detail::matrix_to_json(rec.unstable.A)},
                            {"B", detail::matrix_to_json(rec.unstable.B)},
                            {"C", detail::matrix_to_json(rec.unstable.C)},
                            {"order", rec.unstable.order}};
  j["parts"]["D"] = detail::matrix_to_json(rec.D);
  j["r_used"] = rec.r_used;
  j["d_used"] = rec.d_used;
  detail::save_json_file(path, j);
}

inline ReconstructedModel load_reconstructed_json(const std::string& path) {
  const json j = detail::load_json_file(path);
  if (!j.contains("parts")) throw ParseError(path + ": missing \"parts\"");
  const json& parts = j["parts"];
  for (const char* key : {"stable", "unstable", "D"})
    if (!parts.contains(key)) throw ParseError(path + ": parts needs \"" + key + "\"");
  ReconstructedModel rec;
  auto load_part = [&](const json& pj, const char* name) {
    Realization real;
    for (const char* key : {"A", "B", "C"})
      if (!pj.contains(key))
        throw ParseError(path + ": part " + name + " needs \"" + key + "\"");
    real.A = detail::matrix_from_json(pj["A"], std::string(name) + ".A");
    real.B = detail::matrix_from_json(pj["B"], std::string(name) + ".B");
    real.C = detail::matrix_from_json(pj["C"], std::string(name) + ".C");
    real.order = static_cast<int>(real.A.rows());
    return real;
  };
  rec.stable = load_part(parts["stable"], "stable");
  rec.unstable = load_part(parts["unstable"], "unstable");
  rec.D = detail::matrix_from_json(parts["D"], "D");
  rec.r_used = j.value("r_used", 0);
  rec.d_used = j.value("d_used", 0);
  return rec;
}

}  // namespace lfir
